#include "fsde/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsde/errors.hpp"

namespace fsde {

Potential Potential::zero() { return {Kind::zero, 0.0, 0.0, 0.0, 0.0}; }

Potential Potential::linear(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("linear potential needs k > 0");
  return {Kind::linear, k, 0.0, 0.0, k};
}

Potential Potential::clipped_double_well(double a, double b, double clip_radius) {
  if (!(a > 0.0) || !(b >= 0.0) || !(clip_radius > 0.0))
    throw DomainError("clipped double well needs a > 0, b >= 0, clip_radius > 0");
  // sup |V''| on [-R, R]: V'' = 3 a x^2 - b
  const double lip = std::max(3.0 * a * clip_radius * clip_radius - b, b);
  return {Kind::clipped_double_well, a, b, clip_radius, lip};
}

std::string Potential::name() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::linear: os << "linear{k=" << p0_ << "}"; break;
    case Kind::clipped_double_well:
      os << "clipped-double-well{a=" << p0_ << ",b=" << p1_ << ",clip_radius=" << p2_ << "}";
      break;
  }
  return os.str();
}

double Potential::gradient(double x) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::linear: return p0_ * x;
    case Kind::clipped_double_well: {
      const double c = std::clamp(x, -p2_, p2_);
      return p0_ * c * c * c - p1_ * c;
    }
  }
  return 0.0;
}

double Potential::curvature(double x) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::linear: return p0_;
    case Kind::clipped_double_well:
      return std::fabs(x) > p2_ ? 0.0 : 3.0 * p0_ * x * x - p1_;
  }
  return 0.0;
}

double Potential::value(double x) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::linear: return 0.5 * p0_ * x * x;
    case Kind::clipped_double_well: {
      auto inner = [&](double y) { return 0.25 * p0_ * y * y * y * y - 0.5 * p1_ * y * y; };
      if (std::fabs(x) <= p2_) return inner(x);
      const double edge = p0_ * p2_ * p2_ * p2_ - p1_ * p2_;  // V'(R)
      return inner(p2_) + edge * (std::fabs(x) - p2_);
    }
  }
  return 0.0;
}

bool Potential::normalizable() const noexcept {
  switch (kind_) {
    case Kind::zero: return false;
    case Kind::linear: return true;
    case Kind::clipped_double_well: return p0_ * p2_ * p2_ > p1_;
  }
  return false;
}

}  // namespace fsde
