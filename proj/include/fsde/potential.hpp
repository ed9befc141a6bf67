#pragma once

#include <optional>
#include <string>

namespace fsde {

/// Confining or force-free potential V with gradient V'.
class Potential {
public:
  enum class Kind { zero, linear, clipped_double_well };

  static Potential zero();
  /// V = k x^2 / 2.
  static Potential linear(double k);
  /// V' = a x^3 - b x for |x| <= clip_radius, frozen at the boundary value beyond it.
  static Potential clipped_double_well(double a, double b, double clip_radius);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;
  double value(double x) const;
  double gradient(double x) const;
  double curvature(double x) const;
  std::optional<double> lipschitz_bound() const noexcept { return lipschitz_; }

  double k() const noexcept { return p0_; }
  double a() const noexcept { return p0_; }
  double b() const noexcept { return p1_; }
  double clip_radius() const noexcept { return p2_; }

  /// exp(-V) is integrable.
  bool normalizable() const noexcept;

private:
  Potential(Kind kind, double p0, double p1, double p2, std::optional<double> lip)
      : kind_(kind), p0_(p0), p1_(p1), p2_(p2), lipschitz_(lip) {}

  Kind kind_;
  double p0_, p1_, p2_;
  std::optional<double> lipschitz_;
};

}  // namespace fsde
