#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "fsde/errors.hpp"

namespace fsde::detail {

/// Cubic B-spline of log f against log t on [lo, hi], extended as a power law
/// with the end slopes outside. f must be positive on the range.
class LogLogTable {
public:
  LogLogTable() = default;

  LogLogTable(const std::function<double(double)>& f, double lo, double hi, int per_decade) {
    if (!(lo > 0.0 && hi > lo)) throw ContractError("LogLogTable: bad range");
    u_lo_ = std::log(lo);
    u_hi_ = std::log(hi);
    const int n = static_cast<int>(std::ceil((u_hi_ - u_lo_) / std::log(10.0) * per_decade)) + 1;
    step_ = (u_hi_ - u_lo_) / (n - 1);
    std::vector<double> lf(n);
    for (int i = 0; i < n; ++i) {
      const double v = f(std::exp(u_lo_ + i * step_));
      if (!(v > 0.0) || !std::isfinite(v)) throw NumericalError("LogLogTable: non-positive sample");
      lf[i] = std::log(v);
    }
    slope_lo_ = (lf[1] - lf[0]) / step_;
    slope_hi_ = (lf[n - 1] - lf[n - 2]) / step_;
    f_lo_ = lf.front();
    f_hi_ = lf.back();
    spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(lf.begin(), lf.end(), u_lo_, step_,
                                                                           slope_lo_, slope_hi_);
  }

  double operator()(double t) const {
    const double u = std::log(t);
    if (u <= u_lo_) return std::exp(f_lo_ + slope_lo_ * (u - u_lo_));
    if (u >= u_hi_) return std::exp(f_hi_ + slope_hi_ * (u - u_hi_));
    return std::exp(spline_(u));
  }

private:
  double u_lo_ = 0.0, u_hi_ = 0.0, step_ = 1.0;
  double slope_lo_ = 0.0, slope_hi_ = 0.0, f_lo_ = 0.0, f_hi_ = 0.0;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
};

}  // namespace fsde::detail
