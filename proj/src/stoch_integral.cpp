#include "fsde/stoch_integral.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fsde/errors.hpp"

namespace fsde {

namespace {

std::vector<double> g_kernel(std::size_t cells, double alpha) {
  // a_m = m^alpha - (m-1)^alpha, m = 1..cells
  std::vector<double> k(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double m = static_cast<double>(i + 1);
    k[i] = i == 0 ? 1.0 : -std::pow(m, alpha) * std::expm1(alpha * std::log1p(-1.0 / m));
  }
  return k;
}

void check_ensemble(std::span<const GPath> ensemble, std::size_t min_paths) {
  if (ensemble.size() < min_paths) throw ContractError("ensemble has too few paths");
  for (const auto& p : ensemble)
    if (!(p.grid == ensemble.front().grid)) throw ContractError("ensemble paths use different grids");
}

}  // namespace

void check_model_orders(double alpha, double hurst) {
  if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("model requires H in (1/2, 1)");
  if (!(alpha > 1.0 - hurst && alpha < 1.0)) throw DomainError("model requires alpha in (1-H, 1)");
}

double c_H(double alpha, double hurst) {
  check_model_orders(alpha, hurst);
  return 1.0 / std::sqrt(hurst * (2.0 * hurst - 1.0) * boost::math::tgamma(1.0 - alpha));
}

double beta_H(double hurst) {
  if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("beta_H requires H in (1/2, 1)");
  return std::sqrt(2.0 / boost::math::tgamma(3.0 - 2.0 * hurst));
}

GOperator::GOperator(const TimeGrid& grid, double alpha, double hurst)
    : grid_(grid),
      alpha_(alpha),
      hurst_(hurst),
      prefactor_(c_H(alpha, hurst) / boost::math::tgamma(alpha) * std::pow(grid.dt(), alpha - 1.0) / alpha),
      conv_(g_kernel(grid.n_steps(), alpha)) {}

std::vector<double> GOperator::apply_increments(std::span<const double> increments) const {
  if (increments.size() != grid_.n_steps()) throw ContractError("GOperator: increment count does not match grid");
  auto out = conv_.apply(increments);
  for (double& v : out) v *= prefactor_;
  return out;
}

GPath GOperator::apply(const FbmPath& fbm) const {
  if (!(fbm.grid == grid_)) throw ContractError("GOperator: fBm path lives on a different grid");
  if (fbm.hurst != hurst_) throw ContractError("GOperator: fBm path has a different Hurst index");
  const auto inc = fbm.increments();
  return {grid_, alpha_, hurst_, apply_increments(inc), fbm.source};
}

GPath sample_G(const FbmPath& fbm, double alpha) { return GOperator(fbm.grid, alpha, fbm.hurst).apply(fbm); }

double phi_covariance(double t1, double t2, double alpha, double hurst, const PhiSettings& settings) {
  check_model_orders(alpha, hurst);
  if (!(t1 >= 0.0) || !(t2 >= 0.0)) throw DomainError("phi_covariance: times must be non-negative");
  if (!(settings.quad_tol > 0.0)) throw DomainError("PhiSettings: quad_tol must be positive");
  if (t1 > t2) std::swap(t1, t2);
  if (t1 == 0.0) return 0.0;

  const double a = 2.0 * hurst - 2.0 + alpha;  // > -1
  const double pref = boost::math::beta(2.0 * hurst - 1.0, alpha) /
                      (boost::math::beta(alpha, 1.0 - alpha) * boost::math::tgamma(alpha));
  const double d = t2 - t1;
  if (d == 0.0) return pref * 2.0 * std::pow(t1, a + alpha) / (a + alpha);

  // With u = t1 - r the integrand is u^(alpha-1) (d+u)^a + (d+u)^(alpha-1) u^a.
  // Each singular power is absorbed by w = u^(alpha) and w = u^(1+a) respectively.
  auto term1 = [&](double w) { return std::pow(d + std::pow(w, 1.0 / alpha), a) / alpha; };
  auto term2 = [&](double w) { return std::pow(d + std::pow(w, 1.0 / (1.0 + a)), alpha - 1.0) / (1.0 + a); };

  boost::math::quadrature::tanh_sinh<double> ts(static_cast<std::size_t>(settings.max_subdivisions));
  const double rel = std::max(1e-15, settings.quad_tol * 1e-3);
  double e1 = 0.0, e2 = 0.0, l1 = 0.0, l2 = 0.0;
  const double i1 = ts.integrate(term1, 0.0, std::pow(t1, alpha), rel, &e1, &l1);
  const double i2 = ts.integrate(term2, 0.0, std::pow(t1, 1.0 + a), rel, &e2, &l2);
  const double err = pref * (e1 * l1 + e2 * l2);
  if (err > settings.quad_tol)
    throw AccuracyError("phi_covariance: quadrature tolerance not met", err);
  return pref * (i1 + i2);
}

ExponentFit holder_exponent_estimate(std::span<const GPath> ensemble, std::size_t lag_lo_cells,
                                     std::size_t lag_hi_cells) {
  check_ensemble(ensemble, 1000);
  const TimeGrid& grid = ensemble.front().grid;
  const std::size_t n = grid.n_steps();
  const std::size_t base = n / 2;
  if (lag_lo_cells == 0 || lag_hi_cells < lag_lo_cells || base + lag_hi_cells > n)
    throw ContractError("holder_exponent_estimate: lag range does not fit the grid");
  std::vector<double> lags, msd;
  for (std::size_t lag = lag_lo_cells; lag <= lag_hi_cells; lag *= 2) {
    // average over paths and over base times in the second half
    Moments m;
    const std::size_t stride = std::max<std::size_t>(1, lag / 2);
    for (const auto& p : ensemble) {
      Moments per_path;
      for (std::size_t s = base; s + lag <= n; s += stride) {
        const double inc = p.values[s + lag] - p.values[s];
        per_path.push(inc * inc);
      }
      m.push(per_path.mean());
    }
    lags.push_back(grid.dt() * static_cast<double>(lag));
    msd.push_back(m.mean());
  }
  return fit_power_law(lags, msd, lags.front(), lags.back());
}

ExponentFit subdiffusion_variance(std::span<const GPath> ensemble, double t_lo, double t_hi) {
  check_ensemble(ensemble, 2);
  const TimeGrid& grid = ensemble.front().grid;
  std::vector<double> ts, vars;
  for (std::size_t j = 1; j <= grid.n_steps(); ++j) {
    const double t = grid.t(j);
    if (t < t_lo || t > t_hi) continue;
    Moments m;
    for (const auto& p : ensemble) m.push(p.values[j]);
    ts.push_back(t);
    vars.push_back(m.variance());
  }
  return fit_power_law(ts, vars, t_lo, t_hi);
}

}  // namespace fsde
