#include "fsde/linear_oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fsde/stoch_integral.hpp"
#include "loglog_table.hpp"

namespace fsde {

namespace {

constexpr double kRelTol = 1e-11;

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Acc {
  double value = 0.0, error = 0.0;
  Acc& operator+=(const Acc& o) {
    value += o.value;
    error += o.error;
    return *this;
  }
};

// int_0^b f, f possibly singular at 0.
template <class F>
Acc near_zero(const F& f, double b) {
  if (!(b > 0.0)) return {};
  thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  double err = 0.0, l1 = 0.0;
  const double v = ts.integrate(
      [&](double x) {
        if (!(x > 0.0)) return 0.0;
        return f(x);
      },
      0.0, b, kRelTol, &err, &l1);
  return {v, err * l1 + 1e-16 * l1};
}

// int_a^b f over a geometric range, integrated in u = log s.
template <class F>
Acc log_range(const F& f, double a, double b) {
  if (!(b > a)) return {};
  double err = 0.0, l1 = 0.0;
  const double v = GK::integrate(
      [&](double u) {
        const double s = std::exp(u);
        return f(s) * s;
      },
      std::log(a), std::log(b), 18, kRelTol, &err, &l1);
  return {v, err + 1e-16 * l1};
}

}  // namespace

LinearModel::LinearModel(double k_, double alpha_, double hurst_, double x0_)
    : k(k_), alpha(alpha_), hurst(hurst_), x0(x0_) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("linear model needs k > 0");
  if (!std::isfinite(x0)) throw DomainError("linear model needs a finite x0");
  check_model_orders(alpha, hurst);
}

bool LinearModel::fdt() const noexcept { return std::fabs(alpha - (2.0 - 2.0 * hurst)) <= 1e-12; }

ModelSpec LinearModel::spec() const { return {alpha, hurst, Potential::linear(k), InitialLaw::point(x0)}; }

// ---------------------------------------------------------------------------

namespace {

std::vector<double> relaxation_on_grid(const LinearModel& m, const TimeGrid& grid, const MlSettings& ml) {
  std::vector<double> e(grid.size());
  for (std::size_t j = 0; j < e.size(); ++j) e[j] = e_alpha_k(FracOrder(m.alpha), m.k, grid.t(j), ml);
  return e;
}

std::vector<double> exact_kernel(const LinearModel& m, const TimeGrid& grid, const std::vector<double>& e) {
  const double scale = c_H(m.alpha, m.hurst) / (m.k * grid.dt());
  std::vector<double> ker(grid.n_steps());
  for (std::size_t i = 0; i < ker.size(); ++i) ker[i] = scale * (e[i] - e[i + 1]);
  return ker;
}

}  // namespace

LinearPathOperator::LinearPathOperator(const LinearModel& model, const TimeGrid& grid, const MlSettings& ml)
    : model_(model), grid_(grid), relax_(relaxation_on_grid(model, grid, ml)), conv_(exact_kernel(model, grid, relax_)) {}

SolutionPath LinearPathOperator::apply(const FbmPath& fbm) const { return apply(fbm, model_.x0); }

SolutionPath LinearPathOperator::apply(const FbmPath& fbm, double x0) const {
  if (!(fbm.grid == grid_)) throw ContractError("LinearPathOperator: fBm path lives on a different grid");
  if (fbm.hurst != model_.hurst) throw ContractError("LinearPathOperator: fBm path has a different Hurst index");
  const auto inc = fbm.increments();
  auto x = conv_.apply(inc);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] += x0 * relax_[n];
  return {grid_, std::move(x), model_.alpha, model_.hurst, Potential::linear(model_.k).name(), fbm.source,
          "exact-linear"};
}

SolutionPath exact_path(const LinearModel& model, const FbmPath& fbm) {
  return LinearPathOperator(model, fbm.grid).apply(fbm);
}

// ---------------------------------------------------------------------------

struct LinearOracle::Tables {
  double a0;     // relaxation time scale k^(-1/alpha)
  double c;      // 1 / (k^2 Gamma(1-alpha))
  double p;      // 2H - 2
  double decay;  // alpha + 2 - 2H: log-variable decay rate of every outer integrand
  detail::LogLogTable r, J, Psi, h;

  double upper(double a) const { return a * std::exp(std::min(600.0, 40.0 / decay)); }

  Acc J_direct(double s) const {
    Acc acc;
    const double half = 0.5 * s;
    auto left = [&](double v) { return r(v) * std::pow(s - v, p); };
    if (half <= a0) {
      acc += near_zero(left, half);
    } else {
      acc += near_zero(left, a0);
      acc += log_range(left, a0, half);
    }
    acc += near_zero([&](double w) { return r(s - w) * std::pow(w, p); }, half);
    return acc;
  }

  Acc right_wing(double s) const {
    // int_0^inf r(s + w) w^(2H-2) dw
    const double w0 = std::max(s, a0);
    auto f = [&](double w) { return r(s + w) * std::pow(w, p); };
    Acc acc = near_zero(f, w0);
    acc += log_range(f, w0, upper(w0));
    return acc;
  }

  // int_lo^inf f for an integrand with the common algebraic tail
  template <class F>
  Acc outer(const F& f, double lo, double hi) const {
    Acc acc;
    if (lo < a0) {
      const double mid = std::min(a0, hi);
      acc += lo == 0.0 ? near_zero(f, mid) : near_zero([&](double x) { return f(lo + x); }, mid - lo);
      lo = mid;
    }
    if (hi > lo) acc += log_range(f, lo, hi);
    return acc;
  }
};

LinearOracle::LinearOracle(const LinearModel& model, const MlSettings& ml) : model_(model), ml_(ml) {}
LinearOracle::~LinearOracle() = default;

double LinearOracle::e(double t) const { return e_alpha_k(FracOrder(model_.alpha), model_.k, t, ml_); }
double LinearOracle::r(double t) const { return r_func(FracOrder(model_.alpha), model_.k, t, ml_); }

const LinearOracle::Tables& LinearOracle::tables() const {
  std::call_once(once_, [this] {
    auto t = std::make_unique<Tables>();
    const double a = model_.alpha, H = model_.hurst;
    t->a0 = std::pow(model_.k, -1.0 / a);
    t->c = 1.0 / (model_.k * model_.k * boost::math::tgamma(1.0 - a));
    t->p = 2.0 * H - 2.0;
    t->decay = a + 2.0 - 2.0 * H;
    const double lo = 1e-10 * t->a0, hi = 1e10 * t->a0;
    t->r = detail::LogLogTable([&](double s) { return r(s); }, lo, hi, 40);
    t->J = detail::LogLogTable([&](double s) { return t->J_direct(s).value; }, lo, hi, 30);
    t->Psi = detail::LogLogTable([&](double s) { return t->J(s) + t->right_wing(s).value; }, lo, hi, 30);
    const Tables& tb = *t;
    auto h_at = [&tb](double tau) {
      return tb.c * tb.outer([&](double u) { return tb.r(u) * tb.Psi(u + tau); }, 0.0, tb.upper(tb.a0)).value;
    };
    t->h = detail::LogLogTable(h_at, 1e-8 * t->a0, 1e5 * t->a0, 30);
    tables_ = std::move(t);
  });
  return *tables_;
}

QuadValue LinearOracle::covariance_quadrature(double tau) const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("covariance lag must be non-negative");
  const Tables& t = tables();
  const Acc acc = t.outer([&](double u) { return t.r(u) * t.Psi(u + tau); }, 0.0, t.upper(t.a0 + tau));
  // tail bound beyond the last panel: r ~ u^(-alpha-1), Psi ~ u^(2H-2)
  const double cut = t.upper(t.a0 + tau);
  const double tail = t.r(cut) * t.Psi(cut + tau) * cut / t.decay;
  const double err = t.c * (acc.error + tail);
  if (err > 1e-6 * std::max(1.0, t.c * acc.value))
    throw AccuracyError("stationary covariance quadrature missed its tolerance", err);
  return {t.c * acc.value, err};
}

QuadValue LinearOracle::covariance(double tau) const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("covariance lag must be non-negative");
  if (model_.fdt()) return {e(tau) / model_.k, 1e-12};
  return covariance_quadrature(tau);
}

QuadValue LinearOracle::sigma_t(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("sigma_t needs t >= 0");
  if (t == 0.0) return {0.0, 0.0};
  const Tables& tb = tables();
  const Acc acc = tb.outer([&](double s) { return tb.r(s) * tb.J(s); }, 0.0, t);
  return {2.0 * tb.c * acc.value, 2.0 * tb.c * acc.error};
}

QuadValue LinearOracle::sigma_tail(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("sigma_tail needs t > 0");
  const Tables& tb = tables();
  const Acc acc = tb.outer([&](double s) { return tb.r(s) * tb.J(s); }, t, tb.upper(std::max(t, tb.a0)));
  return {2.0 * tb.c * acc.value, 2.0 * tb.c * acc.error};
}

QuadValue LinearOracle::sigma_limit() const {
  const Tables& tb = tables();
  const Acc acc = tb.outer([&](double s) { return tb.r(s) * tb.J(s); }, 0.0, tb.upper(tb.a0));
  return {2.0 * tb.c * acc.value, 2.0 * tb.c * acc.error};
}

double LinearOracle::spectral_normalization(SpectralNormalization which) const {
  const double H = model_.hurst;
  const double g = which == SpectralNormalization::gamma_2H_minus_1 ? boost::math::tgamma(2.0 * H - 1.0)
                                                                     : boost::math::tgamma(2.0 * H + 1.0);
  return 2.0 * g * std::sin(H * std::numbers::pi) / boost::math::tgamma(1.0 - model_.alpha);
}

double LinearOracle::spectral_density(double omega, SpectralNormalization which) const {
  if (omega == 0.0) throw DomainError("spectral density is singular at omega = 0");
  if (!std::isfinite(omega)) throw DomainError("spectral density needs a finite frequency");
  const double w = std::fabs(omega);
  const double a = model_.alpha;
  const double wa = std::pow(w, a);
  const double re = model_.k + wa * std::cos(0.5 * std::numbers::pi * a);
  const double im = wa * std::sin(0.5 * std::numbers::pi * a);
  return spectral_normalization(which) * std::pow(w, 1.0 - 2.0 * model_.hurst) / (re * re + im * im);
}

double LinearOracle::damped_transform(double omega, double eps) const {
  if (!(eps > 0.0)) throw DomainError("damping parameter must be positive");
  const Tables& tb = tables();
  auto f = [&](double tau) { return std::cos(omega * tau) * tb.h(tau) * std::exp(-eps * tau * tau); };
  const double cut = std::sqrt(40.0 / eps);
  const double panel = std::min(tb.a0, std::numbers::pi / (2.0 * std::max(std::fabs(omega), 1e-12)));
  Acc acc = near_zero(f, panel);
  for (double a = panel; a < cut; a += panel) {
    double err = 0.0;
    acc.value += GK::integrate(f, a, std::min(a + panel, cut), 10, kRelTol, &err);
    acc.error += err;
  }
  return 2.0 * acc.value;
}

QuadValue LinearOracle::regularized_transform(double omega, double eps0) const {
  const double i1 = damped_transform(omega, eps0);
  const double i2 = damped_transform(omega, 0.5 * eps0);
  const double i4 = damped_transform(omega, 0.25 * eps0);
  // I(eps) = F + a eps + b eps^2
  const double quadratic = (8.0 * i4 - 6.0 * i2 + i1) / 3.0;
  const double linear = 2.0 * i4 - i2;
  return {quadratic, std::fabs(quadratic - linear)};
}

QuadValue LinearOracle::inverse_transform(double tau) const {
  if (!(tau > 0.0)) throw DomainError("inverse transform is evaluated at tau > 0");
  boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-10);
  auto [v, err] = integrator.integrate([&](double w) { return w > 0.0 ? spectral_density(w) : 0.0; }, tau);
  return {v / std::numbers::pi, err / std::numbers::pi};
}

// ---------------------------------------------------------------------------

double stationary_covariance_h(double tau, const LinearModel& model) {
  return LinearOracle(model).covariance(tau).value;
}

double spectral_density(double omega, const LinearModel& model) {
  return LinearOracle(model).spectral_density(omega);
}

double sigma_t(double t, const LinearModel& model) { return LinearOracle(model).sigma_t(t).value; }

ExponentFit convergence_rate_fit(const LinearModel& model, double t_lo, double t_hi, int points) {
  if (!(t_lo > 0.0 && t_hi > t_lo) || points < 3) throw DomainError("convergence_rate_fit: bad window");
  const LinearOracle oracle(model);
  std::vector<double> ts(points), tail(points);
  for (int i = 0; i < points; ++i) {
    ts[i] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (points - 1));
    tail[i] = oracle.sigma_tail(ts[i]).value;
  }
  return fit_power_law(ts, tail, t_lo, t_hi);
}

}  // namespace fsde
