#include "fsde/frackernel.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "fsde/errors.hpp"

namespace fsde {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("kernel order must be positive");
}

// (n-1)^p - (n-1-gamma) n^gamma with p = gamma + 1.
double first_column(double n, double gamma) {
  const double p = gamma + 1.0;
  if (n < 4.0) return std::pow(n - 1.0, p) - (n - 1.0 - gamma) * std::pow(n, gamma);
  // n^p sum_{k>=2} C(p,k) (-1/n)^k
  double c = p * (p - 1.0) / 2.0;
  double pw = 1.0 / (n * n);
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    const double term = c * pw;
    sum += term;
    if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
    c *= (p - k) / (k + 1.0);
    pw *= -1.0 / n;
  }
  return std::pow(n, p) * sum;
}

// (m+1)^p - 2 m^p + (m-1)^p.
double second_difference(double m, double gamma) {
  const double p = gamma + 1.0;
  if (m < 4.0) return std::pow(m + 1.0, p) - 2.0 * std::pow(m, p) + std::pow(m - 1.0, p);
  // 2 m^p sum_{k>=1} C(p,2k) m^(-2k)
  double c = p * (p - 1.0) / 2.0;  // C(p, 2)
  const double inv2 = 1.0 / (m * m);
  double pw = inv2;
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = c * pw;
    sum += term;
    if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
    c *= (p - 2.0 * k) * (p - 2.0 * k - 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
    pw *= inv2;
  }
  return 2.0 * std::pow(m, p) * sum;
}

// (m+1)^a - m^a, a in (0,1), without cancellation.
double power_step(double m, double a) {
  if (m == 0.0) return 1.0;
  return std::pow(m, a) * std::expm1(a * std::log1p(1.0 / m));
}

}  // namespace

double g_gamma(double t, double gamma) {
  check_gamma(gamma);
  if (t <= 0.0) return 0.0;
  return std::exp((gamma - 1.0) * std::log(t) - boost::math::lgamma(gamma));
}

KernelWeights::KernelWeights(const TimeGrid& grid, double gamma) : grid_(grid), gamma_(gamma) {
  check_gamma(gamma);
  scale_ = std::pow(grid.dt(), gamma) / (gamma * (gamma + 1.0));
  const std::size_t n = grid.n_steps();
  first_.resize(n + 1, 0.0);
  inner_.resize(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    first_[i] = first_column(static_cast<double>(i), gamma);
    inner_[i] = second_difference(static_cast<double>(i), gamma);
  }
}

double KernelWeights::weight(std::size_t n, std::size_t j) const {
  if (n > grid_.n_steps() || j > n) throw ContractError("KernelWeights: index out of range");
  if (n == 0) return 0.0;
  if (j == n) return scale_;
  if (j == 0) return scale_ * first_[n];
  return scale_ * inner_[n - j];
}

std::vector<double> KernelWeights::row(std::size_t n) const {
  std::vector<double> out(n + 1);
  for (std::size_t j = 0; j <= n; ++j) out[j] = weight(n, j);
  return out;
}

double KernelWeights::apply_row(std::size_t n, std::span<const double> f) const {
  if (n > grid_.n_steps() || f.size() < n + 1) throw ContractError("KernelWeights::apply_row: short input");
  if (n == 0) return 0.0;
  double acc = first_[n] * f[0] + f[n];
  for (std::size_t j = 1; j < n; ++j) acc += inner_[n - j] * f[j];
  return scale_ * acc;
}

double KernelWeights::row_sum(std::size_t n) const { return std::pow(grid_.t(n), gamma_) / gamma_; }

std::vector<double> fractional_integral(std::span<const double> samples, const TimeGrid& grid, double gamma) {
  if (samples.size() != grid.size()) throw ContractError("fractional_integral: samples do not match grid");
  const KernelWeights w(grid, gamma);
  const double inv_gamma = 1.0 / boost::math::tgamma(gamma);
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t n = 1; n < out.size(); ++n) out[n] = w.apply_row(n, samples) * inv_gamma;
  return out;
}

std::vector<double> caputo_derivative(std::span<const double> samples, const TimeGrid& grid, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("caputo_derivative: order must lie in (0, 1)");
  if (samples.size() != grid.size()) throw ContractError("caputo_derivative: samples do not match grid");
  const std::size_t n_steps = grid.n_steps();
  std::vector<double> b(n_steps);
  for (std::size_t m = 0; m < n_steps; ++m) b[m] = power_step(static_cast<double>(m), 1.0 - alpha);
  std::vector<double> diff(n_steps);
  for (std::size_t j = 0; j < n_steps; ++j) diff[j] = samples[j + 1] - samples[j];
  const double scale = std::pow(grid.dt(), -alpha) / boost::math::tgamma(2.0 - alpha);
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += b[n - j - 1] * diff[j];
    out[n] = scale * acc;
  }
  return out;
}

double semigroup_check(std::span<const double> samples, double gamma1, double gamma2, const TimeGrid& grid) {
  check_gamma(gamma1);
  check_gamma(gamma2);
  const auto inner = fractional_integral(samples, grid, gamma1);
  const auto nested = fractional_integral(inner, grid, gamma2);
  const auto direct = fractional_integral(samples, grid, gamma1 + gamma2);
  double dev = 0.0;
  for (std::size_t n = 0; n < direct.size(); ++n) dev = std::max(dev, std::fabs(nested[n] - direct[n]));
  return dev;
}

}  // namespace fsde
