#include "fsde/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "fsde/errors.hpp"

namespace fsde {

void Moments::push(double x) noexcept {
  Moments one;
  one.n_ = 1.0;
  one.mean_ = x;
  merge(one);
}

void Moments::merge(const Moments& o) noexcept {
  if (o.n_ == 0.0) return;
  if (n_ == 0.0) {
    *this = o;
    return;
  }
  const double n = n_ + o.n_;
  const double d = o.mean_ - mean_;
  const double d_n = d / n;
  const double d2 = d * d_n * n_ * o.n_;  // d^2 n_a n_b / n
  const double m2 = m2_ + o.m2_ + d2;
  const double m3 = m3_ + o.m3_ + d2 * d_n * (n_ - o.n_) + 3.0 * d_n * (n_ * o.m2_ - o.n_ * m2_);
  const double m4 = m4_ + o.m4_ + d2 * d_n * d_n * (n_ * n_ - n_ * o.n_ + o.n_ * o.n_) +
                    6.0 * d_n * d_n * (n_ * n_ * o.m2_ + o.n_ * o.n_ * m2_) +
                    4.0 * d_n * (n_ * o.m3_ - o.n_ * m3_);
  mean_ += d_n * o.n_;
  n_ = n;
  m2_ = m2;
  m3_ = m3;
  m4_ = m4;
}

double Moments::variance() const noexcept { return n_ > 1.0 ? m2_ / (n_ - 1.0) : 0.0; }

double Moments::skewness() const noexcept {
  if (n_ < 2.0 || m2_ == 0.0) return 0.0;
  return std::sqrt(n_) * m3_ / std::pow(m2_, 1.5);
}

double Moments::excess_kurtosis() const noexcept {
  if (n_ < 2.0 || m2_ == 0.0) return 0.0;
  return n_ * m4_ / (m2_ * m2_) - 3.0;
}

double Moments::mean_se() const noexcept { return n_ > 1.0 ? std::sqrt(variance() / n_) : 0.0; }

double Moments::variance_se() const noexcept {
  if (n_ < 4.0) return 0.0;
  const double mu2 = m2_ / n_;
  const double mu4 = m4_ / n_;
  const double v = (mu4 - (n_ - 3.0) / (n_ - 1.0) * mu2 * mu2) / n_;
  return std::sqrt(std::max(v, 0.0));
}

ExponentFit fit_power_law(std::span<const double> x, std::span<const double> y, double lo, double hi) {
  if (x.size() != y.size()) throw ContractError("fit_power_law: x and y differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_power_law: non-positive value in window");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const std::size_t n = lx.size();
  if (n < 3) throw ContractError("fit_power_law: fewer than three points in window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ContractError("fit_power_law: degenerate window");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  fit.window_lo = lo;
  fit.window_hi = hi;
  fit.points = n;
  return fit;
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double kolmogorov_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

DistributionTest ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                         std::string reference) {
  if (samples.empty()) throw ContractError("ks_test: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {"KS", d, kolmogorov_pvalue(d, samples.size()), std::move(reference)};
}

DistributionTest chi_square_test(std::span<const double> observed, std::span<const double> expected,
                                 std::size_t fitted_parameters) {
  if (observed.size() != expected.size()) throw ContractError("chi_square_test: size mismatch");
  double chi2 = 0.0;
  std::size_t bins = 0;
  double pool_o = 0.0, pool_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    pool_o += observed[i];
    pool_e += expected[i];
    if (pool_e >= 5.0) {
      chi2 += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
      ++bins;
      pool_o = pool_e = 0.0;
    }
  }
  if (pool_e > 0.0) {
    // fold the remainder into the last bin's statistic as its own cell
    chi2 += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
    ++bins;
  }
  if (bins <= fitted_parameters + 1) throw ContractError("chi_square_test: too few populated bins");
  const double dof = static_cast<double>(bins - 1 - fitted_parameters);
  return {"chi-square", chi2, boost::math::gamma_q(0.5 * dof, 0.5 * chi2), "binned reference density"};
}

DistributionTest jarque_bera(std::span<const double> samples) {
  if (samples.size() < 8) throw ContractError("jarque_bera: need at least 8 samples");
  Moments m;
  for (double x : samples) m.push(x);
  const double n = m.count();
  const double s = m.skewness();
  const double k = m.excess_kurtosis();
  const double jb = n / 6.0 * (s * s + 0.25 * k * k);
  return {"Jarque-Bera", jb, std::exp(-0.5 * jb), "normal (fitted mean and variance)"};
}

}  // namespace fsde
