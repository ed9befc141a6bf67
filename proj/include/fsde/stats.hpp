#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fsde {

/// Streaming central moments up to order four; merge() is the pairwise
/// (Chan / Pebay) update, so any fixed merge tree gives a fixed result.
class Moments {
public:
  void push(double x) noexcept;
  void merge(const Moments& other) noexcept;

  double count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance (n-1 denominator).
  double variance() const noexcept;
  double skewness() const noexcept;
  double excess_kurtosis() const noexcept;
  /// Standard error of the mean.
  double mean_se() const noexcept;
  /// Standard error of the sample variance, from the fourth central moment.
  double variance_se() const noexcept;

private:
  double n_ = 0.0, mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

/// Least-squares line through (log x, log y).
struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double residual_norm = 0.0;
  double slope_se = 0.0;
  std::size_t points = 0;
};

/// Fits log y = intercept + slope * log x over points with x in [lo, hi].
/// Needs at least three points and strictly positive x, y.
ExponentFit fit_power_law(std::span<const double> x, std::span<const double> y, double lo, double hi);

struct DistributionTest {
  std::string statistic_name;
  double statistic = 0.0;
  double p_value = 0.0;
  std::string reference;
};

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// Asymptotic Kolmogorov distribution tail with Stephens' small-sample correction.
double kolmogorov_pvalue(double d, std::size_t n);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
DistributionTest ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                         std::string reference);

/// Pearson chi-square goodness of fit; bins with expected count < 5 are pooled.
DistributionTest chi_square_test(std::span<const double> observed, std::span<const double> expected,
                                 std::size_t fitted_parameters = 0);

/// Jarque-Bera normality test (mean and variance estimated from the data).
DistributionTest jarque_bera(std::span<const double> samples);

}  // namespace fsde
