#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsde/grid.hpp"
#include "fsde/linear_oracle.hpp"
#include "fsde/markov_embedding.hpp"
#include "fsde/potential.hpp"
#include "fsde/solver.hpp"
#include "fsde/stats.hpp"

namespace fsde {

enum class Method { volterra, picard, exact_linear, embedded };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct EnsembleOptions {
  std::size_t workers = 1;
  std::size_t chunk_size = 32;
  /// Stationary lags (time units) for the late-window covariance estimate.
  std::vector<double> lags{0.0, 0.5, 1.0, 2.0, 5.0};
  /// Fraction of the path, counted from the end, used for lag covariances.
  double stationary_fraction = 1.0 / 3.0;
  double picard_tol = 1e-10;
  int picard_max_iter = 60;
  /// Mode set for the embedded method; fitted from the model's alpha if absent.
  std::optional<ModeSet> modes;
  int embedded_modes = 40;
  double embedded_t_min = 1e-2, embedded_t_max = 1e2;
  /// Keep the first `keep_paths` full paths (by path index).
  std::size_t keep_paths = 0;
};

struct LagCovariance {
  double lag = 0.0;        // actual lag, a whole number of cells
  std::size_t cells = 0;
  double value = 0.0;
  double se = 0.0;
};

struct EnsembleResult {
  std::size_t n_paths = 0;
  TimeGrid grid{1.0, 1};
  std::string method;
  std::uint64_t seed = 0;
  std::vector<double> mean, mean_se;
  std::vector<double> variance, variance_se;
  std::vector<LagCovariance> lag_covariances;
  std::vector<double> terminal;  // by path index
  std::vector<std::vector<double>> kept_paths;
};

/// Runs n_paths independent solutions; path p uses RngSpec{seed, p}. Paths are
/// grouped in fixed chunks and reduced along a fixed pairwise tree, so the
/// result does not depend on the worker count. Failed paths are collected and
/// reported together in an EnsembleError.
EnsembleResult run_ensemble(const ModelSpec& model, Method method, std::size_t n_paths, const TimeGrid& grid,
                            std::uint64_t seed, const EnsembleOptions& options = {});

/// Same aggregation for externally produced paths (all on `grid`).
EnsembleResult aggregate_paths(const TimeGrid& grid, std::span<const std::vector<double>> paths,
                               const EnsembleOptions& options = {});

/// Slope of log variance against log t over [t_lo, t_hi].
ExponentFit msd_exponent(const EnsembleResult& result, double t_lo, double t_hi);

/// CDF of the density proportional to exp(-V/temperature), normalized by quadrature.
class GibbsCdf {
 public:
  GibbsCdf(const Potential& potential, double temperature = 1.0);
  double operator()(double x) const;
  double quantile(double p) const;
  double variance() const noexcept { return variance_; }

 private:
  std::vector<double> x_, cdf_;
  double variance_ = 0.0;
};

struct GibbsReport {
  DistributionTest gibbs;      // KS against the Gibbs law
  DistributionTest normality;  // Jarque-Bera
  DistributionTest fitted_normal;  // KS against N(sample mean, sample variance)
  double variance = 0.0, variance_se = 0.0;
  double expected_variance = 0.0;
  bool variance_mismatch = false;  // |variance - expected| > 4 SE
  bool pass = false;               // gibbs.p_value > 0.01
  bool gaussian_pass = false;      // normality and fitted_normal both p > 0.01
};

/// Terminal samples against exp(-V/temperature); N(0, T/k) in closed form for linear V.
/// Throws DomainError if exp(-V) is not normalizable.
GibbsReport gibbs_test(const EnsembleResult& result, const Potential& potential, double temperature = 1.0);

/// Chi-square of the terminal histogram against exp(-V) on `bins` equiprobable bins.
DistributionTest gibbs_chi_square(std::span<const double> samples, const Potential& potential, std::size_t bins = 20,
                                  double temperature = 1.0);

struct CovarianceRow {
  double lag = 0.0;
  double measured = 0.0, se = 0.0;
  double expected = 0.0, expected_error = 0.0;
  bool pass = false;  // within 4 SE (plus the quadrature error)
};

struct CovarianceReport {
  std::vector<CovarianceRow> rows;
  bool monotone = false;  // nonincreasing within 4 combined SE
  bool pass = false;
};

CovarianceReport covariance_test(const EnsembleResult& result, const LinearOracle& oracle);

struct FdtRow {
  double lag = 0.0;
  double measured = 0.0, se = 0.0;
  double fitted = 0.0;  // sum c_i exp(-lambda_i lag)
  double target = 0.0;  // power kernel, NaN at lag 0
  bool mc_pass = false;   // measured vs fitted within 4 SE
  bool fit_pass = false;  // fitted vs target within the recorded fit error
};

struct FdtReport {
  std::vector<FdtRow> rows;
  bool pass = false;
};

/// Autocovariance of the free bath noise R = sum z_i, n_paths stationary starts.
FdtReport fdt_noise_check(const ModeSet& modes, std::span<const double> lags, std::size_t n_paths, double dt,
                          std::uint64_t seed, std::size_t workers = 1);

struct EquipartitionReport {
  double mass = 1.0;
  double var_v = 0.0, var_v_se = 0.0;
  double var_q = 0.0, var_q_se = 0.0;
  double expected_v = 0.0;  // 1/m
  bool pass = false;        // |var_v - 1/m| <= rel_band / m
};

/// Terminal velocity and position spread of n_paths GLE runs started at rest at q0.
EquipartitionReport gle_equipartition(double m, const Potential& potential, const ModeSet& modes,
                                      const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                      std::size_t workers = 1, double rel_band = 0.05, double q0 = 0.0);

/// One line of a verification summary.
struct Claim {
  std::string claim;
  double expected = 0.0;
  double measured = 0.0;
  double band = 0.0;
  bool pass = false;
};

std::string claims_to_json(std::span<const Claim> claims);

}  // namespace fsde
