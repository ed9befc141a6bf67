#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsde/grid.hpp"
#include "fsde/rng.hpp"

namespace fsde {

/// Hurst index H in (0, 1). Model-level code narrows this to (1/2, 1).
class HurstParam {
public:
  explicit HurstParam(double h) : h_(h) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("Hurst parameter must lie in (0, 1)");
  }
  double value() const noexcept { return h_; }
  operator double() const noexcept { return h_; }

private:
  double h_;
};

/// Sampled fractional Brownian motion on a uniform grid; values[0] == 0.
struct FbmPath {
  TimeGrid grid;
  double hurst;
  std::vector<double> values;
  RngSpec source;

  std::vector<double> increments() const;
};

/// E[B_H(s) B_H(t)] = (s^2H + t^2H - |t-s|^2H) / 2.
double fbm_covariance(double s, double t, HurstParam H);

/// Autocovariance of unit-spaced fractional Gaussian noise scaled to step dt.
double fgn_autocovariance(std::size_t lag, double dt, HurstParam H);

/// E[(B_H(h)/h) * (B_H(t+h1) - B_H(t))/h1], evaluated in closed form from the
/// fBm covariance. Tends to H(2H-1) t^(2H-2) as h, h1 -> 0.
double increment_noise_covariance(double t, double h, double h1, HurstParam H);

/// Exact generator: Cholesky factor of the increment Toeplitz covariance.
class CholeskyFbmGenerator {
public:
  CholeskyFbmGenerator(TimeGrid grid, HurstParam H);

  const TimeGrid& grid() const noexcept { return grid_; }
  double hurst() const noexcept { return hurst_; }
  const Eigen::MatrixXd& factor() const noexcept { return lower_; }

  FbmPath sample(RngSpec rng) const;
  /// Maps standard normals (one per cell) to a path; exposes the linear map for tests.
  std::vector<double> path_from_normals(const std::vector<double>& normals) const;

private:
  TimeGrid grid_;
  double hurst_;
  Eigen::MatrixXd lower_;
};

/// Circulant-embedding (Davies-Harte / Wood-Chan) generator, O(n log n) per path.
///
/// If the embedding has eigenvalues below -tolerance the generator falls back to
/// the Cholesky generator and records a warning.
class CirculantFbmGenerator {
public:
  CirculantFbmGenerator(TimeGrid grid, HurstParam H, double negative_tolerance = 1e-10);

  const TimeGrid& grid() const noexcept { return grid_; }
  double hurst() const noexcept { return hurst_; }
  bool fell_back() const noexcept { return fallback_ != nullptr; }
  const std::string& warning() const noexcept { return warning_; }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

  FbmPath sample(RngSpec rng) const;

private:
  TimeGrid grid_;
  double hurst_;
  std::vector<double> eigenvalues_;
  std::vector<double> amplitude_;
  std::shared_ptr<CholeskyFbmGenerator> fallback_;
  std::string warning_;
};

FbmPath sample_fbm_exact(const TimeGrid& grid, HurstParam H, RngSpec rng);
FbmPath sample_fbm_circulant(const TimeGrid& grid, HurstParam H, RngSpec rng);

/// Every `factor`-th sample of `path`, on the coarsened grid.
FbmPath subsample(const FbmPath& path, std::size_t factor);

}  // namespace fsde
