#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fsde/fbm.hpp"
#include "fsde/stats.hpp"
#include "fsde/toeplitz.hpp"

namespace fsde {

/// Checks H in (1/2, 1) and alpha in (1-H, 1); throws DomainError otherwise.
void check_model_orders(double alpha, double hurst);

/// C_H = 1 / sqrt(H (2H-1) Gamma(1-alpha)), alpha in (1-H, 1).
double c_H(double alpha, double hurst);

/// beta_H = sqrt(2 / Gamma(3-2H)).
double beta_H(double hurst);

/// Sampled G(t) = (C_H/Gamma(alpha)) int_0^t (t-s)^(alpha-1) dB_H(s).
struct GPath {
  TimeGrid grid;
  double alpha;
  double hurst;
  std::vector<double> values;
  RngSpec source;
};

/// Maps fBm increments to G on a fixed grid. The kernel is integrated exactly
/// over each cell against the cell-average of dB_H; the resulting Toeplitz sum
/// is evaluated by FFT for long grids.
class GOperator {
public:
  GOperator(const TimeGrid& grid, double alpha, double hurst);

  const TimeGrid& grid() const noexcept { return grid_; }
  double alpha() const noexcept { return alpha_; }
  double hurst() const noexcept { return hurst_; }

  GPath apply(const FbmPath& fbm) const;
  /// G at every node from the n_steps increments of a path.
  std::vector<double> apply_increments(std::span<const double> increments) const;

private:
  TimeGrid grid_;
  double alpha_, hurst_;
  double prefactor_;
  CausalConvolver conv_;
};

GPath sample_G(const FbmPath& fbm, double alpha);

struct PhiSettings {
  double quad_tol = 1e-10;
  int max_subdivisions = 12;
};

/// Exact covariance E[G(t1) G(t2)].
double phi_covariance(double t1, double t2, double alpha, double hurst, const PhiSettings& settings = {});

/// Slope of log E|G(t+l) - G(t)|^2 against log l over dyadic lags of
/// lag_lo..lag_hi cells, base times t in the second half of the grid.
ExponentFit holder_exponent_estimate(std::span<const GPath> ensemble, std::size_t lag_lo_cells = 4,
                                     std::size_t lag_hi_cells = 64);

/// Slope of log var G(t) against log t over t in [t_lo, t_hi].
ExponentFit subdiffusion_variance(std::span<const GPath> ensemble, double t_lo, double t_hi);

}  // namespace fsde
