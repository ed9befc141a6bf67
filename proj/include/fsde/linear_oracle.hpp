#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "fsde/fbm.hpp"
#include "fsde/mlf.hpp"
#include "fsde/solver.hpp"
#include "fsde/stats.hpp"
#include "fsde/toeplitz.hpp"

namespace fsde {

/// V = k x^2 / 2 with orders (alpha, H) and a point initial value.
struct LinearModel {
  LinearModel(double k, double alpha, double hurst, double x0 = 0.0);

  double k, alpha, hurst, x0;
  bool fdt() const noexcept;
  ModelSpec spec() const;
};

struct QuadValue {
  double value;
  double abs_error;
};

/// Exact linear-case solution operator on one grid:
/// x_n = x0 e(t_n) - (C_H/k) sum_j (1/h) int_cell_j e'(t_n - s) ds dB_j.
class LinearPathOperator {
public:
  LinearPathOperator(const LinearModel& model, const TimeGrid& grid, const MlSettings& ml = {});

  const TimeGrid& grid() const noexcept { return grid_; }
  /// e_{alpha,k}(t_n) at every node.
  const std::vector<double>& relaxation() const noexcept { return relax_; }
  SolutionPath apply(const FbmPath& fbm) const;
  SolutionPath apply(const FbmPath& fbm, double x0) const;

private:
  LinearModel model_;
  TimeGrid grid_;
  std::vector<double> relax_;
  CausalConvolver conv_;
};

SolutionPath exact_path(const LinearModel& model, const FbmPath& fbm);

enum class SpectralNormalization { gamma_2H_minus_1, gamma_2H_plus_1 };

/// Stationary law of the linear model. Quadrature-based quantities share
/// tabulated r, J and Psi, built on first use (thread-safe).
class LinearOracle {
public:
  explicit LinearOracle(const LinearModel& model, const MlSettings& ml = {});
  ~LinearOracle();
  LinearOracle(const LinearOracle&) = delete;
  LinearOracle& operator=(const LinearOracle&) = delete;

  const LinearModel& model() const noexcept { return model_; }

  double e(double t) const;
  double r(double t) const;

  /// h(tau): (1/k) e(tau) when alpha = 2 - 2H, otherwise the double integral.
  QuadValue covariance(double tau) const;
  /// The double-integral route, for any alpha.
  QuadValue covariance_quadrature(double tau) const;

  /// Sigma(t) and its tail Sigma - Sigma(t), each as one outer quadrature over r J.
  QuadValue sigma_t(double t) const;
  QuadValue sigma_tail(double t) const;
  QuadValue sigma_limit() const;

  double spectral_normalization(SpectralNormalization which = SpectralNormalization::gamma_2H_minus_1) const;
  double spectral_density(double omega,
                          SpectralNormalization which = SpectralNormalization::gamma_2H_minus_1) const;

  /// 2 int_0^inf cos(omega tau) h(tau) exp(-eps tau^2) dtau from the quadrature h.
  double damped_transform(double omega, double eps) const;
  /// Richardson extrapolation of damped_transform to eps -> 0 over eps0, eps0/2, eps0/4.
  QuadValue regularized_transform(double omega, double eps0 = 1e-2) const;

  /// (1/pi) int_0^inf S(omega) cos(omega tau) domega.
  QuadValue inverse_transform(double tau) const;

private:
  struct Tables;
  const Tables& tables() const;

  LinearModel model_;
  MlSettings ml_;
  mutable std::unique_ptr<Tables> tables_;
  mutable std::once_flag once_;
};

double stationary_covariance_h(double tau, const LinearModel& model);
double spectral_density(double omega, const LinearModel& model);
double sigma_t(double t, const LinearModel& model);

/// log-log slope of Sigma - Sigma(t) over `points` log-spaced t in [t_lo, t_hi].
ExponentFit convergence_rate_fit(const LinearModel& model, double t_lo, double t_hi, int points = 16);

}  // namespace fsde
