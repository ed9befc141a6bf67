#pragma once

#include <optional>

#include "fsde/errors.hpp"

namespace fsde {

/// Fractional order alpha in (0, 1].
class FracOrder {
public:
  explicit FracOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("fractional order must lie in (0, 1]");
  }
  double value() const noexcept { return alpha_; }
  operator double() const noexcept { return alpha_; }

private:
  double alpha_;
};

struct MlSettings {
  /// Relative accuracy target. A branch is accepted only if its own error
  /// estimate is below series_tol * |value|.
  double series_tol = 1e-12;
  int max_terms = 4000;
  /// |z| above which the asymptotic tail is tried instead of the power series.
  /// Unset: the point where both branches' error estimates cross for this alpha.
  std::optional<double> crossover;

  void validate() const;
};

enum class MlBranch { exact, series, tail, integral };

struct MlValue {
  double value;
  double error_estimate;  // absolute
  MlBranch branch;
  int terms = 0;
};

/// E_alpha(z) for real z <= 0, or 0 < z <= crossover.
double mittag_leffler(FracOrder alpha, double z, const MlSettings& settings = {});
MlValue mittag_leffler_detail(FracOrder alpha, double z, const MlSettings& settings = {});

/// e_{alpha,k}(t) = E_alpha(-k t^alpha).
double e_alpha_k(FracOrder alpha, double k, double t, const MlSettings& settings = {});

/// d/dt e_{alpha,k}(t) = -k t^(alpha-1) E_{alpha,alpha}(-k t^alpha), t > 0.
double e_alpha_k_dot(FracOrder alpha, double k, double t, const MlSettings& settings = {});

/// r(t) = -d/dt e_{alpha,k}(t) >= 0.
double r_func(FracOrder alpha, double k, double t, const MlSettings& settings = {});

/// Default series/tail switch point |z| for E_alpha.
double default_ml_crossover(double alpha);

namespace ml {

/// Raw branches of E_{alpha,beta}(z), exposed for cross-checks. Each returns
/// its own error estimate; none of them throws on poor accuracy except the
/// series when max_terms is exhausted.
MlValue series(double alpha, double beta, double z, int max_terms = 4000);
MlValue tail(double alpha, double beta, double x);
/// Laplace-integral (spectral) representation, valid for beta in {1, alpha}, x > 0.
MlValue integral(double alpha, double beta, double x, double rel_tol);

/// E_{alpha,beta}(-x) with automatic branch choice. Only beta in {1, alpha}.
MlValue evaluate(double alpha, double beta, double z, const MlSettings& settings);

}  // namespace ml

}  // namespace fsde
