#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fsde/grid.hpp"

namespace fsde {

/// g_gamma(t) = theta(t) t^(gamma-1) / Gamma(gamma).
double g_gamma(double t, double gamma);

/// Product-trapezoidal weights for int_0^{t_n} (t_n - s)^(gamma-1) f(s) ds.
///
/// The weights integrate the kernel exactly against the piecewise-linear
/// interpolant of f. Interior weights depend on n - j only, so only O(N)
/// numbers are stored and rows are generated on demand.
class KernelWeights {
public:
  KernelWeights(const TimeGrid& grid, double gamma);

  const TimeGrid& grid() const noexcept { return grid_; }
  double gamma() const noexcept { return gamma_; }

  double weight(std::size_t n, std::size_t j) const;
  /// Row n, entries j = 0..n.
  std::vector<double> row(std::size_t n) const;
  /// sum_j w_{n,j} f_j, using f[0..n].
  double apply_row(std::size_t n, std::span<const double> f) const;
  /// Exact row sum t_n^gamma / gamma.
  double row_sum(std::size_t n) const;

private:
  TimeGrid grid_;
  double gamma_;
  double scale_;                // h^gamma / (gamma (gamma + 1))
  std::vector<double> first_;   // j = 0 column, by n
  std::vector<double> inner_;   // interior, by m = n - j
};

/// Discrete Riemann-Liouville integral (g_gamma * f)(t_n); output[0] = 0.
std::vector<double> fractional_integral(std::span<const double> samples, const TimeGrid& grid, double gamma);

/// L1 discretization of the Caputo derivative of order alpha in (0, 1); output[0] = 0.
std::vector<double> caputo_derivative(std::span<const double> samples, const TimeGrid& grid, double alpha);

/// max_n |I^g2(I^g1 f) - I^(g1+g2) f|(t_n).
double semigroup_check(std::span<const double> samples, double gamma1, double gamma2, const TimeGrid& grid);

}  // namespace fsde
