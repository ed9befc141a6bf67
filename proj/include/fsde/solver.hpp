#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsde/fbm.hpp"
#include "fsde/potential.hpp"
#include "fsde/stoch_integral.hpp"

namespace fsde {

/// Law of x0: a point mass, or a Gaussian drawn independently of the noise.
struct InitialLaw {
  double mean = 0.0;
  double sd = 0.0;

  static InitialLaw point(double x0) { return {x0, 0.0}; }
  static InitialLaw gaussian(double mean, double sd);
  bool is_point() const noexcept { return sd == 0.0; }
  /// Deterministic draw for one path: substream 1 of the path's stream.
  double draw(RngSpec rng) const;
};

struct ModelSpec {
  ModelSpec(double alpha, double hurst, Potential potential, InitialLaw x0);

  double alpha;
  double hurst;
  Potential potential;
  InitialLaw x0;
  bool fdt;  // alpha == 2 - 2H within 1e-12
};

struct SolutionPath {
  TimeGrid grid;
  std::vector<double> values;
  double alpha;
  double hurst;
  std::string potential;
  RngSpec noise;
  std::string method;
};

/// Product-trapezoidal PECE scheme for x = x0 - g_alpha * V'(x) + G.
/// The G path is rebuilt from `fbm` unless supplied.
SolutionPath solve_volterra(const ModelSpec& model, const FbmPath& fbm);
SolutionPath solve_volterra(const ModelSpec& model, const GPath& g, double x0);

struct PicardResult {
  SolutionPath path;
  /// deltas[i] = max_n |x^(i+1) - x^(i)|, starting from x^(0) = x0.
  std::vector<double> deltas;
};

PicardResult solve_picard(const ModelSpec& model, const GPath& g, double x0, double tol, int max_iter);

/// max_n |x_n - (x0 - (g_alpha * V'(x))(t_n) + G_n)| with the full trapezoidal weights.
double volterra_residual(const ModelSpec& model, const SolutionPath& path, const GPath& g);

struct UniquenessReport {
  bool bit_identical = false;
  double max_divergence = 0.0;    // max_n |x_n - y_n|
  double max_bound_ratio = 0.0;   // max_n |x_n - y_n| / (eps E_alpha(L t_n^alpha))
  std::vector<double> divergence; // |x_n - y_n| per node
};

/// Solves twice from identical inputs and once from x0 + eps on the same noise.
UniquenessReport uniqueness_probe(const ModelSpec& model, const FbmPath& fbm, double x0, double eps);

}  // namespace fsde
