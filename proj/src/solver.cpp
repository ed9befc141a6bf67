#include "fsde/solver.hpp"

#include <cmath>
#include <cstring>

#include <boost/math/special_functions/gamma.hpp>

#include "fsde/frackernel.hpp"
#include "fsde/mlf.hpp"

namespace fsde {

InitialLaw InitialLaw::gaussian(double mean, double sd) {
  if (!(sd >= 0.0) || !std::isfinite(sd) || !std::isfinite(mean))
    throw DomainError("initial law needs finite mean and sd >= 0");
  return {mean, sd};
}

double InitialLaw::draw(RngSpec rng) const {
  if (is_point()) return mean;
  Philox gen(rng, 1);
  return mean + sd * gen.normal();
}

ModelSpec::ModelSpec(double alpha_, double hurst_, Potential potential_, InitialLaw x0_)
    : alpha(alpha_), hurst(hurst_), potential(potential_), x0(x0_), fdt(std::fabs(alpha_ - (2.0 - 2.0 * hurst_)) <= 1e-12) {
  check_model_orders(alpha, hurst);
}

namespace {

void check_finite(double v, std::size_t n) {
  if (!std::isfinite(v)) throw DivergenceError("solution left the finite range", n);
}

void check_g(const ModelSpec& model, const GPath& g) {
  if (g.alpha != model.alpha || g.hurst != model.hurst)
    throw ContractError("G path was built for different (alpha, H)");
}

}  // namespace

SolutionPath solve_volterra(const ModelSpec& model, const FbmPath& fbm) {
  const GPath g = GOperator(fbm.grid, model.alpha, model.hurst).apply(fbm);
  return solve_volterra(model, g, model.x0.draw(fbm.source));
}

SolutionPath solve_volterra(const ModelSpec& model, const GPath& g, double x0) {
  check_g(model, g);
  const TimeGrid& grid = g.grid;
  const KernelWeights w(grid, model.alpha);
  const double inv_gamma = 1.0 / boost::math::tgamma(model.alpha);
  const double newest = w.weight(1, 1);  // w_{n,n} is the same for every n

  std::vector<double> x(grid.size()), f(grid.size());
  x[0] = x0;
  f[0] = model.potential.gradient(x0);
  for (std::size_t n = 1; n < x.size(); ++n) {
    // history: sum_{j<n} w_{n,j} f_j
    double hist = w.apply_row(n, f) - newest * f[n];  // f[n] is still zero here
    const double base = x0 + g.values[n];
    const double pred = base - inv_gamma * (hist + newest * f[n - 1]);
    check_finite(pred, n);
    x[n] = base - inv_gamma * (hist + newest * model.potential.gradient(pred));
    check_finite(x[n], n);
    f[n] = model.potential.gradient(x[n]);
  }
  return {grid, std::move(x), model.alpha, model.hurst, model.potential.name(), g.source, "volterra"};
}

PicardResult solve_picard(const ModelSpec& model, const GPath& g, double x0, double tol, int max_iter) {
  check_g(model, g);
  if (!(tol > 0.0) || max_iter < 1) throw DomainError("solve_picard needs tol > 0 and max_iter >= 1");
  if (!model.potential.lipschitz_bound()) throw DomainError("solve_picard needs a Lipschitz potential");
  const TimeGrid& grid = g.grid;
  std::vector<double> x(grid.size(), x0), f(grid.size());
  std::vector<double> deltas;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t n = 0; n < x.size(); ++n) f[n] = model.potential.gradient(x[n]);
    const auto integral = fractional_integral(f, grid, model.alpha);
    double delta = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double next = x0 - integral[n] + g.values[n];
      check_finite(next, n);
      delta = std::max(delta, std::fabs(next - x[n]));
      x[n] = next;
    }
    deltas.push_back(delta);
    if (delta <= tol)
      return {{grid, std::move(x), model.alpha, model.hurst, model.potential.name(), g.source, "picard"},
              std::move(deltas)};
  }
  throw ConvergenceError("Picard iteration did not reach tolerance", std::move(deltas));
}

double volterra_residual(const ModelSpec& model, const SolutionPath& path, const GPath& g) {
  check_g(model, g);
  if (!(path.grid == g.grid)) throw ContractError("volterra_residual: grids differ");
  std::vector<double> f(path.values.size());
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = model.potential.gradient(path.values[n]);
  const auto integral = fractional_integral(f, path.grid, model.alpha);
  double worst = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n)
    worst = std::max(worst, std::fabs(path.values[n] - (path.values[0] - integral[n] + g.values[n])));
  return worst;
}

UniquenessReport uniqueness_probe(const ModelSpec& model, const FbmPath& fbm, double x0, double eps) {
  const GPath g = GOperator(fbm.grid, model.alpha, model.hurst).apply(fbm);
  const auto a = solve_volterra(model, g, x0);
  const auto b = solve_volterra(model, g, x0);
  const auto c = solve_volterra(model, g, x0 + eps);
  UniquenessReport rep;
  rep.bit_identical = std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0;
  const double lip = model.potential.lipschitz_bound().value_or(0.0);
  rep.divergence.resize(a.values.size());
  for (std::size_t n = 0; n < a.values.size(); ++n) {
    const double d = std::fabs(a.values[n] - c.values[n]);
    rep.divergence[n] = d;
    rep.max_divergence = std::max(rep.max_divergence, d);
    if (eps != 0.0) {
      const double bound = std::fabs(eps) *
          mittag_leffler(FracOrder(model.alpha), lip * std::pow(fbm.grid.t(n), model.alpha));
      rep.max_bound_ratio = std::max(rep.max_bound_ratio, d / bound);
    }
  }
  return rep;
}

}  // namespace fsde
