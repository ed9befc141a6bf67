#include <doctest.h>

#include <cmath>

#include "fsde/errors.hpp"
#include "fsde/linear_oracle.hpp"
#include "fsde/mlf.hpp"
#include "fsde/solver.hpp"

using namespace fsde;

namespace {

GPath zero_noise(const TimeGrid& grid, double a, double H) {
  return {grid, a, H, std::vector<double>(grid.size(), 0.0), {0, 0}};
}

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::fabs(x[i] - y[i]));
  return d;
}

}  // namespace

TEST_CASE("model orders and initial laws") {
  CHECK(ModelSpec(0.5, 0.75, Potential::zero(), InitialLaw::point(0)).fdt);
  CHECK_FALSE(ModelSpec(0.6, 0.75, Potential::zero(), InitialLaw::point(0)).fdt);
  CHECK_THROWS_AS(ModelSpec(0.2, 0.75, Potential::zero(), InitialLaw::point(0)), DomainError);
  CHECK_THROWS_AS(InitialLaw::gaussian(0.0, -1.0), DomainError);
  const auto law = InitialLaw::gaussian(1.0, 2.0);
  CHECK(law.draw({3, 4}) == law.draw({3, 4}));
  CHECK(law.draw({3, 4}) != law.draw({3, 5}));
  CHECK(InitialLaw::point(2.5).draw({1, 1}) == 2.5);
}

TEST_CASE("force-free model reproduces x0 + G") {
  const TimeGrid grid(0.01, 300);
  const ModelSpec model(0.6, 0.7, Potential::zero(), InitialLaw::point(1.5));
  const auto b = sample_fbm_circulant(grid, HurstParam(0.7), {2, 9});
  const auto g = sample_G(b, 0.6);
  const auto x = solve_volterra(model, b);
  for (std::size_t n = 0; n < grid.size(); ++n) CHECK(x.values[n] == 1.5 + g.values[n]);
  CHECK(x.method == "volterra");
  const auto pic = solve_picard(model, g, 1.5, 1e-12, 5);
  CHECK(pic.deltas.size() == 2);
  CHECK(pic.deltas.back() == 0.0);
  CHECK(pic.path.values == x.values);
}

TEST_CASE("deterministic linear relaxation follows x0 e(t)") {
  const double a = 0.7, k = 1.5, x0 = 2.0;
  const ModelSpec model(a, 0.75, Potential::linear(k), InitialLaw::point(x0));
  double prev = 1.0;
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    const TimeGrid grid(2.0 / n, n);
    const auto x = solve_volterra(model, zero_noise(grid, a, 0.75), x0);
    double err = 0.0;
    for (std::size_t j = 0; j <= n; ++j) err = std::max(err, std::fabs(x.values[j] - x0 * e_alpha_k(FracOrder(a), k, grid.t(j))));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("linear solver converges to the exact path on shared noise") {
  const LinearModel lm(1.0, 0.6, 0.75, 0.5);
  const TimeGrid fine(1.0 / 1024, 2048);
  const auto b = sample_fbm_circulant(fine, HurstParam(0.75), {44, 0});
  std::vector<double> errs;
  for (std::size_t f : {8u, 4u, 2u, 1u}) {
    const auto bc = subsample(b, f);
    const auto x = solve_volterra(lm.spec(), sample_G(bc, 0.6), 0.5);
    errs.push_back(max_abs_diff(x.values, exact_path(lm, bc).values));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
  CHECK(errs.back() < 1e-2);
}

TEST_CASE("Picard solution satisfies the discrete equation") {
  const double a = 0.7, H = 0.75;
  const ModelSpec model(a, H, Potential::linear(1.0), InitialLaw::point(0.3));
  const TimeGrid grid(1.0 / 256, 256);
  const auto g = sample_G(sample_fbm_circulant(grid, HurstParam(H), {6, 6}), a);
  const auto pic = solve_picard(model, g, 0.3, 1e-12, 80);
  CHECK(volterra_residual(model, pic.path, g) < 1e-11);
  for (std::size_t i = 2; i < pic.deltas.size(); ++i) CHECK(pic.deltas[i] <= pic.deltas[i - 1]);
  const auto pece = solve_volterra(model, g, 0.3);
  CHECK(volterra_residual(model, pece, g) < 1e-3);
  CHECK(max_abs_diff(pece.values, pic.path.values) < 1e-3);
  CHECK_THROWS_AS(solve_picard(model, g, 0.3, 1e-14, 2), ConvergenceError);
  CHECK_THROWS_AS(solve_picard(model, g, 0.3, 0.0, 2), DomainError);
  CHECK_THROWS_AS(solve_picard(ModelSpec(0.8, H, Potential::linear(1.0), InitialLaw::point(0)), g, 0.3, 1e-8, 5),
                  ContractError);
}

TEST_CASE("uniqueness probe") {
  const TimeGrid grid(1.0 / 512, 512);
  const auto b = sample_fbm_circulant(grid, HurstParam(0.75), {8, 8});
  SUBCASE("identical inputs give identical bits") {
    const ModelSpec m(0.6, 0.75, Potential::clipped_double_well(1.0, 1.0, 1.2), InitialLaw::point(0.1));
    const auto r = uniqueness_probe(m, b, 0.1, 0.0);
    CHECK(r.bit_identical);
    CHECK(r.max_divergence == 0.0);
  }
  SUBCASE("linear perturbations decay like eps e(t)") {
    const double eps = 1e-6;
    const ModelSpec m(0.6, 0.75, Potential::linear(1.0), InitialLaw::point(0.0));
    const auto r = uniqueness_probe(m, b, 0.0, eps);
    for (std::size_t n = 64; n < grid.size(); n += 64)
      CHECK(r.divergence[n] == doctest::Approx(eps * e_alpha_k(FracOrder(0.6), 1.0, grid.t(n))).epsilon(1e-2));
  }
  SUBCASE("clipped double well obeys the Gronwall bound") {
    const ModelSpec m(0.6, 0.75, Potential::clipped_double_well(1.0, 1.0, 1.2), InitialLaw::point(0.0));
    const auto r = uniqueness_probe(m, b, 0.0, 1e-6);
    CHECK(r.bit_identical);
    CHECK(r.max_bound_ratio <= 1.0);
    CHECK(r.max_divergence > 0.0);
  }
}

TEST_CASE("clipped double well potential") {
  const auto p = Potential::clipped_double_well(1.0, 1.0, 1.2);
  CHECK(p.gradient(0.5) == doctest::Approx(0.125 - 0.5));
  CHECK(p.gradient(5.0) == p.gradient(1.2));
  CHECK(p.gradient(-5.0) == p.gradient(-1.2));
  CHECK(p.lipschitz_bound().value() == doctest::Approx(3 * 1.44 - 1.0));
  CHECK(p.normalizable());
  CHECK_FALSE(Potential::zero().normalizable());
  CHECK_THROWS_AS(Potential::linear(0.0), DomainError);
  CHECK_THROWS_AS(Potential::clipped_double_well(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("unstable step sizes raise DivergenceError") {
  const ModelSpec model(0.7, 0.75, Potential::linear(1e8), InitialLaw::point(1.0));
  const TimeGrid grid(1.0, 400);
  CHECK_THROWS_AS(solve_volterra(model, zero_noise(grid, 0.7, 0.75), 1.0), DivergenceError);
}
