#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "fsde/errors.hpp"
#include "fsde/stoch_integral.hpp"

using namespace fsde;

namespace {

// E[G(t1)G(t2)] straight from the double integral
// (C_H/Gamma(alpha))^2 H(2H-1) int int (t1-s)^(a-1) (t2-u)^(a-1) |s-u|^(2H-2) du ds,
// written in distance variables so no singular factor suffers cancellation.
double phi_brute(double t1, double t2, double a, double H) {
  if (t1 > t2) std::swap(t1, t2);
  const double b = 2 * H - 2;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto inner = [&](double q) {
    const double s = t1 - q, D = (t2 - t1) + q;
    double v = ts.integrate([&](double x) { return std::pow(D + x, a - 1.0) * std::pow(x, b); }, 0.0, s, 1e-12);
    v += ts.integrate([&](double x) { return std::pow(x, b) * std::pow(D - x, a - 1.0); }, 0.0, D / 2, 1e-12);
    v += ts.integrate([&](double x) { return std::pow(x, a - 1.0) * std::pow(D - x, b); }, 0.0, D / 2, 1e-12);
    return std::pow(q, a - 1.0) * v;
  };
  const double outer = ts.integrate(inner, 0.0, t1, 1e-10);
  const double c = 1.0 / std::sqrt(H * (2 * H - 1) * std::tgamma(1.0 - a));
  return std::pow(c / std::tgamma(a), 2) * H * (2 * H - 1) * outer;
}

std::vector<GPath> ensemble(const TimeGrid& grid, double a, double H, std::size_t paths, std::uint64_t seed) {
  CirculantFbmGenerator gen(grid, HurstParam(H));
  GOperator op(grid, a, H);
  std::vector<GPath> out;
  for (std::uint64_t p = 0; p < paths; ++p) out.push_back(op.apply(gen.sample({seed, p})));
  return out;
}

}  // namespace

TEST_CASE("normalizing constants") {
  CHECK(c_H(0.5, 0.75) == doctest::Approx(1.22658288).epsilon(1e-8));
  CHECK(c_H(0.999, 0.75) < c_H(0.5, 0.75));
  CHECK(beta_H(0.75) == doctest::Approx(1.5022513).epsilon(1e-7));
  CHECK(beta_H(0.5 + 1e-9) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));
  CHECK_THROWS_AS(c_H(0.2, 0.75), DomainError);
  CHECK_THROWS_AS(c_H(1.0, 0.75), DomainError);
  CHECK_THROWS_AS(c_H(0.6, 0.5), DomainError);
  CHECK_THROWS_AS(beta_H(0.4), DomainError);
}

TEST_CASE("phi on the diagonal") {
  CHECK(phi_covariance(1.0, 1.0, 0.5, 0.75) == doctest::Approx(4.0 / std::sqrt(std::numbers::pi)).epsilon(1e-10));
  // self-similar of order alpha + H - 1
  const double a = 0.6, H = 0.7;
  CHECK(phi_covariance(3.0, 3.0, a, H) ==
        doctest::Approx(std::pow(3.0, 2 * (a + H - 1)) * phi_covariance(1.0, 1.0, a, H)).epsilon(1e-12));
  CHECK(phi_covariance(0.0, 2.0, a, H) == 0.0);
  CHECK(phi_covariance(2.0, 0.0, a, H) == 0.0);
  CHECK_THROWS_AS(phi_covariance(-1.0, 1.0, a, H), DomainError);
}

TEST_CASE("phi against the brute-force double integral") {
  const double a = 0.6, H = 0.7;
  for (auto [t1, t2] : {std::pair{1.0, 1.0}, {0.5, 1.0}, {1.0, 2.5}, {0.2, 3.0}, {2.0, 1.1}}) {
    CAPTURE(t1);
    CAPTURE(t2);
    CHECK(phi_covariance(t1, t2, a, H) == doctest::Approx(phi_brute(t1, t2, a, H)).epsilon(1e-6));
  }
  CHECK(phi_covariance(0.7, 1.9, 0.4, 0.9) == doctest::Approx(phi_brute(0.7, 1.9, 0.4, 0.9)).epsilon(1e-6));
  CHECK(phi_covariance(0.7, 1.9, a, H) == phi_covariance(1.9, 0.7, a, H));
}

TEST_CASE("at alpha = 2 - 2H, G is fBm of index 1 - H scaled by beta_H") {
  for (double H : {0.6, 0.75}) {
    const double a = 2.0 - 2.0 * H;
    const double b2 = beta_H(H) * beta_H(H);
    for (auto [t1, t2] : {std::pair{1.0, 1.0}, {0.3, 2.0}, {1.5, 0.7}})
      CHECK(phi_covariance(t1, t2, a, H) == doctest::Approx(b2 * fbm_covariance(t1, t2, HurstParam(1.0 - H))).epsilon(1e-8));
  }
}

TEST_CASE("phi matrix is positive semidefinite") {
  const int n = 12;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = phi_covariance(0.25 * (i + 1), 0.25 * (j + 1), 0.55, 0.8);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());
}

TEST_CASE("G starts at zero and is linear in the increments") {
  const TimeGrid grid(0.01, 100);
  GOperator op(grid, 0.6, 0.7);
  const auto b = sample_fbm_circulant(grid, HurstParam(0.7), {5, 1});
  const auto g = op.apply(b);
  CHECK(g.values.size() == grid.size());
  CHECK(g.values[0] == 0.0);
  auto inc = b.increments();
  for (auto& v : inc) v *= 2.0;
  const auto g2 = op.apply_increments(inc);
  for (std::size_t j = 0; j < g2.size(); ++j) CHECK(g2[j] == doctest::Approx(2.0 * g.values[j]).epsilon(1e-12));
  CHECK_THROWS_AS(op.apply_increments(std::vector<double>(5)), ContractError);
  CHECK_THROWS_AS(op.apply(sample_fbm_circulant(grid, HurstParam(0.8), {5, 1})), ContractError);
  const auto direct = sample_G(b, 0.6);
  CHECK(direct.values == g.values);
}

TEST_CASE("G ensemble covariance matches phi") {
  const double a = 0.7, H = 0.8;
  const TimeGrid grid(1.0 / 256, 256);
  const auto ens = ensemble(grid, a, H, 4000, 17);
  for (auto [i, j] : {std::pair{128u, 128u}, {256u, 256u}, {64u, 256u}}) {
    Moments m;
    for (const auto& p : ens) m.push(p.values[i] * p.values[j]);
    const double ref = phi_covariance(grid.t(i), grid.t(j), a, H);
    CAPTURE(i);
    CAPTURE(j);
    CHECK(std::fabs(m.mean() - ref) < 4.0 * m.mean_se());
  }
}

TEST_CASE("roughness and growth exponents") {
  const double a = 0.6, H = 0.75;
  const TimeGrid grid(1.0 / 512, 2048);
  const auto ens = ensemble(grid, a, H, 1000, 23);
  const auto holder = holder_exponent_estimate(ens, 2, 32);
  CHECK(holder.slope == doctest::Approx(2 * (a + H - 1)).epsilon(0.05 / 0.7));
  const auto var = subdiffusion_variance(ens, 0.5, 4.0);
  CHECK(var.slope == doctest::Approx(2 * (a + H - 1)).epsilon(0.05 / 0.7));
  const std::vector<GPath> few(ens.begin(), ens.begin() + 999);
  CHECK_THROWS_AS(holder_exponent_estimate(few), ContractError);
  CHECK_THROWS_AS(holder_exponent_estimate(ens, 64, 4096), ContractError);
}
