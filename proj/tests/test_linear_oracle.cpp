#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fsde/errors.hpp"
#include "fsde/linear_oracle.hpp"

using namespace fsde;

namespace {

// At alpha = 2 - 2H the covariance is e(tau)/k, whose cosine transform follows
// from the Laplace transform s^(alpha-1) / (s^alpha + k) at s = i omega.
double fdt_spectrum(double omega, double alpha, double k) {
  const std::complex<double> s(0.0, omega);
  return 2.0 / k * std::real(std::pow(s, alpha - 1.0) / (std::pow(s, alpha) + k));
}

}  // namespace

TEST_CASE("model validation") {
  CHECK(LinearModel(1.0, 0.5, 0.75).fdt());
  CHECK_FALSE(LinearModel(1.0, 0.7, 0.7).fdt());
  CHECK_THROWS_AS(LinearModel(0.0, 0.5, 0.75), DomainError);
  CHECK_THROWS_AS(LinearModel(1.0, 0.2, 0.75), DomainError);
  const auto spec = LinearModel(2.0, 0.5, 0.75, 0.3).spec();
  CHECK(spec.potential.k() == 2.0);
  CHECK(spec.x0.mean == 0.3);
}

TEST_CASE("fdt covariance is e(tau)/k") {
  const LinearOracle o(LinearModel(1.0, 0.5, 0.75));
  CHECK(o.covariance(0.0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(o.covariance(1.0).value == doctest::Approx(0.4275836).epsilon(1e-7));
  const LinearOracle o2(LinearModel(2.5, 0.4, 0.8));
  CHECK(o2.covariance(0.0).value == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(stationary_covariance_h(1.0, LinearModel(1.0, 0.5, 0.75)) == doctest::Approx(0.4275836).epsilon(1e-7));
  CHECK_THROWS_AS(o.covariance(-1.0), DomainError);
}

TEST_CASE("double-integral route agrees with the closed form") {
  const LinearOracle o(LinearModel(1.0, 0.5, 0.75));
  CHECK(o.covariance_quadrature(0.0).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(o.covariance_quadrature(1.0).value == doctest::Approx(0.4275836).epsilon(1e-4 / 0.43));
  CHECK(o.covariance_quadrature(5.0).value == doctest::Approx(o.e(5.0)).epsilon(1e-5));
  CHECK(o.sigma_limit().value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("general orders: variance limit and lag-zero covariance coincide") {
  const LinearOracle o(LinearModel(1.0, 0.7, 0.7));
  const auto h0 = o.covariance(0.0);
  const auto lim = o.sigma_limit();
  CHECK(h0.value == doctest::Approx(lim.value).epsilon(1e-6));
  CHECK(h0.value > 0.0);
  CHECK(o.covariance(1.0).value < h0.value);
}

TEST_CASE("Sigma(t) grows monotonically to its limit") {
  for (auto [a, H] : {std::pair{0.5, 0.75}, {0.9, 0.75}, {0.7, 0.7}}) {
    const LinearOracle o(LinearModel(1.0, a, H));
    const double lim = o.sigma_limit().value;
    double prev = 0.0;
    CHECK(o.sigma_t(0.0).value == 0.0);
    for (double t : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 50.0}) {
      const double s = o.sigma_t(t).value;
      CHECK(s > prev);
      CHECK(s < lim);
      CHECK(s + o.sigma_tail(t).value == doctest::Approx(lim).epsilon(1e-8));
      prev = s;
    }
  }
}

TEST_CASE("convergence rate of Sigma(t)") {
  const auto fit = convergence_rate_fit(LinearModel(1.0, 0.5, 0.75), 5.0, 100.0);
  CHECK(fit.slope == doctest::Approx(2 * 0.75 - 2 - 0.5).epsilon(0.1));
  CHECK_THROWS_AS(convergence_rate_fit(LinearModel(1.0, 0.5, 0.75), 5.0, 1.0), DomainError);
}

TEST_CASE("spectral density") {
  const LinearModel m(1.3, 0.5, 0.75);
  const LinearOracle o(m);
  for (double w : {0.05, 0.5, 1.0, 4.0, 30.0})
    CHECK(o.spectral_density(w) == doctest::Approx(fdt_spectrum(w, 0.5, 1.3)).epsilon(1e-10));
  CHECK(o.spectral_density(-2.0) == o.spectral_density(2.0));
  CHECK(spectral_density(1.0, m) == o.spectral_density(1.0));
  CHECK(o.spectral_normalization(SpectralNormalization::gamma_2H_plus_1) /
            o.spectral_normalization(SpectralNormalization::gamma_2H_minus_1) ==
        doctest::Approx(std::tgamma(2.5) / std::tgamma(0.5)));
  CHECK_THROWS_AS(o.spectral_density(0.0), DomainError);
  for (double tau : {0.5, 1.0, 3.0}) {
    const auto inv = o.inverse_transform(tau);
    CHECK(inv.value == doctest::Approx(o.covariance(tau).value).epsilon(1e-5));
  }
}

TEST_CASE("regularized transform of the quadrature covariance") {
  const LinearOracle o(LinearModel(1.0, 0.7, 0.7));
  for (double w : {0.5, 1.0, 2.0}) {
    const auto t = o.regularized_transform(w);
    CHECK(t.value == doctest::Approx(o.spectral_density(w)).epsilon(2e-2));
  }
}

TEST_CASE("exact path operator") {
  const LinearModel m(1.0, 0.6, 0.75, 2.0);
  const TimeGrid grid(0.01, 200);
  const LinearPathOperator op(m, grid);
  for (std::size_t j = 0; j < grid.size(); j += 20)
    CHECK(op.relaxation()[j] == doctest::Approx(e_alpha_k(FracOrder(0.6), 1.0, grid.t(j))).epsilon(1e-12));
  FbmPath quiet{grid, 0.75, std::vector<double>(grid.size(), 0.0), {0, 0}};
  const auto x = op.apply(quiet);
  for (std::size_t j = 0; j < grid.size(); ++j) CHECK(x.values[j] == doctest::Approx(2.0 * op.relaxation()[j]));
  const auto y = op.apply(quiet, -1.0);
  CHECK(y.values.back() == doctest::Approx(-op.relaxation().back()));
  const auto b = sample_fbm_circulant(grid, HurstParam(0.75), {1, 1});
  CHECK(exact_path(m, b).values == op.apply(b).values);
  CHECK_THROWS_AS(op.apply(sample_fbm_circulant(TimeGrid(0.02, 100), HurstParam(0.75), {1, 1})), ContractError);
}

TEST_CASE("exact path ensemble variance follows Sigma(t)") {
  const LinearModel m(1.0, 0.7, 0.7);
  const TimeGrid grid(1.0 / 256, 1024);
  const LinearPathOperator op(m, grid);
  CirculantFbmGenerator gen(grid, HurstParam(0.7));
  Moments at1, at4;
  for (std::uint64_t p = 0; p < 3000; ++p) {
    const auto x = op.apply(gen.sample({12, p}));
    at1.push(x.values[256]);
    at4.push(x.values[1024]);
  }
  const LinearOracle o(m);
  CHECK(std::fabs(at1.variance() - o.sigma_t(1.0).value) < 4.0 * at1.variance_se());
  CHECK(std::fabs(at4.variance() - o.sigma_t(4.0).value) < 4.0 * at4.variance_se());
}
