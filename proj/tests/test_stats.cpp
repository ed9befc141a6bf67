#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fsde/errors.hpp"
#include "fsde/rng.hpp"
#include "fsde/stats.hpp"

using namespace fsde;

namespace {

std::vector<double> sample(std::size_t n, std::uint64_t seed) {
  Philox g({seed, 0});
  std::vector<double> x(n);
  for (auto& v : x) v = 2.0 + 3.0 * g.normal() + 0.5 * g.uniform();
  return x;
}

}  // namespace

TEST_CASE("streaming moments match a two-pass computation") {
  const auto x = sample(5000, 3);
  Moments m;
  for (double v : x) m.push(v);
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  CHECK(m.count() == n);
  CHECK(m.mean() == doctest::Approx(mean).epsilon(1e-13));
  CHECK(m.variance() == doctest::Approx(m2 / (n - 1)).epsilon(1e-12));
  CHECK(m.skewness() == doctest::Approx((m3 / n) / std::pow(m2 / n, 1.5)).epsilon(1e-9));
  CHECK(m.excess_kurtosis() == doctest::Approx((m4 / n) / std::pow(m2 / n, 2) - 3.0).epsilon(1e-9));
  CHECK(m.mean_se() == doctest::Approx(std::sqrt(m.variance() / n)));
}

TEST_CASE("merging partial moments equals pushing everything") {
  const auto x = sample(1000, 5);
  Moments all, a, b, c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    all.push(x[i]);
    (i < 300 ? a : i < 650 ? b : c).push(x[i]);
  }
  a.merge(b);
  a.merge(c);
  CHECK(a.count() == all.count());
  CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-13));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
  CHECK(a.excess_kurtosis() == doctest::Approx(all.excess_kurtosis()).epsilon(1e-10));
  Moments empty;
  empty.merge(all);
  CHECK(empty.mean() == all.mean());
}

TEST_CASE("variance standard error shrinks like 1/sqrt(n)") {
  Moments small, large;
  const auto x = sample(40000, 8);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i < 10000) small.push(x[i]);
    large.push(x[i]);
  }
  CHECK(small.variance_se() / large.variance_se() == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("power-law fit recovers an exact exponent") {
  std::vector<double> t, y;
  for (int i = 1; i <= 50; ++i) {
    t.push_back(0.1 * i);
    y.push_back(3.0 * std::pow(0.1 * i, -1.25));
  }
  const auto f = fit_power_law(t, y, 0.5, 4.0);
  CHECK(f.slope == doctest::Approx(-1.25).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.points == 36);
  CHECK(f.residual_norm < 1e-12);
  CHECK(f.window_lo >= 0.5);
  CHECK(f.window_hi <= 4.0);
  CHECK_THROWS_AS(fit_power_law(t, y, 10.0, 20.0), ContractError);
  std::vector<double> bad = y;
  bad[10] = -1.0;
  CHECK_THROWS_AS(fit_power_law(t, bad, 0.5, 4.0), DomainError);
}

TEST_CASE("normal cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(3.0, 1.0, 2.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-15));
}

TEST_CASE("Kolmogorov tail probability") {
  // Asymptotic critical value 1.358 / sqrt(n) at the 5% level.
  CHECK(kolmogorov_pvalue(1.3581 / std::sqrt(1e6), 1000000) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(kolmogorov_pvalue(0.0, 100) == doctest::Approx(1.0));
  CHECK(kolmogorov_pvalue(1.0, 100) < 1e-12);
}

TEST_CASE("KS accepts the right law and rejects a shifted one") {
  Philox g({77, 0});
  std::vector<double> x(5000);
  for (auto& v : x) v = g.normal();
  const auto good = ks_test(x, [](double z) { return normal_cdf(z); }, "N(0,1)");
  const auto bad = ks_test(x, [](double z) { return normal_cdf(z, 0.2, 1.0); }, "N(0.2,1)");
  CHECK(good.p_value > 0.01);
  CHECK(bad.p_value < 1e-6);
  CHECK(good.p_value <= 1.0);
  CHECK(good.reference == "N(0,1)");
}

TEST_CASE("chi-square statistic and p-value") {
  const std::vector<double> obs{60, 40}, exp{50, 50};
  const auto t = chi_square_test(obs, exp, 0);
  CHECK(t.statistic == doctest::Approx(4.0));
  // df = 1: P(chi2_1 > 4) = erfc(sqrt(2))
  CHECK(t.p_value == doctest::Approx(std::erfc(std::sqrt(2.0))).epsilon(1e-10));
  const std::vector<double> same{50, 50};
  CHECK(chi_square_test(same, exp).p_value == doctest::Approx(1.0));
  CHECK_THROWS_AS(chi_square_test(obs, std::vector<double>{1.0}), ContractError);
}

TEST_CASE("Jarque-Bera separates normal from uniform data") {
  Philox g({5, 5});
  std::vector<double> n(20000), u(20000);
  for (auto& v : n) v = g.normal();
  for (auto& v : u) v = g.uniform();
  CHECK(jarque_bera(n).p_value > 0.01);
  CHECK(jarque_bera(u).p_value < 1e-10);
  CHECK_THROWS_AS(jarque_bera(std::vector<double>{1, 2, 3}), ContractError);
}
