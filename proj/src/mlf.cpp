#include "fsde/mlf.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

namespace fsde {

namespace {

constexpr long double kEpsL = std::numeric_limits<long double>::epsilon();

// 1/Gamma(v), zero at the poles.
double rgamma(double v) {
  if (v <= 0.0 && v == std::floor(v)) return 0.0;
  if (v > 0.0) {
    if (v > 170.0) return std::exp(-std::lgamma(v));
    return 1.0 / boost::math::tgamma(v);
  }
  // reflection: 1/Gamma(v) = Gamma(1-v) sin(pi v) / pi
  return boost::math::sin_pi(v) * std::exp(std::lgamma(1.0 - v)) / std::numbers::pi;
}

// Spectral density of E_alpha(-s^alpha t^alpha) on the rate axis, s = 1.
double relaxation_spectrum(double alpha, double r) {
  if (r <= 0.0) return 0.0;
  const double ra = std::pow(r, alpha);
  const double c = std::cos(alpha * std::numbers::pi);
  const double denom = ra * ra + 2.0 * ra * c + 1.0;
  return std::sin(alpha * std::numbers::pi) / std::numbers::pi * (ra / r) / denom;
}

// Typical relative rounding of one long-double series term near the crossover.
constexpr double kSeriesRounding = 4e-18;

}  // namespace

void MlSettings::validate() const {
  if (!(series_tol > 0.0)) throw DomainError("MlSettings: series_tol must be positive");
  if (max_terms < 1) throw DomainError("MlSettings: max_terms must be at least 1");
  if (crossover && !(*crossover > 0.0)) throw DomainError("MlSettings: crossover must be positive");
}

double default_ml_crossover(double alpha) {
  // Series rounding grows like e^y, tail truncation error shrinks like e^-y
  // with y = x^(1/alpha); they meet at y = ln(1/eps)/2.
  const double y = 0.5 * std::log(1.0 / kSeriesRounding);
  return std::pow(y, alpha);
}

namespace ml {

MlValue series(double alpha, double beta, double z, int max_terms) {
  if (z == 0.0) return {rgamma(beta), 0.0, MlBranch::series, 1};
  const long double x = std::fabs(static_cast<long double>(z));
  const long double lx = std::log(x);
  const bool alternating = z < 0.0;

  long double sum = 0.0L, comp = 0.0L, rounding = 0.0L;
  long double prev = std::numeric_limits<long double>::infinity();
  for (int n = 0; n < max_terms; ++n) {
    const long double arg = n * lx - std::lgamma(static_cast<long double>(alpha) * n + beta);
    const long double mag = std::exp(arg);
    const long double term = (alternating && (n % 2)) ? -mag : mag;
    // Kahan summation
    const long double yk = term - comp;
    const long double tk = sum + yk;
    comp = (tk - sum) - yk;
    sum = tk;
    rounding += mag * (1.0L + std::fabs(arg));

    const bool decreasing = mag < prev;
    prev = mag;
    if (n > 0 && decreasing && mag <= kEpsL * std::fabs(sum) * 1e-2L) {
      const double err = static_cast<double>(8.0L * kEpsL * rounding + mag);
      return {static_cast<double>(sum), err, MlBranch::series, n + 1};
    }
  }
  throw AccuracyError("Mittag-Leffler series did not converge within max_terms",
                      static_cast<double>(prev / std::fabs(sum)));
}

MlValue tail(double alpha, double beta, double x) {
  if (!(x > 0.0)) throw DomainError("Mittag-Leffler tail needs a positive argument");
  double sum = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  int used = 0;
  double xinv_pow = 1.0;
  for (int j = 1; j < 2000; ++j) {
    xinv_pow /= x;
    if (xinv_pow == 0.0) break;
    const double c = rgamma(beta - j * alpha);
    if (c == 0.0) continue;
    const double term = ((j % 2) ? 1.0 : -1.0) * xinv_pow * c;
    const double mag = std::fabs(term);
    if (mag > smallest) break;
    sum += term;
    smallest = mag;
    used = j;
    if (mag <= 1e-3 * std::numeric_limits<double>::epsilon() * std::fabs(sum)) break;
  }
  // Beyond-all-orders part. For alpha > 1/2 the spectrum has poles at
  // exp(+-i theta), theta = pi (1/alpha - 1), which leave a remainder of size
  // exp(-y cos theta); otherwise the remainder scale is exp(-y).
  const double y = std::pow(x, 1.0 / alpha);
  const double decay = alpha > 0.5 ? std::cos(std::numbers::pi * (1.0 / alpha - 1.0)) : 1.0;
  double exponential = std::exp(-y * decay) / alpha;
  if (beta != 1.0) exponential *= std::max(1.0, std::pow(y, 1.0 - alpha));
  const double err = std::max(smallest, exponential) +
                     std::numeric_limits<double>::epsilon() * std::fabs(sum) * used;
  return {sum, err, MlBranch::tail, used};
}

MlValue integral(double alpha, double beta, double x, double rel_tol) {
  if (!(x > 0.0)) throw DomainError("Mittag-Leffler integral needs a positive argument");
  const bool derivative_form = beta != 1.0;
  if (derivative_form && beta != alpha)
    throw DomainError("integral representation implemented for beta in {1, alpha} only");
  const double y = std::pow(x, 1.0 / alpha);
  auto f = [&](double u) {
    if (!(u > 0.0)) return 0.0;
    const double k = relaxation_spectrum(alpha, u / y) * std::exp(-u);
    return derivative_form ? u * k : k;
  };
  const double tol = std::max(rel_tol, 1e-15);
  double e1 = 0.0, e2 = 0.0, l1 = 0.0, l2 = 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double a = ts.integrate(f, 0.0, y, tol, &e1, &l1);
  const double b = es.integrate(f, y, std::numeric_limits<double>::infinity(), tol, &e2, &l2);
  const double scale = derivative_form ? std::pow(y, -1.0 - alpha) : 1.0 / y;
  const double value = (a + b) * scale;
  const double err = (e1 * l1 + e2 * l2 + 2.0 * std::numeric_limits<double>::epsilon() * (l1 + l2)) * scale;
  return {value, err, MlBranch::integral, 0};
}

MlValue evaluate(double alpha, double beta, double z, const MlSettings& settings) {
  settings.validate();
  if (!std::isfinite(z)) throw DomainError("Mittag-Leffler argument must be finite");
  if (beta != 1.0 && beta != alpha) throw DomainError("only E_alpha and E_{alpha,alpha} are supported");
  if (z == 0.0) return {rgamma(beta), 0.0, MlBranch::exact, 0};
  if (alpha == 1.0) return {std::exp(z), 0.0, MlBranch::exact, 0};

  const double crossover = settings.crossover.value_or(default_ml_crossover(alpha));
  if (z > 0.0) {
    if (z > crossover) throw DomainError("positive Mittag-Leffler argument beyond crossover");
    return series(alpha, beta, z, settings.max_terms);
  }

  const double x = -z;
  const double tol = settings.series_tol;
  MlValue first = x <= crossover ? series(alpha, beta, z, settings.max_terms) : tail(alpha, beta, x);
  if (first.error_estimate <= tol * std::fabs(first.value)) return first;

  MlValue quad = integral(alpha, beta, x, tol);
  const MlValue& best = quad.error_estimate <= first.error_estimate ? quad : first;
  if (best.error_estimate > 100.0 * tol * std::fabs(best.value))
    throw AccuracyError("Mittag-Leffler evaluation missed series_tol",
                        best.error_estimate / std::fabs(best.value));
  return best;
}

}  // namespace ml

MlValue mittag_leffler_detail(FracOrder alpha, double z, const MlSettings& settings) {
  return ml::evaluate(alpha.value(), 1.0, z, settings);
}

double mittag_leffler(FracOrder alpha, double z, const MlSettings& settings) {
  return mittag_leffler_detail(alpha, z, settings).value;
}

namespace {
void check_kt(double k, double t) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("relaxation rate k must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be non-negative");
}
}  // namespace

double e_alpha_k(FracOrder alpha, double k, double t, const MlSettings& settings) {
  check_kt(k, t);
  if (t == 0.0) return 1.0;
  return mittag_leffler(alpha, -k * std::pow(t, alpha.value()), settings);
}

double e_alpha_k_dot(FracOrder alpha, double k, double t, const MlSettings& settings) {
  check_kt(k, t);
  const double a = alpha.value();
  if (a == 1.0) return -k * std::exp(-k * t);
  if (t == 0.0) throw DomainError("derivative of e_{alpha,k} is singular at t = 0");
  const double x = k * std::pow(t, a);
  const MlValue v = ml::evaluate(a, a, -x, settings);
  return -k * std::pow(t, a - 1.0) * v.value;
}

double r_func(FracOrder alpha, double k, double t, const MlSettings& settings) {
  return -e_alpha_k_dot(alpha, k, t, settings);
}

}  // namespace fsde
