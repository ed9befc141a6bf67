#include "fsde/markov_embedding.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <nlohmann/json.hpp>

#include "fsde/errors.hpp"

namespace fsde {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("kernel order must lie in (0, 1)");
}

struct OuStep {
  double decay;   // exp(-lambda h)
  double drift;   // (1 - exp(-lambda h)) / lambda
  double noise;   // sqrt(c (1 - exp(-2 lambda h)))
};

std::vector<OuStep> ou_steps(const ModeSet& modes, double h) {
  std::vector<OuStep> out;
  out.reserve(modes.modes.size());
  for (const auto& m : modes.modes) {
    const double lh = m.lambda * h;
    out.push_back({std::exp(-lh), -std::expm1(-lh) / m.lambda, std::sqrt(-m.c * std::expm1(-2.0 * lh))});
  }
  return out;
}

void check_modes(const ModeSet& modes) {
  if (modes.modes.empty()) throw ContractError("mode set is empty");
  for (const auto& m : modes.modes)
    if (!(m.lambda > 0.0) || !(m.c > 0.0)) throw ContractError("mode set has a non-positive rate or amplitude");
}

}  // namespace

double rho(double lambda, double alpha) {
  check_alpha(alpha);
  if (!(lambda > 0.0)) throw DomainError("rho needs lambda > 0");
  return std::pow(lambda, alpha - 1.0) / boost::math::beta(alpha, 1.0 - alpha);
}

double power_kernel(double t, double alpha) {
  check_alpha(alpha);
  if (!(t > 0.0)) throw DomainError("power kernel needs t > 0");
  return std::pow(t, -alpha) / boost::math::tgamma(1.0 - alpha);
}

double ModeSet::kernel(double t) const {
  double s = 0.0;
  for (const auto& m : modes) s += m.c * std::exp(-m.lambda * t);
  return s;
}

double ModeSet::total_mass() const { return kernel(0.0); }

std::string ModeSet::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["t_min"] = t_min;
  j["t_max"] = t_max;
  j["fit_error"] = fit_error;
  j["modes"] = nlohmann::json::array();
  for (const auto& m : modes) j["modes"].push_back({{"lambda", m.lambda}, {"c", m.c}});
  return j.dump(2);
}

ModeSet ModeSet::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModeSet s;
  s.alpha = j.at("alpha").get<double>();
  s.t_min = j.at("t_min").get<double>();
  s.t_max = j.at("t_max").get<double>();
  s.fit_error = j.at("fit_error").get<double>();
  for (const auto& m : j.at("modes")) s.modes.push_back({m.at("lambda").get<double>(), m.at("c").get<double>()});
  check_modes(s);
  return s;
}

double kernel_fit_error(const ModeSet& modes, double t_min, double t_max) {
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t = t_min * std::pow(t_max / t_min, i / 199.0);
    const double g = power_kernel(t, modes.alpha);
    worst = std::max(worst, std::fabs(modes.kernel(t) - g) / g);
  }
  return worst;
}

ModeSet fit_modes(double alpha, double t_min, double t_max, int M) {
  check_alpha(alpha);
  if (!(t_min > 0.0 && t_max > t_min)) throw DomainError("fit_modes needs 0 < t_min < t_max");
  if (M < 2) throw DomainError("fit_modes needs M >= 2");
  const double lo = 1e-2 / t_max, hi = 1e2 / t_min;
  const int nodes = M - 1;
  const double du = nodes > 1 ? std::log(hi / lo) / (nodes - 1) : std::log(hi / lo);
  ModeSet s;
  s.alpha = alpha;
  s.t_min = t_min;
  s.t_max = t_max;

  // Remainder of the log-grid sum below lo: weights decay like q^j, q = exp(-alpha du).
  const double q = std::exp(-alpha * du), q1 = std::exp(-(alpha + 1.0) * du);
  const double w0 = du * lo * rho(lo, alpha);
  const double mass = w0 * q / (1.0 - q);
  const double rate = lo * (q1 / (1.0 - q1)) / (q / (1.0 - q));
  s.modes.push_back({rate, mass});

  for (int i = 0; i < nodes; ++i) {
    const double lambda = lo * std::exp(i * du);
    s.modes.push_back({lambda, du * lambda * rho(lambda, alpha)});
  }
  s.fit_error = kernel_fit_error(s, t_min, t_max);
  if (s.fit_error > 0.1)
    throw NumericalError("kernel fit error " + std::to_string(s.fit_error) + " exceeds 10%; increase M");
  return s;
}

EmbeddedIntegrator::EmbeddedIntegrator(const Potential& potential, const ModeSet& modes, double dt)
    : potential_(potential), modes_(modes), dt_(dt) {
  check_modes(modes);
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  const auto M = static_cast<Eigen::Index>(modes.modes.size());
  Eigen::VectorXd c(M), lam(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    c(i) = modes.modes[i].c;
    lam(i) = modes.modes[i].lambda;
  }
  C_ = c.sum();
  k_ref_ = potential.kind() == Potential::Kind::linear ? potential.k() : 1.0;
  const double K = k_ref_ + C_;

  // u_i = z_i + c_i x obeys du = -L u dt + Lambda c K/k_ref r(1'u) dt + sqrt(2 Lambda c) dW
  // with L = Lambda (I - c 1'/K) and r(s) = x(s) - s/K, zero for the reference slope.
  Eigen::MatrixXd L = -(lam.cwiseProduct(c) / K) * Eigen::RowVectorXd::Ones(M);
  L.diagonal() += lam;
  Eigen::MatrixXd LH = -dt * L;
  P_ = LH.exp();
  Eigen::MatrixXd S = c.asDiagonal();
  S += c * c.transpose() / k_ref_;
  Eigen::MatrixXd Q = S - P_ * S * P_.transpose();
  Q = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  noise_ = es.eigenvectors() * ev.asDiagonal();
  forcing_ = (Eigen::MatrixXd::Identity(M, M) - P_) * c * (K / k_ref_);
  c_ = c;
}

double EmbeddedIntegrator::position(double s, double guess, std::size_t n) const {
  if (potential_.kind() == Potential::Kind::linear) return s / (potential_.k() + C_);
  if (potential_.kind() == Potential::Kind::zero) return s / C_;
  auto f = [&](double w) { return potential_.gradient(w) + C_ * w - s; };
  double a = guess - 1.0, b = guess + 1.0;
  int expand = 0;
  while (f(a) > 0.0 && expand < 60) a -= std::ldexp(1.0, expand++);
  while (f(b) < 0.0 && expand < 120) b += std::ldexp(1.0, expand++);
  if (f(a) > 0.0 || f(b) < 0.0)
    throw NumericalError("embedded step " + std::to_string(n) + ": no bracket for the constraint, sum=" +
                         std::to_string(s));
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, a, b, boost::math::tools::eps_tolerance<double>(50), iters);
  if (iters >= 200)
    throw NumericalError("embedded step " + std::to_string(n) + ": constraint solve did not converge, sum=" +
                         std::to_string(s));
  return 0.5 * (r.first + r.second);
}

SolutionPath EmbeddedIntegrator::simulate(const TimeGrid& grid, RngSpec rng, double x0) const {
  if (std::fabs(grid.dt() - dt_) > 1e-14 * dt_) throw ContractError("grid step differs from the integrator step");
  const auto M = c_.size();
  Philox gen(rng);
  Eigen::VectorXd u(M), xi(M);
  for (Eigen::Index i = 0; i < M; ++i) u(i) = std::sqrt(c_(i)) * gen.normal() + c_(i) * x0;
  const double K = k_ref_ + C_;
  std::vector<double> x(grid.size());
  x[0] = x0;
  double s = u.sum();
  for (std::size_t n = 1; n < x.size(); ++n) {
    const double r = position(s, x[n - 1], n) - s / K;
    for (Eigen::Index i = 0; i < M; ++i) xi(i) = gen.normal();
    u = P_ * u + noise_ * xi;
    if (r != 0.0) u += forcing_ * r;
    s = u.sum();
    x[n] = position(s, x[n - 1], n);
    if (!std::isfinite(x[n])) throw DivergenceError("embedded solution left the finite range", n);
  }
  return {grid, std::move(x), modes_.alpha, std::numeric_limits<double>::quiet_NaN(), potential_.name(), rng,
          "embedded"};
}

SolutionPath simulate_embedded_overdamped(const Potential& potential, const ModeSet& modes, const TimeGrid& grid,
                                          RngSpec rng, double x0) {
  return EmbeddedIntegrator(potential, modes, grid.dt()).simulate(grid, rng, x0);
}

std::vector<double> simulate_free_noise(const ModeSet& modes, const TimeGrid& grid, RngSpec rng) {
  check_modes(modes);
  const auto steps = ou_steps(modes, grid.dt());
  Philox gen(rng);
  std::vector<double> z(steps.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::sqrt(modes.modes[i].c) * gen.normal();
  std::vector<double> R(grid.size());
  for (std::size_t n = 0; n < R.size(); ++n) {
    if (n > 0)
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = steps[i].decay * z[i] + steps[i].noise * gen.normal();
    double s = 0.0;
    for (double v : z) s += v;
    R[n] = s;
  }
  return R;
}

std::vector<double> simulate_free_modes(const ModeSet& modes, const TimeGrid& grid, RngSpec rng) {
  check_modes(modes);
  const auto steps = ou_steps(modes, grid.dt());
  Philox gen(rng);
  std::vector<double> z(steps.size(), 0.0);  // start away from equilibrium on purpose
  for (std::size_t n = 1; n < grid.size(); ++n)
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = steps[i].decay * z[i] + steps[i].noise * gen.normal();
  return z;
}

double gle_max_dt(double m, const Potential& potential) {
  if (!(m > 0.0)) throw DomainError("mass must be positive");
  const auto lip = potential.lipschitz_bound();
  if (!lip || *lip <= 0.0) return std::numeric_limits<double>::infinity();
  // Verlet part is stable below 2/omega; keep a factor 2 margin.
  return 1.0 / std::sqrt(*lip / m);
}

GlePath simulate_gle_mass(double m, const Potential& potential, const ModeSet& modes, const TimeGrid& grid,
                          RngSpec rng, double q0, double v0) {
  if (!(m > 0.0)) throw DomainError("mass must be positive");
  check_modes(modes);
  const double h = grid.dt();
  if (h > gle_max_dt(m, potential))
    throw NumericalError("GLE step unstable: dt=" + std::to_string(h) + " exceeds bound " +
                         std::to_string(gle_max_dt(m, potential)) + " = 1/sqrt(Lip(V')/m)");
  const auto M = static_cast<Eigen::Index>(modes.modes.size());

  // Exact step of the linear block y = (v, z): dv = sum z / m dt, dz_i = -lambda_i z_i dt - c_i v dt + noise.
  // Its invariant law is N(0, diag(1/m, c)).
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M + 1, M + 1);
  Eigen::VectorXd S(M + 1);
  S(0) = 1.0 / m;
  for (Eigen::Index i = 0; i < M; ++i) {
    A(0, i + 1) = 1.0 / m;
    A(i + 1, 0) = -modes.modes[i].c;
    A(i + 1, i + 1) = -modes.modes[i].lambda;
    S(i + 1) = modes.modes[i].c;
  }
  Eigen::MatrixXd Ah = h * A;
  const Eigen::MatrixXd P = Ah.exp();
  Eigen::MatrixXd Q = Eigen::MatrixXd(S.asDiagonal()) - P * S.asDiagonal() * P.transpose();
  Q = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  Philox gen(rng);
  Eigen::VectorXd y(M + 1), xi(M + 1);
  y(0) = v0;
  for (Eigen::Index i = 0; i < M; ++i) y(i + 1) = std::sqrt(modes.modes[i].c) * gen.normal();
  GlePath out{std::vector<double>(grid.size()), std::vector<double>(grid.size())};
  double q = q0;
  out.q[0] = q;
  out.v[0] = v0;
  for (std::size_t n = 1; n < grid.size(); ++n) {
    y(0) -= 0.5 * h * potential.gradient(q) / m;
    q += 0.5 * h * y(0);
    for (Eigen::Index i = 0; i <= M; ++i) xi(i) = gen.normal();
    y = P * y + root * xi;
    q += 0.5 * h * y(0);
    y(0) -= 0.5 * h * potential.gradient(q) / m;
    if (!std::isfinite(q) || !std::isfinite(y(0))) throw DivergenceError("GLE trajectory left the finite range", n);
    out.q[n] = q;
    out.v[n] = y(0);
  }
  return out;
}

}  // namespace fsde
