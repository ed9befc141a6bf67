#include "fsde/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace fsde {

std::vector<double> FbmPath::increments() const {
  std::vector<double> out(values.size() - 1);
  for (std::size_t j = 0; j + 1 < values.size(); ++j) out[j] = values[j + 1] - values[j];
  return out;
}

double fbm_covariance(double s, double t, HurstParam H) {
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance: times must be non-negative");
  const double two_h = 2.0 * H.value();
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::size_t lag, double dt, HurstParam H) {
  const double two_h = 2.0 * H.value();
  const double j = static_cast<double>(lag);
  const double r = lag == 0 ? 1.0
                            : 0.5 * (std::pow(j + 1.0, two_h) + std::pow(j - 1.0, two_h) -
                                     2.0 * std::pow(j, two_h));
  return std::pow(dt, two_h) * r;
}

namespace {

// (t+a)^p - (t+b)^p without cancellation for small a, b relative to t.
double power_difference(double t, double a, double b, double p) {
  if (t + a <= 0.0 || t + b <= 0.0 || std::abs(a) > 0.5 * t || std::abs(b) > 0.5 * t)
    return std::pow(std::abs(t + a), p) - std::pow(std::abs(t + b), p);
  const double ea = std::expm1(p * std::log1p(a / t));
  const double eb = std::expm1(p * std::log1p(b / t));
  return std::pow(t, p) * (ea - eb);
}

}  // namespace

double increment_noise_covariance(double t, double h, double h1, HurstParam H) {
  if (!(t > 0.0)) throw DomainError("increment_noise_covariance: t must be positive");
  if (!(h > 0.0) || !(h1 > 0.0)) throw DomainError("increment_noise_covariance: steps must be positive");
  const double p = 2.0 * H.value();
  // R(h, t+h1) - R(h, t) = ((t+h1)^p - |t+h1-h|^p - t^p + |t-h|^p) / 2
  const double num = power_difference(t, h1, h1 - h, p) - power_difference(t, 0.0, -h, p);
  return 0.5 * num / (h * h1);
}

CholeskyFbmGenerator::CholeskyFbmGenerator(TimeGrid grid, HurstParam H)
    : grid_(grid), hurst_(H.value()) {
  const std::size_t n = grid.n_steps();
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = fgn_autocovariance(i - j, grid.dt(), H);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    std::ostringstream msg;
    msg << "CholeskyFbmGenerator: increment covariance is not positive definite (n=" << n
        << ", H=" << hurst_ << ", smallest eigenvalue " << min_eig << ")";
    throw NumericalError(msg.str());
  }
  lower_ = llt.matrixL();
}

std::vector<double> CholeskyFbmGenerator::path_from_normals(const std::vector<double>& normals) const {
  const std::size_t n = grid_.n_steps();
  if (normals.size() != n) throw ContractError("path_from_normals: need one normal per cell");
  std::vector<double> values(n + 1, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double inc = 0.0;
    const double* row = lower_.data() + i;  // column-major: L(i, k) at i + k*n
    for (std::size_t k = 0; k <= i; ++k) inc += row[k * n] * normals[k];
    acc += inc;
    values[i + 1] = acc;
  }
  return values;
}

FbmPath CholeskyFbmGenerator::sample(RngSpec rng) const {
  Philox gen(rng);
  std::vector<double> z(grid_.n_steps());
  gen.fill_normal(z);
  return FbmPath{grid_, hurst_, path_from_normals(z), rng};
}

CirculantFbmGenerator::CirculantFbmGenerator(TimeGrid grid, HurstParam H, double negative_tolerance)
    : grid_(grid), hurst_(H.value()) {
  const std::size_t n = grid.n_steps();
  if (n < 2) throw DomainError("CirculantFbmGenerator: need at least 2 steps");
  const std::size_t m = 2 * n;
  std::vector<double> row(m, 0.0);
  for (std::size_t j = 0; j <= n; ++j) row[j] = fgn_autocovariance(j, grid.dt(), H);
  for (std::size_t j = n + 1; j < m; ++j) row[j] = row[m - j];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, row);
  eigenvalues_.resize(m);
  amplitude_.resize(m);
  double most_negative = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    eigenvalues_[k] = spectrum[k].real();
    most_negative = std::min(most_negative, eigenvalues_[k]);
  }
  const double scale = std::max(1.0, *std::max_element(eigenvalues_.begin(), eigenvalues_.end()));
  if (most_negative < -negative_tolerance * scale) {
    std::ostringstream msg;
    msg << "circulant embedding has eigenvalue " << most_negative
        << "; falling back to the Cholesky generator";
    warning_ = msg.str();
    fallback_ = std::make_shared<CholeskyFbmGenerator>(grid, H);
    return;
  }
  for (std::size_t k = 0; k < m; ++k)
    amplitude_[k] = std::sqrt(std::max(eigenvalues_[k], 0.0) / static_cast<double>(m));
}

FbmPath CirculantFbmGenerator::sample(RngSpec rng) const {
  if (fallback_) return fallback_->sample(rng);
  const std::size_t n = grid_.n_steps();
  const std::size_t m = 2 * n;
  Philox gen(rng);
  std::vector<std::complex<double>> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double re = gen.normal();
    const double im = gen.normal();
    w[k] = amplitude_[k] * std::complex<double>(re, im);
  }
  // Forward transform without the inverse's 1/m: real part has covariance equal to the circulant.
  thread_local Eigen::FFT<double> fft;
  std::vector<std::complex<double>> y;
  fft.fwd(y, w);
  std::vector<double> values(n + 1, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += y[i].real();
    values[i + 1] = acc;
  }
  return FbmPath{grid_, hurst_, std::move(values), rng};
}

FbmPath sample_fbm_exact(const TimeGrid& grid, HurstParam H, RngSpec rng) {
  return CholeskyFbmGenerator(grid, H).sample(rng);
}

FbmPath sample_fbm_circulant(const TimeGrid& grid, HurstParam H, RngSpec rng) {
  return CirculantFbmGenerator(grid, H).sample(rng);
}

FbmPath subsample(const FbmPath& path, std::size_t factor) {
  TimeGrid coarse = path.grid.coarsened(factor);
  std::vector<double> values(coarse.size());
  for (std::size_t j = 0; j < values.size(); ++j) values[j] = path.values[j * factor];
  return FbmPath{coarse, path.hurst, std::move(values), path.source};
}

}  // namespace fsde
