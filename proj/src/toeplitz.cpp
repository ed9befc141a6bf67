#include "fsde/toeplitz.hpp"

#include <unsupported/Eigen/FFT>

#include "fsde/errors.hpp"

namespace fsde {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Eigen's FFT object caches twiddles and is not safe to share across threads.
Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

CausalConvolver::CausalConvolver(std::vector<double> kernel, std::size_t direct_threshold)
    : kernel_(std::move(kernel)), use_fft_(kernel_.size() > direct_threshold) {
  if (kernel_.empty()) throw ContractError("CausalConvolver: empty kernel");
  if (use_fft_) {
    fft_size_ = next_pow2(2 * kernel_.size());
    std::vector<double> padded(fft_size_, 0.0);
    std::copy(kernel_.begin(), kernel_.end(), padded.begin());
    thread_fft().fwd(kernel_spectrum_, padded);
  }
}

void CausalConvolver::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t n = kernel_.size();
  if (in.size() != n || out.size() != n + 1)
    throw ContractError("CausalConvolver::apply: length mismatch");
  out[0] = 0.0;
  if (!use_fft_) {
    for (std::size_t i = 1; i <= n; ++i) {
      double acc = 0.0;
      for (std::size_t m = 0; m < i; ++m) acc += kernel_[m] * in[i - 1 - m];
      out[i] = acc;
    }
    return;
  }
  auto& fft = thread_fft();
  std::vector<double> padded(fft_size_, 0.0);
  std::copy(in.begin(), in.end(), padded.begin());
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= kernel_spectrum_[k];
  std::vector<double> full;
  fft.inv(full, spectrum);
  // full[i] = sum_m kernel[m] in[i-m]; out[i+1] takes full[i]
  for (std::size_t i = 0; i < n; ++i) out[i + 1] = full[i];
}

std::vector<double> CausalConvolver::apply(std::span<const double> in) const {
  std::vector<double> out(kernel_.size() + 1);
  apply(in, out);
  return out;
}

}  // namespace fsde
