#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fsde {

/// Causal Toeplitz product out[n] = sum_{m=0}^{n-1} kernel[m] * in[n-1-m], n = 0..N.
///
/// `in` has N entries (one per grid cell), `out` has N+1 entries and out[0] = 0.
/// Long kernels are applied through a zero-padded FFT; short ones directly.
class CausalConvolver {
public:
  explicit CausalConvolver(std::vector<double> kernel, std::size_t direct_threshold = 192);

  std::size_t cells() const noexcept { return kernel_.size(); }
  const std::vector<double>& kernel() const noexcept { return kernel_; }

  void apply(std::span<const double> in, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> in) const;

private:
  std::vector<double> kernel_;
  bool use_fft_;
  std::size_t fft_size_ = 0;
  std::vector<std::complex<double>> kernel_spectrum_;
};

}  // namespace fsde
