#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace fsde {

/// Identifies one reproducible random stream. Ensembles use stream_id = path index.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// Philox4x32-10 counter-based generator.
///
/// The key is the 64-bit seed; the 128-bit counter is laid out as
/// (block index, substream, stream_id lo, stream_id hi). Draws therefore depend
/// only on (seed, stream_id, substream) and never on execution order.
class Philox {
public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox(RngSpec spec, std::uint32_t substream = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on (0, 1), 53 random bits, never 0 or 1.
  double uniform() noexcept;
  /// Standard normal (Box-Muller, second variate cached).
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;

  static Block bijection(Block counter, std::array<std::uint32_t, 2> key) noexcept;

private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  Block counter_;
  Block buffer_{};
  unsigned used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fsde
