#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gdmap {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the key; the 128-bit counter is (block, stream). Every
/// output depends only on (seed, stream, block), so sequences are identical on
/// every platform. Satisfies UniformRandomBitGenerator with 32-bit results.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal by the Box-Muller transform; values come in pairs.
  double normal() noexcept;

  /// The raw 10-round bijection.
  static Counter block(Counter counter, Key key) noexcept;

 private:
  Key key_;
  std::uint64_t block_ = 0;
  std::uint64_t stream_;
  Counter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gdmap
