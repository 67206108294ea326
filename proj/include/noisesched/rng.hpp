#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace noisesched {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// The 128-bit counter is split into a 64-bit stream id and a 64-bit block index,
// so independent streams can be addressed directly by (key, stream).
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (lane_ == 2) {
      refill();
    }
    return buffer_[lane_++];
  }

  /// Raw block for (key, stream, index); used for seed derivation.
  static std::array<std::uint32_t, 4> block(std::uint64_t key, std::uint64_t stream,
                                            std::uint64_t index) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
};

/// Per-trajectory sub-seed derived from the master seed by counter-based splitting.
std::uint64_t derive_subseed(std::uint64_t master_seed, std::uint64_t trajectory) noexcept;

}  // namespace noisesched
