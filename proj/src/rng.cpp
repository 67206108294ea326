#include "noisesched/rng.hpp"

namespace noisesched {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                      std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> counter(std::uint64_t stream, std::uint64_t index) {
  return {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::uint64_t key, std::uint64_t stream,
                                           std::uint64_t index) noexcept {
  return philox10(counter(stream, index),
                  {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
}

void Philox::refill() noexcept {
  const auto out = philox10(counter(stream_, index_++), key_);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  lane_ = 0;
}

std::uint64_t derive_subseed(std::uint64_t master_seed, std::uint64_t trajectory) noexcept {
  // Stream 0 of the master key is reserved for seed derivation.
  const auto out = Philox::block(master_seed, 0, trajectory);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace noisesched
