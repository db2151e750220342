#pragma once

#include <array>
#include <cstdint>

namespace stable_llt {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based random stream.
///
/// A stream is identified by (seed, stream_id); the key is derived from the
/// seed and the stream id occupies the high half of the counter, so distinct
/// stream ids never share a counter block. Copies replay the same sequence.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double next_uniform() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t blocks_used() const noexcept { return block_index_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  PhiloxKey key_;
  std::uint64_t block_index_ = 0;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace stable_llt
