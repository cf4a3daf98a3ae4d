#pragma once

#include <cstdint>

namespace srk {

/// Purpose tag mixed into stream derivation so that draws for different
/// jobs (increments vs Levy areas vs oracle subdivisions) never collide,
/// even when (path, level, step) coincide.
enum class StreamPurpose : std::uint64_t {
  increments = 1,
  levy = 2,
  oracle = 3,
  probe = 4,
  fine_increments = 5,
  fine_levy = 6,
  misc = 7,
};

namespace detail {
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

/// Stream seed for a (path, level, step, purpose) tuple. Pure function of its
/// arguments, so any sub-stream can be regenerated in isolation and the
/// results are independent of execution order across threads.
[[nodiscard]] std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                               std::uint64_t path,
                                               std::uint64_t level,
                                               std::uint64_t step,
                                               StreamPurpose purpose);

/// Small counter-based generator (SplitMix64 step function) with exact
/// N(0,1) sampling via a 128-layer ziggurat. Cheap to construct; make one
/// per (path, step, purpose) via derive_stream_seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t stream_seed) : state_(stream_seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return detail::mix64(state_);
  }

  /// Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  /// Standard normal. Exact distribution (rejection sampling), not an
  /// approximation; moment tests in the suite pin this down.
  double normal();

 private:
  std::uint64_t state_;
};

[[nodiscard]] inline RngStream make_stream(std::uint64_t master_seed,
                                           std::uint64_t path,
                                           std::uint64_t level,
                                           std::uint64_t step,
                                           StreamPurpose purpose) {
  return RngStream(derive_stream_seed(master_seed, path, level, step, purpose));
}

}  // namespace srk
