#pragma once

#include <cstdint>

namespace latticeperm {

// Counter-based splittable pseudorandom stream.
//
// A stream is identified by a 64-bit key; output i is the splitmix64
// finalizer applied to key + i * golden_gamma. Child streams derive a fresh
// key from (key, child index), so hierarchical samplers produce identical
// values no matter how the work is scheduled across threads.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : key_(mix(seed + kSeedSalt)) {}

  std::uint64_t next() {
    counter_ += kGoldenGamma;
    return mix(key_ + counter_);
  }

  // Independent child stream; does not advance or read this stream's counter.
  StreamRng split(std::uint64_t child) const {
    StreamRng out(0);
    out.key_ = mix(key_ ^ mix(child + kChildSalt));
    out.counter_ = 0;
    return out;
  }

  // Uniform on [0, bound); bias is O(bound / 2^64).
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kSeedSalt = 0x8BADF00D5EEDF00Dull;
  static constexpr std::uint64_t kChildSalt = 0xC2B2AE3D27D4EB4Full;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace latticeperm
