#pragma once

#include <cstdint>

namespace qdat {

/// splitmix64 generator. Small state, full 64-bit period of the underlying
/// counter, and cheap arbitrary seeding, which is what the per-trial stream
/// derivation below relies on.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Seed for an independent stream. Trial k always gets the same stream no
/// matter how trials are batched or merged, so ensemble results depend only
/// on (master seed, trial index).
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
  SplitMix64 mix(master ^ (0xD1B54A32D192ED03ull * (stream + 1)));
  mix.next();
  return mix.next();
}

}  // namespace qdat
