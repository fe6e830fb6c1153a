#pragma once

#include <cstdint>
#include <random>

namespace rlsafe {

/// Deterministic random source. All stochastic code in the library draws
/// through this wrapper so that a (seed, call sequence) pair fully determines
/// the outcome on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform double in [0, 1), 53 bits of entropy.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Modulo bias is negligible for the small n
  /// used here (action counts, state counts).
  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 gen_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Counter-mode seed derivation: run `index` and `stream` select independent
/// substreams of a master seed, so parallel runs never share state and the
/// schedule of workers cannot affect results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t stream = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(index + 1)) ^
                    splitmix64(stream ^ 0xD6E8FEB86659FD93ull));
}

}  // namespace rlsafe
