#pragma once

#include <cstddef>
#include <cstdint>

namespace emofuse {

/// SplitMix64 generator. The output stream depends only on the seed, so runs
/// reproduce across platforms. `split()` derives an independent child stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; one draw consumes two uniforms.
  double normal();
  /// Uniform integer in [0, n), rejection-sampled (no modulo bias). n > 0.
  std::size_t below(std::size_t n);
  Rng split();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace emofuse
