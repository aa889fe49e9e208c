#pragma once

#include <cstdint>
#include <string_view>

namespace alphadesk {

/// Counter-free splittable RNG built on the splitmix64 mixer.
///
/// One global seed fans out into independent streams via labeled derivation
/// (`derive("miner")`, then `derive(generation)`, ...), so adding a consumer
/// never perturbs another stream and worker scheduling cannot change what any
/// stream produces. All outputs are fixed-algorithm and reproduce bit-exactly
/// for a given seed on any platform with IEEE-754 doubles.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : base_(mix(seed ^ kInit)), state_(base_) {}

  /// Independent child stream named by a label. Derivation is a function of
  /// the construction-time seed chain only: draws made on the parent never
  /// shift what a child produces.
  RngStream derive(std::string_view label) const;
  /// Independent child stream named by an index.
  RngStream derive(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Standard normal via the polar method.
  double normal();
  /// Bernoulli with probability p.
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  static constexpr std::uint64_t kInit = 0x8d2f1e6a3c5b9740ULL;
  static std::uint64_t mix(std::uint64_t x);

  std::uint64_t base_;   // seed-chain identity, fixed at construction
  std::uint64_t state_;  // advances with each draw
};

}  // namespace alphadesk
