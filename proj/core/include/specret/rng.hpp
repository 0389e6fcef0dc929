#pragma once

#include <cstdint>
#include <initializer_list>

#include "specret/common.hpp"

namespace specret {

/// Mixes a base seed with stream tags into an independent substream seed.
/// Built on splitmix64 so that (seed, tag...) -> seed' is stateless and
/// reproducible across platforms; all randomness in the library derives
/// from calls to this function.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Deterministic counter-based generator (splitmix64 core).
///
/// Unlike std::mt19937 + std::normal_distribution, every draw sequence is
/// fully specified here, so datasets and training runs replay bit-exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  /// Vector of i.i.d. standard normals.
  Vec normal_vec(int n);

  /// Partial Fisher-Yates: first k entries of a random permutation of [0, n).
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace specret
