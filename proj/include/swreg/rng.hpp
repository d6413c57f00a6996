#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

namespace swreg {

using Direction = Eigen::VectorXd;

/// Identifies one independent random stream: a master seed plus a stream id.
/// Derivation is hierarchical, so every (pair, predictor) combination gets its
/// own stream and results do not depend on evaluation order.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// Child stream: same master, stream id mixed with `sub_stream`.
  SeedSpec derive(std::uint64_t sub_stream) const;

  bool operator==(const SeedSpec&) const = default;
};

/// Order-sensitive combine of two stream keys into one.
std::uint64_t mix_streams(std::uint64_t a, std::uint64_t b);

/// Stream key for an unordered measure pair. Keyed by the index values, not by
/// the position of the pair in any list, so reordering a pairs file does not
/// change per-pair randomness.
std::uint64_t pair_stream(std::uint64_t i, std::uint64_t j);

/// Deterministic generator. mt19937_64 seeded from a splitmix64 mix of
/// (master_seed, stream_id); uniform doubles take the top 53 bits; normals use
/// Box-Muller rather than std::normal_distribution so that the stream of
/// variates is identical across standard library implementations.
class Rng {
 public:
  explicit Rng(SeedSpec seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Gaussian vector normalized to unit Euclidean norm (uniform on the sphere).
Direction sample_direction(int dim, Rng& rng);

/// `count` independent unit directions from one stream.
std::vector<Direction> sample_directions(int dim, int count, SeedSpec seed);

}  // namespace swreg
