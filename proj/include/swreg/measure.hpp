#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "swreg/rng.hpp"

namespace swreg {

/// Finitely supported probability measure: n support points in R^d plus a
/// weight per point. Weights are nonnegative and sum to 1; construction
/// renormalizes when the sum is within 1e-6 of 1 and rejects otherwise.
/// Immutable once built.
class DiscreteMeasure {
 public:
  /// `supports` is n x d (one point per row), `weights` has length n.
  DiscreteMeasure(Eigen::MatrixXd supports, Eigen::VectorXd weights);

  /// Uniform weights 1/n.
  static DiscreteMeasure uniform(Eigen::MatrixXd supports);

  /// Normalizes any positive-sum mass vector to a probability vector. This is
  /// the loader-side constructor: a raw mass profile like (2, 2) is accepted
  /// and scaled to (0.5, 0.5).
  static DiscreteMeasure from_masses(Eigen::MatrixXd supports,
                                     Eigen::VectorXd masses);

  Eigen::Index size() const { return supports_.rows(); }
  Eigen::Index dim() const { return supports_.cols(); }
  const Eigen::MatrixXd& supports() const { return supports_; }
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  Eigen::MatrixXd supports_;
  Eigen::VectorXd weights_;
};

/// A collection of measures sharing one ambient dimension, with a string label
/// per measure (empty when the manifest carries none).
struct MeasureDataset {
  std::vector<DiscreteMeasure> measures;
  std::vector<std::string> labels;

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(measures.size());
  }
  Eigen::Index dim() const { return measures.empty() ? 0 : measures[0].dim(); }
};

/// Unordered measure pair, stored with i < j.
struct PairIndex {
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  bool operator==(const PairIndex&) const = default;
};

/// Loads a dataset from a manifest CSV with header `path,label`. Each row
/// names a point-cloud CSV (headerless, one point per row) relative to the
/// manifest's directory; a `<cloud>.w` sibling file, when present, gives one
/// mass per point and is normalized to sum 1.
MeasureDataset load_dataset(const std::string& manifest_path);

enum class PairMode {
  kAllUnordered,   // draw `count` measures, return all pairs among them
  kUniformRandom,  // `count` pairs sampled without replacement
};

/// Deterministic pair sampling over measure indices [0, n). In all-unordered
/// mode `count` is the number of measures drawn (yielding count*(count-1)/2
/// pairs); in uniform-random mode it is the number of distinct pairs.
std::vector<PairIndex> sample_pairs(std::size_t n_measures, std::size_t count,
                                    SeedSpec seed, PairMode mode);

}  // namespace swreg
