#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "swreg/estimators.hpp"
#include "swreg/measure.hpp"
#include "swreg/regression.hpp"

namespace swreg {

struct GaussianMixtureSpec {
  int dim = 2;
  int components = 3;
  int points_per_component = 100;
  double mean_scale = 5.0;  // component means ~ U[-mean_scale, mean_scale]^d
  double cov_scale = 1.0;   // isotropic component std deviation
  SeedSpec seed;
};

/// Equal-sized isotropic Gaussian components with uniformly drawn means and
/// uniform point weights.
DiscreteMeasure sample_gaussian_mixture(const GaussianMixtureSpec& spec);

/// Same, but with the component means and the point noise drawn from separate
/// streams, so one "class template" (fixed means) can spawn many instances.
DiscreteMeasure sample_gaussian_mixture(const GaussianMixtureSpec& spec,
                                        SeedSpec means_seed,
                                        SeedSpec points_seed);

struct MetricReport {
  double r2 = 0.0;  // NaN when !r2_defined (constant actual values)
  double mse = 0.0;
  double mae = 0.0;
  bool r2_defined = true;
  std::size_t n_pairs = 0;
  std::uint64_t seed = 0;       // filled by callers that know it
  std::string config_digest;    // likewise
};

MetricReport metrics(const std::vector<double>& predicted,
                     const std::vector<double>& actual);

/// Majority vote over the k nearest train columns of each test row. Vote ties
/// break toward the smaller summed distance among tied classes, then toward
/// the lower class id. Neighbors order by (distance, train index).
std::vector<int> knn_classify(const Eigen::MatrixXd& test_to_train_distances,
                              const std::vector<int>& train_labels, int k);

/// Distance (p-th root) for one measure pair, given that cell's seed stream.
using PairScorer =
    std::function<double(const DiscreteMeasure&, const DiscreteMeasure&,
                         SeedSpec)>;

PairScorer exact_scorer(double p);
PairScorer model_scorer(RegressionModel model);
PairScorer predictor_scorer(PredictorConfig config);

/// All-pairs distances with deterministic per-cell seed streams. Passing the
/// same object as both datasets computes the upper triangle once and mirrors
/// it (zero diagonal falls out of the scorers themselves).
Eigen::MatrixXd pairwise_matrix(const MeasureDataset& dataset_a,
                                const MeasureDataset& dataset_b,
                                const PairScorer& scorer,
                                std::uint64_t master_seed, int threads = 1);

struct SweepRow {
  int d = 0;
  double omega = 0.0;
  double r2 = 0.0;
  bool r2_defined = true;
  bool degenerate = false;
};

/// Per dimension: draws fresh mixture pairs, fits the constrained K=1 model
/// on half of them, and reports the fitted weight plus held-out R². The
/// preset must be one of the single-pair bundles (rg-s, rg-e, rg-o).
std::vector<SweepRow> dimension_sweep(const std::vector<int>& d_list,
                                      const GaussianMixtureSpec& base,
                                      Preset preset, int pairs_per_d,
                                      std::uint64_t master_seed,
                                      int threads = 1);

}  // namespace swreg
