#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "swreg/estimators.hpp"
#include "swreg/measure.hpp"

namespace swreg {

/// Per-pair predictor distances (rows) with exact Wasserstein distances as
/// the response, plus the provenance needed to rebuild features at predict
/// time (configs, master seed, direction sharing).
struct DesignMatrix {
  Eigen::MatrixXd S;  // M x K feature distances
  Eigen::VectorXd W;  // M exact distances
  std::vector<PairIndex> pair_ids;
  std::vector<PredictorConfig> configs;
  std::uint64_t seed = 0;
  bool share_directions = true;
};

struct FitReport {
  double rmse = 0.0;
  double r2 = 0.0;  // training R²; meaningless when !r2_defined
  bool r2_defined = true;
  bool rank_deficient = false;   // least-squares column rank < K
  bool degenerate = false;       // constrained: no row separates SL from SU
  bool underdetermined = false;  // fewer rows than fitted weights
};

/// A fitted linear model over predictor distances. Unconstrained mode stores
/// one weight per predictor; constrained mode stores one interpolation weight
/// per (lower, upper) pair, each in [0,1].
struct RegressionModel {
  Eigen::VectorXd weights;
  std::vector<PredictorConfig> configs;
  bool constrained = false;
  std::vector<int> lower_idx;
  std::vector<int> upper_idx;
  double p = 2.0;
  std::uint64_t seed = 0;
  std::size_t m = 0;  // training pair count
  bool share_directions = true;
  FitReport fit_report;
};

/// Distance label source for one pair; exact_labeler is the default.
using PairLabeler = std::function<double(PairIndex)>;

/// Labels a pair with the exact Wasserstein distance (p-th root).
PairLabeler exact_labeler(const MeasureDataset& dataset, double p);

/// Evaluates features and labels for every pair. Rows are independent and
/// parallelize across `threads`; per-pair seed streams keep the result
/// schedule-independent.
DesignMatrix build_design(const MeasureDataset& dataset,
                          const std::vector<PairIndex>& pairs,
                          const std::vector<PredictorConfig>& configs,
                          std::uint64_t master_seed, bool share_directions,
                          const PairLabeler& labeler, int threads = 1);

/// Ordinary least squares without intercept, via a rank-revealing complete
/// orthogonal decomposition: minimum-norm solution on rank deficiency, with
/// the condition flagged in fit_report.
RegressionModel fit_unconstrained(const DesignMatrix& design);

/// Closed-form constrained fit for one (lower, upper) pair: design must have
/// exactly two columns, lower first. ω̂ = Σ(SU−SL)(SU−W) / Σ(SU−SL)², then
/// clamped to [0,1]; an all-SL=SU design yields ω̂ = 0.5 and the degenerate
/// flag.
RegressionModel fit_constrained_k1(const DesignMatrix& design);

/// Box-constrained least squares over K (lower, upper) pairs, by projected
/// gradient descent with step 1/Λ (Λ bounds the quadratic's curvature),
/// stopping when the loss improvement falls below 1e-12 relative to the
/// initial loss or after 10⁴ iterations. Agrees with fit_constrained_k1 at
/// K=1 to 1e-8.
RegressionModel fit_constrained_general(const DesignMatrix& design,
                                        const std::vector<int>& lower_idx,
                                        const std::vector<int>& upper_idx);

/// Applies the model to one pair's features (configs must match the model's).
/// Unconstrained: ωᵀs clamped below at 0. Constrained: the average over pairs
/// k of ω_k·SL^(k) + (1−ω_k)·SU^(k), which always lies between the smallest
/// lower and largest upper feature.
double predict(const RegressionModel& model, const FeatureVector& features);

/// Versioned JSON round-trip; load rejects unknown versions and predictor
/// kinds. Weights survive exactly (shortest round-trip decimals).
void save_model(const RegressionModel& model, const std::string& path);
RegressionModel load_model(const std::string& path);

}  // namespace swreg
