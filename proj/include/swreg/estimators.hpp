#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "swreg/measure.hpp"
#include "swreg/ot1d.hpp"
#include "swreg/rng.hpp"

namespace swreg {

/// The six sliced predictors. SW/EBSW/MaxSW lower-bound the exact p-power
/// cost, PW/EST/MinSWGG upper-bound it.
enum class PredictorKind { kSW, kEBSW, kMaxSW, kPW, kEST, kMinSWGG };

std::string to_string(PredictorKind kind);
PredictorKind predictor_kind_from_string(const std::string& name);

struct PredictorConfig {
  PredictorKind kind = PredictorKind::kSW;
  int L = 100;               // directions / restarts / candidates
  int T = 50;                // optimization steps (MaxSW, MinSWGG)
  double step_size = 0.1;    // gradient-ascent step (MaxSW)
  double temperature = 1.0;  // softmax temperature (EBSW, EST)
  double p = 2.0;
  std::uint64_t seed_stream = 0;

  bool operator==(const PredictorConfig&) const = default;
  bool is_lower_bound() const;
  /// True for the plain Monte-Carlo kinds (SW, EBSW, PW, EST) that can share
  /// one direction pool per pair.
  bool is_monte_carlo() const;
};

/// Sub-stream keys used when deriving per-predictor randomness from a pair's
/// seed; exposed so tests can reproduce internal direction sets.
inline constexpr std::uint64_t kSharedDirectionsStream = 1'000'003;
inline constexpr std::uint64_t kPredictorStreamBase = 2'000'003;

/// Predictor bundles used by the named regression variants.
enum class Preset { kRGs, kRGe, kRGo, kRGse, kRGseo };

std::string to_string(Preset preset);
Preset preset_from_string(const std::string& name);

struct PresetSpec {
  std::vector<PredictorConfig> configs;
  std::vector<int> lower_idx;  // positions of lower-bound predictors
  std::vector<int> upper_idx;  // paired upper-bound positions
};

/// Configs for a preset. `L` sizes the Monte-Carlo direction pools and the
/// Min-SWGG candidate count; Max-SW keeps its own 10-restart default. `T`
/// applies to both optimizing predictors.
PresetSpec preset_configs(Preset preset, double p, int L = 100, int T = 50,
                          double temperature = 1.0);

/// Mean of per-direction 1D costs (p-power form).
double sw_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
              const std::vector<Direction>& directions, double p);

/// Softmax-weighted mean of 1D costs favoring high-cost directions:
/// weights ∝ exp(cost/temperature), computed with max-subtraction.
double ebsw_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                const std::vector<Direction>& directions, double p,
                double temperature);

/// Best-of-L restarts followed by T projected gradient-ascent steps on
/// θ ↦ w1d_cost(θ). Returns the best visited (p-power cost, direction);
/// the cost never falls below the best restart.
std::pair<double, Direction> maxsw_hat(const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu,
                                       const PredictorConfig& config,
                                       SeedSpec seed);

/// Mean of per-direction lifted costs (p-power form).
double pw_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
              const std::vector<Direction>& directions, double p);

/// Random search over L directions for the smallest lifted cost, then T
/// annealing steps (Gaussian perturbation, accept on decrease, scale halved
/// every T/4 steps). Returns the best (p-power cost, direction).
std::pair<double, Direction> minswgg_hat(const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu,
                                         const PredictorConfig& config,
                                         SeedSpec seed);

/// Softmax-weighted mean of lifted costs favoring low-cost directions:
/// weights ∝ exp(-cost/temperature).
double est_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
               const std::vector<Direction>& directions, double p,
               double temperature);

/// Per-pair predictor evaluations, as distances (p-th roots), ordered like
/// `configs`.
struct FeatureVector {
  std::vector<double> values;
  std::vector<PredictorConfig> configs;
};

/// Evaluates every predictor for one pair. `pair_seed` is the pair's own
/// stream (see pair_stream); with share_directions the Monte-Carlo kinds draw
/// from one direction pool (each taking its first L), which preserves the
/// lower ≤ exact ≤ upper chains among them.
FeatureVector evaluate_features(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu,
                                const std::vector<PredictorConfig>& configs,
                                SeedSpec pair_seed, bool share_directions);

}  // namespace swreg
