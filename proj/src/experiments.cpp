#include "swreg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "swreg/common.hpp"
#include "swreg/exact_ot.hpp"
#include "swreg/parallel.hpp"

namespace swreg {

namespace {

constexpr std::uint64_t kMeansStream = 0;
constexpr std::uint64_t kPointsStream = 1;
constexpr std::uint64_t kSweepDimStream = 3'000'017;

void check_mixture_spec(const GaussianMixtureSpec& spec) {
  if (spec.dim < 1) throw DataError("mixture dimension must be positive");
  if (spec.components < 1) throw DataError("mixture needs at least one component");
  if (spec.points_per_component < 1)
    throw DataError("mixture needs at least one point per component");
  if (!(spec.mean_scale >= 0.0) || !(spec.cov_scale >= 0.0))
    throw DataError("mixture scales must be non-negative");
}

}  // namespace

DiscreteMeasure sample_gaussian_mixture(const GaussianMixtureSpec& spec,
                                        SeedSpec means_seed,
                                        SeedSpec points_seed) {
  check_mixture_spec(spec);
  Rng mean_rng(means_seed);
  Eigen::MatrixXd means(spec.components, spec.dim);
  for (int c = 0; c < spec.components; ++c)
    for (int k = 0; k < spec.dim; ++k)
      means(c, k) = mean_rng.uniform(-spec.mean_scale, spec.mean_scale);

  Rng point_rng(points_seed);
  const int n = spec.components * spec.points_per_component;
  Eigen::MatrixXd supports(n, spec.dim);
  int row = 0;
  for (int c = 0; c < spec.components; ++c) {
    for (int i = 0; i < spec.points_per_component; ++i, ++row) {
      for (int k = 0; k < spec.dim; ++k)
        supports(row, k) = means(c, k) + spec.cov_scale * point_rng.normal();
    }
  }
  return DiscreteMeasure::uniform(std::move(supports));
}

DiscreteMeasure sample_gaussian_mixture(const GaussianMixtureSpec& spec) {
  return sample_gaussian_mixture(spec, spec.seed.derive(kMeansStream),
                                 spec.seed.derive(kPointsStream));
}

MetricReport metrics(const std::vector<double>& predicted,
                     const std::vector<double>& actual) {
  if (predicted.size() != actual.size())
    throw DataError("metrics need matching prediction/actual lengths");
  if (actual.empty()) throw DataError("metrics need at least one pair");

  MetricReport report;
  report.n_pairs = actual.size();
  const double inv_n = 1.0 / static_cast<double>(actual.size());

  double se = 0.0, ae = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double err = predicted[i] - actual[i];
    se += err * err;
    ae += std::abs(err);
    mean += actual[i];
  }
  report.mse = se * inv_n;
  report.mae = ae * inv_n;
  mean *= inv_n;

  double ss_tot = 0.0;
  for (double a : actual) ss_tot += (a - mean) * (a - mean);
  if (ss_tot > 0.0) {
    report.r2 = 1.0 - se / ss_tot;
  } else {
    report.r2 = std::numeric_limits<double>::quiet_NaN();
    report.r2_defined = false;
  }
  return report;
}

std::vector<int> knn_classify(const Eigen::MatrixXd& test_to_train_distances,
                              const std::vector<int>& train_labels, int k) {
  const auto n_train = static_cast<std::size_t>(test_to_train_distances.cols());
  if (train_labels.size() != n_train)
    throw DataError("one label per train column required");
  if (k < 1) throw DataError("k must be positive");
  if (static_cast<std::size_t>(k) > n_train)
    throw DataError("k exceeds the number of train items");

  std::vector<int> predicted(
      static_cast<std::size_t>(test_to_train_distances.rows()));
  std::vector<int> order(n_train);
  for (Eigen::Index r = 0; r < test_to_train_distances.rows(); ++r) {
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](int a, int b) {
                        const double da = test_to_train_distances(r, a);
                        const double db = test_to_train_distances(r, b);
                        if (da != db) return da < db;
                        return a < b;
                      });

    // class -> (votes, summed distance); ordered so equal (votes, distance)
    // resolves to the lowest class id
    std::map<int, std::pair<int, double>> tally;
    for (int t = 0; t < k; ++t) {
      auto& entry = tally[train_labels[static_cast<std::size_t>(order[t])]];
      entry.first += 1;
      entry.second += test_to_train_distances(r, order[t]);
    }
    int best_class = tally.begin()->first;
    std::pair<int, double> best = tally.begin()->second;
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
      const auto& [votes, dist] = it->second;
      if (votes > best.first || (votes == best.first && dist < best.second)) {
        best_class = it->first;
        best = it->second;
      }
    }
    predicted[static_cast<std::size_t>(r)] = best_class;
  }
  return predicted;
}

PairScorer exact_scorer(double p) {
  return [p](const DiscreteMeasure& mu, const DiscreteMeasure& nu, SeedSpec) {
    return std::pow(exact_wasserstein(mu, nu, p).cost_p, 1.0 / p);
  };
}

PairScorer model_scorer(RegressionModel model) {
  return [model = std::move(model)](const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu, SeedSpec seed) {
    const FeatureVector features =
        evaluate_features(mu, nu, model.configs, seed, model.share_directions);
    return predict(model, features);
  };
}

PairScorer predictor_scorer(PredictorConfig config) {
  return [config](const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  SeedSpec seed) {
    const FeatureVector features = evaluate_features(mu, nu, {config}, seed,
                                                     /*share_directions=*/true);
    return features.values[0];
  };
}

Eigen::MatrixXd pairwise_matrix(const MeasureDataset& dataset_a,
                                const MeasureDataset& dataset_b,
                                const PairScorer& scorer,
                                std::uint64_t master_seed, int threads) {
  if (dataset_a.size() == 0 || dataset_b.size() == 0)
    throw DataError("pairwise matrix needs non-empty datasets");
  if (dataset_a.dim() != dataset_b.dim())
    throw DataError("pairwise matrix needs matching dimensions");

  const bool mirrored = &dataset_a == &dataset_b;
  const std::size_t rows = dataset_a.size();
  const std::size_t cols = dataset_b.size();
  Eigen::MatrixXd result(rows, cols);

  parallel_for(rows, threads, [&](std::size_t i) {
    const std::size_t j_begin = mirrored ? i : 0;
    for (std::size_t j = j_begin; j < cols; ++j) {
      result(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          scorer(dataset_a.measures[i], dataset_b.measures[j],
                 SeedSpec{master_seed, pair_stream(i, j)});
    }
  });

  if (mirrored) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < i; ++j)
        result(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            result(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  }
  return result;
}

std::vector<SweepRow> dimension_sweep(const std::vector<int>& d_list,
                                      const GaussianMixtureSpec& base,
                                      Preset preset, int pairs_per_d,
                                      std::uint64_t master_seed, int threads) {
  if (preset != Preset::kRGs && preset != Preset::kRGe &&
      preset != Preset::kRGo)
    throw DataError("dimension sweep needs a single lower/upper pair preset");
  if (pairs_per_d < 2) throw DataError("dimension sweep needs at least 2 pairs per dimension");
  if (d_list.empty()) throw DataError("dimension sweep needs at least one dimension");

  std::vector<SweepRow> rows;
  rows.reserve(d_list.size());
  const SeedSpec root{master_seed, 0};

  for (int d : d_list) {
    GaussianMixtureSpec spec = base;
    spec.dim = d;
    check_mixture_spec(spec);

    const SeedSpec dim_seed =
        root.derive(mix_streams(kSweepDimStream, static_cast<std::uint64_t>(d)));

    // fit pairs first, then an equally sized disjoint held-out block
    const int total_pairs = 2 * pairs_per_d;
    MeasureDataset dataset;
    dataset.measures.reserve(static_cast<std::size_t>(2 * total_pairs));
    dataset.labels.assign(static_cast<std::size_t>(2 * total_pairs), "");
    for (int m = 0; m < 2 * total_pairs; ++m) {
      GaussianMixtureSpec inst = spec;
      inst.seed = dim_seed.derive(static_cast<std::uint64_t>(m));
      dataset.measures.push_back(sample_gaussian_mixture(inst));
    }
    std::vector<PairIndex> pairs;
    pairs.reserve(static_cast<std::size_t>(total_pairs));
    for (int q = 0; q < total_pairs; ++q)
      pairs.push_back(PairIndex{static_cast<std::uint32_t>(2 * q),
                                static_cast<std::uint32_t>(2 * q + 1)});

    const PresetSpec bundle = preset_configs(preset, 2.0);
    const DesignMatrix design =
        build_design(dataset, pairs, bundle.configs, master_seed,
                     /*share_directions=*/true, exact_labeler(dataset, 2.0),
                     threads);

    DesignMatrix fit_part;
    fit_part.S = design.S.topRows(pairs_per_d);
    fit_part.W = design.W.head(pairs_per_d);
    fit_part.pair_ids.assign(design.pair_ids.begin(),
                             design.pair_ids.begin() + pairs_per_d);
    fit_part.configs = design.configs;
    fit_part.seed = design.seed;
    fit_part.share_directions = design.share_directions;

    const RegressionModel model = fit_constrained_k1(fit_part);

    std::vector<double> predicted, actual;
    predicted.reserve(static_cast<std::size_t>(pairs_per_d));
    actual.reserve(static_cast<std::size_t>(pairs_per_d));
    for (int q = pairs_per_d; q < total_pairs; ++q) {
      FeatureVector fv;
      fv.values = {design.S(q, 0), design.S(q, 1)};
      fv.configs = design.configs;
      predicted.push_back(predict(model, fv));
      actual.push_back(design.W(q));
    }
    const MetricReport report = metrics(predicted, actual);

    SweepRow row;
    row.d = d;
    row.omega = model.weights[0];
    row.r2 = report.r2;
    row.r2_defined = report.r2_defined;
    row.degenerate = model.fit_report.degenerate;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace swreg
