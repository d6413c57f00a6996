// swreg: fit cheap sliced-bound regressions to exact Wasserstein distances
// and reuse them for bulk prediction, sweeps, k-NN, and matrix export.
//
// Every command writes into --out: its CSV/JSON artifacts plus manifest.txt
// echoing the resolved configuration. CSV bodies carry no timestamps, so
// identical flags and seed reproduce byte-identical files.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "swreg/common.hpp"
#include "swreg/csv.hpp"
#include "swreg/estimators.hpp"
#include "swreg/exact_ot.hpp"
#include "swreg/experiments.hpp"
#include "swreg/measure.hpp"
#include "swreg/parallel.hpp"
#include "swreg/regression.hpp"
#include "swreg/rng.hpp"

namespace fs = std::filesystem;
using namespace swreg;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::string dataset;
  std::string dataset_b;
  std::string train_dataset;
  std::string test_dataset;
  std::string pairs;
  std::string labels;
  std::string exclude;
  std::string model;
  std::string predictions;
  std::string out;
  std::string preset = "rg-se";
  std::string scorer = "exact";
  std::string mode = "uniform-random";
  std::string dims = "1,2,5,10";
  bool constrained = false;
  bool share_directions = true;
  double p = 2.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  int L = 100;
  int T = 50;
  double temperature = 1.0;
  std::size_t count = 0;
  int k = 5;
  int n_measures = 10;
  int dim = 2;
  int components = 3;
  int points_per_component = 100;
  double mean_scale = 5.0;
  double cov_scale = 1.0;
  int classes = 0;
  int pairs_per_d = 20;
};

// ---------------------------------------------------------------------------
// run manifest + reproducible CSV headers

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// Sorted key = value lines; the digest of this body names the configuration.
// The thread count is echoed but kept out of the digest, since results are
// schedule-independent.
class RunManifest {
 public:
  RunManifest(std::string command, const Options& o) : threads_(o.threads) {
    set("command", std::move(command));
    set("seed", std::to_string(o.seed));
  }

  void set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
  }
  void set(const std::string& key, double value) {
    entries_[key] = csv::format_double(value);
  }
  void set(const std::string& key, bool value) {
    entries_[key] = value ? "true" : "false";
  }
  template <typename Int>
    requires std::is_integral_v<Int>
  void set(const std::string& key, Int value) {
    entries_[key] = std::to_string(value);
  }

  std::string body() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries_) os << k << " = " << v << "\n";
    return os.str();
  }
  std::string digest() const { return hex16(fnv1a(body())); }

  void write(const fs::path& out_dir) const {
    std::ofstream f(out_dir / "manifest.txt");
    if (!f) throw DataError("cannot write manifest");
    f << "# version: " << kVersion << "\n" << body();
    f << "config_digest = " << digest() << "\n";
    f << "threads = " << threads_ << "\n";
  }

 private:
  std::map<std::string, std::string> entries_;
  int threads_;
};

fs::path ensure_out_dir(const std::string& out) {
  if (out.empty()) throw DataError("--out directory is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_csv(const fs::path& path, std::uint64_t seed,
                       const RunManifest& manifest) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open output file: " + path.string());
  f << "# version: " << kVersion << "\n";
  f << "# seed: " << seed << "\n";
  f << "# config: " << manifest.digest() << "\n";
  return f;
}

// ---------------------------------------------------------------------------
// pair / label file I/O

bool numeric_field(const std::string& field) {
  try {
    csv::parse_double(field);
    return true;
  } catch (const DataError&) {
    return false;
  }
}

std::uint32_t parse_index(const std::string& field) {
  long long v = csv::parse_int(field);
  if (v < 0 || v > std::numeric_limits<std::uint32_t>::max())
    throw DataError("pair index out of range: " + field);
  return static_cast<std::uint32_t>(v);
}

// CSV rows `i,j`; a leading non-numeric row is treated as a header. Pair
// order and duplicates are preserved as given.
std::vector<PairIndex> read_pairs_csv(const std::string& path) {
  std::vector<PairIndex> pairs;
  bool first = true;
  for (const std::string& line : csv::read_lines(path)) {
    std::vector<std::string> fields = csv::split_fields(line);
    if (first && !fields.empty() && !numeric_field(fields[0])) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 2)
      throw DataError("pairs file needs rows `i,j`: " + path);
    pairs.push_back(PairIndex{parse_index(fields[0]), parse_index(fields[1])});
  }
  if (pairs.empty()) throw DataError("no pairs in " + path);
  return pairs;
}

std::uint64_t unordered_key(PairIndex pair) {
  auto lo = std::min(pair.i, pair.j);
  auto hi = std::max(pair.i, pair.j);
  return (std::uint64_t(lo) << 32) | hi;
}

// CSV rows `i,j,value` keyed by unordered pair.
std::unordered_map<std::uint64_t, double> read_pair_values_csv(
    const std::string& path) {
  std::unordered_map<std::uint64_t, double> values;
  bool first = true;
  for (const std::string& line : csv::read_lines(path)) {
    std::vector<std::string> fields = csv::split_fields(line);
    if (first && !fields.empty() && !numeric_field(fields[0])) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 3)
      throw DataError("expected rows `i,j,value` in " + path);
    PairIndex pair{parse_index(fields[0]), parse_index(fields[1])};
    double v = csv::parse_double(fields[2]);
    if (!values.emplace(unordered_key(pair), v).second)
      throw DataError("duplicate pair in " + path);
  }
  if (values.empty()) throw DataError("no rows in " + path);
  return values;
}

void write_pair_rows(std::ofstream& f, const std::string& value_name,
                     const std::vector<PairIndex>& pairs,
                     const std::vector<double>& values) {
  f << "i,j," << value_name << "\n";
  for (std::size_t q = 0; q < pairs.size(); ++q)
    f << pairs[q].i << "," << pairs[q].j << ","
      << csv::format_double(values[q]) << "\n";
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

PresetSpec resolve_preset(const Options& o) {
  return preset_configs(preset_from_string(o.preset), o.p, o.L, o.T,
                        o.temperature);
}

void describe_predictors(RunManifest& m, const Options& o) {
  m.set("preset", o.preset);
  m.set("constrained", o.constrained);
  m.set("p", o.p);
  m.set("L", o.L);
  m.set("T", o.T);
  m.set("temperature", o.temperature);
  m.set("share_directions", o.share_directions);
}

// A scorer per --scorer value: the exact solver, a fitted model file, or a
// single named predictor (sw, ebsw, maxsw, pw, est, minswgg).
PairScorer resolve_scorer(const Options& o, RunManifest& manifest) {
  manifest.set("scorer", o.scorer);
  if (o.scorer == "exact") {
    manifest.set("p", o.p);
    return exact_scorer(o.p);
  }
  if (o.scorer == "model") {
    if (o.model.empty()) throw DataError("--scorer model needs --model");
    manifest.set("model", o.model);
    return model_scorer(load_model(o.model));
  }
  PredictorConfig config;
  config.kind = predictor_kind_from_string(o.scorer);
  config.L = config.kind == PredictorKind::kMaxSW ? 10 : o.L;
  config.T = o.T;
  config.temperature = o.temperature;
  config.p = o.p;
  manifest.set("p", o.p);
  manifest.set("L", config.L);
  manifest.set("T", o.T);
  manifest.set("temperature", o.temperature);
  return predictor_scorer(config);
}

// Class ids shared across train and test label strings, in sorted label
// order so ids are stable.
std::vector<int> label_ids(const std::vector<std::string>& labels,
                           const std::map<std::string, int>& id_of) {
  std::vector<int> ids;
  ids.reserve(labels.size());
  for (const std::string& label : labels) {
    auto it = id_of.find(label);
    if (it == id_of.end() || label.empty())
      throw DataError("dataset row lacks a class label");
    ids.push_back(it->second);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// commands

int cmd_label(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("label", o);
  manifest.set("dataset", o.dataset);
  manifest.set("pairs", o.pairs);
  manifest.set("p", o.p);

  MeasureDataset ds = load_dataset(o.dataset);
  std::vector<PairIndex> pairs = read_pairs_csv(o.pairs);
  PairLabeler labeler = exact_labeler(ds, o.p);
  std::vector<double> w(pairs.size());
  parallel_for(pairs.size(), o.threads,
               [&](std::size_t q) { w[q] = labeler(pairs[q]); });

  std::ofstream f = open_csv(out / "labels.csv", o.seed, manifest);
  write_pair_rows(f, "wasserstein", pairs, w);
  manifest.write(out);
  std::cout << "labeled " << pairs.size() << " pairs -> "
            << (out / "labels.csv").string() << "\n";
  return 0;
}

int cmd_fit(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("fit", o);
  manifest.set("dataset", o.dataset);
  manifest.set("pairs", o.pairs);
  describe_predictors(manifest, o);

  MeasureDataset ds = load_dataset(o.dataset);
  std::vector<PairIndex> pairs = read_pairs_csv(o.pairs);
  PresetSpec preset = resolve_preset(o);

  PairLabeler labeler;
  if (o.labels.empty()) {
    labeler = exact_labeler(ds, o.p);
    manifest.set("labels", std::string("computed"));
  } else {
    auto cached = read_pair_values_csv(o.labels);
    manifest.set("labels", o.labels);
    labeler = [cached = std::move(cached)](PairIndex pair) {
      auto it = cached.find(unordered_key(pair));
      if (it == cached.end())
        throw DataError("pair missing from label file");
      return it->second;
    };
  }

  DesignMatrix design = build_design(ds, pairs, preset.configs, o.seed,
                                     o.share_directions, labeler, o.threads);
  RegressionModel model;
  if (!o.constrained) {
    model = fit_unconstrained(design);
  } else if (preset.configs.size() == 2) {
    model = fit_constrained_k1(design);
  } else {
    model = fit_constrained_general(design, preset.lower_idx,
                                    preset.upper_idx);
  }

  save_model(model, (out / "model.json").string());
  manifest.write(out);

  std::cout << "fit " << o.preset << (o.constrained ? " constrained" : "")
            << " on " << pairs.size() << " pairs\n";
  std::cout << "weights:";
  for (Eigen::Index k = 0; k < model.weights.size(); ++k)
    std::cout << " " << csv::format_double(model.weights[k]);
  std::cout << "\ntraining rmse " << csv::format_double(model.fit_report.rmse)
            << ", r2 "
            << (model.fit_report.r2_defined
                    ? csv::format_double(model.fit_report.r2)
                    : std::string("undefined"))
            << "\n";
  if (model.fit_report.degenerate) std::cout << "degenerate fit\n";
  if (model.fit_report.rank_deficient) std::cout << "rank-deficient design\n";
  return 0;
}

int cmd_predict(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RegressionModel model = load_model(o.model);
  // features must come from the fitting streams unless explicitly overridden
  std::uint64_t seed = o.seed_given ? o.seed : model.seed;

  RunManifest manifest("predict", o);
  manifest.set("seed", std::to_string(seed));
  manifest.set("dataset", o.dataset);
  manifest.set("pairs", o.pairs);
  manifest.set("model", o.model);

  MeasureDataset ds = load_dataset(o.dataset);
  std::vector<PairIndex> pairs = read_pairs_csv(o.pairs);

  std::vector<double> predictions(pairs.size());
  parallel_for(pairs.size(), o.threads, [&](std::size_t q) {
    PairIndex pair = pairs[q];
    if (pair.i >= std::size_t(ds.size()) || pair.j >= std::size_t(ds.size()))
      throw DataError("pair index out of range");
    FeatureVector features = evaluate_features(
        ds.measures[pair.i], ds.measures[pair.j], model.configs,
        SeedSpec{seed, pair_stream(pair.i, pair.j)}, model.share_directions);
    predictions[q] = predict(model, features);
  });

  std::ofstream f = open_csv(out / "predictions.csv", seed, manifest);
  write_pair_rows(f, "prediction", pairs, predictions);
  manifest.write(out);
  std::cout << "predicted " << pairs.size() << " pairs -> "
            << (out / "predictions.csv").string() << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("eval", o);
  manifest.set("predictions", o.predictions);
  manifest.set("labels", o.labels);

  auto predicted_by_pair = read_pair_values_csv(o.predictions);
  auto actual_by_pair = read_pair_values_csv(o.labels);

  // join on the unordered pair key; file order is irrelevant
  std::vector<double> predicted, actual;
  for (const auto& [key, value] : actual_by_pair) {
    auto it = predicted_by_pair.find(key);
    if (it == predicted_by_pair.end()) continue;
    predicted.push_back(it->second);
    actual.push_back(value);
  }
  if (predicted.empty())
    throw DataError("prediction and label files share no pairs");

  MetricReport report = metrics(predicted, actual);
  report.seed = o.seed;
  report.config_digest = manifest.digest();

  std::ofstream f = open_csv(out / "metrics.csv", o.seed, manifest);
  f << "r2,mse,mae,n_pairs\n";
  f << (report.r2_defined ? csv::format_double(report.r2)
                          : std::string("nan"))
    << "," << csv::format_double(report.mse) << ","
    << csv::format_double(report.mae) << "," << report.n_pairs << "\n";
  manifest.write(out);

  std::cout << "n_pairs " << report.n_pairs << "\n";
  std::cout << "r2 "
            << (report.r2_defined ? csv::format_double(report.r2)
                                  : std::string("undefined"))
            << "\nmse " << csv::format_double(report.mse) << "\nmae "
            << csv::format_double(report.mae) << "\n";
  return 0;
}

int cmd_pairs(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("pairs", o);
  manifest.set("dataset", o.dataset);
  manifest.set("count", o.count);
  manifest.set("mode", o.mode);
  manifest.set("exclude", o.exclude.empty() ? "none" : o.exclude);

  MeasureDataset ds = load_dataset(o.dataset);
  auto n = static_cast<std::size_t>(ds.size());

  std::vector<PairIndex> pairs;
  if (o.exclude.empty()) {
    PairMode mode;
    if (o.mode == "all-unordered") {
      mode = PairMode::kAllUnordered;
    } else if (o.mode == "uniform-random") {
      mode = PairMode::kUniformRandom;
    } else {
      throw DataError("unknown pair mode: " + o.mode);
    }
    pairs = sample_pairs(n, o.count, SeedSpec{o.seed, 0}, mode);
  } else {
    // disjoint evaluation support: uniform pairs avoiding an existing file
    if (o.mode != "uniform-random")
      throw DataError("--exclude requires uniform-random mode");
    std::unordered_set<std::uint64_t> banned;
    for (PairIndex pair : read_pairs_csv(o.exclude))
      banned.insert(unordered_key(pair));
    std::vector<PairIndex> allowed;
    for (std::uint32_t i = 0; i + 1 < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j)
        if (!banned.count(unordered_key(PairIndex{i, j})))
          allowed.push_back(PairIndex{i, j});
    if (o.count > allowed.size())
      throw DataError("not enough pairs outside the excluded set");
    Rng rng(SeedSpec{o.seed, 0});
    for (std::size_t i = 0; i < o.count; ++i) {
      std::size_t j = i + rng.below(allowed.size() - i);
      std::swap(allowed[i], allowed[j]);
    }
    allowed.resize(o.count);
    pairs = std::move(allowed);
  }

  std::ofstream f = open_csv(out / "pairs.csv", o.seed, manifest);
  f << "i,j\n";
  for (PairIndex pair : pairs) f << pair.i << "," << pair.j << "\n";
  manifest.write(out);
  std::cout << "sampled " << pairs.size() << " pairs -> "
            << (out / "pairs.csv").string() << "\n";
  return 0;
}

int cmd_simulate(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("simulate", o);
  manifest.set("n_measures", o.n_measures);
  manifest.set("dim", o.dim);
  manifest.set("components", o.components);
  manifest.set("points_per_component", o.points_per_component);
  manifest.set("mean_scale", o.mean_scale);
  manifest.set("cov_scale", o.cov_scale);
  manifest.set("classes", o.classes);

  if (o.n_measures < 1) throw DataError("need at least one measure");
  if (o.classes < 0) throw DataError("--classes must be >= 0");

  GaussianMixtureSpec spec;
  spec.dim = o.dim;
  spec.components = o.components;
  spec.points_per_component = o.points_per_component;
  spec.mean_scale = o.mean_scale;
  spec.cov_scale = o.cov_scale;

  const SeedSpec root{o.seed, 0};
  int width = std::max(3, static_cast<int>(std::to_string(o.n_measures).size()));

  std::ofstream man(out / "dataset.csv");
  if (!man) throw DataError("cannot write dataset manifest");
  man << "path,label\n";
  for (int idx = 0; idx < o.n_measures; ++idx) {
    // classes > 0: measures of one class share component means (a template)
    // and differ only in point noise; classes == 0: fully independent draws
    SeedSpec means_seed, points_seed;
    std::string label;
    if (o.classes > 0) {
      int cls = idx % o.classes;
      means_seed = root.derive(mix_streams(1, std::uint64_t(cls)));
      label = std::to_string(cls);
    } else {
      means_seed = root.derive(mix_streams(1, 1'000'000 + std::uint64_t(idx)));
    }
    points_seed = root.derive(mix_streams(2, std::uint64_t(idx)));
    DiscreteMeasure measure =
        sample_gaussian_mixture(spec, means_seed, points_seed);

    std::ostringstream name;
    name << "cloud_" << std::setw(width) << std::setfill('0') << idx << ".csv";
    std::ofstream cloud(out / name.str());
    if (!cloud) throw DataError("cannot write " + name.str());
    for (Eigen::Index r = 0; r < measure.size(); ++r) {
      for (Eigen::Index c = 0; c < measure.dim(); ++c) {
        if (c) cloud << ",";
        cloud << csv::format_double(measure.supports()(r, c));
      }
      cloud << "\n";
    }
    man << name.str() << "," << label << "\n";
  }
  manifest.write(out);
  std::cout << "wrote " << o.n_measures << " clouds + "
            << (out / "dataset.csv").string() << "\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("sweep", o);
  manifest.set("dims", o.dims);
  manifest.set("preset", o.preset);
  manifest.set("pairs_per_d", o.pairs_per_d);
  manifest.set("components", o.components);
  manifest.set("points_per_component", o.points_per_component);
  manifest.set("mean_scale", o.mean_scale);
  manifest.set("cov_scale", o.cov_scale);

  std::vector<int> d_list;
  for (const std::string& field : csv::split_fields(o.dims))
    d_list.push_back(static_cast<int>(csv::parse_int(field)));

  GaussianMixtureSpec base;
  base.components = o.components;
  base.points_per_component = o.points_per_component;
  base.mean_scale = o.mean_scale;
  base.cov_scale = o.cov_scale;

  std::vector<SweepRow> rows =
      dimension_sweep(d_list, base, preset_from_string(o.preset),
                      o.pairs_per_d, o.seed, o.threads);

  std::ofstream f = open_csv(out / "sweep.csv", o.seed, manifest);
  f << "d,omega,r2\n";
  for (const SweepRow& row : rows) {
    f << row.d << "," << csv::format_double(row.omega) << ","
      << (row.r2_defined ? csv::format_double(row.r2) : std::string("nan"))
      << "\n";
  }
  manifest.write(out);
  for (const SweepRow& row : rows)
    std::cout << "d=" << row.d << " omega=" << csv::format_double(row.omega)
              << " r2="
              << (row.r2_defined ? csv::format_double(row.r2)
                                 : std::string("nan"))
              << (row.degenerate ? " (degenerate)" : "") << "\n";
  return 0;
}

int cmd_knn(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("knn", o);
  manifest.set("train_dataset", o.train_dataset);
  manifest.set("test_dataset", o.test_dataset);
  manifest.set("k", o.k);

  MeasureDataset train = load_dataset(o.train_dataset);
  MeasureDataset test = load_dataset(o.test_dataset);
  PairScorer scorer = resolve_scorer(o, manifest);

  std::map<std::string, int> id_of;
  for (const std::string& label : train.labels)
    if (!label.empty()) id_of.emplace(label, 0);
  for (const std::string& label : test.labels)
    if (!label.empty()) id_of.emplace(label, 0);
  int next_id = 0;
  for (auto& [label, id] : id_of) id = next_id++;

  std::vector<int> train_ids = label_ids(train.labels, id_of);

  Eigen::MatrixXd distances =
      pairwise_matrix(test, train, scorer, o.seed, o.threads);
  std::vector<int> predicted = knn_classify(distances, train_ids, o.k);

  // test labels are optional; accuracy only reported when all are present
  bool have_truth = !test.labels.empty();
  for (const std::string& label : test.labels)
    if (label.empty()) have_truth = false;

  std::size_t correct = 0;
  std::vector<std::string> id_to_label(id_of.size());
  for (const auto& [label, id] : id_of)
    id_to_label[static_cast<std::size_t>(id)] = label;

  std::ofstream f = open_csv(out / "knn.csv", o.seed, manifest);
  f << "test_index,predicted,actual\n";
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    const std::string& actual = have_truth ? test.labels[t] : std::string();
    const std::string& guess =
        id_to_label[static_cast<std::size_t>(predicted[t])];
    if (have_truth && guess == actual) ++correct;
    f << t << "," << guess << "," << actual << "\n";
  }
  manifest.write(out);

  if (have_truth) {
    double accuracy = double(correct) / double(predicted.size());
    std::cout << "accuracy " << csv::format_double(accuracy) << " ("
              << correct << "/" << predicted.size() << ")\n";
  } else {
    std::cout << "classified " << predicted.size()
              << " items (no ground-truth labels)\n";
  }
  return 0;
}

int cmd_matrix(const Options& o) {
  fs::path out = ensure_out_dir(o.out);
  RunManifest manifest("matrix", o);
  manifest.set("dataset", o.dataset);
  manifest.set("dataset_b", o.dataset_b.empty() ? "same" : o.dataset_b);

  MeasureDataset a = load_dataset(o.dataset);
  MeasureDataset b_storage;
  const MeasureDataset* b = &a;
  if (!o.dataset_b.empty()) {
    b_storage = load_dataset(o.dataset_b);
    b = &b_storage;
  }
  PairScorer scorer = resolve_scorer(o, manifest);

  Eigen::MatrixXd distances = pairwise_matrix(a, *b, scorer, o.seed, o.threads);

  std::ofstream f = open_csv(out / "matrix.csv", o.seed, manifest);
  for (Eigen::Index r = 0; r < distances.rows(); ++r) {
    for (Eigen::Index c = 0; c < distances.cols(); ++c) {
      if (c) f << ",";
      f << csv::format_double(distances(r, c));
    }
    f << "\n";
  }
  manifest.write(out);
  std::cout << "wrote " << distances.rows() << "x" << distances.cols()
            << " matrix -> " << (out / "matrix.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein distance regression over sliced bounds"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "key = value config file; flags override");
  app.require_subcommand(1);

  Options o;
  o.threads = resolve_threads(0);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Output directory")->required();
  };
  auto add_predictor_opts = [&](CLI::App* cmd) {
    cmd->add_option("--p", o.p, "Wasserstein order (ground metric l_p)")
        ->capture_default_str();
    cmd->add_option("--L", o.L, "Directions / candidates per predictor")
        ->capture_default_str();
    cmd->add_option("--T", o.T, "Optimization steps (maxsw, minswgg)")
        ->capture_default_str();
    cmd->add_option("--temperature", o.temperature,
                    "Softmax temperature (ebsw, est)")
        ->capture_default_str();
    cmd->add_flag("--share-directions,!--no-share-directions",
                  o.share_directions,
                  "Monte-Carlo predictors share one direction pool (default "
                  "on)");
  };
  auto add_mixture_opts = [&](CLI::App* cmd) {
    cmd->add_option("--components", o.components, "Mixture components")
        ->capture_default_str();
    cmd->add_option("--points-per-component", o.points_per_component,
                    "Support points per component")
        ->capture_default_str();
    cmd->add_option("--mean-scale", o.mean_scale,
                    "Component means ~ U[-s, s]^d")
        ->capture_default_str();
    cmd->add_option("--cov-scale", o.cov_scale, "Component std deviation")
        ->capture_default_str();
  };
  auto add_scorer_opts = [&](CLI::App* cmd) {
    cmd->add_option("--scorer", o.scorer,
                    "exact, model, or a predictor name (sw, ebsw, maxsw, pw, "
                    "est, minswgg)")
        ->capture_default_str();
    cmd->add_option("--model", o.model, "Model file for --scorer model");
    add_predictor_opts(cmd);
  };

  CLI::App* label = app.add_subcommand(
      "label", "Exact Wasserstein distances for a pairs file");
  label->add_option("--dataset", o.dataset, "Dataset manifest CSV")
      ->required();
  label->add_option("--pairs", o.pairs, "Pairs CSV (i,j)")->required();
  label->add_option("--p", o.p, "Wasserstein order")->capture_default_str();
  add_common(label);

  CLI::App* fit = app.add_subcommand(
      "fit", "Fit a regression of exact distances onto sliced bounds");
  fit->add_option("--dataset", o.dataset, "Dataset manifest CSV")->required();
  fit->add_option("--pairs", o.pairs, "Training pairs CSV (i,j)")->required();
  fit->add_option("--labels", o.labels,
                  "Cached labels CSV (i,j,wasserstein); computed when absent");
  fit->add_option("--preset", o.preset,
                  "Predictor bundle: rg-s, rg-e, rg-o, rg-se, rg-seo")
      ->capture_default_str();
  fit->add_flag("--constrained", o.constrained,
                "Interpolation weights in [0,1] per lower/upper pair");
  add_predictor_opts(fit);
  add_common(fit);

  CLI::App* predict = app.add_subcommand(
      "predict", "Apply a fitted model to new pairs");
  predict->add_option("--model", o.model, "Model JSON file")->required();
  predict->add_option("--dataset", o.dataset, "Dataset manifest CSV")
      ->required();
  predict->add_option("--pairs", o.pairs, "Pairs CSV (i,j)")->required();
  add_common(predict);

  CLI::App* eval = app.add_subcommand(
      "eval", "Score predictions against labels (r2, mse, mae)");
  eval->add_option("--predictions", o.predictions, "Predictions CSV")
      ->required();
  eval->add_option("--labels", o.labels, "Labels CSV")->required();
  add_common(eval);

  CLI::App* pairs = app.add_subcommand(
      "pairs", "Sample measure pairs from a dataset");
  pairs->add_option("--dataset", o.dataset, "Dataset manifest CSV")
      ->required();
  pairs->add_option("--count", o.count,
                    "Measures drawn (all-unordered) or pairs (uniform-random)")
      ->required();
  pairs->add_option("--mode", o.mode, "all-unordered or uniform-random")
      ->capture_default_str();
  pairs->add_option("--exclude", o.exclude,
                    "Pairs CSV to avoid (disjoint train/test splits)");
  add_common(pairs);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Write a synthetic Gaussian-mixture dataset");
  simulate->add_option("--n-measures", o.n_measures, "Measures to generate")
      ->capture_default_str();
  simulate->add_option("--dim", o.dim, "Ambient dimension")
      ->capture_default_str();
  simulate->add_option("--classes", o.classes,
                       "Shared mean templates (0 = independent measures)")
      ->capture_default_str();
  add_mixture_opts(simulate);
  add_common(simulate);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Fitted weight and held-out r2 across dimensions");
  sweep->add_option("--dims", o.dims, "Comma-separated dimension list")
      ->capture_default_str();
  sweep->add_option("--preset", o.preset, "rg-s, rg-e, or rg-o")
      ->capture_default_str();
  sweep->add_option("--pairs-per-d", o.pairs_per_d,
                    "Training pairs per dimension (same count held out)")
      ->capture_default_str();
  add_mixture_opts(sweep);
  add_common(sweep);

  CLI::App* knn = app.add_subcommand(
      "knn", "k-nearest-neighbor classification across two datasets");
  knn->add_option("--train-dataset", o.train_dataset, "Labeled train manifest")
      ->required();
  knn->add_option("--test-dataset", o.test_dataset, "Test manifest")
      ->required();
  knn->add_option("--k", o.k, "Neighbors")->capture_default_str();
  add_scorer_opts(knn);
  add_common(knn);

  CLI::App* matrix = app.add_subcommand(
      "matrix", "Pairwise distance matrix export");
  matrix->add_option("--dataset", o.dataset, "Row dataset manifest")
      ->required();
  matrix->add_option("--dataset-b", o.dataset_b,
                     "Column dataset manifest (defaults to --dataset)");
  add_scorer_opts(matrix);
  add_common(matrix);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  o.preset = lower(o.preset);
  o.scorer = lower(o.scorer);
  o.mode = lower(o.mode);
  o.threads = resolve_threads(o.threads);

  try {
    if (label->parsed()) return cmd_label(o);
    if (fit->parsed()) return cmd_fit(o);
    if (predict->parsed()) {
      o.seed_given = predict->count("--seed") > 0;
      return cmd_predict(o);
    }
    if (eval->parsed()) return cmd_eval(o);
    if (pairs->parsed()) return cmd_pairs(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (knn->parsed()) return cmd_knn(o);
    if (matrix->parsed()) return cmd_matrix(o);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
