#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "swreg/common.hpp"
#include "swreg/estimators.hpp"
#include "swreg/exact_ot.hpp"
#include "swreg/measure.hpp"
#include "swreg/regression.hpp"
#include "swreg/rng.hpp"
#include "test_util.hpp"

using namespace swreg;
namespace fs = std::filesystem;

namespace {

DesignMatrix raw_design(Eigen::MatrixXd S, Eigen::VectorXd W) {
  DesignMatrix d;
  d.S = std::move(S);
  d.W = std::move(W);
  return d;
}

double sum_sq_loss(const Eigen::MatrixXd& S, const Eigen::VectorXd& W,
                   const Eigen::VectorXd& w) {
  return (S * w - W).squaredNorm();
}

// Loss of the constrained interpolation model at weights omega.
double constrained_loss(const DesignMatrix& d, const std::vector<int>& lo,
                        const std::vector<int>& hi,
                        const Eigen::VectorXd& omega) {
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(d.S.rows());
  for (std::size_t k = 0; k < lo.size(); ++k)
    pred += omega[Eigen::Index(k)] * d.S.col(lo[k]) +
            (1.0 - omega[Eigen::Index(k)]) * d.S.col(hi[k]);
  pred /= double(lo.size());
  return (pred - d.W).squaredNorm();
}

// Random bound-pair design: SL <= W-ish <= SU columns plus noise.
DesignMatrix random_bound_design(int M, int K, std::uint64_t seed) {
  Rng rng(SeedSpec{seed, 0});
  Eigen::MatrixXd S(M, 2 * K);
  Eigen::VectorXd W(M);
  for (int i = 0; i < M; ++i) {
    double w = 1.0 + 4.0 * rng.uniform();
    W[i] = w;
    for (int k = 0; k < K; ++k) {
      double gap_lo = rng.uniform(0.05, 1.0);
      double gap_hi = rng.uniform(0.05, 1.0);
      S(i, k) = w - gap_lo;
      S(i, K + k) = w + gap_hi;
    }
  }
  DesignMatrix d = raw_design(std::move(S), std::move(W));
  return d;
}

std::vector<int> iota_vec(int from, int count) {
  std::vector<int> v(count);
  for (int i = 0; i < count; ++i) v[i] = from + i;
  return v;
}

}  // namespace

TEST_CASE("unconstrained fit solves a consistent system exactly") {
  Eigen::MatrixXd S(3, 2);
  S << 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd W(3);
  W << 1, 2, 3;
  RegressionModel model = fit_unconstrained(raw_design(S, W));
  REQUIRE(model.weights.size() == 2);
  CHECK(model.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.weights[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(model.fit_report.rmse <= 1e-12);
  CHECK(model.fit_report.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(model.fit_report.rank_deficient);
  CHECK_FALSE(model.fit_report.underdetermined);
}

TEST_CASE("least squares is stationary against random perturbations") {
  Rng rng(SeedSpec{700, 0});
  for (int trial = 0; trial < 10; ++trial) {
    int M = 10 + int(rng.below(30));
    int K = 1 + int(rng.below(5));
    Eigen::MatrixXd S(M, K);
    Eigen::VectorXd W(M);
    for (int i = 0; i < M; ++i) {
      W[i] = rng.uniform(0.5, 4.0);
      for (int k = 0; k < K; ++k) S(i, k) = rng.uniform(0.1, 3.0);
    }
    RegressionModel model = fit_unconstrained(raw_design(S, W));
    double at_solution = sum_sq_loss(S, W, model.weights);
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::VectorXd delta(K);
      for (int k = 0; k < K; ++k) delta[k] = 1e-3 * rng.normal();
      CHECK(at_solution <= sum_sq_loss(S, W, model.weights + delta) + 1e-12);
    }
  }
}

TEST_CASE("duplicate columns flag rank deficiency but still minimize") {
  Rng rng(SeedSpec{701, 0});
  Eigen::MatrixXd S(12, 3);
  Eigen::VectorXd W(12);
  for (int i = 0; i < 12; ++i) {
    S(i, 0) = rng.uniform(0.1, 2.0);
    S(i, 1) = S(i, 0);  // exact copy
    S(i, 2) = rng.uniform(0.1, 2.0);
    W[i] = rng.uniform(0.5, 3.0);
  }
  RegressionModel model = fit_unconstrained(raw_design(S, W));
  CHECK(model.fit_report.rank_deficient);
  double at_solution = sum_sq_loss(S, W, model.weights);
  for (int probe = 0; probe < 50; ++probe) {
    Eigen::VectorXd delta(3);
    for (int k = 0; k < 3; ++k) delta[k] = 1e-3 * rng.normal();
    CHECK(at_solution <= sum_sq_loss(S, W, model.weights + delta) + 1e-12);
  }
}

TEST_CASE("underdetermined designs interpolate and are flagged") {
  Rng rng(SeedSpec{702, 0});
  Eigen::MatrixXd S(2, 4);
  Eigen::VectorXd W(2);
  for (int i = 0; i < 2; ++i) {
    W[i] = rng.uniform(1.0, 2.0);
    for (int k = 0; k < 4; ++k) S(i, k) = rng.uniform(0.1, 3.0);
  }
  RegressionModel model = fit_unconstrained(raw_design(S, W));
  CHECK(model.fit_report.underdetermined);
  CHECK(model.fit_report.rmse <= 1e-9);
}

TEST_CASE("closed-form constrained weight beats a fine grid") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DesignMatrix d = random_bound_design(25, 1, 7100 + seed);
    RegressionModel model = fit_constrained_k1(d);
    double omega = model.weights[0];
    CHECK(omega >= 0.0);
    CHECK(omega <= 1.0);

    double best_grid = std::numeric_limits<double>::infinity();
    double best_at = 0.0;
    for (int g = 0; g <= 10000; ++g) {
      Eigen::VectorXd w(1);
      w << double(g) / 10000.0;
      double loss = constrained_loss(d, {0}, {1}, w);
      if (loss < best_grid) {
        best_grid = loss;
        best_at = w[0];
      }
    }
    CHECK(std::abs(omega - best_at) <= 1e-4 + 1e-12);
    Eigen::VectorXd at(1);
    at << omega;
    CHECK(constrained_loss(d, {0}, {1}, at) <= best_grid + 1e-12);
  }
}

TEST_CASE("constrained weight clamps at the box edges") {
  // response far above every upper bound: all weight on the upper column
  Eigen::MatrixXd S(4, 2);
  S << 1, 2, 1.5, 2.5, 0.5, 1.8, 1.2, 2.2;
  Eigen::VectorXd high(4), low(4);
  high << 10, 11, 9, 12;
  low << 0.01, 0.02, 0.01, 0.03;
  CHECK(fit_constrained_k1(raw_design(S, high)).weights[0] == 0.0);
  CHECK(fit_constrained_k1(raw_design(S, low)).weights[0] == 1.0);
}

TEST_CASE("identical bounds degenerate to omega = 1/2") {
  Eigen::MatrixXd S(3, 2);
  S << 1, 1, 2, 2, 3, 3;
  Eigen::VectorXd W(3);
  W << 1, 2, 3;
  RegressionModel model = fit_constrained_k1(raw_design(S, W));
  CHECK(model.weights[0] == 0.5);
  CHECK(model.fit_report.degenerate);

  // inverted bounds are rejected
  Eigen::MatrixXd bad(2, 2);
  bad << 2, 1, 3, 1;
  Eigen::VectorXd W2(2);
  W2 << 1, 1;
  CHECK_THROWS_AS(fit_constrained_k1(raw_design(bad, W2)), DataError);
}

TEST_CASE("general constrained solver agrees with the closed form at K=1") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DesignMatrix d = random_bound_design(20, 1, 7200 + seed);
    double closed = fit_constrained_k1(d).weights[0];
    double iterative = fit_constrained_general(d, {0}, {1}).weights[0];
    CHECK(std::abs(closed - iterative) <= 1e-8);
  }
}

TEST_CASE("general constrained fit is optimal over the box") {
  Rng rng(SeedSpec{703, 0});
  for (int trial = 0; trial < 6; ++trial) {
    int K = 2 + trial % 3;
    DesignMatrix d = random_bound_design(30, K, 7300 + std::uint64_t(trial));
    std::vector<int> lo = iota_vec(0, K), hi = iota_vec(K, K);
    RegressionModel model = fit_constrained_general(d, lo, hi);
    Eigen::VectorXd omega = model.weights;
    for (int k = 0; k < K; ++k) {
      CHECK(omega[k] >= 0.0);
      CHECK(omega[k] <= 1.0);
    }
    double at_solution = constrained_loss(d, lo, hi, omega);
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::VectorXd candidate(K);
      for (int k = 0; k < K; ++k) {
        candidate[k] =
            std::clamp(omega[k] + 1e-3 * rng.normal(), 0.0, 1.0);
      }
      CHECK(at_solution <= constrained_loss(d, lo, hi, candidate) + 1e-10);
    }
  }
}

TEST_CASE("constrained weights are invariant to rescaling the problem") {
  // powers of two keep the arithmetic exact, so equality is bitwise
  DesignMatrix d = random_bound_design(24, 3, 7400);
  std::vector<int> lo = iota_vec(0, 3), hi = iota_vec(3, 3);
  DesignMatrix scaled = d;
  scaled.S *= 1024.0;
  scaled.W *= 1024.0;

  RegressionModel base = fit_constrained_general(d, lo, hi);
  RegressionModel big = fit_constrained_general(scaled, lo, hi);
  CHECK(base.weights == big.weights);

  DesignMatrix d1 = random_bound_design(24, 1, 7401);
  DesignMatrix d1s = d1;
  d1s.S *= 1024.0;
  d1s.W *= 1024.0;
  CHECK(fit_constrained_k1(d1).weights[0] ==
        fit_constrained_k1(d1s).weights[0]);
}

TEST_CASE("design building matches manual feature evaluation") {
  MeasureDataset ds;
  for (int i = 0; i < 4; ++i) {
    ds.measures.push_back(test_util::random_measure(6, 2, 7500, i));
    ds.labels.emplace_back();
  }
  std::vector<PairIndex> pairs = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  PresetSpec preset = preset_configs(Preset::kRGse, 2.0, 12, 6);

  DesignMatrix design = build_design(ds, pairs, preset.configs, 99,
                                     /*share_directions=*/true,
                                     exact_labeler(ds, 2.0), 1);
  REQUIRE(design.S.rows() == 4);
  REQUIRE(design.S.cols() == 4);
  CHECK(design.seed == 99);
  CHECK(design.share_directions);
  CHECK(design.configs == preset.configs);

  for (std::size_t q = 0; q < pairs.size(); ++q) {
    FeatureVector fv = evaluate_features(
        ds.measures[pairs[q].i], ds.measures[pairs[q].j], preset.configs,
        SeedSpec{99, pair_stream(pairs[q].i, pairs[q].j)}, true);
    for (int k = 0; k < 4; ++k)
      CHECK(design.S(Eigen::Index(q), k) == fv.values[std::size_t(k)]);
    double w = std::sqrt(
        exact_wasserstein(ds.measures[pairs[q].i], ds.measures[pairs[q].j],
                          2.0)
            .cost_p);
    CHECK(design.W[Eigen::Index(q)] == doctest::Approx(w).epsilon(1e-15));
  }

  // same rows regardless of worker count
  DesignMatrix threaded = build_design(ds, pairs, preset.configs, 99, true,
                                       exact_labeler(ds, 2.0), 3);
  CHECK(threaded.S == design.S);
  CHECK(threaded.W == design.W);

  std::vector<PairIndex> bad = {{0, 9}};
  CHECK_THROWS_AS(
      build_design(ds, bad, preset.configs, 99, true, exact_labeler(ds, 2.0), 1),
      DataError);
}

TEST_CASE("exact labeler returns distances and zero for self pairs") {
  MeasureDataset ds;
  ds.measures.push_back(test_util::random_measure(5, 2, 7600, 0));
  ds.measures.push_back(test_util::random_measure(5, 2, 7600, 1));
  ds.labels = {"", ""};
  PairLabeler labeler = exact_labeler(ds, 2.0);
  CHECK(labeler(PairIndex{0, 0}) == 0.0);
  double w01 = labeler(PairIndex{0, 1});
  CHECK(w01 > 0.0);
  CHECK(w01 * w01 ==
        doctest::Approx(
            exact_wasserstein(ds.measures[0], ds.measures[1], 2.0).cost_p)
            .epsilon(1e-12));
}

TEST_CASE("prediction applies weights with clamping at zero") {
  PresetSpec preset = preset_configs(Preset::kRGs, 2.0);
  RegressionModel model;
  model.configs = preset.configs;
  model.constrained = false;
  model.weights = Eigen::VectorXd(2);
  model.weights << -2.0, 0.5;

  FeatureVector fv;
  fv.configs = preset.configs;
  fv.values = {1.0, 1.0};
  CHECK(predict(model, fv) == 0.0);  // negative response clamps
  fv.values = {0.1, 2.0};
  CHECK(predict(model, fv) == doctest::Approx(0.8).epsilon(1e-15));

  FeatureVector mismatched;
  mismatched.configs = preset_configs(Preset::kRGe, 2.0).configs;
  mismatched.values = {1.0, 1.0};
  CHECK_THROWS_AS(predict(model, mismatched), DataError);
}

TEST_CASE("constrained predictions interpolate their bounds") {
  PresetSpec preset = preset_configs(Preset::kRGseo, 2.0);
  RegressionModel model;
  model.configs = preset.configs;
  model.constrained = true;
  model.lower_idx = {0, 1, 2};
  model.upper_idx = {3, 4, 5};
  model.weights = Eigen::VectorXd(3);
  model.weights << 0.2, 0.9, 0.5;

  Rng rng(SeedSpec{7700, 0});
  for (int trial = 0; trial < 50; ++trial) {
    FeatureVector fv;
    fv.configs = preset.configs;
    double base = rng.uniform(0.5, 3.0);
    std::vector<double> lows(3), highs(3);
    for (int k = 0; k < 3; ++k) {
      lows[k] = base - rng.uniform(0.0, 0.4);
      highs[k] = base + rng.uniform(0.0, 0.4);
    }
    fv.values = {lows[0], lows[1], lows[2], highs[0], highs[1], highs[2]};
    double pred = predict(model, fv);
    CHECK(pred >= *std::min_element(lows.begin(), lows.end()) - 1e-12);
    CHECK(pred <= *std::max_element(highs.begin(), highs.end()) + 1e-12);
  }
}

TEST_CASE("model files round-trip exactly") {
  fs::path dir = test_util::temp_dir("model_roundtrip");
  DesignMatrix d = random_bound_design(15, 2, 7800);
  d.configs = preset_configs(Preset::kRGse, 2.0, 40, 20, 1.5).configs;
  d.seed = 31337;
  d.share_directions = false;
  RegressionModel model =
      fit_constrained_general(d, {0, 1}, {2, 3});

  std::string path = (dir / "model.json").string();
  save_model(model, path);
  RegressionModel back = load_model(path);

  CHECK(back.weights == model.weights);  // bit-exact
  CHECK(back.configs == model.configs);
  CHECK(back.constrained == model.constrained);
  CHECK(back.lower_idx == model.lower_idx);
  CHECK(back.upper_idx == model.upper_idx);
  CHECK(back.p == model.p);
  CHECK(back.seed == 31337);
  CHECK(back.m == model.m);
  CHECK(back.share_directions == false);
  CHECK(back.fit_report.rmse == model.fit_report.rmse);
  CHECK(back.fit_report.r2 == model.fit_report.r2);
  CHECK(back.fit_report.degenerate == model.fit_report.degenerate);
}

TEST_CASE("undefined training r2 round-trips as a null") {
  fs::path dir = test_util::temp_dir("model_nan_r2");
  Eigen::MatrixXd S(3, 2);
  S << 1, 2, 0.5, 2.5, 1.2, 2.2;
  Eigen::VectorXd W = Eigen::VectorXd::Constant(3, 1.5);  // constant response
  DesignMatrix d = raw_design(S, W);
  d.configs = preset_configs(Preset::kRGs, 2.0).configs;
  RegressionModel model = fit_constrained_k1(d);
  CHECK_FALSE(model.fit_report.r2_defined);

  std::string path = (dir / "model.json").string();
  save_model(model, path);
  RegressionModel back = load_model(path);
  CHECK_FALSE(back.fit_report.r2_defined);
  CHECK(std::isnan(back.fit_report.r2));
}

TEST_CASE("model loading rejects bad files") {
  fs::path dir = test_util::temp_dir("model_bad");

  test_util::write_file(dir / "v2.json", R"({"version": 2})");
  CHECK_THROWS_AS(load_model((dir / "v2.json").string()), DataError);

  test_util::write_file(dir / "garbage.json", "{not json");
  CHECK_THROWS_AS(load_model((dir / "garbage.json").string()), DataError);

  test_util::write_file(dir / "missing.json", R"({"version": 1, "p": 2.0})");
  CHECK_THROWS_AS(load_model((dir / "missing.json").string()), DataError);

  CHECK_THROWS_AS(load_model((dir / "absent.json").string()), DataError);
}

TEST_CASE("design validation") {
  Eigen::MatrixXd S(2, 2);
  S << 1, 2, 3, 4;
  Eigen::VectorXd W(2);
  W << 1, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fit_unconstrained(raw_design(S, W)), DataError);
  W << 1, -0.5;
  CHECK_THROWS_AS(fit_unconstrained(raw_design(S, W)), DataError);

  Eigen::MatrixXd S3(2, 3);
  S3 << 1, 2, 3, 4, 5, 6;
  W << 1, 2;
  CHECK_THROWS_AS(fit_constrained_k1(raw_design(S3, W)), DataError);
  CHECK_THROWS_AS(fit_constrained_general(raw_design(S3, W), {0}, {5}),
                  DataError);
  CHECK_THROWS_AS(fit_constrained_general(raw_design(S3, W), {0, 1}, {2}),
                  DataError);
}
