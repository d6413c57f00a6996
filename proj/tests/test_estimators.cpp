#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "swreg/common.hpp"
#include "swreg/estimators.hpp"
#include "swreg/exact_ot.hpp"
#include "swreg/measure.hpp"
#include "swreg/ot1d.hpp"
#include "swreg/rng.hpp"
#include "test_util.hpp"

using namespace swreg;

namespace {

Direction axis(int dim, int k) {
  Direction v = Direction::Zero(dim);
  v[k] = 1.0;
  return v;
}

DiscreteMeasure atom2(double x, double y) {
  Eigen::MatrixXd m(1, 2);
  m << x, y;
  return DiscreteMeasure::uniform(m);
}

}  // namespace

TEST_CASE("sw/pw are plain direction means") {
  // single atoms: per-direction 1D cost is |<theta, v>|^2, lifted is |v|^2
  DiscreteMeasure mu = atom2(0, 0);
  DiscreteMeasure nu = atom2(1, std::sqrt(3.0));
  std::vector<Direction> dirs = {axis(2, 0), axis(2, 1)};

  CHECK(sw_hat(mu, nu, dirs, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pw_hat(mu, nu, dirs, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("sw on single atoms approaches |v|^2 / d") {
  // E[<theta, v>^2] = |v|^2/d for uniform unit directions
  DiscreteMeasure mu = atom2(0, 0);
  DiscreteMeasure nu = atom2(3, 4);
  auto dirs = sample_directions(2, 100000, SeedSpec{6, 6});
  double expected = 25.0 / 2.0;
  CHECK(sw_hat(mu, nu, dirs, 2.0) ==
        doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("ebsw softmax-weights high-cost directions (hand value)") {
  // 1D costs along the axes: 1 and 3; weights e^1, e^3 at temperature 1
  DiscreteMeasure mu = atom2(0, 0);
  DiscreteMeasure nu = atom2(1, std::sqrt(3.0));
  std::vector<Direction> dirs = {axis(2, 0), axis(2, 1)};

  double e1 = std::exp(1.0), e3 = std::exp(3.0);
  double want = (1.0 * e1 + 3.0 * e3) / (e1 + e3);
  double got = ebsw_hat(mu, nu, dirs, 2.0, 1.0);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(got == doctest::Approx(2.7616).epsilon(1e-3));

  // hot limit -> plain mean; cold limit -> max
  CHECK(ebsw_hat(mu, nu, dirs, 2.0, 1e8) ==
        doctest::Approx(2.0).epsilon(1e-6));
  CHECK(ebsw_hat(mu, nu, dirs, 2.0, 1e-3) ==
        doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("est softmax-weights low-cost directions (hand value)") {
  // two-point measures where axis 0 induces the optimal plan (lifted 1) and
  // axis 1 induces the crossed plan (lifted 5)
  Eigen::MatrixXd xs(2, 2), ys(2, 2);
  xs << 0, 0, 2, 0;
  ys << 2, 1, 0, 1;
  DiscreteMeasure mu = DiscreteMeasure::uniform(xs);
  DiscreteMeasure nu = DiscreteMeasure::uniform(ys);
  std::vector<Direction> dirs = {axis(2, 0), axis(2, 1)};

  REQUIRE(lifted_cost(mu, nu, axis(2, 0), 2.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(lifted_cost(mu, nu, axis(2, 1), 2.0) ==
          doctest::Approx(5.0).epsilon(1e-12));

  double w1 = std::exp(-1.0), w5 = std::exp(-5.0);
  double want = (1.0 * w1 + 5.0 * w5) / (w1 + w5);
  CHECK(est_hat(mu, nu, dirs, 2.0, 1.0) ==
        doctest::Approx(want).epsilon(1e-12));
  // cold limit -> min of lifted costs
  CHECK(est_hat(mu, nu, dirs, 2.0, 1e-3) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("softmax estimators stay between min and max of their costs") {
  for (int trial = 0; trial < 10; ++trial) {
    auto mu = test_util::random_measure(6, 3, 5100, 2 * trial);
    auto nu = test_util::random_measure(5, 3, 5100, 2 * trial + 1);
    auto dirs = sample_directions(3, 16, SeedSpec{501, std::uint64_t(trial)});
    double sw = sw_hat(mu, nu, dirs, 2.0);
    double ebsw = ebsw_hat(mu, nu, dirs, 2.0, 1.0);
    double pw = pw_hat(mu, nu, dirs, 2.0);
    double est = est_hat(mu, nu, dirs, 2.0, 1.0);
    CHECK(ebsw >= sw - 1e-12);  // upweighting high costs
    CHECK(est <= pw + 1e-12);   // downweighting high costs
  }
}

TEST_CASE("maxsw tracks a dense direction-grid oracle in 2d") {
  auto mu = test_util::random_measure(12, 2, 5200, 0, 1.0, 0.0);
  auto nu = test_util::random_measure(9, 2, 5200, 1, 1.5, 2.0);

  double grid_best = 0.0;
  for (int a = 0; a < 720; ++a) {
    double t = std::numbers::pi * double(a) / 720.0;
    Direction theta(2);
    theta << std::cos(t), std::sin(t);
    grid_best = std::max(
        grid_best, w1d_cost(project(mu, theta), project(nu, theta), 2.0));
  }

  PredictorConfig config;
  config.kind = PredictorKind::kMaxSW;
  config.L = 10;
  config.T = 50;
  auto [cost, theta] = maxsw_hat(mu, nu, config, SeedSpec{5201, 0});

  // never beats the true max; gets within 1% of the dense grid
  double exact = exact_wasserstein(mu, nu, 2.0).cost_p;
  CHECK(cost <= exact + 1e-9 * (1.0 + exact));
  CHECK(cost >= 0.99 * grid_best);
  // the reported direction reproduces the reported value
  CHECK(w1d_cost(project(mu, theta), project(nu, theta), 2.0) ==
        doctest::Approx(cost).epsilon(1e-12).scale(1.0 + cost));
  CHECK(std::abs(theta.norm() - 1.0) <= 1e-12);
}

TEST_CASE("more ascent steps never hurt maxsw under one seed") {
  auto mu = test_util::random_measure(10, 4, 5300, 0);
  auto nu = test_util::random_measure(10, 4, 5300, 1, 1.0, 1.0);
  PredictorConfig base;
  base.kind = PredictorKind::kMaxSW;
  base.L = 5;
  for (int T : {0, 5, 50}) {
    PredictorConfig more = base;
    more.T = T;
    PredictorConfig none = base;
    none.T = 0;
    double with_steps = maxsw_hat(mu, nu, more, SeedSpec{5301, 9}).first;
    double without = maxsw_hat(mu, nu, none, SeedSpec{5301, 9}).first;
    CHECK(with_steps >= without - 1e-15);
  }
}

TEST_CASE("minswgg returns a consistent, improving upper bound") {
  auto mu = test_util::random_measure(11, 3, 5400, 0);
  auto nu = test_util::random_measure(8, 3, 5400, 1, 2.0, 0.5);
  double exact = exact_wasserstein(mu, nu, 2.0).cost_p;

  PredictorConfig config;
  config.kind = PredictorKind::kMinSWGG;
  config.L = 20;
  config.T = 40;
  auto [cost, theta] = minswgg_hat(mu, nu, config, SeedSpec{5401, 0});

  CHECK(cost >= exact - 1e-9 * (1.0 + exact));
  CHECK(lifted_cost(mu, nu, theta, 2.0) ==
        doctest::Approx(cost).epsilon(1e-12).scale(1.0 + cost));

  // annealing from the same candidates only improves
  PredictorConfig raw = config;
  raw.T = 0;
  double unannealed = minswgg_hat(mu, nu, raw, SeedSpec{5401, 0}).first;
  CHECK(cost <= unannealed + 1e-15);
}

TEST_CASE("presets bundle the documented predictor lists") {
  PresetSpec s = preset_configs(Preset::kRGs, 2.0, 64, 10, 1.0);
  REQUIRE(s.configs.size() == 2);
  CHECK(s.configs[0].kind == PredictorKind::kSW);
  CHECK(s.configs[1].kind == PredictorKind::kPW);
  CHECK(s.configs[0].L == 64);
  CHECK(s.lower_idx == std::vector<int>{0});
  CHECK(s.upper_idx == std::vector<int>{1});

  PresetSpec e = preset_configs(Preset::kRGe, 2.0);
  CHECK(e.configs[0].kind == PredictorKind::kEBSW);
  CHECK(e.configs[1].kind == PredictorKind::kEST);

  PresetSpec o = preset_configs(Preset::kRGo, 2.0, 64);
  CHECK(o.configs[0].kind == PredictorKind::kMaxSW);
  CHECK(o.configs[0].L == 10);  // maxsw keeps its restart default
  CHECK(o.configs[1].kind == PredictorKind::kMinSWGG);
  CHECK(o.configs[1].L == 64);

  PresetSpec se = preset_configs(Preset::kRGse, 2.0);
  REQUIRE(se.configs.size() == 4);
  CHECK(se.lower_idx == std::vector<int>{0, 1});
  CHECK(se.upper_idx == std::vector<int>{2, 3});

  PresetSpec seo = preset_configs(Preset::kRGseo, 2.0);
  REQUIRE(seo.configs.size() == 6);
  CHECK(seo.configs[2].kind == PredictorKind::kMaxSW);
  CHECK(seo.configs[5].kind == PredictorKind::kMinSWGG);
  CHECK(seo.lower_idx == std::vector<int>{0, 1, 2});
  CHECK(seo.upper_idx == std::vector<int>{3, 4, 5});
  // distinct per-predictor seed streams
  for (std::size_t k = 0; k < seo.configs.size(); ++k)
    CHECK(seo.configs[k].seed_stream == k);

  CHECK_THROWS_AS(preset_configs(Preset::kRGs, 0.5), DataError);
  CHECK_THROWS_AS(preset_configs(Preset::kRGs, 2.0, 0), DataError);
}

TEST_CASE("kind names round-trip") {
  for (PredictorKind kind :
       {PredictorKind::kSW, PredictorKind::kEBSW, PredictorKind::kMaxSW,
        PredictorKind::kPW, PredictorKind::kEST, PredictorKind::kMinSWGG})
    CHECK(predictor_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(predictor_kind_from_string("swgg"), DataError);

  for (Preset preset : {Preset::kRGs, Preset::kRGe, Preset::kRGo,
                        Preset::kRGse, Preset::kRGseo})
    CHECK(preset_from_string(to_string(preset)) == preset);
  CHECK_THROWS_AS(preset_from_string("rg-x"), DataError);
}

TEST_CASE("features come back as distances in config order") {
  auto mu = test_util::random_measure(7, 3, 5500, 0);
  auto nu = test_util::random_measure(6, 3, 5500, 1, 1.0, 0.7);
  PresetSpec seo = preset_configs(Preset::kRGseo, 2.0, 24, 12);

  FeatureVector fv = evaluate_features(mu, nu, seo.configs,
                                       SeedSpec{5501, 77}, true);
  REQUIRE(fv.values.size() == 6);
  CHECK(fv.configs == seo.configs);
  for (double v : fv.values) CHECK(v >= 0.0);

  // shared pool: sw/ebsw/pw/est values equal the hand-built estimates over
  // the same prefix of the shared direction stream
  auto pool = sample_directions(
      3, 24, SeedSpec{5501, 77}.derive(kSharedDirectionsStream));
  CHECK(fv.values[0] ==
        doctest::Approx(std::sqrt(sw_hat(mu, nu, pool, 2.0))).epsilon(1e-12));
  CHECK(fv.values[1] == doctest::Approx(std::sqrt(ebsw_hat(mu, nu, pool, 2.0,
                                                           1.0)))
                            .epsilon(1e-12));
  CHECK(fv.values[3] ==
        doctest::Approx(std::sqrt(pw_hat(mu, nu, pool, 2.0))).epsilon(1e-12));
  CHECK(fv.values[4] == doctest::Approx(std::sqrt(est_hat(mu, nu, pool, 2.0,
                                                          1.0)))
                            .epsilon(1e-12));
}

TEST_CASE("bound chains hold per pair with shared directions") {
  for (int trial = 0; trial < 15; ++trial) {
    int d = 1 + (trial % 4);
    auto mu = test_util::random_measure(5 + trial % 6, d, 5600, 2 * trial);
    auto nu =
        test_util::random_measure(4 + trial % 7, d, 5600, 2 * trial + 1, 1.3);
    double p = (trial % 2 == 0) ? 2.0 : 1.0;
    PresetSpec seo = preset_configs(Preset::kRGseo, p, 32, 16);

    FeatureVector fv = evaluate_features(mu, nu, seo.configs,
                                         SeedSpec{5601, std::uint64_t(trial)},
                                         true);
    double exact_p = exact_wasserstein(mu, nu, p).cost_p;
    double w = p == 2.0 ? std::sqrt(exact_p) : exact_p;  // p=1 root is itself
    double slack = 1e-9 * (1.0 + w);

    double sw = fv.values[0], ebsw = fv.values[1], maxsw = fv.values[2];
    double pw = fv.values[3], est = fv.values[4], minswgg = fv.values[5];
    CHECK(sw <= ebsw + slack);
    CHECK(ebsw <= w + slack);
    CHECK(w <= est + slack);
    CHECK(est <= pw + slack);
    CHECK(maxsw <= w + slack);
    CHECK(w <= minswgg + slack);
  }
}

TEST_CASE("feature evaluation is deterministic and symmetric") {
  auto mu = test_util::random_measure(9, 4, 5700, 0);
  auto nu = test_util::random_measure(7, 4, 5700, 1, 1.0, 0.4);
  PresetSpec seo = preset_configs(Preset::kRGseo, 2.0, 16, 8);
  SeedSpec seed{5701, 3};

  FeatureVector a = evaluate_features(mu, nu, seo.configs, seed, true);
  FeatureVector b = evaluate_features(mu, nu, seo.configs, seed, true);
  FeatureVector swapped = evaluate_features(nu, mu, seo.configs, seed, true);
  FeatureVector other =
      evaluate_features(mu, nu, seo.configs, SeedSpec{5701, 4}, true);

  CHECK(a.values == b.values);
  CHECK(a.values == swapped.values);  // every predictor is symmetric
  CHECK(a.values != other.values);

  // non-shared mode is deterministic too, but draws different pools
  FeatureVector own = evaluate_features(mu, nu, seo.configs, seed, false);
  CHECK(own.values == evaluate_features(mu, nu, seo.configs, seed, false).values);
  CHECK(own.values[0] != a.values[0]);
  // the optimizing predictors do not depend on the sharing flag
  CHECK(own.values[2] == a.values[2]);
  CHECK(own.values[5] == a.values[5]);
}

TEST_CASE("shared pools are sized by the largest monte-carlo L") {
  auto mu = test_util::random_measure(5, 2, 5800, 0);
  auto nu = test_util::random_measure(5, 2, 5800, 1, 1.0, 1.0);
  // two sw configs with different L: the smaller reads a prefix of the pool
  PredictorConfig small;
  small.kind = PredictorKind::kSW;
  small.L = 8;
  PredictorConfig large = small;
  large.L = 32;
  SeedSpec seed{5801, 0};

  FeatureVector both =
      evaluate_features(mu, nu, {small, large}, seed, true);
  auto pool = sample_directions(2, 32, seed.derive(kSharedDirectionsStream));
  std::vector<Direction> prefix(pool.begin(), pool.begin() + 8);
  CHECK(both.values[0] ==
        doctest::Approx(std::sqrt(sw_hat(mu, nu, prefix, 2.0)))
            .epsilon(1e-12));
  CHECK(both.values[1] ==
        doctest::Approx(std::sqrt(sw_hat(mu, nu, pool, 2.0))).epsilon(1e-12));
}

TEST_CASE("feature evaluation validates configs") {
  auto mu = test_util::random_measure(4, 2, 5900, 0);
  auto nu = test_util::random_measure(4, 2, 5900, 1);

  CHECK_THROWS_AS(evaluate_features(mu, nu, {}, SeedSpec{1, 1}, true),
                  DataError);

  PredictorConfig bad;
  bad.kind = PredictorKind::kEBSW;
  bad.temperature = 0.0;
  CHECK_THROWS_AS(evaluate_features(mu, nu, {bad}, SeedSpec{1, 1}, true),
                  DataError);

  PredictorConfig zero;
  zero.kind = PredictorKind::kSW;
  zero.L = 0;
  CHECK_THROWS_AS(evaluate_features(mu, nu, {zero}, SeedSpec{1, 1}, true),
                  DataError);

  PredictorConfig p1, p2;
  p1.p = 2.0;
  p2.p = 1.0;
  CHECK_THROWS_AS(evaluate_features(mu, nu, {p1, p2}, SeedSpec{1, 1}, true),
                  DataError);

  auto mu3 = test_util::random_measure(4, 3, 5900, 2);
  CHECK_THROWS_AS(evaluate_features(mu, mu3, {p1}, SeedSpec{1, 1}, true),
                  DataError);
}

TEST_CASE("identical measures produce all-zero features") {
  auto mu = test_util::random_measure(6, 3, 6000, 0);
  PresetSpec seo = preset_configs(Preset::kRGseo, 2.0, 8, 4);
  FeatureVector fv =
      evaluate_features(mu, mu, seo.configs, SeedSpec{6001, 0}, true);
  for (double v : fv.values) CHECK(v <= 1e-12);
}
