#include "swreg/regression.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "swreg/common.hpp"
#include "swreg/exact_ot.hpp"
#include "swreg/parallel.hpp"

namespace swreg {

namespace {

void check_design(const DesignMatrix& design) {
  if (design.S.rows() < 1 || design.S.cols() < 1)
    throw DataError("empty design matrix");
  if (design.W.size() != design.S.rows())
    throw DataError("design response length mismatch");
  if (!design.S.allFinite() || !design.W.allFinite())
    throw DataError("non-finite design entry");
  if ((design.W.array() < 0.0).any())
    throw DataError("negative response in design");
}

// Training-set residual statistics shared by all three fits.
void fill_report(FitReport& report, const Eigen::VectorXd& predicted,
                 const Eigen::VectorXd& actual) {
  Eigen::VectorXd res = predicted - actual;
  report.rmse = std::sqrt(res.squaredNorm() / double(actual.size()));
  double mean = actual.mean();
  double ss_tot = (actual.array() - mean).square().sum();
  if (ss_tot > 0.0) {
    report.r2 = 1.0 - res.squaredNorm() / ss_tot;
    report.r2_defined = true;
  } else {
    report.r2 = std::numeric_limits<double>::quiet_NaN();
    report.r2_defined = false;
  }
}

RegressionModel model_from_design(const DesignMatrix& design) {
  RegressionModel model;
  model.configs = design.configs;
  model.p = design.configs.empty() ? 2.0 : design.configs[0].p;
  model.seed = design.seed;
  model.m = static_cast<std::size_t>(design.S.rows());
  model.share_directions = design.share_directions;
  return model;
}

Eigen::VectorXd constrained_predictions(const Eigen::MatrixXd& S,
                                        const std::vector<int>& lower_idx,
                                        const std::vector<int>& upper_idx,
                                        const Eigen::VectorXd& omega) {
  Eigen::Index m = S.rows();
  std::size_t K = lower_idx.size();
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < K; ++k)
    pred += omega[Eigen::Index(k)] * S.col(lower_idx[k]) +
            (1.0 - omega[Eigen::Index(k)]) * S.col(upper_idx[k]);
  return pred / double(K);
}

void check_pairing(const DesignMatrix& design, const std::vector<int>& lower,
                   const std::vector<int>& upper) {
  if (lower.empty() || lower.size() != upper.size())
    throw DataError("lower/upper index lists must pair up");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (lower[k] < 0 || lower[k] >= design.S.cols() || upper[k] < 0 ||
        upper[k] >= design.S.cols())
      throw DataError("bound pairing index out of range");
  }
}

}  // namespace

PairLabeler exact_labeler(const MeasureDataset& dataset, double p) {
  return [&dataset, p](PairIndex pair) {
    if (pair.i >= dataset.size() || pair.j >= dataset.size())
      throw DataError("pair index out of range");
    double cost = exact_wasserstein(dataset.measures[pair.i],
                                    dataset.measures[pair.j], p)
                      .cost_p;
    return p == 2.0 ? std::sqrt(cost) : std::pow(cost, 1.0 / p);
  };
}

DesignMatrix build_design(const MeasureDataset& dataset,
                          const std::vector<PairIndex>& pairs,
                          const std::vector<PredictorConfig>& configs,
                          std::uint64_t master_seed, bool share_directions,
                          const PairLabeler& labeler, int threads) {
  if (pairs.empty()) throw DataError("no pairs to build a design from");
  if (configs.empty()) throw DataError("no predictor configs");

  DesignMatrix design;
  design.S.resize(Eigen::Index(pairs.size()), Eigen::Index(configs.size()));
  design.W.resize(Eigen::Index(pairs.size()));
  design.pair_ids = pairs;
  design.configs = configs;
  design.seed = master_seed;
  design.share_directions = share_directions;

  parallel_for(pairs.size(), threads, [&](std::size_t row) {
    PairIndex pair = pairs[row];
    if (pair.i >= dataset.size() || pair.j >= dataset.size())
      throw DataError("pair index out of range");
    SeedSpec pair_seed{master_seed, pair_stream(pair.i, pair.j)};
    FeatureVector fv =
        evaluate_features(dataset.measures[pair.i], dataset.measures[pair.j],
                          configs, pair_seed, share_directions);
    for (std::size_t k = 0; k < fv.values.size(); ++k)
      design.S(Eigen::Index(row), Eigen::Index(k)) = fv.values[k];
    design.W[Eigen::Index(row)] = labeler(pair);
  });
  return design;
}

RegressionModel fit_unconstrained(const DesignMatrix& design) {
  check_design(design);
  RegressionModel model = model_from_design(design);
  model.constrained = false;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design.S);
  model.weights = cod.solve(design.W);
  model.fit_report.rank_deficient = cod.rank() < design.S.cols();
  model.fit_report.underdetermined = design.S.rows() < design.S.cols();
  fill_report(model.fit_report, design.S * model.weights, design.W);
  return model;
}

RegressionModel fit_constrained_k1(const DesignMatrix& design) {
  check_design(design);
  if (design.S.cols() != 2)
    throw DataError("constrained K=1 fit needs exactly two columns");
  Eigen::VectorXd sl = design.S.col(0);
  Eigen::VectorXd su = design.S.col(1);

  double scale = std::max(1.0, design.S.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < sl.size(); ++i)
    if (su[i] < sl[i] - 1e-9 * scale)
      throw DataError("upper-bound column falls below lower-bound column");

  RegressionModel model = model_from_design(design);
  model.constrained = true;
  model.lower_idx = {0};
  model.upper_idx = {1};
  model.weights.resize(1);

  Eigen::ArrayXd gap = (su - sl).array();
  double den = (gap * gap).sum();
  double tiny = double(sl.size()) * (1e-12 * scale) * (1e-12 * scale);
  if (den <= tiny) {
    model.weights[0] = 0.5;
    model.fit_report.degenerate = true;
  } else {
    double num = (gap * (su - design.W).array()).sum();
    model.weights[0] = std::clamp(num / den, 0.0, 1.0);
  }
  fill_report(model.fit_report,
              constrained_predictions(design.S, model.lower_idx,
                                      model.upper_idx, model.weights),
              design.W);
  return model;
}

RegressionModel fit_constrained_general(const DesignMatrix& design,
                                        const std::vector<int>& lower_idx,
                                        const std::vector<int>& upper_idx) {
  check_design(design);
  check_pairing(design, lower_idx, upper_idx);
  std::size_t K = lower_idx.size();
  Eigen::Index M = design.S.rows();

  // Residual model: W - base = D ω with base the average upper bound and
  // D_k = (SL_k - SU_k)/K, so the loss is a convex quadratic in ω.
  Eigen::MatrixXd D(M, Eigen::Index(K));
  Eigen::VectorXd base = Eigen::VectorXd::Zero(M);
  for (std::size_t k = 0; k < K; ++k) {
    D.col(Eigen::Index(k)) =
        (design.S.col(lower_idx[k]) - design.S.col(upper_idx[k])) / double(K);
    base += design.S.col(upper_idx[k]) / double(K);
  }
  Eigen::VectorXd y = design.W - base;

  RegressionModel model = model_from_design(design);
  model.constrained = true;
  model.lower_idx = lower_idx;
  model.upper_idx = upper_idx;

  double curvature = 2.0 * (D.transpose() * D).trace();
  double scale = std::max(1.0, design.S.cwiseAbs().maxCoeff());
  double tiny = double(M) * double(K) * (1e-12 * scale) * (1e-12 * scale);
  Eigen::VectorXd omega = Eigen::VectorXd::Constant(Eigen::Index(K), 0.5);
  if (curvature <= tiny) {
    model.fit_report.degenerate = true;
  } else {
    auto loss = [&](const Eigen::VectorXd& w) {
      return (D * w - y).squaredNorm();
    };
    double initial = loss(omega);
    double previous = initial;
    double floor = 1e-12 * std::max(initial, 1e-300);
    for (int it = 0; it < 10000; ++it) {
      Eigen::VectorXd grad = 2.0 * D.transpose() * (D * omega - y);
      omega = (omega - grad / curvature).cwiseMax(0.0).cwiseMin(1.0);
      double current = loss(omega);
      if (previous - current < floor) break;
      previous = current;
    }
  }
  model.weights = omega;
  model.fit_report.underdetermined = M < Eigen::Index(K);
  fill_report(model.fit_report,
              constrained_predictions(design.S, lower_idx, upper_idx, omega),
              design.W);
  return model;
}

double predict(const RegressionModel& model, const FeatureVector& features) {
  if (features.configs != model.configs)
    throw DataError("feature configs do not match the model");
  Eigen::Map<const Eigen::VectorXd> s(features.values.data(),
                                      Eigen::Index(features.values.size()));
  if (!model.constrained) {
    if (model.weights.size() != s.size())
      throw DataError("weight/feature length mismatch");
    return std::max(0.0, model.weights.dot(s));
  }
  std::size_t K = model.lower_idx.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double w = model.weights[Eigen::Index(k)];
    acc += w * s[model.lower_idx[k]] + (1.0 - w) * s[model.upper_idx[k]];
  }
  return std::max(0.0, acc / double(K));
}

void save_model(const RegressionModel& model, const std::string& path) {
  nlohmann::json j;
  j["version"] = 1;
  j["p"] = model.p;
  j["constrained"] = model.constrained;
  j["configs"] = nlohmann::json::array();
  for (const PredictorConfig& c : model.configs)
    j["configs"].push_back({{"kind", to_string(c.kind)},
                            {"L", c.L},
                            {"T", c.T},
                            {"step_size", c.step_size},
                            {"temperature", c.temperature},
                            {"p", c.p},
                            {"seed_stream", c.seed_stream}});
  j["weights"] = std::vector<double>(
      model.weights.data(), model.weights.data() + model.weights.size());
  j["lower_idx"] = model.lower_idx;
  j["upper_idx"] = model.upper_idx;
  j["seed"] = model.seed;
  j["M"] = model.m;
  j["share_directions"] = model.share_directions;
  j["fit_report"] = {{"rmse", model.fit_report.rmse},
                     {"r2", model.fit_report.r2_defined
                                ? nlohmann::json(model.fit_report.r2)
                                : nlohmann::json(nullptr)},
                     {"r2_defined", model.fit_report.r2_defined},
                     {"rank_deficient", model.fit_report.rank_deficient},
                     {"degenerate", model.fit_report.degenerate},
                     {"underdetermined", model.fit_report.underdetermined}};

  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

RegressionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file: " + std::string(e.what()));
  }

  try {
    if (!j.contains("version") || j["version"].get<int>() != 1)
      throw DataError("unsupported model file version");
    RegressionModel model;
    model.p = j.at("p").get<double>();
    model.constrained = j.at("constrained").get<bool>();
    for (const nlohmann::json& jc : j.at("configs")) {
      PredictorConfig c;
      c.kind = predictor_kind_from_string(jc.at("kind").get<std::string>());
      c.L = jc.at("L").get<int>();
      c.T = jc.at("T").get<int>();
      c.step_size = jc.at("step_size").get<double>();
      c.temperature = jc.at("temperature").get<double>();
      c.p = jc.at("p").get<double>();
      c.seed_stream = jc.at("seed_stream").get<std::uint64_t>();
      model.configs.push_back(c);
    }
    std::vector<double> w = j.at("weights").get<std::vector<double>>();
    model.weights =
        Eigen::Map<Eigen::VectorXd>(w.data(), Eigen::Index(w.size()));
    model.lower_idx = j.at("lower_idx").get<std::vector<int>>();
    model.upper_idx = j.at("upper_idx").get<std::vector<int>>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.m = j.at("M").get<std::size_t>();
    model.share_directions = j.at("share_directions").get<bool>();
    const nlohmann::json& jr = j.at("fit_report");
    model.fit_report.rmse = jr.at("rmse").get<double>();
    model.fit_report.r2_defined = jr.at("r2_defined").get<bool>();
    model.fit_report.r2 = model.fit_report.r2_defined
                              ? jr.at("r2").get<double>()
                              : std::numeric_limits<double>::quiet_NaN();
    model.fit_report.rank_deficient = jr.at("rank_deficient").get<bool>();
    model.fit_report.degenerate = jr.at("degenerate").get<bool>();
    model.fit_report.underdetermined = jr.at("underdetermined").get<bool>();

    if (model.constrained) {
      if (model.lower_idx.size() != model.upper_idx.size() ||
          model.weights.size() != Eigen::Index(model.lower_idx.size()))
        throw DataError("inconsistent constrained model file");
      for (int idx : model.lower_idx)
        if (idx < 0 || idx >= int(model.configs.size()))
          throw DataError("model bound index out of range");
      for (int idx : model.upper_idx)
        if (idx < 0 || idx >= int(model.configs.size()))
          throw DataError("model bound index out of range");
    } else if (model.weights.size() != Eigen::Index(model.configs.size())) {
      throw DataError("model weight count does not match its predictors");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file: " + std::string(e.what()));
  }
}

}  // namespace swreg
