#include "swreg/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swreg/common.hpp"

namespace swreg {

namespace {

void check_pair(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw DataError("measure dimensions differ");
}

void check_directions(const std::vector<Direction>& dirs) {
  if (dirs.empty()) throw DataError("empty direction list");
}

void check_temperature(double t) {
  if (!(t > 0.0)) throw DataError("temperature must be positive");
}

std::vector<double> w1d_costs(const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu,
                              const std::vector<Direction>& dirs, double p) {
  std::vector<double> costs;
  costs.reserve(dirs.size());
  for (const Direction& theta : dirs)
    costs.push_back(w1d_cost(project(mu, theta), project(nu, theta), p));
  return costs;
}

std::vector<double> lifted_costs(const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu,
                                 const std::vector<Direction>& dirs,
                                 double p) {
  std::vector<double> costs;
  costs.reserve(dirs.size());
  for (const Direction& theta : dirs)
    costs.push_back(lifted_cost(mu, nu, theta, p));
  return costs;
}

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / double(v.size());
}

// Σ w_l·c_l / Σ w_l with w_l = exp(sign·c_l/τ), max-subtracted for stability.
double softmax_mean(const std::vector<double>& costs, double temperature,
                    double sign) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double c : costs) peak = std::max(peak, sign * c / temperature);
  double wsum = 0.0, acc = 0.0;
  for (double c : costs) {
    double w = std::exp(sign * c / temperature - peak);
    wsum += w;
    acc += w * c;
  }
  return acc / wsum;
}

}  // namespace

bool PredictorConfig::is_lower_bound() const {
  return kind == PredictorKind::kSW || kind == PredictorKind::kEBSW ||
         kind == PredictorKind::kMaxSW;
}

bool PredictorConfig::is_monte_carlo() const {
  return kind == PredictorKind::kSW || kind == PredictorKind::kEBSW ||
         kind == PredictorKind::kPW || kind == PredictorKind::kEST;
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kSW: return "sw";
    case PredictorKind::kEBSW: return "ebsw";
    case PredictorKind::kMaxSW: return "maxsw";
    case PredictorKind::kPW: return "pw";
    case PredictorKind::kEST: return "est";
    case PredictorKind::kMinSWGG: return "minswgg";
  }
  throw DataError("unknown predictor kind");
}

PredictorKind predictor_kind_from_string(const std::string& name) {
  if (name == "sw") return PredictorKind::kSW;
  if (name == "ebsw") return PredictorKind::kEBSW;
  if (name == "maxsw") return PredictorKind::kMaxSW;
  if (name == "pw") return PredictorKind::kPW;
  if (name == "est") return PredictorKind::kEST;
  if (name == "minswgg") return PredictorKind::kMinSWGG;
  throw DataError("unknown predictor kind: " + name);
}

std::string to_string(Preset preset) {
  switch (preset) {
    case Preset::kRGs: return "rg-s";
    case Preset::kRGe: return "rg-e";
    case Preset::kRGo: return "rg-o";
    case Preset::kRGse: return "rg-se";
    case Preset::kRGseo: return "rg-seo";
  }
  throw DataError("unknown preset");
}

Preset preset_from_string(const std::string& name) {
  if (name == "rg-s") return Preset::kRGs;
  if (name == "rg-e") return Preset::kRGe;
  if (name == "rg-o") return Preset::kRGo;
  if (name == "rg-se") return Preset::kRGse;
  if (name == "rg-seo") return Preset::kRGseo;
  throw DataError("unknown preset: " + name);
}

PresetSpec preset_configs(Preset preset, double p, int L, int T,
                          double temperature) {
  if (!(p >= 1.0)) throw DataError("order p must be >= 1");
  if (L < 1 || T < 0) throw DataError("preset needs L >= 1 and T >= 0");
  check_temperature(temperature);

  auto make = [&](PredictorKind kind) {
    PredictorConfig c;
    c.kind = kind;
    c.L = kind == PredictorKind::kMaxSW ? 10 : L;
    c.T = T;
    c.temperature = temperature;
    c.p = p;
    return c;
  };

  PresetSpec spec;
  std::vector<PredictorKind> kinds;
  switch (preset) {
    case Preset::kRGs:
      kinds = {PredictorKind::kSW, PredictorKind::kPW};
      spec.lower_idx = {0};
      spec.upper_idx = {1};
      break;
    case Preset::kRGe:
      kinds = {PredictorKind::kEBSW, PredictorKind::kEST};
      spec.lower_idx = {0};
      spec.upper_idx = {1};
      break;
    case Preset::kRGo:
      kinds = {PredictorKind::kMaxSW, PredictorKind::kMinSWGG};
      spec.lower_idx = {0};
      spec.upper_idx = {1};
      break;
    case Preset::kRGse:
      kinds = {PredictorKind::kSW, PredictorKind::kEBSW, PredictorKind::kPW,
               PredictorKind::kEST};
      spec.lower_idx = {0, 1};
      spec.upper_idx = {2, 3};
      break;
    case Preset::kRGseo:
      kinds = {PredictorKind::kSW, PredictorKind::kEBSW, PredictorKind::kMaxSW,
               PredictorKind::kPW, PredictorKind::kEST,
               PredictorKind::kMinSWGG};
      spec.lower_idx = {0, 1, 2};
      spec.upper_idx = {3, 4, 5};
      break;
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    PredictorConfig c = make(kinds[k]);
    c.seed_stream = k;
    spec.configs.push_back(c);
  }
  return spec;
}

double sw_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
              const std::vector<Direction>& directions, double p) {
  check_pair(mu, nu);
  check_directions(directions);
  return mean(w1d_costs(mu, nu, directions, p));
}

double ebsw_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                const std::vector<Direction>& directions, double p,
                double temperature) {
  check_pair(mu, nu);
  check_directions(directions);
  check_temperature(temperature);
  return softmax_mean(w1d_costs(mu, nu, directions, p), temperature, +1.0);
}

double pw_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
              const std::vector<Direction>& directions, double p) {
  check_pair(mu, nu);
  check_directions(directions);
  return mean(lifted_costs(mu, nu, directions, p));
}

double est_hat(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
               const std::vector<Direction>& directions, double p,
               double temperature) {
  check_pair(mu, nu);
  check_directions(directions);
  check_temperature(temperature);
  return softmax_mean(lifted_costs(mu, nu, directions, p), temperature, -1.0);
}

std::pair<double, Direction> maxsw_hat(const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu,
                                       const PredictorConfig& config,
                                       SeedSpec seed) {
  check_pair(mu, nu);
  if (config.L < 1 || config.T < 0)
    throw DataError("maxsw needs L >= 1 restarts and T >= 0 steps");
  if (!(config.step_size > 0.0)) throw DataError("step size must be positive");
  double p = config.p;
  int d = static_cast<int>(mu.dim());
  Rng rng(seed);

  auto eval = [&](const Direction& theta) {
    return w1d_cost(project(mu, theta), project(nu, theta), p);
  };

  double best = -1.0;
  Direction best_theta;
  for (int l = 0; l < config.L; ++l) {
    Direction theta = sample_direction(d, rng);
    double c = eval(theta);
    if (c > best) {
      best = c;
      best_theta = theta;
    }
  }

  Direction theta = best_theta;
  const Eigen::MatrixXd& X = mu.supports();
  const Eigen::MatrixXd& Y = nu.supports();
  for (int t = 0; t < config.T; ++t) {
    ProjectedMeasure pm = project(mu, theta);
    ProjectedMeasure pn = project(nu, theta);
    SparsePlan plan = w1d_plan(pm, pn);
    // Fixed-assignment subgradient of Σ mass·|⟨θ,x−y⟩|^p.
    Direction grad = Direction::Zero(d);
    for (const PlanEntry& e : plan.entries) {
      double delta = pm.positions[e.source] - pn.positions[e.target];
      if (delta == 0.0) continue;
      double mag = p == 2.0 ? 2.0 * delta
                            : p * std::pow(std::abs(delta), p - 1.0) *
                                  (delta > 0.0 ? 1.0 : -1.0);
      grad += (e.mass * mag) * (X.row(e.source) - Y.row(e.target)).transpose();
    }
    Direction stepped = theta + config.step_size * grad;
    double norm = stepped.norm();
    if (norm < 1e-12) break;  // vanished gradient direction
    theta = stepped / norm;
    double c = eval(theta);
    if (c > best) {
      best = c;
      best_theta = theta;
    }
  }
  return {best, best_theta};
}

std::pair<double, Direction> minswgg_hat(const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu,
                                         const PredictorConfig& config,
                                         SeedSpec seed) {
  check_pair(mu, nu);
  if (config.L < 1 || config.T < 0)
    throw DataError("minswgg needs L >= 1 candidates and T >= 0 steps");
  double p = config.p;
  int d = static_cast<int>(mu.dim());
  Rng rng(seed);

  double best = std::numeric_limits<double>::infinity();
  Direction best_theta;
  for (int l = 0; l < config.L; ++l) {
    Direction theta = sample_direction(d, rng);
    double c = lifted_cost(mu, nu, theta, p);
    if (c < best) {
      best = c;
      best_theta = theta;
    }
  }

  double scale = 0.5;
  int halve_every = std::max(1, config.T / 4);
  for (int t = 1; t <= config.T; ++t) {
    Direction jitter(d);
    for (int k = 0; k < d; ++k) jitter[k] = rng.normal();
    Direction stepped = best_theta + scale * jitter;
    double norm = stepped.norm();
    if (norm >= 1e-12) {
      Direction theta = stepped / norm;
      double c = lifted_cost(mu, nu, theta, p);
      if (c < best) {
        best = c;
        best_theta = theta;
      }
    }
    if (t % halve_every == 0) scale *= 0.5;
  }
  return {best, best_theta};
}

FeatureVector evaluate_features(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu,
                                const std::vector<PredictorConfig>& configs,
                                SeedSpec pair_seed, bool share_directions) {
  check_pair(mu, nu);
  if (configs.empty()) throw DataError("no predictor configs");
  double p = configs[0].p;
  for (const PredictorConfig& c : configs) {
    if (c.p != p) throw DataError("predictor configs disagree on p");
    if (c.L < 1 || c.T < 0)
      throw DataError("predictor config needs L >= 1 and T >= 0");
    if ((c.kind == PredictorKind::kEBSW || c.kind == PredictorKind::kEST))
      check_temperature(c.temperature);
  }

  int d = static_cast<int>(mu.dim());

  // One direction pool for the Monte-Carlo kinds, with per-direction costs
  // computed once; each predictor consumes its prefix of length L.
  std::vector<double> pool_w1d, pool_lifted;
  if (share_directions) {
    int pool_size = 0;
    bool need_w1d = false, need_lifted = false;
    for (const PredictorConfig& c : configs) {
      if (!c.is_monte_carlo()) continue;
      pool_size = std::max(pool_size, c.L);
      if (c.is_lower_bound())
        need_w1d = true;
      else
        need_lifted = true;
    }
    if (pool_size > 0) {
      std::vector<Direction> pool = sample_directions(
          d, pool_size, pair_seed.derive(kSharedDirectionsStream));
      for (const Direction& theta : pool) {
        ProjectedMeasure pm = project(mu, theta);
        ProjectedMeasure pn = project(nu, theta);
        if (need_w1d) pool_w1d.push_back(w1d_cost(pm, pn, p));
        if (need_lifted)
          pool_lifted.push_back(plan_cost(w1d_plan(pm, pn), mu, nu, p));
      }
    }
  }

  auto prefix = [](const std::vector<double>& v, int len) {
    return std::vector<double>(v.begin(), v.begin() + len);
  };
  auto own_directions = [&](const PredictorConfig& c) {
    return sample_directions(
        d, c.L, pair_seed.derive(kPredictorStreamBase + c.seed_stream));
  };
  auto root = [&](double cost) {
    return p == 2.0 ? std::sqrt(cost) : std::pow(cost, 1.0 / p);
  };

  FeatureVector fv;
  fv.configs = configs;
  fv.values.reserve(configs.size());
  for (const PredictorConfig& c : configs) {
    double cost = 0.0;
    switch (c.kind) {
      case PredictorKind::kSW:
        cost = share_directions ? mean(prefix(pool_w1d, c.L))
                                : sw_hat(mu, nu, own_directions(c), p);
        break;
      case PredictorKind::kEBSW:
        cost = share_directions
                   ? softmax_mean(prefix(pool_w1d, c.L), c.temperature, +1.0)
                   : ebsw_hat(mu, nu, own_directions(c), p, c.temperature);
        break;
      case PredictorKind::kPW:
        cost = share_directions ? mean(prefix(pool_lifted, c.L))
                                : pw_hat(mu, nu, own_directions(c), p);
        break;
      case PredictorKind::kEST:
        cost = share_directions
                   ? softmax_mean(prefix(pool_lifted, c.L), c.temperature, -1.0)
                   : est_hat(mu, nu, own_directions(c), p, c.temperature);
        break;
      case PredictorKind::kMaxSW:
        cost = maxsw_hat(mu, nu, c,
                         pair_seed.derive(kPredictorStreamBase + c.seed_stream))
                   .first;
        break;
      case PredictorKind::kMinSWGG:
        cost = minswgg_hat(
                   mu, nu, c,
                   pair_seed.derive(kPredictorStreamBase + c.seed_stream))
                   .first;
        break;
    }
    if (!std::isfinite(cost) || cost < 0.0)
      throw NumericalError("predictor produced a non-finite or negative value");
    fv.values.push_back(root(cost));
  }
  return fv;
}

}  // namespace swreg
