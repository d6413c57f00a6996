#include "swreg/ot1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swreg/common.hpp"

namespace swreg {

namespace {

void check_order(double p) {
  if (!(p >= 1.0)) throw DataError("order p must be >= 1");
}

double pow_abs(double delta, double p) {
  if (p == 2.0) return delta * delta;
  if (p == 1.0) return std::abs(delta);
  return std::pow(std::abs(delta), p);
}

}  // namespace

double ground_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   double p) {
  if (p == 2.0) return (x - y).squaredNorm();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) acc += pow_abs(x[k] - y[k], p);
  return acc;
}

ProjectedMeasure project(const DiscreteMeasure& mu, const Direction& theta) {
  if (theta.size() != mu.dim())
    throw DataError("direction dimension does not match measure dimension");
  ProjectedMeasure out;
  out.positions = mu.supports() * theta;
  out.weights = mu.weights();
  out.sort_permutation.resize(static_cast<std::size_t>(mu.size()));
  std::iota(out.sort_permutation.begin(), out.sort_permutation.end(),
            Eigen::Index{0});
  std::stable_sort(out.sort_permutation.begin(), out.sort_permutation.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return out.positions[a] < out.positions[b];
                   });
  return out;
}

// Walks the two sorted weight profiles in lockstep, peeling off the smaller
// remaining mass at each step, and hands every matched block to `emit`.
template <typename Emit>
static void merge_quantiles(const ProjectedMeasure& mu,
                            const ProjectedMeasure& nu, Emit&& emit) {
  std::size_t n = mu.sort_permutation.size();
  std::size_t m = nu.sort_permutation.size();
  if (n == 0 || m == 0) throw DataError("empty projected measure");
  std::size_t a = 0, b = 0;
  double ra = mu.weights[mu.sort_permutation[0]];
  double rb = nu.weights[nu.sort_permutation[0]];
  while (a < n && b < m) {
    double take = std::min(ra, rb);
    Eigen::Index i = mu.sort_permutation[a];
    Eigen::Index j = nu.sort_permutation[b];
    if (take > 0.0) emit(i, j, take);
    ra -= take;
    rb -= take;
    // Zero-weight atoms fall through without emitting.
    if (ra <= 0.0 && ++a < n) ra = mu.weights[mu.sort_permutation[a]];
    if (rb <= 0.0 && ++b < m) rb = nu.weights[nu.sort_permutation[b]];
  }
}

double w1d_cost(const ProjectedMeasure& mu, const ProjectedMeasure& nu,
                double p) {
  check_order(p);
  double acc = 0.0;
  merge_quantiles(mu, nu, [&](Eigen::Index i, Eigen::Index j, double mass) {
    acc += mass * pow_abs(mu.positions[i] - nu.positions[j], p);
  });
  return acc;
}

SparsePlan w1d_plan(const ProjectedMeasure& mu, const ProjectedMeasure& nu) {
  SparsePlan plan;
  plan.entries.reserve(mu.sort_permutation.size() +
                       nu.sort_permutation.size());
  merge_quantiles(mu, nu, [&](Eigen::Index i, Eigen::Index j, double mass) {
    plan.entries.push_back(PlanEntry{i, j, mass});
  });
  return plan;
}

double lifted_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const Direction& theta, double p) {
  check_order(p);
  if (mu.dim() != nu.dim()) throw DataError("measure dimensions differ");
  SparsePlan plan = w1d_plan(project(mu, theta), project(nu, theta));
  return plan_cost(plan, mu, nu, p);
}

double plan_cost(const SparsePlan& plan, const DiscreteMeasure& mu,
                 const DiscreteMeasure& nu, double p) {
  check_order(p);
  const Eigen::MatrixXd& X = mu.supports();
  const Eigen::MatrixXd& Y = nu.supports();
  double acc = 0.0;
  if (p == 2.0) {
    for (const PlanEntry& e : plan.entries)
      acc += e.mass * (X.row(e.source) - Y.row(e.target)).squaredNorm();
    return acc;
  }
  for (const PlanEntry& e : plan.entries) {
    double c = 0.0;
    for (Eigen::Index k = 0; k < X.cols(); ++k)
      c += pow_abs(X(e.source, k) - Y(e.target, k), p);
    acc += e.mass * c;
  }
  return acc;
}

}  // namespace swreg
