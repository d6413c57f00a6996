#pragma once

#include <Eigen/Core>
#include <vector>

#include "swreg/measure.hpp"
#include "swreg/rng.hpp"

namespace swreg {

/// A measure pushed to the line by one direction. Weights stay in source
/// order; sort_permutation orders positions ascending (ties by index).
struct ProjectedMeasure {
  Eigen::VectorXd positions;
  Eigen::VectorXd weights;
  std::vector<Eigen::Index> sort_permutation;
};

/// One transport-plan cell: mass moved from source atom to target atom.
struct PlanEntry {
  Eigen::Index source = 0;
  Eigen::Index target = 0;
  double mass = 0.0;
};

/// Sparse coupling. Row sums recover the source weights, column sums the
/// target weights (to 1e-9), with at most n + m - 1 entries.
struct SparsePlan {
  std::vector<PlanEntry> entries;
};

/// ‖x−y‖_p^p between two rows of coordinates.
double ground_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   double p);

ProjectedMeasure project(const DiscreteMeasure& mu, const Direction& theta);

/// Exact 1D transport cost in p-power form, by merging the two sorted weight
/// profiles (north-west-corner over sorted supports). p >= 1.
double w1d_cost(const ProjectedMeasure& mu, const ProjectedMeasure& nu,
                double p);

/// The monotone 1D optimal plan, reported in original index space and ordered
/// by quantile level.
SparsePlan w1d_plan(const ProjectedMeasure& mu, const ProjectedMeasure& nu);

/// Ambient-space cost of the plan induced by the 1D optimal plan of the
/// projections: Σ mass·‖x_i−y_j‖_p^p. Upper-bounds the exact p-power cost.
double lifted_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const Direction& theta, double p);

/// Σ mass·‖x_i−y_j‖_p^p of an arbitrary plan over the two support sets.
double plan_cost(const SparsePlan& plan, const DiscreteMeasure& mu,
                 const DiscreteMeasure& nu, double p);

}  // namespace swreg
