#pragma once

#include "swreg/measure.hpp"
#include "swreg/ot1d.hpp"

namespace swreg {

struct ExactOTResult {
  double cost_p = 0.0;  // W_p^p
  SparsePlan plan;
  std::size_t iterations = 0;  // simplex pivots
};

/// Exact p-power Wasserstein cost between two discrete measures, solved by a
/// primal network simplex on the dense bipartite transportation problem with
/// C_ij = ‖x_i−y_j‖_p^p. The solution is certified optimal (complementary
/// slackness + marginals) before returning; failure throws NumericalError.
/// Guard: n·m ≤ 5·10⁷. Bit-identical inputs short-circuit to cost 0.
ExactOTResult exact_wasserstein(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu, double p);

/// Test oracle: minimum over all n! permutation matchings, valid for uniform
/// weights with n = m ≤ 8.
double brute_force_wasserstein(const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu, double p);

}  // namespace swreg
