#include "swreg/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "network_simplex.hpp"
#include "swreg/common.hpp"

namespace swreg {

namespace {

std::vector<double> cost_matrix(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu, double p) {
  const Eigen::MatrixXd& X = mu.supports();
  const Eigen::MatrixXd& Y = nu.supports();
  Eigen::Index n = X.rows(), m = Y.rows(), d = X.cols();
  std::vector<double> c(static_cast<std::size_t>(n * m));
  if (p == 2.0) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        c[static_cast<std::size_t>(i * m + j)] =
            (X.row(i) - Y.row(j)).squaredNorm();
    return c;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < d; ++k)
        acc += p == 1.0 ? std::abs(X(i, k) - Y(j, k))
                        : std::pow(std::abs(X(i, k) - Y(j, k)), p);
      c[static_cast<std::size_t>(i * m + j)] = acc;
    }
  return c;
}

bool bit_identical(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return mu.size() == nu.size() && mu.dim() == nu.dim() &&
         (mu.supports().array() == nu.supports().array()).all() &&
         (mu.weights().array() == nu.weights().array()).all();
}

}  // namespace

ExactOTResult exact_wasserstein(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu, double p) {
  if (!(p >= 1.0)) throw DataError("order p must be >= 1");
  if (mu.dim() != nu.dim()) throw DataError("measure dimensions differ");
  if (mu.size() * nu.size() > 50'000'000)
    throw DataError("pair exceeds the n*m <= 5e7 size guard");

  ExactOTResult result;
  if (bit_identical(mu, nu)) {
    result.plan.entries.reserve(static_cast<std::size_t>(mu.size()));
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      if (mu.weights()[i] > 0.0)
        result.plan.entries.push_back(PlanEntry{i, i, mu.weights()[i]});
    return result;
  }

  std::vector<double> cost = cost_matrix(mu, nu, p);
  std::vector<double> supply(mu.weights().data(),
                             mu.weights().data() + mu.size());
  std::vector<double> demand(nu.weights().data(),
                             nu.weights().data() + nu.size());
  detail::TransportSimplex simplex(std::move(supply), std::move(demand),
                                   cost.data());
  result.iterations = simplex.solve();
  result.cost_p = simplex.total_cost();
  simplex.for_each_flow([&](std::int64_t i, std::int64_t j, double mass) {
    result.plan.entries.push_back(
        PlanEntry{static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j),
                  mass});
  });
  return result;
}

double brute_force_wasserstein(const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu, double p) {
  if (!(p >= 1.0)) throw DataError("order p must be >= 1");
  Eigen::Index n = mu.size();
  if (nu.size() != n || n > 8)
    throw DataError("brute force oracle requires n = m <= 8");
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(mu.weights()[i] - 1.0 / double(n)) > 1e-12 ||
        std::abs(nu.weights()[i] - 1.0 / double(n)) > 1e-12)
      throw DataError("brute force oracle requires uniform weights");

  std::vector<double> cost = cost_matrix(mu, nu, p);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += cost[static_cast<std::size_t>(i * n + perm[static_cast<std::size_t>(i)])];
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / double(n);
}

}  // namespace swreg
