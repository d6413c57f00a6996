#pragma once

// Primal network simplex specialized to the dense, uncapacitated
// transportation problem:
//
//   min Σ c_ij f_ij   s.t.  Σ_j f_ij = a_i,  Σ_i f_ij = b_j,  f ≥ 0,
//
// with Σa = Σb. Nodes are the n sources followed by the m sinks; arc (i,j)
// has id i*m+j into a row-major cost array. A basis is a spanning tree kept
// as parent/pred-arc/depth/children arrays; because every non-tree arc sits
// at its lower bound 0, flow only needs to be stored per tree arc, i.e. one
// value per non-root node (the arc to its parent).
//
// Start: north-west-corner basis (a staircase path, tree by construction;
// ties exhaust the row and leave a degenerate zero-flow arc, so the count is
// always n+m-1). Entering rule: block search over arcs for the most negative
// reduced cost in a block of ~sqrt(#arcs). Leaving rule: first minimum on
// the entering arc's source-side path (strict <), last minimum on the
// target side (<=) — the classic strongly-feasible tie-break. Tree update
// re-roots the cut subtree at the entering arc's endpoint and shifts its
// potentials by the entering reduced cost.
//
// After termination the potentials are recomputed from scratch and every arc
// is checked for eps-nonnegative reduced cost; a violation or a pivot-count
// blowup throws NumericalError rather than returning a wrong answer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "swreg/common.hpp"

namespace swreg::detail {

class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   const double* cost)
      : a_(std::move(supply)),
        b_(std::move(demand)),
        cost_(cost),
        n_(static_cast<std::int64_t>(a_.size())),
        m_(static_cast<std::int64_t>(b_.size())),
        num_nodes_(n_ + m_),
        num_arcs_(n_ * m_) {
    if (n_ < 1 || m_ < 1) throw DataError("transport problem needs nodes");
    parent_.assign(num_nodes_, -1);
    pred_.assign(num_nodes_, -1);
    depth_.assign(num_nodes_, 0);
    pi_.assign(num_nodes_, 0.0);
    flow_.assign(num_nodes_, 0.0);
    children_.assign(num_nodes_, {});
    double max_c = 0.0;
    for (std::int64_t a = 0; a < num_arcs_; ++a)
      max_c = std::max(max_c, std::abs(cost_[a]));
    cost_scale_ = std::max(1.0, max_c);
  }

  /// Runs the simplex; returns the pivot count.
  std::size_t solve() {
    build_northwest_basis();
    init_potentials();

    const double enter_eps = 1e-13 * cost_scale_;
    const std::int64_t block =
        std::max<std::int64_t>(64, std::int64_t(std::sqrt(double(num_arcs_))));
    const std::size_t max_pivots =
        1000 * static_cast<std::size_t>(num_nodes_) + 100000;

    std::size_t pivots = 0;
    std::int64_t cursor = 0;
    while (true) {
      std::int64_t entering = -1;
      double best_r = -enter_eps;
      std::int64_t counter = block;
      for (std::int64_t scanned = 0; scanned < num_arcs_; ++scanned) {
        std::int64_t arc = cursor;
        cursor = (cursor + 1 == num_arcs_) ? 0 : cursor + 1;
        std::int64_t src = arc / m_;
        std::int64_t dst = n_ + arc % m_;
        if (pred_[src] == arc || pred_[dst] == arc) continue;  // in tree
        double r = cost_[arc] + pi_[src] - pi_[dst];
        if (r < best_r) {
          best_r = r;
          entering = arc;
        }
        if (--counter == 0) {
          if (entering >= 0) break;
          counter = block;
        }
      }
      if (entering < 0) break;  // no improving arc: optimal
      if (++pivots > max_pivots)
        throw NumericalError("network simplex failed to converge");
      pivot(entering);
    }
    certify(enter_eps);
    return pivots;
  }

  double total_cost() const {
    double acc = 0.0;
    for (std::int64_t v = 0; v < num_nodes_; ++v)
      if (pred_[v] >= 0) acc += flow_[v] * cost_[pred_[v]];
    return acc;
  }

  /// Visits every positive tree flow as (source index, sink index, mass), in
  /// increasing arc-id order.
  template <typename F>
  void for_each_flow(F&& f) const {
    std::vector<std::int64_t> arcs;
    arcs.reserve(static_cast<std::size_t>(num_nodes_));
    for (std::int64_t v = 0; v < num_nodes_; ++v)
      if (pred_[v] >= 0 && flow_[v] > 0.0) arcs.push_back(v);
    std::sort(arcs.begin(), arcs.end(), [this](std::int64_t x, std::int64_t y) {
      return pred_[x] < pred_[y];
    });
    for (std::int64_t v : arcs)
      f(pred_[v] / m_, pred_[v] % m_, flow_[v]);
  }

 private:
  bool is_source(std::int64_t v) const { return v < n_; }

  void attach(std::int64_t child, std::int64_t par, std::int64_t arc,
              double flow) {
    parent_[child] = par;
    pred_[child] = arc;
    flow_[child] = flow;
    children_[par].push_back(static_cast<std::int32_t>(child));
  }

  void build_northwest_basis() {
    root_ = 0;
    std::int64_t i = 0, j = 0;
    double ra = a_[0], rb = b_[0];
    bool new_node_is_source = false;
    bool first = true;
    while (true) {
      double take = std::min(ra, rb);
      std::int64_t arc = i * m_ + j;
      if (first) {
        attach(n_ + j, root_, arc, take);
        first = false;
      } else if (new_node_is_source) {
        attach(i, n_ + j, arc, take);
      } else {
        attach(n_ + j, i, arc, take);
      }
      bool last_row = (i == n_ - 1);
      bool last_col = (j == m_ - 1);
      if (last_row && last_col) break;
      // Rounding drift in the remainders must not strand a row or column, so
      // the walk is forced inward at the boundary.
      if (last_col || (!last_row && ra <= rb)) {
        rb -= take;
        ra = a_[++i];
        new_node_is_source = true;
      } else {
        ra -= take;
        rb = b_[++j];
        new_node_is_source = false;
      }
    }
  }

  // Rebuilds depth and tree-consistent pi for the whole tree: every tree arc
  // gets exactly zero reduced cost, c + pi[src] - pi[dst] = 0.
  void init_potentials() {
    pi_[root_] = 0.0;
    depth_[root_] = 0;
    stack_.clear();
    stack_.push_back(root_);
    while (!stack_.empty()) {
      std::int64_t v = stack_.back();
      stack_.pop_back();
      if (v != root_) {
        std::int64_t par = parent_[v];
        depth_[v] = depth_[par] + 1;
        pi_[v] = is_source(v) ? pi_[par] - cost_[pred_[v]]
                              : pi_[par] + cost_[pred_[v]];
      }
      for (std::int32_t c : children_[v]) stack_.push_back(c);
    }
  }

  // Shifts pi by sigma and recomputes depth across the subtree rooted at q.
  void dfs_shift(std::int64_t q, double sigma) {
    stack_.clear();
    stack_.push_back(q);
    while (!stack_.empty()) {
      std::int64_t v = stack_.back();
      stack_.pop_back();
      depth_[v] = depth_[parent_[v]] + 1;
      pi_[v] += sigma;
      for (std::int32_t c : children_[v]) stack_.push_back(c);
    }
  }

  void erase_child(std::int64_t par, std::int64_t child) {
    auto& kids = children_[par];
    auto it = std::find(kids.begin(), kids.end(),
                        static_cast<std::int32_t>(child));
    if (it == kids.end())
      throw NumericalError("spanning tree corrupted during pivot");
    kids.erase(it);
  }

  void pivot(std::int64_t entering) {
    std::int64_t u0 = entering / m_;
    std::int64_t v0 = n_ + entering % m_;
    double r_e = cost_[entering] + pi_[u0] - pi_[v0];

    // Common ancestor of the two endpoints.
    std::int64_t x = u0, y = v0;
    while (depth_[x] > depth_[y]) x = parent_[x];
    while (depth_[y] > depth_[x]) y = parent_[y];
    while (x != y) {
      x = parent_[x];
      y = parent_[y];
    }
    std::int64_t join = x;

    // Max mass the cycle admits. On the u0-side path flow decreases on arcs
    // leaving a source node; on the v0-side, on arcs entering a sink node.
    double delta = std::numeric_limits<double>::infinity();
    std::int64_t w_out = -1;
    bool out_on_u_side = true;
    for (std::int64_t v = u0; v != join; v = parent_[v])
      if (is_source(v) && flow_[v] < delta) {
        delta = flow_[v];
        w_out = v;
      }
    for (std::int64_t v = v0; v != join; v = parent_[v])
      if (!is_source(v) && flow_[v] <= delta) {
        delta = flow_[v];
        w_out = v;
        out_on_u_side = false;
      }
    if (w_out < 0)
      throw NumericalError("transport cycle without a leaving arc");

    // Push delta around the cycle.
    if (delta > 0.0) {
      for (std::int64_t v = u0; v != join; v = parent_[v])
        flow_[v] += is_source(v) ? -delta : delta;
      for (std::int64_t v = v0; v != join; v = parent_[v])
        flow_[v] += is_source(v) ? delta : -delta;
    }

    // Re-root the severed subtree at q and hang it under the other endpoint.
    std::int64_t q = out_on_u_side ? u0 : v0;
    std::int64_t attach_to = out_on_u_side ? v0 : u0;

    chain_.clear();
    for (std::int64_t v = q;; v = parent_[v]) {
      chain_.push_back(v);
      if (v == w_out) break;
    }
    saved_pred_.clear();
    saved_flow_.clear();
    for (std::int64_t v : chain_) {
      saved_pred_.push_back(pred_[v]);
      saved_flow_.push_back(flow_[v]);
    }
    erase_child(parent_[w_out], w_out);
    parent_[q] = attach_to;
    pred_[q] = entering;
    flow_[q] = delta;
    children_[attach_to].push_back(static_cast<std::int32_t>(q));
    for (std::size_t k = 1; k < chain_.size(); ++k) {
      std::int64_t node = chain_[k];
      std::int64_t new_child = chain_[k - 1];
      erase_child(node, new_child);
      parent_[node] = new_child;
      pred_[node] = saved_pred_[k - 1];
      flow_[node] = saved_flow_[k - 1];
      children_[new_child].push_back(static_cast<std::int32_t>(node));
    }

    // The moved subtree keeps its internal pi differences; shift it so the
    // entering arc's reduced cost becomes zero, and fix depths.
    double sigma = out_on_u_side ? -r_e : r_e;
    dfs_shift(q, sigma);
  }

  // Rebuilds pi exactly from the final tree, then checks complementary
  // slackness and marginal feasibility.
  void certify(double eps) {
    init_potentials();
    double worst = 0.0;
    for (std::int64_t arc = 0; arc < num_arcs_; ++arc) {
      std::int64_t src = arc / m_;
      std::int64_t dst = n_ + arc % m_;
      if (pred_[src] == arc || pred_[dst] == arc) continue;
      double r = cost_[arc] + pi_[src] - pi_[dst];
      worst = std::min(worst, r);
    }
    if (worst < -std::max(eps * 64, 1e-9 * cost_scale_))
      throw NumericalError("optimality certificate violated");

    std::vector<double> row_sum(static_cast<std::size_t>(n_), 0.0);
    std::vector<double> col_sum(static_cast<std::size_t>(m_), 0.0);
    for (std::int64_t v = 0; v < num_nodes_; ++v) {
      if (pred_[v] < 0) continue;
      if (flow_[v] < 0.0)
        throw NumericalError("negative flow in transport solution");
      row_sum[static_cast<std::size_t>(pred_[v] / m_)] += flow_[v];
      col_sum[static_cast<std::size_t>(pred_[v] % m_)] += flow_[v];
    }
    for (std::int64_t i = 0; i < n_; ++i)
      if (std::abs(row_sum[static_cast<std::size_t>(i)] - a_[i]) > 1e-9)
        throw NumericalError("transport row marginal violated");
    for (std::int64_t j = 0; j < m_; ++j)
      if (std::abs(col_sum[static_cast<std::size_t>(j)] - b_[j]) > 1e-9)
        throw NumericalError("transport column marginal violated");
  }

  std::vector<double> a_, b_;
  const double* cost_;
  std::int64_t n_, m_, num_nodes_, num_arcs_;
  double cost_scale_ = 1.0;
  std::int64_t root_ = 0;

  std::vector<std::int64_t> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<std::int64_t> depth_;
  std::vector<double> pi_;
  std::vector<double> flow_;  // flow on pred_[v], per non-root node
  std::vector<std::vector<std::int32_t>> children_;

  // pivot scratch
  std::vector<std::int64_t> stack_;
  std::vector<std::int64_t> chain_;
  std::vector<std::int64_t> saved_pred_;
  std::vector<double> saved_flow_;
};

}  // namespace swreg::detail
