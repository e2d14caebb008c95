#pragma once

// Primal network simplex for uncapacitated minimum-cost flow with real-valued
// supplies. Strongly feasible spanning trees (Cunningham's leaving-arc rule)
// keep degenerate pivots from cycling; pricing is block search as in LEMON.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rcs/error.hpp"

namespace rcs {

class NetworkSimplex {
 public:
  using Node = int;
  using Arc = int;

  enum class Status { Optimal, Infeasible };

  explicit NetworkSimplex(std::size_t node_count) : n_(static_cast<int>(node_count)), supply_(node_count, 0.0) {}

  /// Adds an arc of unbounded capacity. Costs must be nonnegative.
  Arc add_arc(Node tail, Node head, double cost) {
    if (tail < 0 || tail >= n_ || head < 0 || head >= n_) throw InvalidArgument("arc endpoint out of range");
    if (!(cost >= 0.0) || !std::isfinite(cost)) throw InvalidArgument("arc cost must be finite and nonnegative");
    source_.push_back(tail);
    target_.push_back(head);
    cost_.push_back(cost);
    return static_cast<Arc>(source_.size() - 1);
  }

  void reserve_arcs(std::size_t m) {
    source_.reserve(m + n_);
    target_.reserve(m + n_);
    cost_.reserve(m + n_);
  }

  /// Positive supply is a source, negative a sink. Supplies should sum to zero.
  void set_supply(Node u, double s) { supply_.at(u) = s; }

  /// Cost of the artificial root arcs of the starting tree. The default,
  /// (max cost + 1) * (nodes + 1), is safe for any network; callers that know
  /// a tighter bound on the spread of optimal potentials (a complete bipartite
  /// network needs only more than the largest arc cost) can lower it, which
  /// keeps the potentials small and the pricing tolerance tight.
  void set_artificial_cost(double c) { art_override_ = c; }

  std::size_t node_count() const { return static_cast<std::size_t>(n_); }

  Status run() {
    init();
    for (;;) {
      while (find_entering_arc()) {
        pivot();
        if (++pivots_ > max_pivots_) throw std::runtime_error("network simplex: pivot limit exceeded");
      }
      // Potentials were updated incrementally; recompute them from the tree and
      // only stop once a clean pricing pass confirms optimality.
      recompute_potentials();
      if (!find_entering_arc()) break;
      pivot();
    }
    const double scale = std::max(1.0, total_supply_);
    for (int u = 0; u < n_; ++u) {
      if (flow_[m_ + u] > 1e-9 * scale && cost_[m_ + u] > 0.0) return Status::Infeasible;
    }
    return Status::Optimal;
  }

  double flow(Arc a) const { return flow_.at(a); }
  double cost(Arc a) const { return cost_.at(a); }
  Node tail(Arc a) const { return source_.at(a); }
  Node head(Arc a) const { return target_.at(a); }
  std::int64_t pivots() const { return pivots_; }

  /// Sum of flow * cost over the user arcs.
  double total_cost() const {
    double c = 0.0;
    for (int e = 0; e < m_; ++e) c += flow_[e] * cost_[e];
    return c;
  }

 private:
  static constexpr signed char kTree = 0;
  static constexpr signed char kLower = 1;

  void init() {
    m_ = static_cast<int>(source_.size());
    const int total = m_ + n_;
    root_ = n_;
    double max_cost = 0.0;
    for (int e = 0; e < m_; ++e) max_cost = std::max(max_cost, cost_[e]);
    art_cost_ = art_override_ > 0.0 ? art_override_ : (max_cost + 1.0) * static_cast<double>(n_ + 1);
    cost_scale_ = std::max(1.0, max_cost);
    eps_ = 1e-12 * cost_scale_;

    source_.resize(total);
    target_.resize(total);
    cost_.resize(total);
    flow_.assign(total, 0.0);
    state_.assign(total, kLower);

    parent_.assign(n_ + 1, -1);
    pred_.assign(n_ + 1, -1);
    up_.assign(n_ + 1, 0);
    depth_.assign(n_ + 1, 0);
    pi_.assign(n_ + 1, 0.0);
    first_child_.assign(n_ + 1, -1);
    next_sib_.assign(n_ + 1, -1);
    prev_sib_.assign(n_ + 1, -1);

    total_supply_ = 0.0;
    for (int u = n_ - 1; u >= 0; --u) {
      const int e = m_ + u;
      parent_[u] = root_;
      pred_[u] = e;
      depth_[u] = 1;
      state_[e] = kTree;
      if (supply_[u] >= 0.0) {
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = supply_[u];
        cost_[e] = 0.0;
        up_[u] = 1;
        pi_[u] = 0.0;
        total_supply_ += supply_[u];
      } else {
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -supply_[u];
        cost_[e] = art_cost_;
        up_[u] = 0;
        pi_[u] = art_cost_;
      }
      add_child(root_, u);
    }

    block_size_ = std::max(10, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(m_, 1))))));
    next_arc_ = 0;
    pivots_ = 0;
    max_pivots_ = 200LL * (static_cast<std::int64_t>(m_) + n_) + 100000;
  }

  double reduced_cost(int e) const { return cost_[e] + pi_[source_[e]] - pi_[target_[e]]; }

  bool find_entering_arc() {
    if (m_ == 0) return false;
    double best = -eps_;
    int cnt = block_size_;
    int e = next_arc_;
    for (int scanned = 0; scanned < m_; ++scanned) {
      if (state_[e] == kLower) {
        const double c = reduced_cost(e);
        if (c < best) {
          best = c;
          in_arc_ = e;
        }
      }
      if (++e == m_) e = 0;
      if (--cnt == 0) {
        if (best < -eps_) {
          next_arc_ = e;
          return true;
        }
        cnt = block_size_;
      }
    }
    if (best < -eps_) {
      next_arc_ = e;
      return true;
    }
    return false;
  }

  int find_join(int u, int v) const {
    while (depth_[u] > depth_[v]) u = parent_[u];
    while (depth_[v] > depth_[u]) v = parent_[v];
    while (u != v) {
      u = parent_[u];
      v = parent_[v];
    }
    return u;
  }

  void pivot() {
    const int first = source_[in_arc_];
    const int second = target_[in_arc_];
    const int join = find_join(first, second);

    // Ratio test. Flow is pushed along in_arc from first to second, so it
    // decreases on up-arcs of the first branch and down-arcs of the second.
    double delta = std::numeric_limits<double>::infinity();
    int u_out = -1;
    int side = 0;
    for (int u = first; u != join; u = parent_[u]) {
      if (up_[u] && flow_[pred_[u]] < delta) {
        delta = flow_[pred_[u]];
        u_out = u;
        side = 1;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      if (!up_[u] && flow_[pred_[u]] <= delta) {
        delta = flow_[pred_[u]];
        u_out = u;
        side = 2;
      }
    }
    if (side == 0) throw std::runtime_error("network simplex: unbounded (negative cycle)");

    if (delta > 0.0) {
      flow_[in_arc_] += delta;
      for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? -delta : delta;
      for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += up_[u] ? delta : -delta;
    }
    const int out_arc = pred_[u_out];
    flow_[out_arc] = 0.0;
    state_[out_arc] = kLower;
    state_[in_arc_] = kTree;

    const int u_in = side == 1 ? first : second;
    const int v_in = side == 1 ? second : first;

    // Cut the subtree below u_out and re-hang it from u_in.
    remove_child(parent_[u_out], u_out);
    path_.clear();
    for (int u = u_in; u != u_out; u = parent_[u]) path_.push_back(u);
    path_.push_back(u_out);
    for (std::size_t i = path_.size() - 1; i > 0; --i) {
      const int child = path_[i - 1];
      const int par = path_[i];
      remove_child(par, child);
      parent_[par] = child;
      pred_[par] = pred_[child];
      up_[par] = !up_[child];
      add_child(child, par);
    }
    parent_[u_in] = v_in;
    pred_[u_in] = in_arc_;
    up_[u_in] = source_[in_arc_] == u_in;
    add_child(v_in, u_in);

    const double target_pi = up_[u_in] ? pi_[v_in] - cost_[in_arc_] : pi_[v_in] + cost_[in_arc_];
    const double sigma = target_pi - pi_[u_in];
    stack_.clear();
    stack_.push_back(u_in);
    while (!stack_.empty()) {
      const int u = stack_.back();
      stack_.pop_back();
      pi_[u] += sigma;
      depth_[u] = depth_[parent_[u]] + 1;
      for (int c = first_child_[u]; c != -1; c = next_sib_[c]) stack_.push_back(c);
    }
    pi_[u_in] = target_pi;
  }

  void recompute_potentials() {
    stack_.clear();
    pi_[root_] = 0.0;
    depth_[root_] = 0;
    for (int c = first_child_[root_]; c != -1; c = next_sib_[c]) stack_.push_back(c);
    while (!stack_.empty()) {
      const int u = stack_.back();
      stack_.pop_back();
      const int p = parent_[u];
      const int e = pred_[u];
      pi_[u] = up_[u] ? pi_[p] - cost_[e] : pi_[p] + cost_[e];
      depth_[u] = depth_[p] + 1;
      for (int c = first_child_[u]; c != -1; c = next_sib_[c]) stack_.push_back(c);
    }
  }

  void add_child(int p, int c) {
    prev_sib_[c] = -1;
    next_sib_[c] = first_child_[p];
    if (first_child_[p] != -1) prev_sib_[first_child_[p]] = c;
    first_child_[p] = c;
  }

  void remove_child(int p, int c) {
    if (prev_sib_[c] != -1) next_sib_[prev_sib_[c]] = next_sib_[c];
    else first_child_[p] = next_sib_[c];
    if (next_sib_[c] != -1) prev_sib_[next_sib_[c]] = prev_sib_[c];
    prev_sib_[c] = next_sib_[c] = -1;
  }

  int n_ = 0;
  int m_ = 0;
  int root_ = 0;
  std::vector<double> supply_;

  std::vector<int> source_, target_;
  std::vector<double> cost_, flow_;
  std::vector<signed char> state_;

  std::vector<int> parent_, pred_, depth_;
  std::vector<char> up_;
  std::vector<double> pi_;
  std::vector<int> first_child_, next_sib_, prev_sib_;
  std::vector<int> path_, stack_;

  double art_override_ = 0.0;
  double art_cost_ = 0.0;
  double cost_scale_ = 1.0;
  double eps_ = 0.0;
  double total_supply_ = 0.0;
  int block_size_ = 10;
  int next_arc_ = 0;
  int in_arc_ = -1;
  std::int64_t pivots_ = 0;
  std::int64_t max_pivots_ = 0;
};

}  // namespace rcs
