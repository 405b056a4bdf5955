#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "wim/error.hpp"

namespace wim {

// Primal network simplex for the balanced, uncapacitated transportation problem
//
//   minimize   sum_ij cost[i*m + j] * flow_ij
//   subject to sum_j flow_ij = supply[i],  sum_i flow_ij = demand[j],  flow >= 0
//
// with integer supplies and demands, so every basic solution is integral and the
// optimum is exact. The spanning-tree basis is kept in parent/thread/successor
// form; the entering arc comes from block search pricing (lowest index wins among
// equal reduced costs inside a block).
class TransportationSimplex {
 public:
  using Flow = std::int64_t;

  TransportationSimplex(std::span<const Flow> supply, std::span<const Flow> demand, std::span<const double> cost)
      : n_(static_cast<int>(supply.size())), m_(static_cast<int>(demand.size())) {
    if (n_ == 0 || m_ == 0) throw DomainError("TransportationSimplex: empty side");
    if (cost.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_))
      throw DomainError("TransportationSimplex: cost matrix has wrong size");
    Flow total_s = 0, total_d = 0;
    for (Flow s : supply) {
      if (s < 0) throw DomainError("TransportationSimplex: negative supply");
      total_s += s;
    }
    for (Flow d : demand) {
      if (d < 0) throw DomainError("TransportationSimplex: negative demand");
      total_d += d;
    }
    if (total_s != total_d) throw DomainError("TransportationSimplex: unbalanced problem");

    node_num_ = n_ + m_;
    arc_num_ = static_cast<std::int64_t>(n_) * m_;
    std::int64_t all_arcs = arc_num_ + node_num_;
    root_ = node_num_;

    cost_scale_ = 0.0;
    for (double c : cost) {
      if (!std::isfinite(c)) throw DomainError("TransportationSimplex: non-finite cost");
      cost_scale_ = std::max(cost_scale_, std::abs(c));
    }
    if (cost_scale_ == 0.0) cost_scale_ = 1.0;

    source_.resize(all_arcs);
    target_.resize(all_arcs);
    cost_.resize(all_arcs);
    flow_.assign(all_arcs, 0);
    state_.assign(all_arcs, kStateLower);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) {
        std::int64_t e = static_cast<std::int64_t>(i) * m_ + j;
        source_[e] = i;
        target_[e] = n_ + j;
        cost_[e] = cost[e] / cost_scale_;
      }

    supply_.resize(node_num_ + 1);
    for (int i = 0; i < n_; ++i) supply_[i] = supply[i];
    for (int j = 0; j < m_; ++j) supply_[n_ + j] = -demand[j];
    supply_[root_] = 0;

    int N = node_num_ + 1;
    parent_.resize(N);
    pred_.resize(N);
    thread_.resize(N);
    rev_thread_.resize(N);
    succ_num_.resize(N);
    last_succ_.resize(N);
    pred_dir_.resize(N);
    pi_.resize(N);

    double art_cost = static_cast<double>(node_num_) + 1.0;
    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0;
    for (int u = 0; u < node_num_; ++u) {
      std::int64_t e = arc_num_ + u;
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kStateTree;
      if (supply_[u] >= 0) {
        pred_dir_[u] = kDirUp;
        pi_[u] = 0;
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = supply_[u];
        cost_[e] = 0;
      } else {
        pred_dir_[u] = kDirDown;
        pi_[u] = art_cost;
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -supply_[u];
        cost_[e] = art_cost;
      }
    }
    block_size_ = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::ceil(std::sqrt(double(arc_num_)))));
  }

  // Runs pivots to optimality. Throws NumericError if the pivot budget is exhausted.
  void solve(std::int64_t max_pivots = -1) {
    if (max_pivots < 0) max_pivots = 50 * (arc_num_ + node_num_) + 1000;
    while (find_entering_arc()) {
      if (++pivots_ > max_pivots) throw NumericError("network simplex: pivot budget exhausted");
      find_join_node();
      bool change = find_leaving_arc();
      if (delta_ >= kInf) throw NumericError("network simplex: unbounded problem");
      change_flow(change);
      if (change) {
        update_tree_structure();
        update_potential();
      }
    }
    for (int u = 0; u < node_num_; ++u)
      if (flow_[arc_num_ + u] != 0) throw NumericError("network simplex: infeasible problem");
  }

  Flow flow(int i, int j) const { return flow_[static_cast<std::int64_t>(i) * m_ + j]; }

  // Total cost in the caller's units.
  double total_cost() const {
    double c = 0.0;
    for (std::int64_t e = 0; e < arc_num_; ++e)
      if (flow_[e] != 0) c += static_cast<double>(flow_[e]) * cost_[e];
    return c * cost_scale_;
  }

  std::int64_t pivots() const { return pivots_; }
  int sources() const { return n_; }
  int sinks() const { return m_; }

 private:
  static constexpr signed char kStateUpper = -1;
  static constexpr signed char kStateTree = 0;
  static constexpr signed char kStateLower = 1;
  static constexpr signed char kDirUp = 1;
  static constexpr signed char kDirDown = -1;
  static constexpr Flow kInf = std::numeric_limits<Flow>::max();
  static constexpr double kEpsilon = 1e-12;

  double reduced(std::int64_t e) const { return state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]); }

  bool find_entering_arc() {
    double best = -kEpsilon;
    std::int64_t cnt = block_size_;
    std::int64_t e;
    in_arc_ = -1;
    for (e = next_arc_; e < arc_num_; ++e) {
      double c = reduced(e);
      if (c < best) {
        best = c;
        in_arc_ = e;
      }
      if (--cnt == 0) {
        if (in_arc_ >= 0) {
          next_arc_ = e + 1 == arc_num_ ? 0 : e + 1;
          return true;
        }
        cnt = block_size_;
      }
    }
    for (e = 0; e < next_arc_; ++e) {
      double c = reduced(e);
      if (c < best) {
        best = c;
        in_arc_ = e;
      }
      if (--cnt == 0) {
        if (in_arc_ >= 0) {
          next_arc_ = e + 1;
          return true;
        }
        cnt = block_size_;
      }
    }
    if (in_arc_ < 0) return false;
    next_arc_ = e == arc_num_ ? 0 : e;
    return true;
  }

  void find_join_node() {
    int u = source_[in_arc_];
    int v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v])
        u = parent_[u];
      else
        v = parent_[v];
    }
    join_ = u;
  }

  bool find_leaving_arc() {
    int first, second;
    if (state_[in_arc_] == kStateLower) {
      first = source_[in_arc_];
      second = target_[in_arc_];
    } else {
      first = target_[in_arc_];
      second = source_[in_arc_];
    }
    delta_ = kInf;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      std::int64_t e = pred_[u];
      Flow d = pred_dir_[u] == kDirDown ? kInf : flow_[e];
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      std::int64_t e = pred_[u];
      Flow d = pred_dir_[u] == kDirUp ? kInf : flow_[e];
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    return result != 0;
  }

  void change_flow(bool change) {
    if (delta_ > 0) {
      Flow val = state_[in_arc_] * delta_;
      flow_[in_arc_] += val;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
      for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
    }
    if (change) {
      state_[in_arc_] = kStateTree;
      state_[pred_[u_out_]] = flow_[pred_[u_out_]] == 0 ? kStateLower : kStateUpper;
    } else {
      state_[in_arc_] = static_cast<signed char>(-state_[in_arc_]);
    }
  }

  void update_tree_structure() {
    int old_rev_thread = rev_thread_[u_out_];
    int old_succ_num = succ_num_[u_out_];
    int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

      // Re-hang the stem (path from u_in up to u_out) under v_in.
      int stem = u_in_;
      int par_stem = v_in_;
      int next_stem;
      int last = last_succ_[u_in_];
      int before, after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);

        before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;

        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;

      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }

      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0, tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = static_cast<signed char>(-pred_dir_[p]);
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
      succ_num_[u_in_] = old_succ_num;
    }

    int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int n_, m_;
  int node_num_ = 0;
  int root_ = 0;
  std::int64_t arc_num_ = 0;
  double cost_scale_ = 1.0;

  std::vector<int> source_, target_;
  std::vector<double> cost_;
  std::vector<Flow> flow_;
  std::vector<signed char> state_;
  std::vector<Flow> supply_;

  std::vector<int> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<int> thread_, rev_thread_, succ_num_, last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;

  std::int64_t block_size_ = 10;
  std::int64_t next_arc_ = 0;
  std::int64_t in_arc_ = -1;
  int join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  Flow delta_ = 0;
  std::int64_t pivots_ = 0;
};

}  // namespace wim
