#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avt/error.hpp"

namespace avt::detail {

NetworkSimplex::NetworkSimplex(std::vector<double> supply, std::vector<double> demand,
                               std::vector<std::int64_t> cost)
    : sources_(supply.size()), sinks_(demand.size()) {
  if (cost.size() != sources_ * sinks_) throw Error(ErrorCode::kInvalidArgument, "cost matrix shape");
  node_num_ = sources_ + sinks_;
  arc_num_ = sources_ * sinks_;
  all_arc_num_ = arc_num_ + node_num_;
  root_ = static_cast<int>(node_num_);

  source_.resize(all_arc_num_);
  target_.resize(all_arc_num_);
  cost_.resize(all_arc_num_);
  flow_.assign(all_arc_num_, 0.0);
  state_.assign(all_arc_num_, kLower);

  std::int64_t max_cost = 0;
  for (std::size_t i = 0; i < sources_; ++i) {
    for (std::size_t j = 0; j < sinks_; ++j) {
      const std::size_t e = i * sinks_ + j;
      source_[e] = static_cast<int>(i);
      target_[e] = static_cast<int>(sources_ + j);
      cost_[e] = cost[e];
      if (cost[e] < 0) throw Error(ErrorCode::kInvalidArgument, "negative transport cost");
      max_cost = std::max(max_cost, cost[e]);
    }
  }
  const double art = (static_cast<double>(max_cost) + 1.0) * static_cast<double>(node_num_ + 1);
  if (art > 1e17) throw Error(ErrorCode::kTooLarge, "scaled costs overflow the exact solver");
  const std::int64_t art_cost = (max_cost + 1) * static_cast<std::int64_t>(node_num_ + 1);

  const std::size_t total_nodes = node_num_ + 1;
  parent_.resize(total_nodes);
  pred_.resize(total_nodes);
  thread_.resize(total_nodes);
  rev_thread_.resize(total_nodes);
  succ_num_.resize(total_nodes);
  last_succ_.resize(total_nodes);
  pred_dir_.resize(total_nodes);
  pi_.resize(total_nodes);

  parent_[root_] = -1;
  pred_[root_] = -1;
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = static_cast<int>(node_num_ + 1);
  last_succ_[root_] = root_ - 1;
  pi_[root_] = 0;

  for (std::size_t u = 0; u < node_num_; ++u) {
    const std::size_t e = arc_num_ + u;
    const int ui = static_cast<int>(u);
    parent_[u] = root_;
    pred_[u] = static_cast<int>(e);
    thread_[u] = ui + 1;
    rev_thread_[u + 1] = ui;
    succ_num_[u] = 1;
    last_succ_[u] = ui;
    state_[e] = kTree;
    const double s = u < sources_ ? supply[u] : -demand[u - sources_];
    if (s >= 0.0) {
      pred_dir_[u] = kUp;
      pi_[u] = 0;
      source_[e] = ui;
      target_[e] = root_;
      flow_[e] = s;
      cost_[e] = 0;
    } else {
      pred_dir_[u] = kDown;
      pi_[u] = art_cost;
      source_[e] = root_;
      target_[e] = ui;
      flow_[e] = -s;
      cost_[e] = art_cost;
    }
  }
  block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(arc_num_))));
}

bool NetworkSimplex::find_entering_arc() {
  std::int64_t min = 0;
  std::size_t cnt = block_size_;
  std::size_t e = next_arc_;
  bool found = false;
  for (std::size_t visited = 0; visited < arc_num_; ++visited) {
    const std::int64_t c = state_[e] * reduced_cost(e);
    if (c < min) {
      min = c;
      in_arc_ = static_cast<int>(e);
      found = true;
    }
    if (++e == arc_num_) e = 0;
    if (--cnt == 0) {
      if (found) break;
      cnt = block_size_;
    }
  }
  if (!found) return false;
  next_arc_ = e;
  return true;
}

void NetworkSimplex::find_join_node() {
  int u = source_[in_arc_];
  int v = target_[in_arc_];
  while (u != v) {
    if (succ_num_[u] < succ_num_[v]) {
      u = parent_[u];
    } else {
      v = parent_[v];
    }
  }
  join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
  const int first = source_[in_arc_];
  const int second = target_[in_arc_];
  constexpr double inf = std::numeric_limits<double>::infinity();
  delta_ = inf;
  int result = 0;
  for (int u = first; u != join_; u = parent_[u]) {
    const double d = pred_dir_[u] == kUp ? flow_[pred_[u]] : inf;
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (int u = second; u != join_; u = parent_[u]) {
    const double d = pred_dir_[u] == kDown ? flow_[pred_[u]] : inf;
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

void NetworkSimplex::change_flow(bool change) {
  if (delta_ > 0.0) {
    const double val = delta_;
    flow_[in_arc_] += val;
    for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
    for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
  }
  if (change) {
    state_[in_arc_] = kTree;
    state_[pred_[u_out_]] = kLower;
    flow_[pred_[u_out_]] = 0.0;
  } else {
    state_[in_arc_] = static_cast<signed char>(-state_[in_arc_]);
  }
}

void NetworkSimplex::update_tree_structure() {
  const int old_rev_thread = rev_thread_[u_out_];
  const int old_succ_num = succ_num_[u_out_];
  const int old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
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
    const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

    int stem = u_in_;
    int par_stem = v_in_;
    int next_stem;
    int last = last_succ_[u_in_];
    int before;
    int after = thread_[last];
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

    int tmp_sc = 0;
    const int tmp_ls = last_succ_[u_out_];
    for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = -pred_dir_[p];
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
    succ_num_[u_in_] = old_succ_num;
  }

  const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const int last_succ_out = last_succ_[u_out_];
  for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = old_rev_thread;
    }
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = last_succ_out;
    }
  }

  for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const std::int64_t sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
  const int end = thread_[last_succ_[u_in_]];
  for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

bool NetworkSimplex::run(double feas_tol) {
  while (find_entering_arc()) {
    find_join_node();
    const bool change = find_leaving_arc();
    if (delta_ == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::kInfeasible, "unbounded transportation problem");
    }
    change_flow(change);
    if (change) {
      update_tree_structure();
      update_potential();
    }
    ++pivots_;
  }
  for (std::size_t e = arc_num_; e < all_arc_num_; ++e) {
    if (std::abs(flow_[e]) > feas_tol) return false;
  }
  return true;
}

bool NetworkSimplex::dual_feasible() const {
  for (std::size_t e = 0; e < arc_num_; ++e) {
    if (reduced_cost(e) < 0) return false;
  }
  return true;
}

}  // namespace avt::detail
