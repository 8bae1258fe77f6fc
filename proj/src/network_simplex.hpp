#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace avt::detail {

// Primal network simplex for the uncapacitated transportation problem
// (sources x sinks, every pair connected). Costs are integers so reduced
// costs are exact; flows are real. Spanning-tree bookkeeping follows the
// thread/successor representation with block-search pricing.
class NetworkSimplex {
 public:
  // cost is row-major, sources x sinks.
  NetworkSimplex(std::vector<double> supply, std::vector<double> demand, std::vector<std::int64_t> cost);

  // Returns false if artificial arcs still carry flow beyond feas_tol.
  bool run(double feas_tol);

  double flow(std::size_t source, std::size_t sink) const { return flow_[source * sinks_ + sink]; }
  // Node potentials with cost(u, v) + pi(u) - pi(v) >= 0 at optimality.
  std::int64_t source_potential(std::size_t i) const { return pi_[i]; }
  std::int64_t sink_potential(std::size_t j) const { return pi_[sources_ + j]; }
  // True when every arc has nonnegative reduced cost.
  bool dual_feasible() const;
  std::size_t pivots() const noexcept { return pivots_; }

 private:
  static constexpr int kUp = 1;
  static constexpr int kDown = -1;
  static constexpr signed char kLower = 1;
  static constexpr signed char kTree = 0;

  std::int64_t reduced_cost(std::size_t e) const {
    return cost_[e] + pi_[source_[e]] - pi_[target_[e]];
  }
  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow(bool change);
  void update_tree_structure();
  void update_potential();

  std::size_t sources_;
  std::size_t sinks_;
  std::size_t node_num_;
  std::size_t arc_num_;   // real arcs
  std::size_t all_arc_num_;
  int root_;

  std::vector<int> source_, target_;
  std::vector<std::int64_t> cost_;
  std::vector<double> flow_;
  std::vector<signed char> state_;

  std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_, pred_dir_;
  std::vector<int> dirty_revs_;
  std::vector<std::int64_t> pi_;

  std::size_t block_size_;
  std::size_t next_arc_ = 0;
  std::size_t pivots_ = 0;

  int in_arc_ = -1, join_ = -1, u_in_ = -1, v_in_ = -1, u_out_ = -1, v_out_ = -1;
  double delta_ = 0.0;
};

}  // namespace avt::detail
