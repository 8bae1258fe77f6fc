#pragma once

#include <cstddef>
#include <vector>

namespace avt::detail {

// Dinic max-flow on real capacities; residuals below eps count as saturated.
class MaxFlow {
 public:
  MaxFlow(std::size_t nodes, double eps);

  // Returns the arc id usable with flow().
  std::size_t add_arc(std::size_t from, std::size_t to, double capacity);
  double run(std::size_t source, std::size_t sink);
  double flow(std::size_t arc) const;

 private:
  struct Arc {
    std::size_t to;
    double cap;
    double original;
  };
  bool bfs(std::size_t source, std::size_t sink);
  double push(std::size_t u, std::size_t sink, double limit);

  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
  double eps_;
};

}  // namespace avt::detail
