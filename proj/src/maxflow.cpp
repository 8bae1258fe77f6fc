#include "maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace avt::detail {

MaxFlow::MaxFlow(std::size_t nodes, double eps) : out_(nodes), level_(nodes), cursor_(nodes), eps_(eps) {}

std::size_t MaxFlow::add_arc(std::size_t from, std::size_t to, double capacity) {
  const std::size_t id = arcs_.size();
  arcs_.push_back({to, capacity, capacity});
  arcs_.push_back({from, 0.0, 0.0});
  out_[from].push_back(id);
  out_[to].push_back(id + 1);
  return id;
}

double MaxFlow::flow(std::size_t arc) const { return arcs_[arc].original - arcs_[arc].cap; }

bool MaxFlow::bfs(std::size_t source, std::size_t sink) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<std::size_t> q;
  level_[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t id : out_[u]) {
      const Arc& a = arcs_[id];
      if (a.cap > eps_ && level_[a.to] < 0) {
        level_[a.to] = level_[u] + 1;
        q.push(a.to);
      }
    }
  }
  return level_[sink] >= 0;
}

double MaxFlow::push(std::size_t u, std::size_t sink, double limit) {
  if (u == sink) return limit;
  for (; cursor_[u] < out_[u].size(); ++cursor_[u]) {
    const std::size_t id = out_[u][cursor_[u]];
    Arc& a = arcs_[id];
    if (a.cap <= eps_ || level_[a.to] != level_[u] + 1) continue;
    const double pushed = push(a.to, sink, std::min(limit, a.cap));
    if (pushed > 0.0) {
      a.cap -= pushed;
      arcs_[id ^ 1].cap += pushed;
      return pushed;
    }
  }
  return 0.0;
}

double MaxFlow::run(std::size_t source, std::size_t sink) {
  double total = 0.0;
  while (bfs(source, sink)) {
    std::fill(cursor_.begin(), cursor_.end(), 0);
    while (true) {
      const double pushed = push(source, sink, std::numeric_limits<double>::infinity());
      if (pushed <= 0.0) break;
      total += pushed;
    }
  }
  return total;
}

}  // namespace avt::detail
