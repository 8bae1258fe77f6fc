#include <limits>

#include "kernels/variants.hpp"

namespace avt::kernels::detail {

void nearest_two_scalar(Metric metric, std::span<const double> xs, std::span<const double> ys,
                        const SiteTable& sites, const NearestTwo& out, std::size_t begin,
                        std::size_t end) {
  const std::size_t n = sites.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t a = begin; a < end; ++a) {
    double best = inf;
    double second = inf;
    std::int32_t arg = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = score(metric, xs[a], ys[a], sites.x[j], sites.y[j], sites.weight[j]);
      if (s < best) {
        second = best;
        best = s;
        arg = static_cast<std::int32_t>(j);
      } else if (s < second) {
        second = s;
      }
    }
    out.best[a] = arg;
    out.best_score[a] = best;
    out.runner_up[a] = second;
  }
}

void group_min_scalar(Metric metric, std::span<const double> xs, std::span<const double> ys,
                      const SiteTable& sites, std::span<const std::uint8_t> in_group,
                      const GroupMin& out, std::size_t begin, std::size_t end) {
  const std::size_t n = sites.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t a = begin; a < end; ++a) {
    double gmin = inf;
    double rmin = inf;
    std::int32_t rarg = -1;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = score(metric, xs[a], ys[a], sites.x[j], sites.y[j], sites.weight[j]);
      if (in_group[j]) {
        if (s < gmin) gmin = s;
      } else if (s < rmin) {
        rmin = s;
        rarg = static_cast<std::int32_t>(j);
      }
    }
    out.group_min[a] = gmin;
    out.rest_min[a] = rmin;
    out.rest_arg[a] = rarg;
  }
}

}  // namespace avt::kernels::detail
