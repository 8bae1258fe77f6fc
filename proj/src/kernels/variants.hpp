#pragma once

#include "avt/kernels.hpp"

namespace avt::kernels::detail {

void nearest_two_scalar(Metric metric, std::span<const double> xs, std::span<const double> ys,
                        const SiteTable& sites, const NearestTwo& out, std::size_t begin,
                        std::size_t end);
void group_min_scalar(Metric metric, std::span<const double> xs, std::span<const double> ys,
                      const SiteTable& sites, std::span<const std::uint8_t> in_group,
                      const GroupMin& out, std::size_t begin, std::size_t end);

#if defined(AVT_HAVE_AVX2_KERNELS)
void nearest_two_avx2(Metric metric, std::span<const double> xs, std::span<const double> ys,
                      const SiteTable& sites, const NearestTwo& out);
void group_min_avx2(Metric metric, std::span<const double> xs, std::span<const double> ys,
                    const SiteTable& sites, std::span<const std::uint8_t> in_group,
                    const GroupMin& out);
#endif

}  // namespace avt::kernels::detail
