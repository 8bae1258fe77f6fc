#include <immintrin.h>

#include <limits>

#include "kernels/variants.hpp"

namespace avt::kernels::detail {

namespace {

inline __m256d metric_of_r2_avx2(Metric metric, __m256d r2) {
  switch (metric) {
    case Metric::kEuclidean: return _mm256_sqrt_pd(r2);
    case Metric::kSquaredEuclidean: return r2;
    case Metric::kConcaveSqrt: return _mm256_sqrt_pd(_mm256_sqrt_pd(r2));
  }
  return r2;
}

// Same operation order as kernels::score(): (dx*dx + dy*dy), then f, then - w.
inline __m256d score_avx2(Metric metric, __m256d x, __m256d y, double px, double py, double w) {
  const __m256d dx = _mm256_sub_pd(x, _mm256_set1_pd(px));
  const __m256d dy = _mm256_sub_pd(y, _mm256_set1_pd(py));
  const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
  return _mm256_sub_pd(metric_of_r2_avx2(metric, r2), _mm256_set1_pd(w));
}

template <Metric M>
void nearest_two_block(std::span<const double> xs, std::span<const double> ys,
                       const SiteTable& sites, const NearestTwo& out, std::size_t stop) {
  const std::size_t n = sites.size();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < stop; a += 4) {
    const __m256d x = _mm256_loadu_pd(xs.data() + a);
    const __m256d y = _mm256_loadu_pd(ys.data() + a);
    __m256d best = inf;
    __m256d second = inf;
    __m256d arg = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n; ++j) {
      const __m256d s = score_avx2(M, x, y, sites.x[j], sites.y[j], sites.weight[j]);
      const __m256d lt_best = _mm256_cmp_pd(s, best, _CMP_LT_OQ);
      const __m256d lt_second = _mm256_cmp_pd(s, second, _CMP_LT_OQ);
      const __m256d second_if_not_best = _mm256_blendv_pd(second, s, lt_second);
      second = _mm256_blendv_pd(second_if_not_best, best, lt_best);
      best = _mm256_blendv_pd(best, s, lt_best);
      arg = _mm256_blendv_pd(arg, _mm256_set1_pd(static_cast<double>(j)), lt_best);
    }
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out.best.data() + a), _mm256_cvtpd_epi32(arg));
    _mm256_storeu_pd(out.best_score.data() + a, best);
    _mm256_storeu_pd(out.runner_up.data() + a, second);
  }
}

template <Metric M>
void group_min_block(std::span<const double> xs, std::span<const double> ys,
                     const SiteTable& sites, std::span<const std::uint8_t> in_group,
                     const GroupMin& out, std::size_t stop) {
  const std::size_t n = sites.size();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < stop; a += 4) {
    const __m256d x = _mm256_loadu_pd(xs.data() + a);
    const __m256d y = _mm256_loadu_pd(ys.data() + a);
    __m256d gmin = inf;
    __m256d rmin = inf;
    __m256d rarg = _mm256_set1_pd(-1.0);
    for (std::size_t j = 0; j < n; ++j) {
      const __m256d s = score_avx2(M, x, y, sites.x[j], sites.y[j], sites.weight[j]);
      if (in_group[j]) {
        gmin = _mm256_blendv_pd(gmin, s, _mm256_cmp_pd(s, gmin, _CMP_LT_OQ));
      } else {
        const __m256d lt = _mm256_cmp_pd(s, rmin, _CMP_LT_OQ);
        rmin = _mm256_blendv_pd(rmin, s, lt);
        rarg = _mm256_blendv_pd(rarg, _mm256_set1_pd(static_cast<double>(j)), lt);
      }
    }
    _mm256_storeu_pd(out.group_min.data() + a, gmin);
    _mm256_storeu_pd(out.rest_min.data() + a, rmin);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out.rest_arg.data() + a), _mm256_cvtpd_epi32(rarg));
  }
}

}  // namespace

void nearest_two_avx2(Metric metric, std::span<const double> xs, std::span<const double> ys,
                      const SiteTable& sites, const NearestTwo& out) {
  const std::size_t count = xs.size();
  const std::size_t stop = count - count % 4;
  switch (metric) {
    case Metric::kEuclidean: nearest_two_block<Metric::kEuclidean>(xs, ys, sites, out, stop); break;
    case Metric::kSquaredEuclidean:
      nearest_two_block<Metric::kSquaredEuclidean>(xs, ys, sites, out, stop);
      break;
    case Metric::kConcaveSqrt: nearest_two_block<Metric::kConcaveSqrt>(xs, ys, sites, out, stop); break;
  }
  nearest_two_scalar(metric, xs, ys, sites, out, stop, count);
}

void group_min_avx2(Metric metric, std::span<const double> xs, std::span<const double> ys,
                    const SiteTable& sites, std::span<const std::uint8_t> in_group,
                    const GroupMin& out) {
  const std::size_t count = xs.size();
  const std::size_t stop = count - count % 4;
  switch (metric) {
    case Metric::kEuclidean:
      group_min_block<Metric::kEuclidean>(xs, ys, sites, in_group, out, stop);
      break;
    case Metric::kSquaredEuclidean:
      group_min_block<Metric::kSquaredEuclidean>(xs, ys, sites, in_group, out, stop);
      break;
    case Metric::kConcaveSqrt:
      group_min_block<Metric::kConcaveSqrt>(xs, ys, sites, in_group, out, stop);
      break;
  }
  group_min_scalar(metric, xs, ys, sites, in_group, out, stop, count);
}

}  // namespace avt::kernels::detail
