#include <atomic>
#include <cstdlib>
#include <string>

#include "avt/error.hpp"
#include "kernels/variants.hpp"

namespace avt::kernels {

namespace {

Isa initial_isa() noexcept {
  const char* force = std::getenv("AVT_FORCE_SCALAR");
  if (force != nullptr && std::string(force) == "1") return Isa::kScalar;
  return best_available_isa();
}

std::atomic<Isa>& active_slot() noexcept {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

void check_shapes(std::span<const double> xs, std::span<const double> ys, const SiteTable& sites) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::kDimensionMismatch, "coordinate spans differ in length");
  if (sites.y.size() != sites.size() || sites.weight.size() != sites.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "site table columns differ in length");
  }
  if (sites.size() == 0) throw Error(ErrorCode::kEmptySites, "kernel called without sites");
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(AVT_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa best_available_isa() noexcept { return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

Isa active_isa() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::kInvalidArgument, std::string("kernel variant not available: ") + std::string(to_string(isa)));
  }
  active_slot().store(isa, std::memory_order_relaxed);
}

void nearest_two(Isa isa, Metric metric, std::span<const double> xs, std::span<const double> ys,
                 const SiteTable& sites, const NearestTwo& out) {
  check_shapes(xs, ys, sites);
  if (out.best.size() < xs.size() || out.best_score.size() < xs.size() || out.runner_up.size() < xs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "output spans too short");
  }
#if defined(AVT_HAVE_AVX2_KERNELS)
  if (isa == Isa::kAvx2 && isa_available(Isa::kAvx2)) {
    detail::nearest_two_avx2(metric, xs, ys, sites, out);
    return;
  }
#endif
  (void)isa;
  detail::nearest_two_scalar(metric, xs, ys, sites, out, 0, xs.size());
}

void group_min(Isa isa, Metric metric, std::span<const double> xs, std::span<const double> ys,
               const SiteTable& sites, std::span<const std::uint8_t> in_group, const GroupMin& out) {
  check_shapes(xs, ys, sites);
  if (in_group.size() != sites.size()) throw Error(ErrorCode::kDimensionMismatch, "group mask length");
  if (out.group_min.size() < xs.size() || out.rest_min.size() < xs.size() || out.rest_arg.size() < xs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "output spans too short");
  }
#if defined(AVT_HAVE_AVX2_KERNELS)
  if (isa == Isa::kAvx2 && isa_available(Isa::kAvx2)) {
    detail::group_min_avx2(metric, xs, ys, sites, in_group, out);
    return;
  }
#endif
  (void)isa;
  detail::group_min_scalar(metric, xs, ys, sites, in_group, out, 0, xs.size());
}

}  // namespace avt::kernels
