#include <atomic>
#include <cstdlib>
#include <string>

#include "spfactor/errors.hpp"
#include "spfactor/kernels.hpp"

namespace spfactor::kernels {
namespace {

using detail::KernelTable;

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct Active {
  Lane lane;
  const KernelTable* table;
};

Active detect() {
  if (const char* env = std::getenv("SPFACTOR_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return {Lane::scalar, &detail::scalar_table()};
    if (want == "avx2") {
      if (const KernelTable* t = detail::avx2_table(); t && cpu_has_avx2()) {
        return {Lane::avx2, t};
      }
      throw ValidationError("SPFACTOR_KERNELS=avx2 but AVX2 is unavailable");
    }
    if (!want.empty() && want != "auto") {
      throw ValidationError("unknown SPFACTOR_KERNELS value: " + want);
    }
  }
  if (const KernelTable* t = detail::avx2_table(); t && cpu_has_avx2()) {
    return {Lane::avx2, t};
  }
  return {Lane::scalar, &detail::scalar_table()};
}

Active& active() {
  static Active a = detect();
  return a;
}

}  // namespace

Lane active_lane() { return active().lane; }

std::string lane_name(Lane lane) {
  return lane == Lane::avx2 ? "avx2" : "scalar";
}

bool lane_available(Lane lane) {
  if (lane == Lane::scalar) return true;
  return detail::avx2_table() != nullptr && cpu_has_avx2();
}

void set_lane(Lane lane) {
  if (!lane_available(lane)) {
    throw ValidationError("kernel lane not available on this CPU: " +
                          lane_name(lane));
  }
  active() = {lane, lane == Lane::avx2 ? detail::avx2_table()
                                       : &detail::scalar_table()};
}

void vexp(const double* x, double* y, std::size_t n) {
  active().table->vexp(x, y, n);
}

double poisson_term_sum(const double* y, const double* loglam,
                        const double* offset, std::size_t n) {
  return active().table->poisson_term_sum(y, loglam, offset, n);
}

double pairwise_sqdiff_sum(const std::int32_t* a, const std::int32_t* b,
                           std::size_t nedges, const double* r) {
  return active().table->pairwise_sqdiff_sum(a, b, nedges, r);
}

double pairwise_proddiff_sum(const std::int32_t* a, const std::int32_t* b,
                             std::size_t nedges, const double* x,
                             const double* y) {
  return active().table->pairwise_proddiff_sum(a, b, nedges, x, y);
}

double dot(const double* a, const double* b, std::size_t n) {
  return active().table->dot(a, b, n);
}

double sum(const double* x, std::size_t n) {
  return active().table->sum(x, n);
}

}  // namespace spfactor::kernels
