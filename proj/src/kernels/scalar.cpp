#include <cmath>
#include <cstddef>
#include <cstdint>

#include "spfactor/kernels.hpp"

// Reference lane. Plain ascending loops; this is the behavior the SIMD lanes
// are tested against.

namespace spfactor::kernels::detail {
namespace {

void vexp_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

double poisson_term_sum_scalar(const double* y, const double* loglam,
                               const double* offset, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += y[i] * loglam[i] - offset[i] * std::exp(loglam[i]);
  }
  return acc;
}

double pairwise_sqdiff_sum_scalar(const std::int32_t* a, const std::int32_t* b,
                                  std::size_t nedges, const double* r) {
  double acc = 0.0;
  for (std::size_t e = 0; e < nedges; ++e) {
    const double d = r[a[e]] - r[b[e]];
    acc += d * d;
  }
  return acc;
}

double pairwise_proddiff_sum_scalar(const std::int32_t* a,
                                    const std::int32_t* b, std::size_t nedges,
                                    const double* x, const double* y) {
  double acc = 0.0;
  for (std::size_t e = 0; e < nedges; ++e) {
    acc += (x[a[e]] - x[b[e]]) * (y[a[e]] - y[b[e]]);
  }
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      vexp_scalar,         poisson_term_sum_scalar,
      pairwise_sqdiff_sum_scalar, pairwise_proddiff_sum_scalar,
      dot_scalar,          sum_scalar,
  };
  return table;
}

}  // namespace spfactor::kernels::detail
