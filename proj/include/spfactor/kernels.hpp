#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Arithmetic inner loops of the sampler. Every kernel has a scalar reference
// implementation and may have SIMD variants; the active lane is picked once at
// startup from CPU features and can be overridden (config flag or the
// SPFACTOR_KERNELS environment variable). Within a lane the reduction order is
// fixed, so results are deterministic for a given lane. Lanes agree with the
// scalar reference to ~1e-13 relative (vectorized exp is a polynomial
// approximation accurate to ~1 ulp); the equivalence suite pins this down.

namespace spfactor::kernels {

enum class Lane { scalar, avx2 };

// Lane selected at startup (honors SPFACTOR_KERNELS=scalar|avx2).
Lane active_lane();
std::string lane_name(Lane lane);
bool lane_available(Lane lane);

// Force a lane; throws ValidationError if this CPU cannot run it.
void set_lane(Lane lane);

// y[i] = exp(x[i]) for i < n. Specified for |x| <= 700; larger magnitudes are
// clamped into the representable range by the SIMD lanes.
void vexp(const double* x, double* y, std::size_t n);

// sum_i { y[i]*loglam[i] - offset[i]*exp(loglam[i]) } -- the non-constant part
// of a Poisson log likelihood with log mean log(offset[i]) + loglam[i].
double poisson_term_sum(const double* y, const double* loglam,
                        const double* offset, std::size_t n);

// sum over edges e of (r[a[e]] - r[b[e]])^2.
double pairwise_sqdiff_sum(const std::int32_t* a, const std::int32_t* b,
                           std::size_t nedges, const double* r);

// sum over edges e of (x[a[e]] - x[b[e]]) * (y[a[e]] - y[b[e]]).
double pairwise_proddiff_sum(const std::int32_t* a, const std::int32_t* b,
                             std::size_t nedges, const double* x,
                             const double* y);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);

namespace detail {
struct KernelTable {
  void (*vexp)(const double*, double*, std::size_t);
  double (*poisson_term_sum)(const double*, const double*, const double*,
                             std::size_t);
  double (*pairwise_sqdiff_sum)(const std::int32_t*, const std::int32_t*,
                                std::size_t, const double*);
  double (*pairwise_proddiff_sum)(const std::int32_t*, const std::int32_t*,
                                  std::size_t, const double*, const double*);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in / unsupported
}  // namespace detail

}  // namespace spfactor::kernels
