#pragma once

// Runtime-dispatched vector kernels used by the distance scans and the
// interior-point linear algebra.  Every kernel has a scalar reference
// implementation plus optional AVX2 (x86-64) / NEON (aarch64) variants; the
// active variant is chosen once at startup from CPU capabilities and can be
// overridden programmatically or with the DFK_SIMD environment variable
// (values: scalar, avx2, neon).

#include <cstddef>
#include <string>

namespace dfk::simd {

enum class Isa { scalar, avx2, neon };

// Highest-performance ISA usable on this CPU.
Isa best_supported();

// True when `isa` can run on this CPU with this build.
bool supported(Isa isa);

// Currently dispatched ISA.
Isa active();

// Force dispatch to `isa`.  Throws std::invalid_argument when unsupported.
void use(Isa isa);

const char* name(Isa isa);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// max_i |v[i]|  (0 when n == 0)
double max_abs(const double* v, std::size_t n);

// max_i |a[i] - b[i]|  (Chebyshev distance; 0 when n == 0)
double max_abs_diff(const double* a, const double* b, std::size_t n);

// Chebyshev distance from one point to many, structure-of-arrays layout:
// dist[i] = max_j |cols[j][i] - point[j]| for i in [0, count).
void cheb_distances(const double* const* cols, std::size_t dim,
                    const double* point, std::size_t count, double* dist);

// Rank-1 update of the upper triangle of a row-major n-by-n matrix:
// m[i*n + j] += w * a[i] * a[j] for all j >= i.
void rank1_upper(double* m, std::size_t n, const double* a, double w);

namespace detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  double (*max_abs_diff)(const double*, const double*, std::size_t);
  void (*cheb_distances)(const double* const*, std::size_t, const double*,
                         std::size_t, double*);
  void (*rank1_upper)(double*, std::size_t, const double*, double);
};

const KernelTable& scalar_table();
#if DFK_HAVE_AVX2_TU
const KernelTable& avx2_table();
#endif
#if DFK_HAVE_NEON_TU
const KernelTable& neon_table();
#endif

}  // namespace detail

}  // namespace dfk::simd
