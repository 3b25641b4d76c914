// AVX2 + FMA kernel variants.  This translation unit is the only one compiled
// with -mavx2 -mfma; nothing here runs unless runtime dispatch selected it.

#include "dfk/simd.hpp"

#if DFK_HAVE_AVX2_TU

#include <immintrin.h>

#include <cmath>

namespace dfk::simd::detail {

namespace {

const __m256d kSignMask = _mm256_set1_pd(-0.0);

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(kSignMask, v); }

inline double hsum_pd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmax_pd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum_pd(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs_avx2(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, abs_pd(_mm256_loadu_pd(v + i)));
  double m = hmax_pd(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  return m;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_max_pd(acc, abs_pd(d));
  }
  double m = hmax_pd(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void cheb_distances_avx2(const double* const* cols, std::size_t dim,
                         const double* point, std::size_t count, double* dist) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < dim; ++j) {
      __m256d d = _mm256_sub_pd(_mm256_loadu_pd(cols[j] + i), _mm256_set1_pd(point[j]));
      acc = _mm256_max_pd(acc, abs_pd(d));
    }
    _mm256_storeu_pd(dist + i, acc);
  }
  for (; i < count; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j)
      acc = std::max(acc, std::fabs(cols[j][i] - point[j]));
    dist[i] = acc;
  }
}

void rank1_upper_avx2(double* m, std::size_t n, const double* a, double w) {
  for (std::size_t i = 0; i < n; ++i) {
    const double wa = w * a[i];
    const __m256d vwa = _mm256_set1_pd(wa);
    double* row = m + i * n;
    std::size_t j = i;
    for (; j + 4 <= n; j += 4) {
      __m256d vr = _mm256_loadu_pd(row + j);
      vr = _mm256_fmadd_pd(vwa, _mm256_loadu_pd(a + j), vr);
      _mm256_storeu_pd(row + j, vr);
    }
    for (; j < n; ++j) row[j] += wa * a[j];
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table = {
      dot_avx2,          axpy_avx2,           max_abs_avx2,
      max_abs_diff_avx2, cheb_distances_avx2, rank1_upper_avx2,
  };
  return table;
}

}  // namespace dfk::simd::detail

#endif  // DFK_HAVE_AVX2_TU
