// NEON kernel variants for aarch64 builds.  NEON is baseline on aarch64 so no
// special compile flags are needed; dispatch still routes through the table so
// the scalar reference stays exercisable everywhere.

#include "dfk/simd.hpp"

#if DFK_HAVE_NEON_TU

#include <arm_neon.h>

#include <cmath>

namespace dfk::simd::detail {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  if (i + 2 <= n) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    i += 2;
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs_neon(const double* v, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(v + i)));
  double m = vmaxvq_f64(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  return m;
}

double max_abs_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vmaxq_f64(acc, vabsq_f64(d));
  }
  double m = vmaxvq_f64(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void cheb_distances_neon(const double* const* cols, std::size_t dim,
                         const double* point, std::size_t count, double* dist) {
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      float64x2_t d = vsubq_f64(vld1q_f64(cols[j] + i), vdupq_n_f64(point[j]));
      acc = vmaxq_f64(acc, vabsq_f64(d));
    }
    vst1q_f64(dist + i, acc);
  }
  for (; i < count; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j)
      acc = std::max(acc, std::fabs(cols[j][i] - point[j]));
    dist[i] = acc;
  }
}

void rank1_upper_neon(double* m, std::size_t n, const double* a, double w) {
  for (std::size_t i = 0; i < n; ++i) {
    const double wa = w * a[i];
    const float64x2_t vwa = vdupq_n_f64(wa);
    double* row = m + i * n;
    std::size_t j = i;
    for (; j + 2 <= n; j += 2) {
      float64x2_t vr = vld1q_f64(row + j);
      vr = vfmaq_f64(vr, vwa, vld1q_f64(a + j));
      vst1q_f64(row + j, vr);
    }
    for (; j < n; ++j) row[j] += wa * a[j];
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table = {
      dot_neon,          axpy_neon,           max_abs_neon,
      max_abs_diff_neon, cheb_distances_neon, rank1_upper_neon,
  };
  return table;
}

}  // namespace dfk::simd::detail

#endif  // DFK_HAVE_NEON_TU
