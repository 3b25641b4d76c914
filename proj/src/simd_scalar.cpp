// Scalar reference kernels.  These define the semantics that the vector
// variants must reproduce; keep them simple enough to audit by eye.

#include "dfk/simd.hpp"

#include <cmath>

namespace dfk::simd::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs_scalar(const double* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = std::max(acc, std::fabs(v[i]));
  return acc;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = std::max(acc, std::fabs(a[i] - b[i]));
  return acc;
}

void cheb_distances_scalar(const double* const* cols, std::size_t dim,
                           const double* point, std::size_t count,
                           double* dist) {
  for (std::size_t i = 0; i < count; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j)
      acc = std::max(acc, std::fabs(cols[j][i] - point[j]));
    dist[i] = acc;
  }
}

void rank1_upper_scalar(double* m, std::size_t n, const double* a, double w) {
  for (std::size_t i = 0; i < n; ++i) {
    const double wa = w * a[i];
    double* row = m + i * n;
    for (std::size_t j = i; j < n; ++j) row[j] += wa * a[j];
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      dot_scalar,           axpy_scalar,         max_abs_scalar,
      max_abs_diff_scalar,  cheb_distances_scalar, rank1_upper_scalar,
  };
  return table;
}

}  // namespace dfk::simd::detail
