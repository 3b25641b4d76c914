#pragma once

// Minimal dense row-major matrix plus the few helpers the pipeline needs.
// Deliberately not a general linear-algebra library: everything heavier
// (factorizations, solves) lives next to its single consumer.

#include <cassert>
#include <cstddef>
#include <vector>

#include "dfk/simd.hpp"

namespace dfk {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double* row(std::size_t i) {
    assert(i < rows);
    return data.data() + i * cols;
  }
  const double* row(std::size_t i) const {
    assert(i < rows);
    return data.data() + i * cols;
  }
  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows && j < cols);
    return data[i * cols + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows && j < cols);
    return data[i * cols + j];
  }
  bool empty() const { return rows == 0 || cols == 0; }
};

// y = M x  (y sized to M.rows)
inline void matvec(const Matrix& m, const double* x, double* y) {
  for (std::size_t i = 0; i < m.rows; ++i) y[i] = simd::dot(m.row(i), x, m.cols);
}

// y += alpha * M^T x  (x has M.rows entries, y has M.cols entries)
inline void matvec_transposed_add(const Matrix& m, double alpha, const double* x,
                                  double* y) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double w = alpha * x[i];
    if (w != 0.0) simd::axpy(w, m.row(i), y, m.cols);
  }
}

inline double inf_norm(const std::vector<double>& v) {
  return simd::max_abs(v.data(), v.size());
}

}  // namespace dfk
