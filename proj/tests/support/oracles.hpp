#pragma once

// Independent reference computations used only by tests: values here are
// derived from first principles (closed forms, conservation laws, exhaustive
// enumeration) rather than from the library code under test.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// Total mechanical energy of the planar two-link point-mass arm; conserved
// along unforced trajectories (zero input, zero friction).
inline double two_link_energy(const double* z, double l1, double l2, double m1,
                              double m2, double g) {
  const double q1 = z[0], q2 = z[1], w1 = z[2], w2 = z[3];
  const double c2 = std::cos(q2);
  const double m11 = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + 2.0 * m2 * l1 * l2 * c2;
  const double m12 = m2 * l2 * l2 + m2 * l1 * l2 * c2;
  const double m22 = m2 * l2 * l2;
  const double kinetic = 0.5 * (m11 * w1 * w1 + 2.0 * m12 * w1 * w2 + m22 * w2 * w2);
  const double potential =
      -(m1 + m2) * g * l1 * std::cos(q1) - m2 * g * l2 * std::cos(q1 + q2);
  return kinetic + potential;
}

// Exhaustive vertex/edge enumeration solver for tiny inequality-form linear
// programs: min c^T v subject to A v <= b with v free.  Enumerates all
// n-subsets of active constraints, solves each square system by Gaussian
// elimination, keeps feasible solutions.  Exponential; for n <= 4, rows <= 24.
struct BruteLpResult {
  bool feasible = false;
  bool bounded = true;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& out) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-11) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t cc = col; cc < n; ++cc) a[r][cc] -= f * a[col][cc];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = b[i] / a[i][i];
  return true;
}

inline void enumerate_subsets(std::size_t m, std::size_t n, std::size_t start,
                              std::vector<std::size_t>& pick,
                              const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (pick.size() == n) {
    fn(pick);
    return;
  }
  for (std::size_t i = start; i < m; ++i) {
    pick.push_back(i);
    enumerate_subsets(m, n, i + 1, pick, fn);
    pick.pop_back();
  }
}

inline BruteLpResult brute_force_lp(const std::vector<double>& c,
                                    const std::vector<std::vector<double>>& rows,
                                    const std::vector<double>& rhs) {
  const std::size_t n = c.size();
  const std::size_t m = rows.size();
  BruteLpResult best;

  auto feasible_at = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < m; ++i) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += rows[i][j] * v[j];
      if (lhs > rhs[i] + 1e-7) return false;
    }
    return true;
  };

  std::vector<std::size_t> pick;
  std::function<void(const std::vector<std::size_t>&)> visit =
      [&](const std::vector<std::size_t>& subset) {
        std::vector<std::vector<double>> a;
        std::vector<double> b;
        for (auto i : subset) {
          a.push_back(rows[i]);
          b.push_back(rhs[i]);
        }
        std::vector<double> v;
        if (!solve_square(a, b, v)) return;
        if (!feasible_at(v)) return;
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += c[j] * v[j];
        if (!best.feasible || obj < best.objective) {
          best.feasible = true;
          best.objective = obj;
          best.x = v;
        }
      };
  enumerate_subsets(m, n, 0, pick, visit);

  // A bounded-feasible LP in inequality form attains its optimum at a vertex
  // (intersection of n active rows) when one exists.  Detect unboundedness by
  // probing far along -c from the best vertex.
  if (best.feasible) {
    std::vector<double> probe = best.x;
    for (std::size_t j = 0; j < n; ++j) probe[j] -= 1e6 * c[j];
    if (feasible_at(probe)) best.bounded = false;
  }
  return best;
}

}  // namespace oracle
