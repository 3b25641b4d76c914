#pragma once

// Dense inequality-form linear programming:  min c.v  subject to  A v <= b
// with v free.  Rows and columns are first balanced by Ruiz equilibration,
// then an infeasible-start Mehrotra predictor-corrector interior-point method
// runs on the normal equations; infeasibility is certified by an elastic
// phase-1 program.  Built for the design problem's shape (a few hundred
// variables, up to ~10^5 rows), not for general sparse LP work.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "dfk/linalg.hpp"

namespace dfk {

struct LinearProgram {
  std::size_t n_vars = 0;
  std::vector<double> cost;  // length n_vars
  Matrix rows;               // constraints.rows x n_vars
  std::vector<double> rhs;   // one bound per constraint row

  void validate() const;  // throws ConfigError on malformed input
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> v;      // solution when optimal (last iterate otherwise)
  double objective = 0.0;
  double max_violation = 0.0; // max(0, max_i (A v - b)_i)
  double accuracy = 0.0;      // max relative KKT residual of the returned iterate
  std::size_t iterations = 0;
  double phase1_objective = 0.0;  // infeasibility certificate when infeasible
  std::string note;
};

struct LpOptions {
  double tolerance = 1e-8;      // relative primal/dual/gap convergence target
  std::size_t max_iters = 100;
  double feasibility_cap = 1e-6;  // absolute violation allowed for "optimal"
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opt = {});
LpSolution solve_lp(const LinearProgram& lp, double tolerance,
                    std::size_t max_iters = 100);

// Text dump in the conventional LP file format, for external cross-checking.
void write_lp(const LinearProgram& lp, std::ostream& os);

}  // namespace dfk
