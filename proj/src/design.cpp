#include "dfk/design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dfk/errors.hpp"
#include "dfk/simd.hpp"

namespace dfk {

namespace {

thread_local std::vector<double> tls_phi;

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw ConfigError(what);
  }
}

}  // namespace

void Controller::validate() const {
  require(n_x >= 1, "controller needs at least one state row");
  require(basis.m >= 1, "controller basis is empty");
  require(coeffs.size() == coeff_count(),
          "controller coefficient vector has the wrong length");
  for (double c : coeffs) {
    require(std::isfinite(c), "controller coefficient is non-finite");
  }
}

void Controller::gains(const double* p, double* k1, double* k2) const {
  const std::size_t m = basis.m;
  tls_phi.resize(m);
  basis.evaluate(p, tls_phi.data());
  const double* block1 = coeffs.data();
  const double* block2 = coeffs.data() + n_x * m;
  for (std::size_t l = 0; l < n_x; ++l) {
    k1[l] = simd::dot(block1 + l * m, tls_phi.data(), m);
    k2[l] = simd::dot(block2 + l * m, tls_phi.data(), m);
  }
}

double Controller::evaluate(const double* p, const double* r_next,
                            const double* x) const {
  const std::size_t m = basis.m;
  tls_phi.resize(m);
  basis.evaluate(p, tls_phi.data());
  const double* block1 = coeffs.data();
  const double* block2 = coeffs.data() + n_x * m;
  double u = 0.0;
  for (std::size_t l = 0; l < n_x; ++l) {
    u += simd::dot(block1 + l * m, tls_phi.data(), m) * r_next[l];
    u -= simd::dot(block2 + l * m, tls_phi.data(), m) * x[l];
  }
  return u;
}

Matrix build_psi(const LpvDataset& data, const BasisSet& basis) {
  data.validate();
  require(basis.n_p == data.n_p(),
          "basis scheduling dimension does not match the dataset");
  const std::size_t L = data.L;
  const std::size_t n_x = data.n_x();
  const std::size_t m = basis.m;
  Matrix psi(L, 2 * n_x * m);
  std::vector<double> phi(m);
  for (std::size_t k = 0; k < L; ++k) {
    basis.evaluate(data.p.row(k), phi.data());
    const double* x_now = data.x.row(k);
    const double* x_next = data.x.row(k + 1);
    double* row = psi.row(k);
    for (std::size_t l = 0; l < n_x; ++l) {
      double* dst1 = row + flat_index(0, l, 0, n_x, m);
      double* dst2 = row + flat_index(1, l, 0, n_x, m);
      for (std::size_t i = 0; i < m; ++i) {
        dst1[i] = x_next[l] * phi[i];
        dst2[i] = -x_now[l] * phi[i];
      }
    }
  }
  return psi;
}

NeighborSets neighbor_sets(const LpvDataset& data) {
  data.validate();
  const std::size_t L = data.L;
  require(L >= 2, "neighbor sets need at least two rows");
  const std::size_t n_p = data.n_p();
  const std::size_t n_x = data.n_x();
  const std::size_t dim = n_p + n_x;

  // Feature matrix in column-major panels so the distance kernel can stream.
  std::vector<std::vector<double>> cols(dim, std::vector<double>(L));
  for (std::size_t k = 0; k < L; ++k) {
    for (std::size_t j = 0; j < n_p; ++j) {
      cols[j][k] = data.p(k, j);
    }
    for (std::size_t j = 0; j < n_x; ++j) {
      cols[n_p + j][k] = data.x(k + 1, j);
    }
  }
  std::vector<const double*> col_ptrs(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    col_ptrs[j] = cols[j].data();
  }

  // Two scans over the full pairwise distances keep memory at O(L) instead
  // of holding an L x L matrix: first find the largest nearest-neighbor gap,
  // then collect every index within that radius.
  std::vector<double> point(dim), dist(L);
  NeighborSets out;
  out.sets.assign(L, {});
  double zeta = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      point[j] = cols[j][k];
    }
    simd::cheb_distances(col_ptrs.data(), dim, point.data(), L, dist.data());
    double nn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < L; ++i) {
      if (i != k) {
        nn = std::min(nn, dist[i]);
      }
    }
    zeta = std::max(zeta, nn);
  }
  out.zeta = zeta;
  for (std::size_t k = 0; k < L; ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      point[j] = cols[j][k];
    }
    simd::cheb_distances(col_ptrs.data(), dim, point.data(), L, dist.data());
    for (std::size_t i = 0; i < L; ++i) {
      if (dist[i] <= zeta) {
        out.sets[k].push_back(i);
      }
    }
  }
  return out;
}

void RegressionProblem::validate() const {
  const std::size_t L = u.size();
  require(L >= 1, "regression problem has no rows");
  require(psi.rows == L, "regression matrix row count mismatch");
  require(x.rows == L, "state snapshot row count mismatch");
  require(neighbors.sets.size() == L, "neighbor set count mismatch");
  require(delta >= 0.0 && std::isfinite(delta),
          "inequality half-width must be a nonnegative finite value");
  require(lambda2_s >= 0.0 && std::isfinite(lambda2_s),
          "slope budget must be a nonnegative finite value");
}

LinearProgram assemble_lp(const RegressionProblem& problem) {
  problem.validate();
  const std::size_t L = problem.u.size();
  const std::size_t N = problem.psi.cols;
  const std::size_t n_x = problem.x.cols;

  // Deduplicated unordered neighbor pairs, in deterministic (k, l) order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < L; ++k) {
    for (std::size_t l : problem.neighbors.sets[k]) {
      if (l > k) {
        pairs.emplace_back(k, l);
      }
    }
  }

  LinearProgram lp;
  lp.n_vars = 2 * N;
  lp.cost.assign(2 * N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    lp.cost[N + i] = 1.0;
  }
  const std::size_t rows = 2 * L + 2 * pairs.size() + 2 * N;
  lp.rows = Matrix(rows, 2 * N);
  lp.rhs.assign(rows, 0.0);

  // (a) reproduce the recorded inputs within delta:  |u_k - Psi_k b| <= delta.
  for (std::size_t k = 0; k < L; ++k) {
    double* up = lp.rows.row(2 * k);
    double* dn = lp.rows.row(2 * k + 1);
    const double* psi_k = problem.psi.row(k);
    for (std::size_t j = 0; j < N; ++j) {
      up[j] = -psi_k[j];
      dn[j] = psi_k[j];
    }
    lp.rhs[2 * k] = problem.delta - problem.u[k];
    lp.rhs[2 * k + 1] = problem.delta + problem.u[k];
  }

  // (b) slope bound between neighboring rows.
  std::size_t at = 2 * L;
  for (auto [k, l] : pairs) {
    const double* psi_k = problem.psi.row(k);
    const double* psi_l = problem.psi.row(l);
    const double gap =
        simd::max_abs_diff(problem.x.row(l), problem.x.row(k), n_x);
    const double bound = problem.lambda2_s * gap + 2.0 * problem.delta;
    const double du = problem.u[l] - problem.u[k];
    double* up = lp.rows.row(at);
    double* dn = lp.rows.row(at + 1);
    for (std::size_t j = 0; j < N; ++j) {
      const double diff = psi_k[j] - psi_l[j];
      up[j] = diff;
      dn[j] = -diff;
    }
    lp.rhs[at] = bound - du;
    lp.rhs[at + 1] = bound + du;
    at += 2;
  }

  // (c) epigraph rows realizing |b_i| <= t_i.
  for (std::size_t i = 0; i < N; ++i) {
    double* up = lp.rows.row(at);
    double* dn = lp.rows.row(at + 1);
    up[i] = 1.0;
    up[N + i] = -1.0;
    dn[i] = -1.0;
    dn[N + i] = -1.0;
    at += 2;
  }
  return lp;
}

std::pair<Controller, DesignReport> design_controller(const LpvDataset& data,
                                                      const BasisSet& basis,
                                                      const PriorBounds& priors,
                                                      const DesignOptions& opt) {
  data.validate();
  require(data.n_u() == 1,
          "design handles one input channel at a time; split the dataset");
  require(basis.n_p == data.n_p(),
          "basis scheduling dimension does not match the dataset");
  require(std::isfinite(priors.delta) && priors.delta >= 0.0,
          "prior delta must be nonnegative and finite");
  require(std::isfinite(priors.lambda_S) && priors.lambda_S > 0.0,
          "prior lambda_S must be positive and finite");
  require(opt.safety_margin > 0.0 && opt.safety_margin < 1.0,
          "safety margin must lie strictly between 0 and 1");

  RegressionProblem problem;
  problem.psi = build_psi(data, basis);
  problem.u.resize(data.L);
  for (std::size_t k = 0; k < data.L; ++k) {
    problem.u[k] = data.u(k, 0);
  }
  problem.x = Matrix(data.L, data.n_x());
  for (std::size_t k = 0; k < data.L; ++k) {
    const double* src = data.x.row(k);
    std::copy(src, src + data.n_x(), problem.x.row(k));
  }
  problem.neighbors = neighbor_sets(data);
  problem.delta = priors.delta;
  if (opt.lambda2_s_override > 0.0) {
    require(std::isfinite(opt.lambda2_s_override),
            "slope-budget override must be finite");
    problem.lambda2_s = opt.lambda2_s_override;
  } else {
    problem.lambda2_s = opt.safety_margin / priors.lambda_S;
  }

  LinearProgram lp = assemble_lp(problem);
  LpSolution sol = solve_lp(lp, opt.lp);
  if (sol.status == LpStatus::infeasible) {
    throw InfeasibleError(
        "gain regression is infeasible under the current bounds; widen the "
        "inequality half-width (delta) or raise the slope budget (lambda2_s)",
        sol.phase1_objective);
  }
  if (sol.status != LpStatus::optimal) {
    throw Error("gain regression solve failed: " +
                std::string(to_string(sol.status)) + " (" + sol.note + ")");
  }

  Controller k;
  k.basis = basis;
  k.n_x = data.n_x();
  k.coeffs.assign(sol.v.begin(),
                  sol.v.begin() + static_cast<std::ptrdiff_t>(problem.psi.cols));
  k.validate();

  DesignReport rep;
  rep.zeta = problem.neighbors.zeta;
  rep.rows = lp.rows.rows;
  rep.pairs = (lp.rows.rows - 2 * data.L - 2 * problem.psi.cols) / 2;
  rep.variables = lp.n_vars;
  rep.objective = sol.objective;
  rep.iterations = sol.iterations;
  rep.solver_status = to_string(sol.status);
  rep.selected = sparsity_count(k, opt.sparsity_threshold);
  rep.delta = priors.delta;
  rep.lambda_S = priors.lambda_S;
  rep.lambda2_s = problem.lambda2_s;
  rep.stability_product = problem.lambda2_s * priors.lambda_S;
  rep.stability_ok = rep.stability_product < 1.0;
  return {std::move(k), rep};
}

double chebyshev_fit_floor(const LpvDataset& data, const BasisSet& basis,
                           const LpOptions& opt) {
  data.validate();
  require(data.n_u() == 1,
          "fit floor handles one input channel at a time; split the dataset");
  require(basis.n_p == data.n_p(),
          "basis scheduling dimension does not match the dataset");

  const Matrix psi = build_psi(data, basis);
  const std::size_t n = psi.cols;

  // min e  subject to  -e <= u_k - Psi_k b <= e  for every sample row.
  LinearProgram lp;
  lp.n_vars = n + 1;
  lp.cost.assign(n + 1, 0.0);
  lp.cost[n] = 1.0;
  lp.rows = Matrix(2 * data.L, n + 1);
  lp.rhs.resize(2 * data.L);
  for (std::size_t k = 0; k < data.L; ++k) {
    const double* src = psi.row(k);
    double* up = lp.rows.row(2 * k);
    double* dn = lp.rows.row(2 * k + 1);
    for (std::size_t j = 0; j < n; ++j) {
      up[j] = src[j];
      dn[j] = -src[j];
    }
    up[n] = -1.0;
    dn[n] = -1.0;
    lp.rhs[2 * k] = data.u(k, 0);
    lp.rhs[2 * k + 1] = -data.u(k, 0);
  }

  LpSolution sol = solve_lp(lp, opt);
  if (sol.status != LpStatus::optimal) {
    throw Error("fit-floor solve failed: " +
                std::string(to_string(sol.status)) +
                (sol.note.empty() ? "" : " (" + sol.note + ")"));
  }
  return std::max(0.0, sol.objective);
}

std::size_t sparsity_count(const Controller& k, double threshold) {
  require(threshold > 0.0, "sparsity threshold must be positive");
  double peak = 0.0;
  for (double c : k.coeffs) {
    peak = std::max(peak, std::abs(c));
  }
  const double cut = threshold * std::max(1.0, peak);
  std::size_t count = 0;
  for (double c : k.coeffs) {
    if (std::abs(c) > cut) {
      ++count;
    }
  }
  return count;
}

std::string DesignReport::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "zeta = " << zeta << '\n'
     << "rows = " << rows << '\n'
     << "pairs = " << pairs << '\n'
     << "variables = " << variables << '\n'
     << "objective = " << objective << '\n'
     << "iterations = " << iterations << '\n'
     << "solver_status = " << solver_status << '\n'
     << "selected = " << selected << '\n'
     << "delta = " << delta << '\n'
     << "lambda_S = " << lambda_S << '\n'
     << "lambda2_s = " << lambda2_s << '\n'
     << "stability_product = " << stability_product << '\n'
     << "stability_ok = " << (stability_ok ? "true" : "false") << '\n';
  return os.str();
}

void save_controller(const Controller& k, const std::string& path) {
  k.validate();
  std::ofstream os(path);
  if (!os) {
    throw IoError("cannot open controller file for writing: " + path);
  }
  os.precision(17);
  os << "gain-surface v1\n";
  os << "n_x " << k.n_x << '\n';
  k.basis.serialize(os);
  const std::size_t m = k.basis.m;
  std::size_t nonzero = 0;
  for (double c : k.coeffs) {
    nonzero += (c != 0.0) ? 1 : 0;
  }
  os << "coeffs " << nonzero << '\n';
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t l = 0; l < k.n_x; ++l) {
      for (std::size_t i = 0; i < m; ++i) {
        const double c = k.coeffs[flat_index(j, l, i, k.n_x, m)];
        if (c != 0.0) {
          os << "  c " << (j + 1) << ' ' << (l + 1) << ' ' << (i + 1) << ' '
             << c << '\n';
        }
      }
    }
  }
  os << "end\n";
  if (!os) {
    throw IoError("failed while writing controller file: " + path);
  }
}

Controller load_controller(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw IoError("cannot open controller file: " + path);
  }
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "gain-surface" || version != "v1") {
    throw IoError("not a gain-surface v1 controller file: " + path);
  }
  std::string tag;
  Controller k;
  if (!(is >> tag >> k.n_x) || tag != "n_x") {
    throw IoError("controller file: expected 'n_x <count>'");
  }
  k.basis = BasisSet::deserialize(is);
  std::size_t nonzero = 0;
  if (!(is >> tag >> nonzero) || tag != "coeffs") {
    throw IoError("controller file: expected 'coeffs <count>'");
  }
  k.coeffs.assign(2 * k.n_x * k.basis.m, 0.0);
  for (std::size_t row = 0; row < nonzero; ++row) {
    std::size_t j = 0, l = 0, i = 0;
    double value = 0.0;
    if (!(is >> tag >> j >> l >> i >> value) || tag != "c") {
      throw IoError("controller file: malformed coefficient row");
    }
    if (j < 1 || j > 2 || l < 1 || l > k.n_x || i < 1 || i > k.basis.m) {
      throw IoError("controller file: coefficient index out of range");
    }
    k.coeffs[flat_index(j - 1, l - 1, i - 1, k.n_x, k.basis.m)] = value;
  }
  if (!(is >> tag) || tag != "end") {
    throw IoError("controller file: missing end marker");
  }
  k.validate();
  return k;
}

}  // namespace dfk
