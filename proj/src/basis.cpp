#include "dfk/basis.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "dfk/errors.hpp"

namespace dfk {

namespace {

void enumerate_monomials(std::size_t n_p, std::size_t grade, std::size_t coord,
                         std::vector<unsigned>& current,
                         std::vector<unsigned>& out) {
  if (coord + 1 == n_p) {
    current[coord] = static_cast<unsigned>(grade);
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  // Highest power of the leading coordinate first.
  for (std::size_t e = grade + 1; e-- > 0;) {
    current[coord] = static_cast<unsigned>(e);
    enumerate_monomials(n_p, grade - e, coord + 1, current, out);
  }
}

}  // namespace

std::size_t polynomial_count(std::size_t n_p, std::size_t degree) {
  // C(n_p + degree, n_p) computed without overflow for the sizes in use.
  std::size_t count = 1;
  for (std::size_t i = 1; i <= n_p; ++i)
    count = count * (degree + i) / i;
  return count;
}

BasisSet polynomial_basis(std::size_t n_p, std::size_t degree) {
  if (n_p == 0) throw ConfigError("polynomial basis needs n_p >= 1");
  BasisSet b;
  b.family = BasisSet::Family::polynomial;
  b.n_p = n_p;
  b.degree = degree;
  std::vector<unsigned> current(n_p, 0);
  for (std::size_t g = 0; g <= degree; ++g)
    enumerate_monomials(n_p, g, 0, current, b.exponents);
  b.m = b.exponents.size() / n_p;
  if (b.m != polynomial_count(n_p, degree))
    throw Error("internal: monomial enumeration count mismatch");
  return b;
}

BasisSet gaussian_basis(std::size_t n_p, const std::vector<double>& centers,
                        const std::vector<double>& widths) {
  if (n_p == 0) throw ConfigError("gaussian basis needs n_p >= 1");
  if (widths.empty() || centers.size() != widths.size() * n_p)
    throw ConfigError("gaussian basis: centers must be widths.size() rows of n_p entries");
  for (double w : widths)
    if (!(w > 0.0)) throw ConfigError("gaussian basis: widths must be positive");
  BasisSet b;
  b.family = BasisSet::Family::gaussian;
  b.n_p = n_p;
  b.m = widths.size();
  b.centers = centers;
  b.widths = widths;
  return b;
}

void BasisSet::evaluate(const double* p, double* out) const {
  if (family == Family::polynomial) {
    // Power table: pow[j*(degree+1) + e] = p_j^e.
    thread_local std::vector<double> pow_table;
    pow_table.assign(n_p * (degree + 1), 1.0);
    for (std::size_t j = 0; j < n_p; ++j) {
      double* row = pow_table.data() + j * (degree + 1);
      for (std::size_t e = 1; e <= degree; ++e) row[e] = row[e - 1] * p[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
      const unsigned* e = exponents.data() + i * n_p;
      double v = 1.0;
      for (std::size_t j = 0; j < n_p; ++j)
        v *= pow_table[j * (degree + 1) + e[j]];
      out[i] = v;
    }
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* c = centers.data() + i * n_p;
    double q = 0.0;
    for (std::size_t j = 0; j < n_p; ++j) {
      const double d = p[j] - c[j];
      q += d * d;
    }
    out[i] = std::exp(-q / (2.0 * widths[i] * widths[i]));
  }
}

std::vector<double> BasisSet::lipschitz_on_box(const std::vector<double>& lo,
                                               const std::vector<double>& hi) const {
  if (lo.size() != n_p || hi.size() != n_p)
    throw ConfigError("lipschitz_on_box: box dimension must equal n_p");
  for (std::size_t j = 0; j < n_p; ++j)
    if (!(lo[j] <= hi[j])) throw ConfigError("lipschitz_on_box: lo must not exceed hi");

  std::vector<double> corner(n_p);
  for (std::size_t j = 0; j < n_p; ++j)
    corner[j] = std::max(std::fabs(lo[j]), std::fabs(hi[j]));

  std::vector<double> k(m, 0.0);
  if (family == Family::polynomial) {
    // For a monomial each |d phi / d p_i| is monotone in every |p_j|, so the
    // 1-norm of the gradient peaks at the outermost corner.
    for (std::size_t i = 0; i < m; ++i) {
      const unsigned* e = exponents.data() + i * n_p;
      double sum = 0.0;
      for (std::size_t d = 0; d < n_p; ++d) {
        if (e[d] == 0) continue;
        double term = static_cast<double>(e[d]);
        for (std::size_t j = 0; j < n_p; ++j) {
          const unsigned exp_j = (j == d) ? e[j] - 1 : e[j];
          for (unsigned r = 0; r < exp_j; ++r) term *= corner[j];
        }
        sum += term;
      }
      k[i] = sum;
    }
    return k;
  }
  // Gaussian bump: |grad|_1 <= sqrt(n_p) * r/w^2 * exp(-r^2/(2w^2)), maximal
  // at r = w.  The resulting bound holds on any box.
  for (std::size_t i = 0; i < m; ++i)
    k[i] = std::sqrt(static_cast<double>(n_p)) / (widths[i] * std::sqrt(std::exp(1.0)));
  return k;
}

void BasisSet::serialize(std::ostream& os) const {
  os.precision(17);
  if (family == Family::polynomial) {
    os << "basis polynomial " << n_p << ' ' << degree << '\n';
    return;
  }
  os << "basis gaussian " << n_p << ' ' << m << '\n';
  for (std::size_t i = 0; i < m; ++i) {
    os << "  bump " << widths[i];
    for (std::size_t j = 0; j < n_p; ++j) os << ' ' << centers[i * n_p + j];
    os << '\n';
  }
}

BasisSet BasisSet::deserialize(std::istream& is) {
  std::string tag, family;
  if (!(is >> tag >> family) || tag != "basis")
    throw IoError("basis block: expected 'basis <family> ...'");
  if (family == "polynomial") {
    std::size_t n_p = 0, degree = 0;
    if (!(is >> n_p >> degree)) throw IoError("basis polynomial: expected n_p and degree");
    return polynomial_basis(n_p, degree);
  }
  if (family == "gaussian") {
    std::size_t n_p = 0, m = 0;
    if (!(is >> n_p >> m)) throw IoError("basis gaussian: expected n_p and m");
    std::vector<double> centers(m * n_p), widths(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::string bump;
      if (!(is >> bump) || bump != "bump") throw IoError("basis gaussian: expected 'bump' row");
      if (!(is >> widths[i])) throw IoError("basis gaussian: bad width");
      for (std::size_t j = 0; j < n_p; ++j)
        if (!(is >> centers[i * n_p + j])) throw IoError("basis gaussian: bad center");
    }
    return gaussian_basis(n_p, centers, widths);
  }
  throw IoError("basis block: unknown family '" + family + "'");
}

}  // namespace dfk
