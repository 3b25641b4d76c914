#pragma once

// Scalar basis-function families used to parameterize gain surfaces over the
// scheduling box.  A controller gain entry is a linear combination of these
// functions evaluated at the scheduling vector.

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace dfk {

struct BasisSet {
  enum class Family { polynomial, gaussian };

  Family family = Family::polynomial;
  std::size_t n_p = 0;  // scheduling dimension
  std::size_t m = 0;    // number of basis functions

  // polynomial family: all monomials of total degree <= degree, graded order
  // (degree 0 first), ties broken lexicographically with the first scheduling
  // coordinate strongest.  exponents is m rows of n_p entries.
  std::size_t degree = 0;
  std::vector<unsigned> exponents;

  // gaussian family: exp(-|p - center|^2 / (2 width^2)) per function.
  std::vector<double> centers;  // m rows of n_p entries
  std::vector<double> widths;   // m entries

  // out[i] = phi_i(p), i in [0, m)
  void evaluate(const double* p, double* out) const;

  // Per-function Lipschitz constants with respect to the Chebyshev norm on
  // the box [lo, hi]: |phi(a) - phi(b)| <= K * max_j |a_j - b_j| inside it.
  std::vector<double> lipschitz_on_box(const std::vector<double>& lo,
                                       const std::vector<double>& hi) const;

  void serialize(std::ostream& os) const;
  static BasisSet deserialize(std::istream& is);

  bool operator==(const BasisSet& other) const = default;
};

// Number of monomials in n_p variables of total degree <= degree.
std::size_t polynomial_count(std::size_t n_p, std::size_t degree);

BasisSet polynomial_basis(std::size_t n_p, std::size_t degree);

// centers: one row of n_p entries per function; widths: one entry per function.
BasisSet gaussian_basis(std::size_t n_p, const std::vector<double>& centers,
                        const std::vector<double>& widths);

}  // namespace dfk
