#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dfk/simd.hpp"

using namespace dfk;

namespace {

std::vector<simd::Isa> available_isas() {
  std::vector<simd::Isa> out = {simd::Isa::scalar};
  for (auto isa : {simd::Isa::avx2, simd::Isa::neon})
    if (simd::supported(isa)) out.push_back(isa);
  return out;
}

struct IsaGuard {
  simd::Isa saved;
  IsaGuard() : saved(simd::active()) {}
  ~IsaGuard() { simd::use(saved); }
};

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("dispatch reports a usable active variant") {
  CHECK(simd::supported(simd::Isa::scalar));
  CHECK(simd::supported(simd::active()));
  CHECK(simd::supported(simd::best_supported()));
}

TEST_CASE("requesting an unavailable variant throws") {
  bool neon_ok = simd::supported(simd::Isa::neon);
  bool avx2_ok = simd::supported(simd::Isa::avx2);
  // At most one of the two vector families exists in a given build.
  CHECK_FALSE((neon_ok && avx2_ok));
  if (!neon_ok) CHECK_THROWS_AS(simd::use(simd::Isa::neon), std::invalid_argument);
  if (!avx2_ok) CHECK_THROWS_AS(simd::use(simd::Isa::avx2), std::invalid_argument);
}

TEST_CASE("scalar dot and max_abs agree with hand values") {
  IsaGuard guard;
  simd::use(simd::Isa::scalar);
  const double a[] = {1.0, -2.0, 3.0};
  const double b[] = {4.0, 5.0, -6.0};
  CHECK(simd::dot(a, b, 3) == doctest::Approx(4.0 - 10.0 - 18.0));
  CHECK(simd::max_abs(b, 3) == 6.0);
  CHECK(simd::max_abs(a, 0) == 0.0);
  CHECK(simd::max_abs_diff(a, b, 3) == 9.0);
}

TEST_CASE("vector variants match scalar reference on random data") {
  std::mt19937_64 rng(12345);
  IsaGuard guard;
  // Lengths straddle the unroll widths and exercise remainder loops.
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 63u,
                        64u, 101u, 256u, 1000u}) {
    auto a = random_vec(rng, n, 10.0);
    auto b = random_vec(rng, n, 10.0);

    simd::use(simd::Isa::scalar);
    const double dot_ref = simd::dot(a.data(), b.data(), n);
    const double ma_ref = simd::max_abs(a.data(), n);
    const double mad_ref = simd::max_abs_diff(a.data(), b.data(), n);
    auto y_ref = b;
    simd::axpy(0.37, a.data(), y_ref.data(), n);

    for (auto isa : available_isas()) {
      simd::use(isa);
      // max/abs kernels perform the identical operation tree: exact match.
      CHECK(simd::max_abs(a.data(), n) == ma_ref);
      CHECK(simd::max_abs_diff(a.data(), b.data(), n) == mad_ref);
      // FMA and reduction-tree reassociation allow tiny drift in dot/axpy.
      CHECK(simd::dot(a.data(), b.data(), n) ==
            doctest::Approx(dot_ref).epsilon(1e-13));
      auto y = b;
      simd::axpy(0.37, a.data(), y.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("cheb_distances matches per-point max_abs_diff") {
  std::mt19937_64 rng(99);
  IsaGuard guard;
  const std::size_t dim = 6, count = 103;
  std::vector<std::vector<double>> cols(dim);
  for (auto& c : cols) c = random_vec(rng, count, 5.0);
  std::vector<const double*> col_ptrs(dim);
  for (std::size_t j = 0; j < dim; ++j) col_ptrs[j] = cols[j].data();
  auto point = random_vec(rng, dim, 5.0);

  std::vector<double> ref(count);
  simd::use(simd::Isa::scalar);
  simd::cheb_distances(col_ptrs.data(), dim, point.data(), count, ref.data());
  for (std::size_t i = 0; i < count; ++i) {
    double expect = 0.0;
    for (std::size_t j = 0; j < dim; ++j)
      expect = std::max(expect, std::fabs(cols[j][i] - point[j]));
    CHECK(ref[i] == expect);
  }

  for (auto isa : available_isas()) {
    simd::use(isa);
    std::vector<double> got(count, -1.0);
    simd::cheb_distances(col_ptrs.data(), dim, point.data(), count, got.data());
    for (std::size_t i = 0; i < count; ++i) CHECK(got[i] == ref[i]);
  }
}

TEST_CASE("rank1_upper accumulates w*a*a^T on the upper triangle only") {
  std::mt19937_64 rng(7);
  IsaGuard guard;
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 13u, 40u}) {
    auto a = random_vec(rng, n, 2.0);
    const double w = 0.83;

    std::vector<double> ref(n * n, 0.5);
    simd::use(simd::Isa::scalar);
    simd::rank1_upper(ref.data(), n, a.data(), w);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double expect = (j >= i) ? 0.5 + w * a[i] * a[j] : 0.5;
        CHECK(ref[i * n + j] == doctest::Approx(expect).epsilon(1e-15));
      }

    for (auto isa : available_isas()) {
      simd::use(isa);
      std::vector<double> got(n * n, 0.5);
      simd::rank1_upper(got.data(), n, a.data(), w);
      for (std::size_t k = 0; k < n * n; ++k)
        CHECK(got[k] == doctest::Approx(ref[k]).epsilon(1e-13));
    }
  }
}

TEST_CASE("repeated rank1_upper builds the same normal matrix across variants") {
  // Emulates the solver's hot loop: many weighted rank-1 updates.
  std::mt19937_64 rng(2024);
  IsaGuard guard;
  const std::size_t n = 48, m = 300;
  std::vector<std::vector<double>> rows;
  std::vector<double> weights;
  for (std::size_t k = 0; k < m; ++k) {
    rows.push_back(random_vec(rng, n, 1.5));
    weights.push_back(std::uniform_real_distribution<double>(0.01, 3.0)(rng));
  }

  auto build = [&](simd::Isa isa) {
    simd::use(isa);
    std::vector<double> M(n * n, 0.0);
    for (std::size_t k = 0; k < m; ++k)
      simd::rank1_upper(M.data(), n, rows[k].data(), weights[k]);
    return M;
  };

  auto ref = build(simd::Isa::scalar);
  for (auto isa : available_isas()) {
    auto got = build(isa);
    for (std::size_t k = 0; k < n * n; ++k)
      CHECK(got[k] == doctest::Approx(ref[k]).epsilon(1e-12));
  }
}

}  // TEST_SUITE
