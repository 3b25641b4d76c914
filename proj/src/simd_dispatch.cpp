#include "dfk/simd.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dfk::simd {

namespace {

using detail::KernelTable;

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table();
    case Isa::avx2:
#if DFK_HAVE_AVX2_TU
      return &detail::avx2_table();
#else
      return nullptr;
#endif
    case Isa::neon:
#if DFK_HAVE_NEON_TU
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if DFK_HAVE_AVX2_TU && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if DFK_HAVE_NEON_TU
      return true;  // NEON is architecturally guaranteed on aarch64
#else
      return false;
#endif
  }
  return false;
}

Isa initial_isa() {
  if (const char* env = std::getenv("DFK_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_supports(Isa::avx2)) return Isa::avx2;
    if (v == "neon" && cpu_supports(Isa::neon)) return Isa::neon;
    // Unknown or unsupported request: fall through to detection.
  }
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  if (cpu_supports(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

struct Dispatch {
  Isa isa;
  const KernelTable* table;
  Dispatch() : isa(initial_isa()), table(table_for(isa)) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Isa best_supported() {
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  if (cpu_supports(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

bool supported(Isa isa) { return cpu_supports(isa) && table_for(isa) != nullptr; }

Isa active() { return dispatch().isa; }

void use(Isa isa) {
  if (!supported(isa))
    throw std::invalid_argument(std::string("simd variant not available: ") + name(isa));
  dispatch().isa = isa;
  dispatch().table = table_for(isa);
}

const char* name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy(alpha, x, y, n);
}

double max_abs(const double* v, std::size_t n) { return dispatch().table->max_abs(v, n); }

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  return dispatch().table->max_abs_diff(a, b, n);
}

void cheb_distances(const double* const* cols, std::size_t dim, const double* point,
                    std::size_t count, double* dist) {
  dispatch().table->cheb_distances(cols, dim, point, count, dist);
}

void rank1_upper(double* m, std::size_t n, const double* a, double w) {
  dispatch().table->rank1_upper(m, n, a, w);
}

}  // namespace dfk::simd
