#pragma once

// Experiment records: scheduling / state / input samples acquired from a
// plant, plus measurement-noise descriptors and the CSV on-disk format.

#include <cstdint>
#include <map>
#include <string>

#include "dfk/linalg.hpp"

namespace dfk {

struct NoiseSpec {
  enum class Kind { none, gaussian_ratio, uniform_amplitude };
  Kind kind = Kind::none;
  // gaussian_ratio: noise std as a fraction of the per-channel signal std;
  // uniform_amplitude: half-width of the uniform interval.
  double level = 0.0;
  std::uint64_t seed = 0;

  std::string str() const;
  static NoiseSpec parse(const std::string& kind, double level, std::uint64_t seed);
};

// Per-channel noise draws, one independent stream per column.  For
// gaussian_ratio the std is level * population-std of the clean column.
Matrix draw_noise(const NoiseSpec& spec, const Matrix& clean, std::uint64_t tag_base);

struct SchedulingMap {
  enum class Kind { identity, first_state_squared, output_delay, external };
  Kind kind = Kind::identity;

  // Scheduling dimension produced from an n_x-dimensional measured state.
  std::size_t dim(std::size_t n_x) const;
  // p = map(x).  Only valid for identity / first_state_squared.
  void apply(const double* x, std::size_t n_x, double* p) const;

  std::string str() const;
  static SchedulingMap parse(const std::string& text);
};

struct LpvDataset {
  std::size_t L = 0;   // number of regression rows
  double Ts = 0.0;     // sampling period, seconds
  Matrix p;            // L x n_p       scheduling samples
  Matrix x;            // (L+1) x n_x   state samples (one past the last row)
  Matrix u;            // L x n_u       input samples
  SchedulingMap scheduling;
  std::map<std::string, std::string> meta;  // sidecar key-value pairs

  std::size_t n_p() const { return p.cols; }
  std::size_t n_x() const { return x.cols; }
  std::size_t n_u() const { return u.cols; }

  // Throws ConfigError when shapes are inconsistent or entries non-finite.
  void validate() const;
};

// CSV with header `k, p_1..p_np, x_1..x_nx, u_1..u_nu`, L rows, then one
// trailing row holding only the extra state sample.  Metadata goes to a
// `<path>.meta` sidecar.  Values are printed with enough digits that
// write -> read is an exact round trip.
void write_dataset_csv(const LpvDataset& data, const std::string& path);
LpvDataset read_dataset_csv(const std::string& path);

// Rebuild the record around a delayed-output regressor: the state becomes
// (y_k, y_{k-1}) for output channel `output_index`, the scheduling vector
// equals that pair, and the first sample is dropped (it has no predecessor).
LpvDataset to_output_delay(const LpvDataset& data, std::size_t output_index = 0);

}  // namespace dfk
