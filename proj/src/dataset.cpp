#include "dfk/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dfk/errors.hpp"
#include "dfk/rng.hpp"

namespace dfk {

namespace {

double population_std(const Matrix& m, std::size_t col) {
  double mean = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) mean += m(i, col);
  mean /= static_cast<double>(m.rows);
  double var = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double d = m(i, col) - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(m.rows));
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string NoiseSpec::str() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::gaussian_ratio: return "gaussian-ratio";
    case Kind::uniform_amplitude: return "uniform-amplitude";
  }
  return "?";
}

NoiseSpec NoiseSpec::parse(const std::string& kind, double level, std::uint64_t seed) {
  NoiseSpec spec;
  if (kind == "none") spec.kind = Kind::none;
  else if (kind == "gaussian-ratio") spec.kind = Kind::gaussian_ratio;
  else if (kind == "uniform-amplitude") spec.kind = Kind::uniform_amplitude;
  else throw ConfigError("unknown noise kind '" + kind + "'");
  if (level < 0.0) throw ConfigError("noise level must be nonnegative");
  spec.level = level;
  spec.seed = seed;
  return spec;
}

Matrix draw_noise(const NoiseSpec& spec, const Matrix& clean, std::uint64_t tag_base) {
  Matrix noise(clean.rows, clean.cols, 0.0);
  if (spec.kind == NoiseSpec::Kind::none || spec.level == 0.0 || clean.rows == 0)
    return noise;
  for (std::size_t c = 0; c < clean.cols; ++c) {
    auto rng = make_engine(spec.seed, tag_base + c);
    if (spec.kind == NoiseSpec::Kind::gaussian_ratio) {
      const double sigma = spec.level * population_std(clean, c);
      std::normal_distribution<double> d(0.0, sigma > 0.0 ? sigma : 0.0);
      if (sigma > 0.0)
        for (std::size_t r = 0; r < clean.rows; ++r) noise(r, c) = d(rng);
    } else {
      std::uniform_real_distribution<double> d(-spec.level, spec.level);
      for (std::size_t r = 0; r < clean.rows; ++r) noise(r, c) = d(rng);
    }
  }
  return noise;
}

std::size_t SchedulingMap::dim(std::size_t n_x) const {
  switch (kind) {
    case Kind::identity: return n_x;
    case Kind::first_state_squared: return 1;
    case Kind::output_delay: return 2;
    case Kind::external: return 0;  // supplied separately
  }
  return 0;
}

void SchedulingMap::apply(const double* x, std::size_t n_x, double* p) const {
  switch (kind) {
    case Kind::identity:
      for (std::size_t j = 0; j < n_x; ++j) p[j] = x[j];
      return;
    case Kind::first_state_squared:
      p[0] = x[0] * x[0];
      return;
    case Kind::output_delay:
      // The delayed-output regressor doubles as the scheduling vector.
      p[0] = x[0];
      p[1] = x[1];
      return;
    case Kind::external:
      throw ConfigError("external scheduling has no state-to-p map");
  }
}

std::string SchedulingMap::str() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::first_state_squared: return "x1-squared";
    case Kind::output_delay: return "output-delay";
    case Kind::external: return "external";
  }
  return "?";
}

SchedulingMap SchedulingMap::parse(const std::string& text) {
  SchedulingMap map;
  if (text == "identity") map.kind = Kind::identity;
  else if (text == "x1-squared") map.kind = Kind::first_state_squared;
  else if (text == "output-delay") map.kind = Kind::output_delay;
  else if (text == "external") map.kind = Kind::external;
  else throw ConfigError("unknown scheduling map '" + text + "'");
  return map;
}

void LpvDataset::validate() const {
  if (L < 2) throw ConfigError("dataset needs at least 2 rows");
  if (!(Ts > 0.0)) throw ConfigError("dataset sampling period must be positive");
  if (p.rows != L || x.rows != L + 1 || u.rows != L)
    throw ConfigError("dataset row counts inconsistent with L");
  if (p.cols == 0 || x.cols == 0 || u.cols == 0)
    throw ConfigError("dataset must have at least one column per block");
  for (const auto* m : {&p, &x, &u})
    for (double v : m->data)
      if (!std::isfinite(v)) throw ConfigError("dataset contains non-finite entries");
}

void write_dataset_csv(const LpvDataset& data, const std::string& path) {
  data.validate();
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "k";
  for (std::size_t j = 0; j < data.n_p(); ++j) os << ",p_" << j + 1;
  for (std::size_t j = 0; j < data.n_x(); ++j) os << ",x_" << j + 1;
  for (std::size_t j = 0; j < data.n_u(); ++j) os << ",u_" << j + 1;
  os << '\n';
  for (std::size_t k = 0; k < data.L; ++k) {
    os << k;
    for (std::size_t j = 0; j < data.n_p(); ++j) os << ',' << format_value(data.p(k, j));
    for (std::size_t j = 0; j < data.n_x(); ++j) os << ',' << format_value(data.x(k, j));
    for (std::size_t j = 0; j < data.n_u(); ++j) os << ',' << format_value(data.u(k, j));
    os << '\n';
  }
  // Trailing row: only the extra state sample; p and u columns left empty.
  os << data.L;
  for (std::size_t j = 0; j < data.n_p(); ++j) os << ',';
  for (std::size_t j = 0; j < data.n_x(); ++j) os << ',' << format_value(data.x(data.L, j));
  for (std::size_t j = 0; j < data.n_u(); ++j) os << ',';
  os << '\n';
  if (!os) throw IoError("write failed for '" + path + "'");
  os.close();

  std::ofstream ms(path + ".meta");
  if (!ms) throw IoError("cannot open '" + path + ".meta' for writing");
  ms << "L = " << data.L << '\n';
  ms << "Ts = " << format_value(data.Ts) << '\n';
  ms << "scheduling = " << data.scheduling.str() << '\n';
  for (const auto& [key, value] : data.meta) ms << key << " = " << value << '\n';
  if (!ms) throw IoError("write failed for '" + path + ".meta'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

LpvDataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty dataset file '" + path + "'");
  auto header = split_csv_line(line);
  std::size_t n_p = 0, n_x = 0, n_u = 0;
  for (const auto& h : header) {
    const std::string t = trim(h);
    if (t.rfind("p_", 0) == 0) ++n_p;
    else if (t.rfind("x_", 0) == 0) ++n_x;
    else if (t.rfind("u_", 0) == 0) ++n_u;
    else if (t != "k") throw IoError("unexpected dataset column '" + t + "'");
  }
  if (n_p == 0 || n_x == 0 || n_u == 0)
    throw IoError("dataset header must contain p_, x_ and u_ columns");

  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.size() < 3) throw IoError("dataset must contain at least 2 rows plus the trailing state row");
  const std::size_t L = rows.size() - 1;

  LpvDataset data;
  data.L = L;
  data.p = Matrix(L, n_p);
  data.x = Matrix(L + 1, n_x);
  data.u = Matrix(L, n_u);

  auto parse_field = [&](const std::string& f, std::size_t row) {
    const std::string t = trim(f);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw IoError("bad numeric field '" + t + "' in row " + std::to_string(row));
    }
    if (pos != t.size()) throw IoError("trailing junk in field '" + t + "'");
    return v;
  };

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != 1 + n_p + n_x + n_u)
      throw IoError("row " + std::to_string(r) + " has " + std::to_string(f.size()) +
                    " fields, expected " + std::to_string(1 + n_p + n_x + n_u));
    const bool trailing = (r == L);
    for (std::size_t j = 0; j < n_p; ++j) {
      const auto& field = f[1 + j];
      if (trailing) {
        if (!trim(field).empty()) throw IoError("trailing row must leave p fields empty");
      } else {
        data.p(r, j) = parse_field(field, r);
      }
    }
    for (std::size_t j = 0; j < n_x; ++j) data.x(r, j) = parse_field(f[1 + n_p + j], r);
    for (std::size_t j = 0; j < n_u; ++j) {
      const auto& field = f[1 + n_p + n_x + j];
      if (trailing) {
        if (!trim(field).empty()) throw IoError("trailing row must leave u fields empty");
      } else {
        data.u(r, j) = parse_field(field, r);
      }
    }
  }

  // Sidecar.
  std::ifstream ms(path + ".meta");
  if (!ms) throw IoError("missing metadata sidecar '" + path + ".meta'");
  while (std::getline(ms, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "L") {
      if (std::stoull(value) != L)
        throw IoError("sidecar L disagrees with CSV row count");
    } else if (key == "Ts") {
      data.Ts = std::stod(value);
    } else if (key == "scheduling") {
      data.scheduling = SchedulingMap::parse(value);
    } else {
      data.meta[key] = value;
    }
  }
  data.validate();
  return data;
}

LpvDataset to_output_delay(const LpvDataset& data, std::size_t output_index) {
  data.validate();
  if (output_index >= data.n_x()) throw ConfigError("output index out of range");
  if (data.L < 3) throw ConfigError("delayed-output transform needs L >= 3");
  if (data.n_u() != 1) throw ConfigError("delayed-output transform expects a single input");

  LpvDataset out;
  out.L = data.L - 1;
  out.Ts = data.Ts;
  out.scheduling.kind = SchedulingMap::Kind::output_delay;
  out.x = Matrix(out.L + 1, 2);
  out.p = Matrix(out.L, 2);
  out.u = Matrix(out.L, 1);
  // New row k corresponds to original sample k+1.
  for (std::size_t k = 0; k <= out.L; ++k) {
    out.x(k, 0) = data.x(k + 1, output_index);
    out.x(k, 1) = data.x(k, output_index);
  }
  for (std::size_t k = 0; k < out.L; ++k) {
    out.p(k, 0) = out.x(k, 0);
    out.p(k, 1) = out.x(k, 1);
    out.u(k, 0) = data.u(k + 1, 0);
  }
  out.meta = data.meta;
  out.meta["derived-from"] = "output-delay";
  return out;
}

}  // namespace dfk
