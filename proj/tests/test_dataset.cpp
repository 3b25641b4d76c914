#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "dfk/dataset.hpp"
#include "dfk/errors.hpp"

using namespace dfk;

namespace {

LpvDataset sample_dataset(std::size_t L = 8) {
  LpvDataset d;
  d.L = L;
  d.Ts = 0.1;
  d.p = Matrix(L, 2);
  d.x = Matrix(L + 1, 2);
  d.u = Matrix(L, 1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (auto& v : d.x.data) v = dist(rng);
  for (auto& v : d.u.data) v = dist(rng);
  for (std::size_t k = 0; k < L; ++k) {
    d.p(k, 0) = d.x(k, 0);
    d.p(k, 1) = d.x(k, 1);
  }
  d.meta["plant"] = "unit-test";
  return d;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("dfk-test-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("csv round trip is exact") {
  TempDir tmp;
  auto d = sample_dataset();
  const std::string file = (tmp.path / "data.csv").string();
  write_dataset_csv(d, file);
  auto back = read_dataset_csv(file);
  CHECK(back.L == d.L);
  CHECK(back.Ts == d.Ts);
  CHECK(back.p.data == d.p.data);
  CHECK(back.x.data == d.x.data);
  CHECK(back.u.data == d.u.data);
  CHECK(back.scheduling.kind == d.scheduling.kind);
  CHECK(back.meta.at("plant") == "unit-test");
}

TEST_CASE("round trip survives awkward values") {
  TempDir tmp;
  auto d = sample_dataset(4);
  d.x(0, 0) = 1.0 / 3.0;
  d.x(1, 1) = -1e-17;
  d.x(2, 0) = 12345678.910111213;
  d.u(0, 0) = 0.1 + 0.2;  // classic non-representable sum
  const std::string file = (tmp.path / "data.csv").string();
  write_dataset_csv(d, file);
  auto back = read_dataset_csv(file);
  CHECK(back.x.data == d.x.data);
  CHECK(back.u.data == d.u.data);
}

TEST_CASE("missing sidecar is an I/O error") {
  TempDir tmp;
  auto d = sample_dataset();
  const std::string file = (tmp.path / "data.csv").string();
  write_dataset_csv(d, file);
  std::filesystem::remove(file + ".meta");
  CHECK_THROWS_AS(read_dataset_csv(file), IoError);
}

TEST_CASE("malformed rows are rejected") {
  TempDir tmp;
  const std::string file = (tmp.path / "bad.csv").string();
  {
    FILE* f = std::fopen(file.c_str(), "w");
    std::fputs("k,p_1,x_1,u_1\n0,1.0,2.0\n1,1.0,2.0,3.0\n2,,4.0,\n", f);
    std::fclose(f);
  }
  {
    FILE* f = std::fopen((file + ".meta").c_str(), "w");
    std::fputs("L = 2\nTs = 0.1\nscheduling = identity\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_dataset_csv(file), IoError);
}

TEST_CASE("validate catches shape and finiteness errors") {
  auto d = sample_dataset();
  d.validate();
  auto bad = d;
  bad.x = Matrix(d.L, 2);  // missing the extra sample row
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = d;
  bad.x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = d;
  bad.L = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("noise draws are deterministic per seed and channel") {
  Matrix clean(200, 2);
  for (std::size_t i = 0; i < clean.data.size(); ++i)
    clean.data[i] = std::sin(0.05 * static_cast<double>(i));
  NoiseSpec spec;
  spec.kind = NoiseSpec::Kind::uniform_amplitude;
  spec.level = 0.25;
  spec.seed = 9;
  auto a = draw_noise(spec, clean, 0);
  auto b = draw_noise(spec, clean, 0);
  CHECK(a.data == b.data);
  for (double v : a.data) {
    CHECK(v <= 0.25);
    CHECK(v >= -0.25);
  }
  // Channels differ from one another.
  bool all_same = true;
  for (std::size_t r = 0; r < a.rows; ++r) all_same = all_same && a(r, 0) == a(r, 1);
  CHECK_FALSE(all_same);
  // Different tag base shifts the stream.
  auto c = draw_noise(spec, clean, 50);
  CHECK(c.data != a.data);
}

TEST_CASE("delayed-output transform builds pair regressors") {
  auto d = sample_dataset(6);
  auto t = to_output_delay(d, 0);
  CHECK(t.L == 5);
  CHECK(t.n_x() == 2);
  CHECK(t.n_p() == 2);
  CHECK(t.scheduling.kind == SchedulingMap::Kind::output_delay);
  // Row k of the transform pairs y_{k+1} with y_k from the original record.
  for (std::size_t k = 0; k <= t.L; ++k) {
    CHECK(t.x(k, 0) == d.x(k + 1, 0));
    CHECK(t.x(k, 1) == d.x(k, 0));
  }
  for (std::size_t k = 0; k < t.L; ++k) {
    CHECK(t.p(k, 0) == t.x(k, 0));
    CHECK(t.p(k, 1) == t.x(k, 1));
    CHECK(t.u(k, 0) == d.u(k + 1, 0));
  }
}

}  // TEST_SUITE
