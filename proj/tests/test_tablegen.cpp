#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaitopt/random.hpp"
#include "gaitopt/tablegen.hpp"

using namespace gaitopt;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// sup over test boxes [0,c) of |empirical fraction - volume|, corners taken
// from the sample itself plus a regular grid
double star_discrepancy_estimate(const Eigen::MatrixXd& pts) {
  const int n = static_cast<int>(pts.rows());
  std::vector<Eigen::Vector2d> corners;
  for (int i = 0; i < n; ++i) corners.emplace_back(pts(i, 0), pts(i, 1));
  for (int a = 1; a <= 32; ++a)
    for (int b = 1; b <= 32; ++b) corners.emplace_back(a / 32.0, b / 32.0);
  double worst = 0;
  for (const auto& c : corners) {
    int inside = 0;
    for (int i = 0; i < n; ++i)
      if (pts(i, 0) < c.x() && pts(i, 1) < c.y()) ++inside;
    worst = std::max(worst,
                     std::abs(static_cast<double>(inside) / n - c.x() * c.y()));
  }
  return worst;
}

TableMeta quick_meta(double sim_seconds = 3.5) {
  TableMeta meta;
  meta.scheme = GridScheme::Sobol;
  meta.seed = 1;
  meta.sim_seconds = sim_seconds;
  meta.target_speed = 0.5;
  return meta;
}

}  // namespace

TEST_CASE("sample_grid basics") {
  const ParamBounds bounds = default_bounds(Variant::NineD);
  SUBCASE("single point lies inside the box") {
    const Eigen::MatrixXd g = sample_grid(bounds, 1, 3, GridScheme::Sobol);
    REQUIRE(g.rows() == 1);
    for (int j = 0; j < 9; ++j) {
      CHECK(g(0, j) >= bounds.lo[j]);
      CHECK(g(0, j) <= bounds.hi[j]);
    }
  }
  SUBCASE("ten thousand points all in bounds, both schemes") {
    for (GridScheme scheme : {GridScheme::Sobol, GridScheme::UniformRandom}) {
      const Eigen::MatrixXd g = sample_grid(bounds, 10000, 7, scheme);
      for (int j = 0; j < 9; ++j) {
        CHECK(g.col(j).minCoeff() >= bounds.lo[j]);
        CHECK(g.col(j).maxCoeff() <= bounds.hi[j]);
      }
    }
  }
  SUBCASE("deterministic per seed") {
    const Eigen::MatrixXd a = sample_grid(bounds, 64, 7, GridScheme::UniformRandom);
    const Eigen::MatrixXd b = sample_grid(bounds, 64, 7, GridScheme::UniformRandom);
    CHECK(a == b);
  }
  SUBCASE("rejects invalid sizes") {
    CHECK_THROWS_AS(sample_grid(bounds, 0, 1, GridScheme::Sobol), InvalidArgument);
  }
}

TEST_CASE("Sobol sampling has lower star discrepancy than uniform sampling") {
  ParamBounds unit;
  unit.variant = Variant::NineD;
  unit.names = {"a", "b"};
  unit.lo = Eigen::Vector2d(0, 0);
  unit.hi = Eigen::Vector2d(1, 1);
  const Eigen::MatrixXd sobol = sample_grid(unit, 1024, 0, GridScheme::Sobol);
  const Eigen::MatrixXd uniform = sample_grid(unit, 1024, 12345, GridScheme::UniformRandom);
  const double d_sobol = star_discrepancy_estimate(sobol);
  const double d_uniform = star_discrepancy_estimate(uniform);
  CHECK(d_sobol < d_uniform);
}

TEST_CASE("Sobol dimension guard") {
  CHECK_THROWS_AS(SobolSequence(11, 0), InvalidArgument);
  CHECK_NOTHROW(SobolSequence(10, 0));
}

TEST_CASE("build_table produces a spread of scores on a modest grid") {
  const ParamBounds bounds = default_bounds(Variant::NineD);
  const Eigen::MatrixXd grid = sample_grid(bounds, 100, 1, GridScheme::Sobol);
  const ScoreTable t = build_table(grid, bounds, default_five_d_fixture(), ModelParams{},
                                   quick_meta(), 2);
  CHECK(t.rows() == 100);
  CHECK(t.phi.maxCoeff() > t.phi.minCoeff());
  CHECK(t.meta.failed_rows == 0);
  CHECK((t.time_fraction.array() >= 0).all());
  CHECK((t.time_fraction.array() <= 1).all());
}

TEST_CASE("adversarial bounds produce a near-zero score table") {
  // pitch gains squeezed against the weak corner leave the trunk unstabilized
  ParamBounds bounds = default_bounds(Variant::NineD);
  bounds.lo[0] = 25;
  bounds.hi[0] = 26;
  bounds.lo[1] = 3;
  bounds.hi[1] = 3.2;
  const Eigen::MatrixXd grid = sample_grid(bounds, 60, 2, GridScheme::Sobol);
  const ScoreTable t = build_table(grid, bounds, default_five_d_fixture(), ModelParams{},
                                   quick_meta(), 2);
  CHECK(t.phi.maxCoeff() < 10.0);  // an episode that walks scores in the dozens
  CHECK(t.phi.mean() < 2.0);
  CHECK(t.time_fraction.mean() < 0.2);
}

TEST_CASE("parallel and sequential builds agree exactly and serialize identically") {
  const ParamBounds bounds = default_bounds(Variant::NineD);
  const Eigen::MatrixXd grid = sample_grid(bounds, 150, 5, GridScheme::Sobol);
  const ScoreTable seq = build_table(grid, bounds, default_five_d_fixture(), ModelParams{},
                                     quick_meta(), 1);
  const ScoreTable par = build_table(grid, bounds, default_five_d_fixture(), ModelParams{},
                                     quick_meta(), 2);
  CHECK(tables_equal(seq, par));

  const std::string p1 = temp_path("gaitopt_tbl_a.tbl");
  const std::string p2 = temp_path("gaitopt_tbl_b.tbl");
  save_table(seq, p1);
  save_table(par, p2);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("save/load round trip is exact") {
  const ParamBounds bounds = default_bounds(Variant::FiveD);
  const Eigen::MatrixXd grid = sample_grid(bounds, 1000, 11, GridScheme::UniformRandom);
  ScoreTable t;
  t.schema = bounds;
  t.fixture = default_five_d_fixture();
  t.params = grid;
  // adversarial float content, not simulator output
  Rng rng(3);
  t.phi.resize(1000);
  t.time_fraction.resize(1000);
  t.metric_sums.resize(1000, 4);
  for (int i = 0; i < 1000; ++i) {
    t.phi[i] = rng.normal() * std::pow(10.0, rng.uniform(-12, 12));
    t.time_fraction[i] = rng.uniform01();
    for (int k = 0; k < 4; ++k) t.metric_sums(i, k) = rng.normal();
  }
  t.meta = quick_meta();
  t.meta.scheme = GridScheme::UniformRandom;
  t.meta.model_fingerprint = model_fingerprint(ModelParams{}, DogThresholds{});

  const std::string path = temp_path("gaitopt_tbl_rt.tbl");
  save_table(t, path);
  const ScoreTable back = load_table(path);
  CHECK(tables_equal(t, back));
  CHECK(back.fixture.kp_height == t.fixture.kp_height);
  CHECK(back.meta.thresholds.retraction_min == t.meta.thresholds.retraction_min);
  std::remove(path.c_str());
}

TEST_CASE("load rejects corrupted and incompatible files") {
  const ParamBounds bounds = default_bounds(Variant::NineD);
  const Eigen::MatrixXd grid = sample_grid(bounds, 20, 1, GridScheme::Sobol);
  ScoreTable t;
  t.schema = bounds;
  t.fixture = default_five_d_fixture();
  t.params = grid;
  t.phi = Eigen::VectorXd::Zero(20);
  t.time_fraction = Eigen::VectorXd::Ones(20);
  t.metric_sums = Eigen::MatrixXd::Zero(20, 4);
  t.meta = quick_meta();
  t.meta.model_fingerprint = model_fingerprint(ModelParams{}, DogThresholds{});
  const std::string path = temp_path("gaitopt_tbl_bad.tbl");

  SUBCASE("row count mismatch") {
    save_table(t, path);
    std::string text = slurp(path);
    text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);  // drop last row
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_AS(load_table(path), FormatError);
  }
  SUBCASE("unsupported schema version") {
    save_table(t, path);
    std::string text = slurp(path);
    const std::string needle = "# schema_version: 1";
    text.replace(text.find(needle), needle.size(), "# schema_version: 9");
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_AS(load_table(path), VersionError);
  }
  SUBCASE("garbled numeric field") {
    save_table(t, path);
    std::string text = slurp(path);
    text.replace(text.rfind(','), 1, ",x");
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_AS(load_table(path), FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_table(temp_path("nope.tbl")), IoError); }
  std::remove(path.c_str());
}

TEST_CASE("fingerprint distinguishes models and thresholds") {
  const std::string base = model_fingerprint(ModelParams{}, DogThresholds{});
  ModelParams heavier;
  heavier.trunk_mass *= 1.01;
  CHECK(model_fingerprint(heavier, DogThresholds{}) != base);
  DogThresholds other;
  other.retraction_min = 0.04;
  CHECK(model_fingerprint(ModelParams{}, other) != base);
  CHECK(model_fingerprint(ModelParams{}, DogThresholds{}) == base);
}
