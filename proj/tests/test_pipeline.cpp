#include "gdmap/io.hpp"
#include "gdmap/pipeline.hpp"

#include "helpers.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <json.hpp>

using namespace gdmap;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("pipeline");

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gdmap_test_pipeline" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig small_sample(const fs::path& out) {
  RunConfig c;
  c.command = Command::sample;
  c.out_dir = out;
  c.potential = "double-well-2d";
  c.beta = 6.0;
  c.dt = 0.03;
  c.steps = 20000;
  c.samples = 400;
  c.seed = 5;
  c.x0 = {-1.0, 0.0};
  return c;
}

RunConfig tmdmap_on(const fs::path& points, const fs::path& out) {
  RunConfig c;
  c.command = Command::tmdmap;
  c.out_dir = out;
  c.input = points;
  c.potential = "double-well-2d";
  c.beta = 6.0;
  c.epsilon = 0.05;
  c.k = 4;
  c.clusters = 2;
  c.seed = 3;
  return c;
}

void check_same_csvs(const fs::path& a, const fs::path& b) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++n;
    CAPTURE(e.path().filename().string());
    REQUIRE(fs::exists(b / e.path().filename()));
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  CHECK(n > 0);
}

}  // namespace

TEST_CASE("commands round-trip through disk deterministically") {
  const auto root = scratch("det");
  const auto s1 = run_pipeline(small_sample(root / "s1"));
  run_pipeline(small_sample(root / "s2"));
  check_same_csvs(root / "s1", root / "s2");
  CHECK(ingest_points(root / "s1" / "points.csv").size() == 400);
  CHECK(ingest_trajectory(root / "s1" / "trajectory.csv", 0.03).size() == 20001);
  CHECK(fs::exists(root / "s1" / "manifest.json"));

  run_pipeline(tmdmap_on(root / "s1" / "points.csv", root / "t1"));
  const auto t2 = run_pipeline(tmdmap_on(root / "s1" / "points.csv", root / "t2"));
  check_same_csvs(root / "t1", root / "t2");
  for (const char* f : {"eigenvalues.csv", "eigenvectors.csv", "weights.csv", "labels.csv"}) CHECK(fs::exists(root / "t1" / f));
  // t_0 is written as inf, which the strict reader refuses, so check the text
  std::istringstream ev(slurp(root / "t1" / "eigenvalues.csv"));
  std::string line;
  std::getline(ev, line);
  CHECK(line == "index,re,im,residual,timescale");
  int rows = 0;
  while (std::getline(ev, line)) rows += !line.empty();
  CHECK(rows == 4);
  CHECK(read_csv(root / "t1" / "eigenvectors.csv").values.rows() == 400);
  CHECK(t2.values.count("tmdmap.t1"));
}

TEST_CASE("a manifest alone reproduces the run") {
  const auto root = scratch("manifest");
  run_pipeline(small_sample(root / "a"));
  auto c = load_manifest(root / "a" / "manifest.json");
  const auto m = nlohmann::json::parse(slurp(root / "a" / "manifest.json"));
  CHECK(m.contains("versions"));
  CHECK(m.at("config").at("seed") == 5);
  CHECK(m.contains("timings_seconds"));
  c.out_dir = root / "b";
  run_pipeline(c);
  check_same_csvs(root / "a", root / "b");
}

TEST_CASE("sweep reports the kernel sum on a geometric grid") {
  const auto root = scratch("sweep");
  run_pipeline(small_sample(root / "s"));
  RunConfig c;
  c.command = Command::sweep;
  c.input = root / "s" / "points.csv";
  c.out_dir = root / "w";
  c.sweep_min = 1e-8;
  c.sweep_max = 1e2;
  c.sweep_count = 21;
  run_pipeline(c);
  const auto t = read_csv(root / "w" / "sweep.csv");
  REQUIRE(t.values.rows() == 21);
  CHECK(t.values(1, 0) / t.values(0, 0) == doctest::Approx(std::pow(1e10, 1.0 / 20)));
  for (Eigen::Index i = 1; i < 21; ++i) CHECK(t.values(i, 1) >= t.values(i - 1, 1));
  // the sum saturates at m^2 for large eps and tends to m for small eps
  CHECK(t.values(20, 1) == doctest::Approx(400.0 * 400.0).epsilon(0.05));
  CHECK(t.values(0, 1) == doctest::Approx(400.0).epsilon(0.05));
}

TEST_CASE("missing flags name the flag") {
  const auto root = scratch("missing");
  run_pipeline(small_sample(root / "s"));
  RunConfig c = tmdmap_on(root / "s" / "points.csv", root / "t");
  c.epsilon.reset();
  try {
    run_pipeline(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("--") != std::string::npos);
  }
  RunConfig s = small_sample(root / "s2");
  s.seed.reset();
  try {
    run_pipeline(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
    CHECK(e.hint().find("--seed") != std::string::npos);
  }
}

TEST_SUITE_END();
