#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ulfit/errors.hpp"
#include "ulfit/pipeline.hpp"

using namespace ulfit;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// compact configuration used by most pipeline tests: coarse meshes, a mild
// phantom, wide beams -> runs in seconds
std::string small_config(const std::string& out) {
  return std::string(R"([domain]
width = 2.0
height = 1.0

[mesh]
data_h = 0.02
solver_h = 0.04

[phantom]
background = 1.0
sigma_low = 0.5
sigma_high = 10.0
shape = disk 0.7 0.5 0.2 3.0
shape = rect 1.2 0.3 1.6 0.6 2.0

[pulses]
angles_deg = 20,110
beam_radius = 0.06
eta = 0.12
standoff = 0.3

[noise]
levels = 0

[run]
method = orthofield
seed = 4242
out = )") + out + "\n";
}

}  // namespace

TEST_CASE("config parser: sections, repeats, comments, errors") {
  ConfigFile f = ConfigFile::parse(
      "# comment\n[a]\nx = 1.5\nx = 2.5\ny = hello ; trailing\n\n[b]\nz=3\n");
  CHECK(f.get_number("a", "x", 0) == 2.5);  // last wins
  CHECK(f.get_all("a", "x").size() == 2);
  CHECK(f.get("a", "y", "") == "hello");
  CHECK(f.get_number("b", "z", 0) == 3.0);
  CHECK(f.get_number("b", "missing", 7.5) == 7.5);
  CHECK_THROWS_AS(ConfigFile::parse("[a\nx=1\n"), ValidationError);
  CHECK_THROWS_AS(ConfigFile::parse("[a]\nnot_a_pair\n"), ValidationError);
  CHECK_THROWS_AS([&] { ConfigFile::parse("[a]\nx = abc\n").get_number("a", "x", 0); }(),
                  ValidationError);
}

TEST_CASE("run config validation") {
  ConfigFile f = ConfigFile::parse(small_config("/tmp/ulfit_cfg_test"));
  RunConfig cfg = RunConfig::from_config(f);
  CHECK(cfg.noise_levels.size() == 1);
  CHECK(cfg.methods.size() == 1);

  SUBCASE("inverse-crime guard") {
    cfg.solver_h = cfg.data_h;  // same resolution
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("bad spacing") {
    cfg.spacing = cfg.beam_radius;  // > R/2
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("bad method string") {
    ConfigFile g = ConfigFile::parse("[run]\nmethod = magic\n");
    CHECK_THROWS_AS(RunConfig::from_config(g), ValidationError);
  }
}

TEST_CASE("make_phantom") {
  auto mesh = std::make_shared<TriMesh>(make_rect_mesh(100, 50, 2.0, 1.0));

  SUBCASE("empty shape list gives the background everywhere") {
    PhantomSpec spec{1.0, 0.5, 10.0, {}};
    ConductivityMap sigma = make_phantom(mesh, spec);
    for (double s : sigma.sigma) CHECK(s == 1.0);
  }
  SUBCASE("disk area fraction matches the analytic area within 2%") {
    PhantomSpec spec{1.0, 0.5, 10.0,
                     {{PhantomShape::Kind::Disk, {0.9, 0.5}, {0.25, 0.25}, 8.0}}};
    ConductivityMap sigma = make_phantom(mesh, spec);
    double area_in = 0.0, area_total = 0.0;
    for (std::size_t t = 0; t < mesh->triangle_count(); ++t) {
      area_total += mesh->signed_area(t);
      if (sigma.sigma[t] == 8.0) area_in += mesh->signed_area(t);
    }
    double exact = std::numbers::pi * 0.25 * 0.25;
    CHECK(area_in == doctest::Approx(exact).epsilon(0.02));
    CHECK(area_total == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("overlapping shapes: the last one wins") {
    PhantomSpec spec{1.0, 0.5, 10.0,
                     {{PhantomShape::Kind::Rect, {0.5, 0.3}, {1.1, 0.7}, 4.0},
                      {PhantomShape::Kind::Disk, {0.8, 0.5}, {0.15, 0.15}, 7.0}}};
    ConductivityMap sigma = make_phantom(mesh, spec);
    PointLocator loc(*mesh);
    CHECK(sigma.sigma[loc.locate({0.8, 0.5})] == 7.0);   // inside both
    CHECK(sigma.sigma[loc.locate({0.6, 0.35})] == 4.0);  // rect only
  }
  SUBCASE("shape touching an electrode is rejected") {
    PhantomSpec spec{1.0, 0.5, 10.0,
                     {{PhantomShape::Kind::Disk, {1.0, 0.08}, {0.05, 0.05}, 2.0}}};
    CHECK_THROWS_AS(make_phantom(mesh, spec), ValidationError);
  }
  SUBCASE("shape outside the declared bounds is rejected") {
    PhantomSpec spec{1.0, 0.5, 4.0, {{PhantomShape::Kind::Disk, {0.9, 0.5}, {0.2, 0.2}, 8.0}}};
    CHECK_THROWS_AS(make_phantom(mesh, spec), ValidationError);
  }
}

TEST_CASE("uniform phantom: the full measurement chain reconstructs it") {
  namespace fs = std::filesystem;
  std::string out = "/tmp/ulfit_uniform_case";
  fs::remove_all(out);
  ConfigFile f = ConfigFile::parse(std::string(R"([mesh]
data_h = 0.02
solver_h = 0.04

[phantom]
background = 1.0
sigma_low = 0.5
sigma_high = 4.0

[pulses]
angles_deg = 20,110
beam_radius = 0.06
eta = 0.12

[noise]
levels = 0

[run]
method = orthofield
seed = 7
out = )") + out + "\n");
  RunConfig cfg = RunConfig::from_config(f);
  NoiseSweepReport report = run_pipeline(cfg);
  REQUIRE(report.failures.empty());
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].relative_l2_error <= 1e-3);
  fs::remove_all(out);
}

TEST_CASE("report rows cover every method and stay sorted") {
  namespace fs = std::filesystem;
  std::string out = "/tmp/ulfit_both_methods";
  fs::remove_all(out);
  std::string text = small_config(out);
  text.replace(text.find("method = orthofield"), std::string("method = orthofield").size(),
               "method = both");
  text.replace(text.find("levels = 0"), std::string("levels = 0").size(), "levels = 0.02,0");
  ConfigFile f = ConfigFile::parse(text);
  RunConfig cfg = RunConfig::from_config(f);
  cfg.control.max_iters = 30;  // keep the run short
  NoiseSweepReport report = run_pipeline(cfg);

  REQUIRE(report.failures.empty());
  REQUIRE(report.rows.size() == 4);  // two levels x two methods
  CHECK(report.rows[0].noise_level == 0.0);
  CHECK(report.rows[1].noise_level == 0.0);
  CHECK(report.rows[2].noise_level == 0.02);
  CHECK(report.rows[3].noise_level == 0.02);
  CHECK(method_name(report.rows[0].method) == "control");
  CHECK(method_name(report.rows[1].method) == "orthofield");
  for (const auto& row : report.rows) {
    CHECK(std::isfinite(row.relative_l2_error));
    CHECK(row.relative_l2_error >= 0.0);
  }
  fs::remove_all(out);
}

TEST_CASE("sweep reports are byte-identical across runs with one seed") {
  namespace fs = std::filesystem;
  std::string out1 = "/tmp/ulfit_det_a", out2 = "/tmp/ulfit_det_b";
  fs::remove_all(out1);
  fs::remove_all(out2);

  std::string text = small_config(out1);
  text.replace(text.find("levels = 0"), std::string("levels = 0").size(), "levels = 0.05,0.01");
  RunConfig cfg1 = RunConfig::from_config(ConfigFile::parse(text));
  run_pipeline(cfg1);

  RunConfig cfg2 = cfg1;
  cfg2.out_dir = out2;
  run_pipeline(cfg2);

  CHECK(slurp(out1 + "/report.csv") == slurp(out2 + "/report.csv"));
  CHECK(slurp(out1 + "/measurements.csv") == slurp(out2 + "/measurements.csv"));

  // a different seed must change the noisy rows
  RunConfig cfg3 = cfg1;
  cfg3.out_dir = out2;
  cfg3.seed = cfg1.seed + 1;
  fs::remove_all(out2);
  run_pipeline(cfg3);
  CHECK(slurp(out1 + "/report.csv") != slurp(out2 + "/report.csv"));

  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("stage failures are recorded and the sweep continues") {
  namespace fs = std::filesystem;
  std::string out = "/tmp/ulfit_failures";
  fs::remove_all(out);
  std::string text = small_config(out);
  // a huge relative noise level makes the recovered data degenerate enough
  // to trip the gamma-inversion or recovery guards at some levels
  text.replace(text.find("levels = 0"), std::string("levels = 0").size(),
               "levels = 0,1000000");
  RunConfig cfg = RunConfig::from_config(ConfigFile::parse(text));
  NoiseSweepReport report = run_pipeline(cfg, false);
  // the clean level always succeeds
  bool has_clean = false;
  for (const auto& row : report.rows) has_clean = has_clean || row.noise_level == 0.0;
  CHECK(has_clean);
  // the absurd level either failed loudly or produced a (terrible) row
  bool huge_handled = !report.failures.empty();
  for (const auto& row : report.rows)
    if (row.noise_level > 1) huge_handled = true;
  CHECK(huge_handled);
  fs::remove_all(out);
}

TEST_CASE("paper-style noise ladder: orthofield errors increase and stay sane") {
  namespace fs = std::filesystem;
  std::string out = "/tmp/ulfit_ladder";
  fs::remove_all(out);
  std::string text = small_config(out);
  text.replace(text.find("levels = 0"), std::string("levels = 0").size(),
               "levels = 0.0001,0.01,0.2");
  RunConfig cfg = RunConfig::from_config(ConfigFile::parse(text));
  NoiseSweepReport report = run_pipeline(cfg, false);
  REQUIRE(report.failures.empty());
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].relative_l2_error < report.rows[1].relative_l2_error);
  CHECK(report.rows[1].relative_l2_error < report.rows[2].relative_l2_error);
  CHECK(report.rows[1].relative_l2_error <= 0.15);  // 1% noise stays mild
  fs::remove_all(out);
}

TEST_CASE("synthesize then reconstruct round-trips through the CSV") {
  namespace fs = std::filesystem;
  std::string out = "/tmp/ulfit_synth_recon";
  fs::remove_all(out);
  RunConfig cfg = RunConfig::from_config(ConfigFile::parse(small_config(out)));
  run_synthesize(cfg);
  CHECK(fs::exists(out + "/measurements.csv"));
  CHECK(fs::exists(out + "/phantom.csv"));
  run_reconstruct(cfg);
  CHECK(fs::exists(out + "/sigma_orthofield.csv"));
  CHECK(fs::exists(out + "/current.csv"));
  fs::remove_all(out);
}
