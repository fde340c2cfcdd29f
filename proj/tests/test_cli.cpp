#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "vba/io.hpp"
#include "vba/merit.hpp"
#include "vba/thermal.hpp"

using namespace vba;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "vbasim_test_log.txt";
  const std::string cmd = std::string(VBASIM_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("vbasim_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("equilibria with the transmission off") {
  const fs::path d = scratch("eq");
  const Run r = run("--preset table1 equilibria --accel-g 1 --voltage 0 --out " + d.string());
  REQUIRE(r.code == 0);
  std::ifstream in(d / "equilibria.csv");
  const auto rows = io::read_equilibria(in);
  REQUIRE(rows.size() == 1);
  const DerivedModel m = derive(table1_device());
  CHECK(rows[0].u == doctest::Approx(m.mass * 9.8 / m.k_mass).epsilon(1e-14));
  CHECK(rows[0].v1 == 0.0);
  CHECK(rows[0].stability == "stable");
}

TEST_CASE("bifurcation output and determinism") {
  const fs::path a = scratch("bif_a"), b = scratch("bif_b");
  REQUIRE(run("bifurcation --out " + a.string()).code == 0);
  REQUIRE(run("bifurcation --out " + b.string()).code == 0);
  CHECK(slurp(a / "branches.csv") == slurp(b / "branches.csv"));
  std::ifstream in(a / "branches.csv");
  const auto rows = io::read_branches(in);
  int pitchforks = 0;
  for (const auto& row : rows) {
    if (row.event == "pitchfork") {
      ++pitchforks;
      CHECK(row.beta == doctest::Approx(0.145).epsilon(0.02));
    }
  }
  CHECK(pitchforks == 1);

  const DerivedModel m = derive(table1_device());
  const double at = 0.2 / accel_tilde_per_g(m);
  const fs::path c = scratch("bif_c");
  REQUIRE(run("bifurcation --accel-g " + std::to_string(at) + " --out " + c.string()).code == 0);
  std::ifstream in2(c / "branches.csv");
  for (const auto& row : io::read_branches(in2)) CHECK(row.event != "pitchfork");
}

TEST_CASE("merit and working range on the polynomial model") {
  const fs::path d = scratch("merit");
  const Run r = run("--cap poly merit --voltages 0,30,50,52 --a-grid -0.5,0,0.5 --out " + d.string());
  REQUIRE(r.code == 0);
  std::ifstream mi(d / "merit.csv");
  const auto merit = io::read_merit(mi);
  REQUIRE(merit.size() == 12);
  CHECK(merit[0].sf0 == 0.0);
  std::ifstream wi(d / "working_range.csv");
  const auto ranges = io::read_ranges(wi);
  REQUIRE(ranges.size() == 4);
  CHECK(ranges[2].cause == "DeflectionLimit");
  CHECK(ranges[3].cause == "StabilityLimit");
}

TEST_CASE("environment overrides") {
  const fs::path d = scratch("env");
  const std::string cmd = "VBASIM_VOLTAGES=20,55 VBASIM_CAP=poly " + std::string(VBASIM_PATH) + " working-range --out " +
                          d.string() + " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::ifstream in(d / "working_range.csv");
  const auto rows = io::read_ranges(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].cause == "StabilityLimit");
}

TEST_CASE("thermal line") {
  const fs::path d = scratch("thermal");
  REQUIRE(run("thermal --voltage 20 --thetas -80,0,40 --out " + d.string()).code == 0);
  std::ifstream in(d / "thermal.csv");
  const auto rows = io::read_thermal(in);
  REQUIRE(rows.size() == 3);
  const double slope = (rows[2].f0 - rows[0].f0) / 120.0;
  CHECK(slope == doctest::Approx(-38.2e-6 * rows[1].f0).epsilon(1e-9));
  CHECK(run("thermal --thetas 50 --out " + d.string()).code == 2);
}

TEST_CASE("calibration scenario") {
  const fs::path d = scratch("cal");
  const DerivedModel m = derive(table1_device());
  const CapacitanceModel pp = ParallelPlateModel::from(m.params);
  std::vector<io::ScenarioRow> scenario;
  const double thetas[] = {0.0, 15.0, -30.0};
  for (int i = 0; i < 3; ++i) {
    const auto off = scaled_equilibrium(m, pp, 0.0, 0.0, thetas[i]);
    const auto on = scaled_equilibrium(m, pp, 0.2 * 9.8, 30.0, thetas[i]);
    scenario.push_back({i + 1, 30.0, off.f1, on.f1 - on.f2});
  }
  {
    std::ofstream out(d / "scenario.csv");
    io::write(out, scenario);
  }
  REQUIRE(run("calibrate --scenario " + (d / "scenario.csv").string() + " --out " + d.string()).code == 0);
  std::ifstream in(d / "calibration.csv");
  const auto rows = io::read_calibration_results(in);
  REQUIRE(rows.size() == 3);
  std::ifstream mi(d / "calibration_map.csv");
  const auto map = read_calibration_map(mi);
  // The zero-temperature epoch is the plain quotient by SF_ref.
  CHECK(rows[0].theta == doctest::Approx(0.0).scale(1.0));
  CHECK(rows[0].a_hat == doctest::Approx(scenario[0].delta_f / map.at(30.0).sf_ref).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) {
    CHECK(rows[i].theta == doctest::Approx(thetas[i]).scale(1.0).epsilon(1e-6));
    CHECK(rows[i].a_hat == doctest::Approx(0.2).epsilon(5e-3));
  }
}

TEST_CASE("exit codes") {
  const fs::path d = scratch("codes");
  CHECK(run("").code == 1);
  CHECK(run("bogus").code == 1);
  CHECK(run("bifurcation --beta-max 0 --out " + d.string()).code == 1);
  CHECK(run("--cap nope equilibria").code == 1);
  {
    std::ofstream out(d / "bad.json");
    out << "{\n  \"device\": {\n    \"gap_um\": 2.5,,\n  }\n}\n";
  }
  const Run bad = run("--config " + (d / "bad.json").string() + " equilibria");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("line 3") != std::string::npos);
  CHECK(run("equilibria --voltage 80 --out " + d.string()).code == 2);
  CHECK(run("--help").code == 0);
}

}
