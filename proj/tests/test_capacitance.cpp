#include <doctest.h>

#include <sstream>

#include "vba/capacitance.hpp"
#include "vba/error.hpp"

using namespace vba;

namespace {

// Central differences of C and its first derivatives against the analytic ones.
void check_derivatives(const CapacitanceModel& cap, Side side, double u, double v) {
  const double h = 1e-10;
  const auto c = evaluate(cap, side, u, v);
  const auto up = evaluate(cap, side, u + h, v), um = evaluate(cap, side, u - h, v);
  const auto vp = evaluate(cap, side, u, v + h), vm = evaluate(cap, side, u, v - h);
  auto near = [](double fd, double exact, double scale) {
    CHECK(std::abs(fd - exact) <= 1e-6 * scale);
  };
  near((up.c - um.c) / (2 * h), c.c_u, std::abs(c.c_u) + std::abs(c.c_v));
  near((vp.c - vm.c) / (2 * h), c.c_v, std::abs(c.c_u) + std::abs(c.c_v));
  const double s2 = std::abs(c.c_uu) + std::abs(c.c_uv) + std::abs(c.c_vv);
  near((up.c_u - um.c_u) / (2 * h), c.c_uu, s2);
  near((vp.c_u - vm.c_u) / (2 * h), c.c_uv, s2);
  near((up.c_v - um.c_v) / (2 * h), c.c_uv, s2);
  near((vp.c_v - vm.c_v) / (2 * h), c.c_vv, s2);
}

}  // namespace

TEST_SUITE("capacitance") {

TEST_CASE("parallel plate matches the plate formula") {
  const DeviceParams p = table1_device();
  const ParallelPlateModel pp = ParallelPlateModel::from(p);
  const double u = 0.3e-6, v = 0.5e-6;
  const double c1 = 156 * 8.854e-12 * 50e-6 * (4e-6 + u) / (2 * (2.5e-6 - v));
  CHECK(pp.evaluate(Side::One, u, v).c == doctest::Approx(c1).epsilon(1e-14));
  CHECK(pp.evaluate(Side::Two, -u, v).c == doctest::Approx(c1).epsilon(1e-14));
  CHECK(pp.evaluate(Side::One, 0, 0).c_uu == 0.0);
}

TEST_CASE("analytic derivatives agree with finite differences") {
  const DeviceParams p = table1_device();
  const CapacitanceModel pp = ParallelPlateModel::from(p);
  const CapacitanceModel poly = polynomial_preset("paper-eq22", 156);
  for (Side side : {Side::One, Side::Two}) {
    for (double u : {-1.5e-6, 0.0, 0.7e-6}) {
      for (double v : {-0.2e-6, 0.0, 1.1e-6}) {
        check_derivatives(pp, side, u, v);
        check_derivatives(poly, side, u, v);
      }
    }
  }
}

TEST_CASE("the sides mirror each other in u") {
  const CapacitanceModel poly = polynomial_preset("paper-eq22", 156);
  const CapacitanceModel pp = ParallelPlateModel::from(table1_device());
  for (const auto* cap : {&poly, &pp}) {
    for (double u : {-1.2e-6, 0.4e-6, 1.9e-6}) {
      for (double v : {0.0, 0.8e-6}) {
        const auto a = evaluate(*cap, Side::One, u, v);
        const auto b = evaluate(*cap, Side::Two, -u, v);
        CHECK(a.c == doctest::Approx(b.c).epsilon(1e-14));
        CHECK(a.c_u == doctest::Approx(-b.c_u).epsilon(1e-12));
        CHECK(a.c_v == doctest::Approx(b.c_v).epsilon(1e-12));
        CHECK(a.c_uv == doctest::Approx(-b.c_uv).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("forces carry the co-energy factor") {
  const CapacitanceModel pp = ParallelPlateModel::from(table1_device());
  const auto c = evaluate(pp, Side::One, 0.1e-6, 0.2e-6);
  const auto f = forces(pp, Side::One, 0.1e-6, 0.2e-6, 30.0);
  CHECK(f.fx == doctest::Approx(900.0 * c.c_v));
  CHECK(f.fy == doctest::Approx(900.0 * c.c_u));
  const CapacitanceModel poly = polynomial_preset("paper-eq22", 156);
  const auto cp = evaluate(poly, Side::One, 0.1e-6, 0.2e-6);
  CHECK(forces(poly, Side::One, 0.1e-6, 0.2e-6, 30.0).fx == doctest::Approx(450.0 * cp.c_v));
}

TEST_CASE("domain errors") {
  const CapacitanceModel pp = ParallelPlateModel::from(table1_device());
  CHECK_THROWS_AS(evaluate(pp, Side::One, 0.0, 2.5e-6), Error);
  CHECK_THROWS_AS(evaluate(pp, Side::One, -4e-6, 0.0), Error);
  const CapacitanceModel poly = polynomial_preset("paper-eq22", 156);
  try {
    evaluate(poly, Side::One, 2.5e-6, 0.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfValidityBox);
  }
  CHECK_NOTHROW(evaluate(poly, Side::One, 2e-6, 2e-6));
  CHECK_THROWS_AS(polynomial_preset("unknown"), Error);
}

TEST_CASE("polynomial preset scales with the electrode count") {
  const auto a = polynomial_preset("paper-eq22", 156);
  const auto b = polynomial_preset("paper-eq22", 3);
  CHECK(a.evaluate(Side::One, 0.3e-6, 0.4e-6).c == doctest::Approx(52.0 * b.evaluate(Side::One, 0.3e-6, 0.4e-6).c));
}

TEST_CASE("coefficient table round-trips") {
  const auto a = polynomial_preset("paper-eq22", 156);
  std::stringstream ss;
  write_polynomial(ss, a);
  const auto b = load_polynomial(ss);
  CHECK(b.coeffs == a.coeffs);
  CHECK(b.scale == a.scale);
  CHECK(b.farads_per_unit == a.farads_per_unit);
  CHECK(b.u_min_um == a.u_min_um);
  CHECK(b.v_max_um == a.v_max_um);
}

TEST_CASE("bundled coefficient file matches the preset") {
  const auto a = polynomial_preset("paper-eq22", 156);
  const auto b = load_polynomial_file(VBA_DATA_DIR "/three_finger_fit.csv");
  for (int s = 0; s < 2; ++s)
    for (int r = 0; r < 5; ++r)
      for (int k = 0; k < 3; ++k) CHECK(b.coeffs[s][r][k] == doctest::Approx(a.coeffs[s][r][k]).epsilon(1e-15));
  CHECK(b.scale == a.scale);
  CHECK(b.farads_per_unit == a.farads_per_unit);
}

TEST_CASE("malformed tables report the line") {
  auto fails_at = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      load_polynomial(in);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedTable);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  const std::string meta = "# scale,1\n# farads_per_unit,1e-12\n# u_range_um,-2,2\n# v_range_um,-0.5,2\n";
  fails_at(meta + "side,r,s,c\n", "line 5");
  fails_at(meta + "side,r,s,coeff_pF_per_um\n1,1,1,x\n", "line 6");
  fails_at(meta + "side,r,s,coeff_pF_per_um\n1,6,1,1\n", "line 6");
  fails_at(meta + "side,r,s,coeff_pF_per_um\n1,1,1,1\n1,1,1,2\n", "line 7");
  fails_at(meta + "side,r,s,coeff_pF_per_um\n1,1,1,1\n", "got 1");
  fails_at("# bogus,1\n", "line 1");
}

}
