#include "doctest.h"

#include <cmath>

#include "tvlab/model.hpp"

using namespace tvlab;

TEST_CASE("validate accepts g = exp(-s) with b = 2") {
  PhysicalParams p;
  p.b = 2.0;
  const ValidationReport r = validate(p, MemoryKernel::exponential(1.0, 1.0));
  CHECK(r.ok());
  CHECK(r.b0 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.beta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.failures().empty());
}

TEST_CASE("validate rejects b0 >= b") {
  PhysicalParams p;
  p.b = 2.0;
  const ValidationReport r = validate(p, MemoryKernel::exponential(3.0, 1.0));
  CHECK_FALSE(r.ok());
  CHECK(r.b0 == doctest::Approx(3.0));
  CHECK(r.failures().find("0 < b0 < b") != std::string::npos);
}

TEST_CASE("validate rejects k1 above the decay rate") {
  PhysicalParams p;
  p.b = 2.0;
  const ValidationReport r = validate(p, MemoryKernel::exponential(1.0, 1.0, 2.0));
  CHECK_FALSE(r.ok());
  CHECK(r.failures().find("k1") != std::string::npos);
}

TEST_CASE("validate names every non-positive coefficient") {
  PhysicalParams p;
  p.b = -1.0;
  p.rho3 = 0.0;
  const ValidationReport r = validate(p, MemoryKernel{});
  CHECK_FALSE(r.ok());
  CHECK(r.failures().find("b must be positive") != std::string::npos);
  CHECK(r.failures().find("rho3 must be positive") != std::string::npos);
  CHECK_FALSE(validate(PhysicalParams{}, MemoryKernel::none()).ok());
}

TEST_CASE("validate agrees with the sampled kernel inequality") {
  // Passes iff g0/a < b, k1 <= a and the coefficients are positive; the
  // kernel inequality is checked on 100 points of [0, 20/a].
  PhysicalParams p;
  for (double g0 : {0.5, 2.0, 8.0})
    for (double a : {0.5, 1.0, 4.0})
      for (double k1 : {0.25, 1.0, 3.0}) {
        const MemoryKernel g = MemoryKernel::exponential(g0, a, k1);
        bool sampled = true;
        for (int i = 0; i < 100; ++i) {
          const double s = 20.0 / a * i / 99.0;
          sampled = sampled && k1 * g.value(s) <= -g.derivative(s) * (1 + 1e-14);
        }
        const bool expected = g0 / a < p.b && sampled;
        CAPTURE(g0);
        CAPTURE(a);
        CAPTURE(k1);
        const ValidationReport r = validate(p, g);
        CHECK(r.ok() == expected);
        if (r.ok()) CHECK(std::abs(r.beta - (p.b - g0 / a)) <= 1e-12 * r.beta);
      }
}

TEST_CASE("kernel closed forms") {
  const MemoryKernel g = MemoryKernel::exponential(2.0, 4.0);
  CHECK(g.k1 == 4.0);
  CHECK(g.total_mass() == doctest::Approx(0.5));
  CHECK(g.integral(0.0, 1.0) == doctest::Approx(0.5 * (1 - std::exp(-4.0))));
  CHECK(g.truncation_length(1e-8) == doctest::Approx(std::log(1e8) / 4.0));
  CHECK(g.derivative(0.5) == doctest::Approx(-4.0 * g.value(0.5)));
}

TEST_CASE("wave speeds") {
  PhysicalParams p;
  p.rho1 = 1, p.k = 1, p.rho2 = 2, p.b = 2;
  CHECK(wave_speeds(p) == std::pair{1.0, 1.0});
  CHECK(speed_ratio(p) == 1.0);
  p.rho2 = 1;
  CHECK(wave_speeds(p) == std::pair{1.0, 2.0});
  p.rho1 = 4, p.rho2 = 8;
  CHECK(wave_speeds(p) == std::pair{0.25, 0.25});
}

TEST_CASE("with_speed_ratio only moves rho2") {
  const PhysicalParams base;
  for (double r : {0.5, 1.0, 2.0}) {
    const PhysicalParams p = with_speed_ratio(base, r);
    CHECK(speed_ratio(p) == doctest::Approx(r).epsilon(1e-14));
    CHECK(p.rho1 == base.rho1);
    CHECK(p.k == base.k);
    CHECK(p.b == base.b);
  }
  CHECK(speed_ratio(base) == doctest::Approx(2.0));
}

TEST_CASE("tags round trip") {
  for (auto bc : {BoundaryFamily::FullDirichlet, BoundaryFamily::NeumannDirichlet})
    CHECK(boundary_from_string(to_string(bc)) == bc);
  for (auto v : {CouplingVariant::CaseI, CouplingVariant::CaseII})
    CHECK(variant_from_string(to_string(v)) == v);
  CHECK(to_string(BoundaryFamily::NeumannDirichlet) == "mixed");
  CHECK(to_string(CouplingVariant::CaseII) == "case2");
  CHECK_THROWS(boundary_from_string("neumann"));
}

TEST_CASE("default parameters are valid") {
  const ValidationReport r = validate(PhysicalParams{}, MemoryKernel{});
  REQUIRE(r.ok());
  CHECK(r.b0 == doctest::Approx(2.0));
  CHECK(r.beta == doctest::Approx(2.0));
}
