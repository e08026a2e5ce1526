#include "doctest.h"

#include <cmath>
#include <sstream>

#include "tvlab/decay.hpp"
#include "tvlab/spectral.hpp"

using namespace tvlab;

TEST_CASE("fit of an exact exponential") {
  std::vector<double> t, e;
  for (int i = 0; i < 100; ++i) t.push_back(0.1 * i), e.push_back(5.0 * std::exp(-0.3 * 0.1 * i));
  const DecayFit fit = fit_decay(t, e, FitWindow{0.0, 10.0});
  CHECK(fit.m_hat == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fit.M_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.residual <= 1e-12);
  CHECK(fit.samples == 100);
}

TEST_CASE("fit of a constant") {
  const std::vector<double> t{0, 1, 2, 3}, e(4, 2.0);
  const DecayFit fit = fit_decay(t, e, FitWindow{0.0, 3.0});
  CHECK(std::abs(fit.m_hat) <= 1e-15);
  CHECK(fit.residual <= 1e-15);
}

TEST_CASE("fit preconditions") {
  const std::vector<double> t{0, 1, 2, 3}, e{1, 0.5, 0.0, 0.1};
  CHECK_THROWS_AS(fit_decay(t, e, FitWindow{2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_decay(t, e, FitWindow{0.5, 0.9}), std::invalid_argument);
  CHECK_THROWS_AS(fit_decay(t, e, FitWindow{0.0, 3.0}), std::invalid_argument);
  CHECK_NOTHROW(fit_decay(t, e, FitWindow{0.0, 1.0}));
  const FitWindow w = default_window(20.0);
  CHECK(w.t_lo == 10.0);
  CHECK(w.t_hi == 19.0);
}

TEST_CASE("default CaseI trace decays at twice the spectral abscissa") {
  const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, BoundaryFamily::FullDirichlet,
                                                    CouplingVariant::CaseI, GridOptions{});
  const double abscissa = spectrum(genr).abscissa;
  const Eigen::VectorXd u0 = default_initial_state(genr);
  const EnergyTrace tr = simulate(genr, u0, TimeScheme{1e-2, 20.0});
  const DecayFit fit = fit_decay(tr);
  CHECK(fit.m_hat > 0.0);
  CHECK(std::abs(fit.m_hat - 2 * std::abs(abscissa)) <= 0.2 * 2 * std::abs(abscissa));

  SUBCASE("window invariance") {
    const double a = fit_decay(tr, FitWindow{10.0, 15.0}).m_hat;
    const double b = fit_decay(tr, FitWindow{15.0, 20.0}).m_hat;
    CHECK(std::abs(a - b) <= 0.15 * std::max(a, b));
  }
  SUBCASE("scaling invariance") {
    const EnergyTrace scaled = simulate(genr, 3.0 * u0, TimeScheme{1e-2, 20.0});
    for (std::size_t k = 0; k < tr.size(); k += 97)
      CHECK(scaled.energies[k] == doctest::Approx(9.0 * tr.energies[k]).epsilon(1e-12));
    CHECK(std::abs(fit_decay(scaled).m_hat - fit.m_hat) <= 1e-10);
  }
}

TEST_CASE("scan at equal speeds and the CaseII refinement trend") {
  ScanOptions opt;
  opt.spectrum_max_n = 0;
  const std::vector<Mesh> meshes{{20, 8}, {40, 16}, {80, 32}};
  const ScanResult scan = wave_speed_scan(PhysicalParams{}, MemoryKernel{}, {1.0, 2.0},
                                          {CouplingVariant::CaseI, CouplingVariant::CaseII},
                                          {BoundaryFamily::FullDirichlet}, meshes, opt);
  REQUIRE(scan.skipped.empty());
  REQUIRE(scan.cells.size() == 12);
  for (auto v : {CouplingVariant::CaseI, CouplingVariant::CaseII})
    for (auto mesh : meshes) CHECK(scan.find(1.0, v, BoundaryFamily::FullDirichlet, mesh)->fit.m_hat > 0.0);
  const auto m = [&](CouplingVariant v, Mesh mesh) { return scan.find(2.0, v, BoundaryFamily::FullDirichlet, mesh)->fit.m_hat; };
  const double c1 = m(CouplingVariant::CaseI, meshes[1]), f1 = m(CouplingVariant::CaseI, meshes[2]);
  CHECK(c1 > 0.0);
  CHECK(std::abs(f1 - c1) <= 0.1 * c1);
  CHECK(m(CouplingVariant::CaseII, meshes[2]) <= 0.6 * m(CouplingVariant::CaseII, meshes[0]));
  for (const auto& c : scan.cells) CHECK(std::isnan(c.abscissa));

  const ContrastDigest digest = contrast_digest(scan);
  CHECK(digest.verdicts.size() == 3);
  CHECK(digest.passed());
}

TEST_CASE("infeasible cells are skipped") {
  ScanOptions opt;
  opt.scheme = TimeScheme{0.1, 2.0};
  const ScanResult scan = wave_speed_scan(PhysicalParams{}, MemoryKernel::exponential(100.0, 20.0), {1.0, 2.0},
                                          {CouplingVariant::CaseI}, {BoundaryFamily::FullDirichlet}, {{10, 8}}, opt);
  CHECK(scan.cells.empty());
  REQUIRE(scan.skipped.size() == 2);
  CHECK(scan.skipped[0].find("0 < b0 < b") != std::string::npos);
}

TEST_CASE("scan output is deterministic across thread counts") {
  ScanOptions opt;
  opt.scheme = TimeScheme{0.05, 4.0};
  auto run = [&](int threads) {
    opt.threads = threads;
    const ScanResult scan = wave_speed_scan(PhysicalParams{}, MemoryKernel{}, {0.5, 2.0},
                                            {CouplingVariant::CaseI, CouplingVariant::CaseII},
                                            {BoundaryFamily::FullDirichlet, BoundaryFamily::NeumannDirichlet},
                                            {{10, 8}}, opt);
    std::ostringstream os;
    write_scan_csv(os, scan);
    return os.str();
  };
  const std::string one = run(1);
  CHECK(one == run(3));
  CHECK(one.rfind("ratio,variant,bc,n,m,abscissa,m_hat,residual\n", 0) == 0);
}

TEST_CASE("contrast digest verdicts") {
  ScanResult scan;
  auto cell = [](double r, CouplingVariant v, int n, double a, double m) {
    ScanCell c;
    c.ratio = r, c.variant = v, c.mesh = {n, n / 2}, c.abscissa = a, c.fit.m_hat = m;
    return c;
  };
  for (int n : {20, 40, 80}) {
    scan.cells.push_back(cell(2.0, CouplingVariant::CaseI, n, -0.25, 0.5));
    scan.cells.push_back(cell(2.0, CouplingVariant::CaseII, n, -1e-2 * 20 / n, 0.2 * 20 / n));
    scan.cells.push_back(cell(1.0, CouplingVariant::CaseII, n, -0.1, 0.2));
  }
  ContrastDigest d = contrast_digest(scan);
  CHECK(d.verdicts.size() == 5);
  CHECK(d.passed());
  scan.cells[6].abscissa = -0.1;  // CaseI at n = 80
  d = contrast_digest(scan);
  CHECK_FALSE(d.passed());
  CHECK_FALSE(d.verdicts[0].passed);
  CHECK(d.verdicts[1].passed);
}
