// Acceptance runner: `acceptance <1..8>` or `acceptance all`.
// One line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "tvlab/decay.hpp"
#include "tvlab/discretization.hpp"
#include "tvlab/observability.hpp"
#include "tvlab/simulation.hpp"
#include "tvlab/spectral.hpp"

using namespace tvlab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

const std::vector<BoundaryFamily> kBcs{BoundaryFamily::FullDirichlet,
                                       BoundaryFamily::NeumannDirichlet};

struct RandomConfig {
  PhysicalParams params;
  MemoryKernel kernel;
  BoundaryFamily bc;
  CouplingVariant variant;
  GridOptions grids;
};

// Valid by construction: b0 = g0 / a is a fraction of b.
RandomConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mass(0.5, 3.0), stiff(1.0, 6.0), coef(0.1, 3.0),
      len(0.5, 2.0), rate(1.0, 20.0), frac(0.1, 0.9);
  std::uniform_int_distribution<int> nn(6, 20), mm(8, 16), coin(0, 1);
  RandomConfig c;
  c.params.rho1 = mass(rng), c.params.rho2 = mass(rng), c.params.rho3 = mass(rng);
  c.params.k = stiff(rng), c.params.b = stiff(rng);
  c.params.delta = coef(rng), c.params.gamma = coef(rng), c.params.sigma = coef(rng);
  c.params.l = len(rng);
  const double a = rate(rng);
  c.kernel = MemoryKernel::exponential(a * c.params.b * frac(rng), a);
  c.bc = kBcs[coin(rng)];
  c.variant = coin(rng) ? CouplingVariant::CaseII : CouplingVariant::CaseI;
  c.grids = GridOptions{nn(rng), mm(rng), 1e-8};
  return c;
}

Eigen::VectorXd random_state(const DiscreteGenerator& genr, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(genr.dim());
  for (auto& x : u) x = normal(rng);
  return project_admissible(genr, u);
}

// 1. Re <A u, u>_G <= 1e-12 |u|_G^2 on 50 configurations x 1000 states.
Outcome dissipativity() {
  std::mt19937_64 rng(101);
  double worst = -std::numeric_limits<double>::infinity();
  int configs = 0;
  while (configs < 50) {
    const RandomConfig c = random_config(rng);
    if (!validate(c.params, c.kernel).ok()) continue;
    const DiscreteGenerator genr = assemble_generator(c.params, c.kernel, c.bc, c.variant, c.grids);
    ++configs;
    for (int s = 0; s < 1000; ++s) {
      const Eigen::VectorXd u = random_state(genr, rng);
      worst = std::max(worst, inner(genr, apply(genr, u), u) / inner(genr, u, u));
    }
  }
  return {worst <= 1e-12, "max Re<Au,u>/|u|^2 = " + fmt(worst) + " over 50 x 1000"};
}

// 2. Monotone midpoint traces and exact conservation in the skew limit.
Outcome monotonicity() {
  std::mt19937_64 rng(202);
  int violations = 0, traces = 0;
  double worst_rise = 0.0;
  int configs = 0;
  while (configs < 12) {
    const RandomConfig c = random_config(rng);
    if (!validate(c.params, c.kernel).ok()) continue;
    const DiscreteGenerator genr = assemble_generator(c.params, c.kernel, c.bc, c.variant, c.grids);
    ++configs;
    for (double dt : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
      for (int s = 0; s < 3; ++s) {
        const EnergyTrace tr = simulate(genr, random_state(genr, rng), TimeScheme{dt, 200 * dt});
        ++traces;
        for (std::size_t k = 1; k < tr.size(); ++k) {
          const double rise = (tr.energies[k] - tr.energies[k - 1]) / tr.energies[0];
          worst_rise = std::max(worst_rise, rise);
          // Roundoff allowance of 1e-14 relative per step.
          if (tr.energies[k] > tr.energies[k - 1] * (1.0 + 1e-14)) ++violations;
        }
      }
    }
  }

  PhysicalParams skew;
  skew.sigma = 0.0;
  skew.gamma = 0.0;
  double drift = 0.0;
  for (auto bc : kBcs)
    for (auto v : {CouplingVariant::CaseI, CouplingVariant::CaseII}) {
      const DiscreteGenerator genr =
          assemble_generator(skew, MemoryKernel::none(), bc, v, GridOptions{20, 8, 1e-8});
      const EnergyTrace tr = simulate(genr, random_state(genr, rng), TimeScheme{1e-2, 100.0});
      if (tr.size() < 10001) return {false, "conservative run too short"};
      for (double e : tr.energies) drift = std::max(drift, std::abs(e - tr.energies[0]) / tr.energies[0]);
    }
  return {violations == 0 && drift <= 1e-11,
          std::to_string(violations) + " increases in " + std::to_string(traces) +
              " traces (largest relative step " + fmt(worst_rise) + "); skew drift " + fmt(drift) +
              " over 1e4 steps"};
}

// 3. Energy balance along the default CaseI trajectory.
Outcome dissipation_identity() {
  double worst = 0.0;
  for (auto bc : kBcs) {
    const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, bc,
                                                      CouplingVariant::CaseI, GridOptions{});
    const EnergyTrace tr = simulate(genr, default_initial_state(genr), TimeScheme{1e-3, 2.0});
    // dissipation_residual is scaled by max(E0, 1).
    worst = std::max(worst, dissipation_residual(tr) * std::max(tr.energies[0], 1.0) / tr.energies[0]);
  }
  return {worst <= 1e-8, "max residual / E(0) = " + fmt(worst)};
}

struct StabilityCheck {
  bool passed = true;
  std::string detail;
};

// m_hat > 0, within 10% between the two meshes, and within 20% of
// 2 |abscissa| on each.
StabilityCheck rate_checks(const ScanResult& scan, double ratio, CouplingVariant v, BoundaryFamily bc,
                           Mesh coarse, Mesh fine) {
  StabilityCheck out;
  const ScanCell* c = scan.find(ratio, v, bc, coarse);
  const ScanCell* f = scan.find(ratio, v, bc, fine);
  std::ostringstream os;
  os << "r=" << ratio << ' ' << to_string(v) << ' ' << to_string(bc) << ": ";
  if (!c || !f) {
    out.passed = false;
    out.detail = os.str() + "missing cell";
    return out;
  }
  const double mc = c->fit.m_hat, mf = f->fit.m_hat;
  const bool positive = mc > 0.0 && mf > 0.0;
  const bool stable = std::abs(mf - mc) <= 0.1 * mc;
  auto spectral = [](const ScanCell* cell) {
    const double ref = 2.0 * std::abs(cell->abscissa);
    return std::abs(cell->fit.m_hat - ref) / ref;
  };
  const double dc = spectral(c), df = spectral(f);
  out.passed = positive && stable && dc <= 0.2 && df <= 0.2;
  os << "m " << fmt(mc) << "->" << fmt(mf) << " vs 2|a| " << fmt(2 * std::abs(c->abscissa)) << "->"
     << fmt(2 * std::abs(f->abscissa)) << (out.passed ? "" : " [FAIL]");
  out.detail = os.str();
  return out;
}

// 4. CaseI rates for ratios {0.5, 1, 2} and both boundary families.
Outcome case1_rates() {
  ScanOptions opt;
  const Mesh coarse{40, 16}, fine{80, 32};
  const ScanResult scan = wave_speed_scan(PhysicalParams{}, MemoryKernel{}, {0.5, 1.0, 2.0},
                                          {CouplingVariant::CaseI}, kBcs, {coarse, fine}, opt);
  Outcome out{scan.skipped.empty(), ""};
  for (const auto& s : scan.skipped) out.detail += "skipped " + s + "; ";
  for (double r : {0.5, 1.0, 2.0})
    for (auto bc : kBcs) {
      const auto chk = rate_checks(scan, r, CouplingVariant::CaseI, bc, coarse, fine);
      out.passed = out.passed && chk.passed;
      out.detail += chk.detail + "; ";
    }
  return out;
}

// 5. CaseI/CaseII abscissa trends at ratio 2, stability of both at ratio 1.
Outcome contrast() {
  ScanOptions opt;
  const std::vector<Mesh> meshes{{20, 8}, {40, 16}, {80, 32}};
  const ScanResult unequal =
      wave_speed_scan(PhysicalParams{}, MemoryKernel{}, {2.0},
                      {CouplingVariant::CaseI, CouplingVariant::CaseII}, kBcs, meshes, opt);
  ScanResult equal =
      wave_speed_scan(PhysicalParams{}, MemoryKernel{}, {1.0}, {CouplingVariant::CaseI}, kBcs,
                      {meshes[1], meshes[2]}, opt);
  // CaseII at equal speeds decays about ten times slower and its slowest
  // modes sit in a dense band, so the late window needs a long horizon.  The
  // midpoint damps a mode at rate alpha only by alpha / (1 + (omega dt / 2)^2);
  // dt = 2.5e-3 keeps that under 20% for the top wave modes at n = 80.
  ScanOptions slow = opt;
  slow.scheme = TimeScheme{2.5e-3, 400.0};
  const ScanResult equal2 =
      wave_speed_scan(PhysicalParams{}, MemoryKernel{}, {1.0}, {CouplingVariant::CaseII}, kBcs,
                      {meshes[1], meshes[2]}, slow);
  equal.cells.insert(equal.cells.end(), equal2.cells.begin(), equal2.cells.end());
  equal.skipped.insert(equal.skipped.end(), equal2.skipped.begin(), equal2.skipped.end());
  Outcome out{unequal.skipped.empty() && equal.skipped.empty(), ""};
  for (const auto& s : unequal.skipped) out.detail += "skipped " + s + "; ";
  for (const auto& s : equal.skipped) out.detail += "skipped " + s + "; ";
  for (auto bc : kBcs) {
    std::vector<double> one, two;
    for (auto mesh : meshes) {
      const ScanCell* c1 = unequal.find(2.0, CouplingVariant::CaseI, bc, mesh);
      const ScanCell* c2 = unequal.find(2.0, CouplingVariant::CaseII, bc, mesh);
      if (!c1 || !c2) return {false, out.detail + "missing ratio 2 cell"};
      one.push_back(std::abs(c1->abscissa));
      two.push_back(std::abs(c2->abscissa));
    }
    const auto [lo, hi] = std::minmax_element(one.begin(), one.end());
    const bool uniform = *hi - *lo <= 0.2 * *hi;
    const bool shrinks = two.back() <= 0.6 * two.front();
    out.passed = out.passed && uniform && shrinks;
    out.detail += std::string(to_string(bc)) + ": CaseI |a| " + fmt(one[0]) + "," + fmt(one[1]) + "," +
                  fmt(one[2]) + (uniform ? "" : " [FAIL]") + ", CaseII |a| " + fmt(two[0]) + "->" +
                  fmt(two[2]) + " (x" + fmt(two[2] / two[0]) + ")" + (shrinks ? "" : " [FAIL]") + "; ";
    for (auto v : {CouplingVariant::CaseI, CouplingVariant::CaseII}) {
      const auto chk = rate_checks(equal, 1.0, v, bc, meshes[1], meshes[2]);
      out.passed = out.passed && chk.passed;
      out.detail += chk.detail + "; ";
    }
  }
  return out;
}

// Largest |x|_G / |f|_G over 200 random f, x = (i lambda - A)^{-1} f, then
// refined by power iteration on R* R (R* the G-adjoint).
double resolvent_oracle(const DiscreteGenerator& genr, double lambda, std::mt19937_64& rng) {
  using CSparse = Eigen::SparseMatrix<std::complex<double>>;
  const Eigen::Index N = genr.dim();
  CSparse I(N, N);
  I.setIdentity();
  const CSparse A = genr.A.cast<std::complex<double>>();
  const CSparse G = genr.G.cast<std::complex<double>>();
  const std::complex<double> il(0.0, lambda);
  const CSparse shifted = il * I - A;
  const CSparse adjoint = CSparse(shifted.adjoint());
  Eigen::SparseLU<CSparse> lu(shifted), lu_adj(adjoint);
  Eigen::SimplicialLDLT<CSparse> gram(G);
  if (lu.info() != Eigen::Success || lu_adj.info() != Eigen::Success)
    return std::numeric_limits<double>::infinity();

  auto gnorm = [&](const Eigen::VectorXcd& v) { return std::sqrt(std::real(v.dot(G * v))); };
  auto admissible = [&](Eigen::VectorXcd v) {
    const Eigen::VectorXd re = project_admissible(genr, v.real());
    const Eigen::VectorXd im = project_admissible(genr, v.imag());
    return Eigen::VectorXcd(re.cast<std::complex<double>>() +
                           std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>());
  };

  std::normal_distribution<double> normal;
  Eigen::VectorXcd best;
  double best_ratio = 0.0;
  for (int s = 0; s < 200; ++s) {
    Eigen::VectorXcd f(N);
    for (auto& z : f) z = {normal(rng), normal(rng)};
    f = admissible(f);
    const double ratio = gnorm(lu.solve(f)) / gnorm(f);
    if (ratio > best_ratio) best_ratio = ratio, best = f;
  }
  Eigen::VectorXcd f = best / gnorm(best);
  double estimate = best_ratio, previous = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXcd x = lu.solve(f);
    const double next = gnorm(x);
    estimate = std::max(estimate, next);
    if (std::abs(next - previous) <= 1e-10 * next) break;
    previous = next;
    const Eigen::VectorXcd y = admissible(gram.solve(lu_adj.solve(G * x)));
    f = y / gnorm(y);
  }
  return estimate;
}

// 6. CaseI flatness on [10, 100] at (40,16), checked against the oracle.
Outcome resolvent_flatness() {
  std::mt19937_64 rng(606);
  const auto grid = log_lambda_grid(10.0, 100.0, 25, false);
  Outcome out{true, ""};
  for (auto bc : kBcs) {
    const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, bc,
                                                      CouplingVariant::CaseI, GridOptions{40, 16, 1e-8});
    const ResolventSweep sweep = resolvent_sweep(energy_frame(genr), grid);
    const auto [lo, hi] = std::minmax_element(sweep.norms.begin(), sweep.norms.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(resolvent_oracle(genr, grid[i], rng) - sweep.norms[i]) / sweep.norms[i]);
    const double ratio = *hi / *lo;
    out.passed = out.passed && ratio <= 2.0 && worst <= 0.02;
    out.detail += std::string(to_string(bc)) + ": max/min " + fmt(ratio) + ", oracle deviation " +
                  fmt(worst) + "; ";
  }
  return out;
}

// 7. Wave resolvent: analytic case, refinement of constants, norm splitting.
Outcome observability() {
  const double pi = std::numbers::pi;
  const WaveResolventProblem prob = wave_problem(
      1.0, 1.0, pi, 0.0, 200, [](double) { return 0.0; }, [](double x) { return std::sin(x); });
  const WaveSolution sol = solve_wave_resolvent(prob);
  double err = 0.0;
  for (int i = 0; i <= 201; ++i)
    err = std::max({err, std::abs(sol.u(i) - std::sin(i * sol.h)), std::abs(sol.v(i))});

  const DataFamily family = seeded_family(1);
  const double a1 = pi / 4, a2 = pi / 2, b1 = 2 * pi / 5, b2 = 3 * pi / 5;
  const ObservabilityReport r100 = measure_constants(family, 100, a1, a2, b1, b2);
  const ObservabilityReport r200 = measure_constants(family, 200, a1, a2, b1, b2);
  const double d0 = std::abs(r200.C0_hat - r100.C0_hat) / r200.C0_hat;
  const double d1 = std::abs(r200.C1_hat - r100.C1_hat) / r200.C1_hat;

  double split = 0.0;
  for (std::size_t i = 0; i < family.samples.size(); ++i) {
    const WaveSolution s = solve_wave_resolvent(sample_problem(family, i, 200));
    for (double c : {0.3, 1.0, pi / 2, 2.9}) {
      const double whole = interval_norm2(s, 0.0, pi);
      split = std::max(split, std::abs(whole - interval_norm2(s, 0.0, c) - interval_norm2(s, c, pi)) / whole);
    }
  }
  return {err <= 1e-3 && d0 < 0.1 && d1 < 0.1 && split <= 1e-12,
          "analytic error " + fmt(err) + "; C0 " + fmt(r100.C0_hat) + "->" + fmt(r200.C0_hat) + " (" +
              fmt(d0) + "), C1 " + fmt(r100.C1_hat) + "->" + fmt(r200.C1_hat) + " (" + fmt(d1) +
              "); split " + fmt(split)};
}

// 8. Energy of psi = sin(x) and the 1x1 resolvent harness.
Outcome oracles() {
  const double pi = std::numbers::pi;
  PhysicalParams p;
  p.rho1 = p.rho2 = p.rho3 = 1.0;
  p.k = 0.0, p.b = 1.0, p.delta = p.gamma = p.sigma = 0.0, p.l = pi;
  std::vector<double> errors;
  std::vector<double> hs;
  for (int n : {50, 100, 200}) {
    const DiscreteGenerator genr = assemble_generator(p, MemoryKernel::none(), BoundaryFamily::FullDirichlet,
                                                      CouplingVariant::CaseI, GridOptions{n, 0, 1e-8});
    Eigen::VectorXd u = Eigen::VectorXd::Zero(genr.dim());
    segment(genr.layout, u, Field::psi) = sample_nodes(genr.xgrid, [](double x) { return std::sin(x); });
    errors.push_back(std::abs(energy(genr, u) - pi / 4));
    hs.push_back(genr.xgrid.h);
  }
  const double order = std::log(errors[1] / errors[2]) / std::log(hs[1] / hs[2]);
  const bool energy_ok = errors[2] <= hs[2] * hs[2] && order >= 1.9;

  const WeightedOperator scalar{Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Identity(1, 1)};
  const double r0 = resolvent_norm(scalar, 0.0);
  const double r1 = resolvent_norm(scalar, 1.0);
  const double eps = std::numeric_limits<double>::epsilon();
  const bool harness_ok = std::abs(r0 - 1.0) <= 2 * eps && std::abs(r1 - 1.0 / std::sqrt(2.0)) <= 2 * eps;
  return {energy_ok && harness_ok, "energy error " + fmt(errors[2]) + " at h = " + fmt(hs[2]) +
                                       " (order " + fmt(order) + "); R(0) = " + fmt(r0, 17) +
                                       ", R(1) = " + fmt(r1, 17)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1", {"discrete dissipativity", dissipativity}},
      {"2", {"energy monotonicity and skew exactness", monotonicity}},
      {"3", {"dissipation identity", dissipation_identity}},
      {"4", {"CaseI uniform stability", case1_rates}},
      {"5", {"CaseI/CaseII contrast", contrast}},
      {"6", {"resolvent flatness", resolvent_flatness}},
      {"7", {"observability", observability}},
      {"8", {"oracles", oracles}},
  };
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "all") {
      for (const auto& [key, value] : criteria) selected.push_back(key);
    } else if (criteria.count(arg)) {
      selected.push_back(arg);
    } else {
      std::cerr << "usage: acceptance (1..8 | all)...\n";
      return 2;
    }
  }
  if (selected.empty()) {
    std::cerr << "usage: acceptance (1..8 | all)...\n";
    return 2;
  }
  bool all = true;
  for (const auto& key : selected) {
    const auto& [name, run] = criteria.at(key);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << key << " (" << name << "): " << (out.passed ? "PASS" : "FAIL") << " ["
              << fmt(secs, 3) << " s] " << out.detail << std::endl;
    all = all && out.passed;
  }
  return all ? 0 : 1;
}
