#include "tvlab/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tvlab/fingerprint.hpp"
#include "tvlab/parallel.hpp"
#include "tvlab/spectral.hpp"

namespace tvlab {

FitWindow default_window(double t_end) { return {0.5 * t_end, 0.95 * t_end}; }

FitWindow default_window(const EnergyTrace& trace) {
  if (trace.size() == 0) throw std::invalid_argument("empty trace");
  const double floor = kEnergyFloor * trace.energies.front();
  double t_end = trace.times.back();
  for (std::size_t k = 0; k < trace.size(); ++k)
    if (trace.energies[k] < floor) {
      t_end = trace.times[k] / 0.95;
      break;
    }
  return default_window(t_end);
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& energies,
                   FitWindow window) {
  if (times.size() != energies.size()) throw std::invalid_argument("times and energies differ in length");
  if (!(window.t_lo >= 0.0 && window.t_lo < window.t_hi))
    throw std::invalid_argument("fit window must satisfy 0 <= t_lo < t_hi");

  // Centered sums keep the normal equations well conditioned for late windows.
  std::vector<double> t, y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < window.t_lo || times[k] > window.t_hi) continue;
    if (!(energies[k] > 0.0))
      throw std::invalid_argument("energy is not positive at t = " + std::to_string(times[k]) +
                                  "; the trace decayed to roundoff, shrink the window");
    t.push_back(times[k]);
    y.push_back(std::log(energies[k]));
  }
  if (t.size() < 2) throw std::invalid_argument("fewer than two samples in the fit window");

  const double n = static_cast<double>(t.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) tm += t[k], ym += y[k];
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - tm) * (t[k] - tm);
    sty += (t[k] - tm) * (y[k] - ym);
  }
  const double slope = sty / stt;
  const double intercept = ym - slope * tm;

  DecayFit fit;
  fit.m_hat = -slope;
  fit.M_hat = std::exp(intercept) / energies.front();
  fit.window = window;
  fit.samples = t.size();
  for (std::size_t k = 0; k < t.size(); ++k)
    fit.residual = std::max(fit.residual, std::abs(y[k] - (intercept + slope * t[k])));
  return fit;
}

DecayFit fit_decay(const EnergyTrace& trace, FitWindow window) {
  return fit_decay(trace.times, trace.energies, window);
}

DecayFit fit_decay(const EnergyTrace& trace) {
  return fit_decay(trace, default_window(trace));
}

const ScanCell* ScanResult::find(double ratio, CouplingVariant variant, BoundaryFamily bc,
                                 Mesh mesh) const {
  for (const auto& c : cells)
    if (c.ratio == ratio && c.variant == variant && c.bc == bc && c.mesh.n == mesh.n &&
        c.mesh.m == mesh.m)
      return &c;
  return nullptr;
}

ScanResult wave_speed_scan(const PhysicalParams& base, const MemoryKernel& kernel,
                           const std::vector<double>& ratios,
                           const std::vector<CouplingVariant>& variants,
                           const std::vector<BoundaryFamily>& bcs, const std::vector<Mesh>& meshes,
                           const ScanOptions& options) {
  struct Job {
    double ratio;
    CouplingVariant variant;
    BoundaryFamily bc;
    Mesh mesh;
  };
  std::vector<Job> jobs;
  for (double r : ratios)
    for (auto v : variants)
      for (auto bc : bcs)
        for (auto mesh : meshes) jobs.push_back({r, v, bc, mesh});

  std::vector<std::optional<ScanCell>> done(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    std::ostringstream where;
    where << "ratio " << job.ratio << ' ' << to_string(job.variant) << ' ' << to_string(job.bc)
          << " (" << job.mesh.n << ',' << job.mesh.m << "): ";
    const PhysicalParams params = with_speed_ratio(base, job.ratio);
    const ValidationReport report = validate(params, kernel);
    if (!report.ok()) {
      errors[i] = where.str() + report.failures();
      return;
    }
    try {
      const DiscreteGenerator genr = assemble_generator(
          params, kernel, job.bc, job.variant, GridOptions{job.mesh.n, job.mesh.m, options.tail_tol});
      ScanCell cell{job.ratio, job.variant, job.bc, job.mesh, std::nan(""), {}, fingerprint(genr)};
      if (job.mesh.n <= options.spectrum_max_n) cell.abscissa = spectrum(genr).abscissa;
      const Eigen::VectorXd u0 = options.initial == InitialData::Rough
                                     ? rough_initial_state(genr, options.seed)
                                     : default_initial_state(genr);
      const EnergyTrace trace = simulate(genr, u0, options.scheme);
      cell.fit = fit_decay(trace, options.window.t_hi > 0.0 ? options.window : default_window(trace));
      done[i] = std::move(cell);
    } catch (const std::exception& e) {
      errors[i] = where.str() + e.what();
    }
  });

  ScanResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (done[i]) result.cells.push_back(std::move(*done[i]));
    if (!errors[i].empty()) result.skipped.push_back(errors[i]);
  }
  return result;
}

bool ContrastDigest::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.passed; });
}

namespace {

// Cells of one (ratio, variant, bc) in mesh order.
std::vector<const ScanCell*> series(const ScanResult& scan, double ratio, CouplingVariant variant,
                                    BoundaryFamily bc) {
  std::vector<const ScanCell*> out;
  for (const auto& c : scan.cells)
    if (c.ratio == ratio && c.variant == variant && c.bc == bc) out.push_back(&c);
  std::sort(out.begin(), out.end(), [](auto x, auto y) { return x->mesh.n < y->mesh.n; });
  return out;
}

std::vector<double> abscissas(const std::vector<const ScanCell*>& cells) {
  std::vector<double> out;
  for (auto c : cells)
    if (std::isfinite(c->abscissa)) out.push_back(std::abs(c->abscissa));
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

ContrastDigest contrast_digest(const ScanResult& scan, double unequal, double equal) {
  ContrastDigest digest;
  std::vector<BoundaryFamily> bcs;
  for (const auto& c : scan.cells)
    if (std::find(bcs.begin(), bcs.end(), c.bc) == bcs.end()) bcs.push_back(c.bc);

  for (auto bc : bcs) {
    auto add = [&](std::string name, bool ok, std::string detail) {
      digest.verdicts.push_back({std::move(name), bc, ok, std::move(detail)});
    };
    const auto one = series(scan, unequal, CouplingVariant::CaseI, bc);
    const auto two = series(scan, unequal, CouplingVariant::CaseII, bc);

    const auto a1 = abscissas(one);
    if (a1.size() >= 2) {
      const auto [lo, hi] = std::minmax_element(a1.begin(), a1.end());
      add("case1_abscissa_uniform", *lo > 0.0 && *lo >= 0.8 * *hi,
          "|abscissa| in [" + fmt(*lo) + ", " + fmt(*hi) + "]");
    }
    const auto a2 = abscissas(two);
    if (a2.size() >= 2)
      add("case2_abscissa_shrinks", a2.back() <= 0.6 * a2.front(),
          "finest/coarsest |abscissa| = " + fmt(a2.back() / a2.front()));
    if (one.size() >= 2) {
      const double coarse = one[one.size() - 2]->fit.m_hat;
      const double fine = one.back()->fit.m_hat;
      add("case1_rate_stable", coarse > 0.0 && fine > 0.0 && std::abs(fine - coarse) <= 0.1 * coarse,
          "m_hat " + fmt(coarse) + " -> " + fmt(fine));
    }
    if (two.size() >= 2)
      add("case2_rate_decreases", two.back()->fit.m_hat <= 0.6 * two.front()->fit.m_hat,
          "m_hat " + fmt(two.front()->fit.m_hat) + " -> " + fmt(two.back()->fit.m_hat));

    std::vector<const ScanCell*> eq;
    for (auto v : {CouplingVariant::CaseI, CouplingVariant::CaseII})
      for (auto c : series(scan, equal, v, bc)) eq.push_back(c);
    if (!eq.empty()) {
      double worst = std::numeric_limits<double>::infinity();
      for (auto c : eq) worst = std::min(worst, c->fit.m_hat);
      add("equal_speeds_decay", worst > 0.0, "min m_hat " + fmt(worst));
    }
  }
  return digest;
}

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
  const auto old_precision = os.precision(17);
  os << "ratio,variant,bc,n,m,abscissa,m_hat,residual\n";
  for (const auto& c : scan.cells)
    os << c.ratio << ',' << to_string(c.variant) << ',' << to_string(c.bc) << ',' << c.mesh.n << ','
       << c.mesh.m << ',' << c.abscissa << ',' << c.fit.m_hat << ',' << c.fit.residual << '\n';
  os.precision(old_precision);
}

}  // namespace tvlab
