#ifndef TVLAB_DECAY_HPP
#define TVLAB_DECAY_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tvlab/discretization.hpp"
#include "tvlab/simulation.hpp"

namespace tvlab {

struct FitWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

/// Last half of [0, t_end] without the final 5%.
FitWindow default_window(double t_end);
/// Same rule with t_end pulled back to where E first drops below
/// kEnergyFloor * E(0); below that roundoff in the deflated and history
/// blocks dominates the trace.
inline constexpr double kEnergyFloor = 1e-24;
FitWindow default_window(const EnergyTrace& trace);

/// E(t) ~ M_hat E(t_0) exp(-m_hat t), fitted by least squares on ln E.
struct DecayFit {
  double m_hat = 0.0;
  /// Prefactor relative to the first sample of the trace.
  double M_hat = 0.0;
  FitWindow window;
  /// max |ln E - fitted line| over the window.
  double residual = 0.0;
  std::size_t samples = 0;
};

/// Throws std::invalid_argument for an empty or inverted window, fewer than
/// two samples in it, or a non-positive energy (decayed to roundoff; shrink
/// the window).
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& energies,
                   FitWindow window);
DecayFit fit_decay(const EnergyTrace& trace, FitWindow window);
DecayFit fit_decay(const EnergyTrace& trace);

struct Mesh {
  int n = 40;
  int m = 16;
};

enum class InitialData { Smooth, Rough };

struct ScanOptions {
  TimeScheme scheme{1e-2, 20.0};
  /// Defaults to default_window(trace) per cell.
  FitWindow window{};
  double tail_tol = 1e-8;
  /// Rough data (seeded) puts energy in every mode, so the fitted rate sees
  /// the slowest branch; smooth data only sees the low modes.
  InitialData initial = InitialData::Rough;
  std::uint64_t seed = 1;
  /// Cells with n above this get no eigensolve (abscissa NaN).
  int spectrum_max_n = 1 << 30;
  int threads = 1;
};

struct ScanCell {
  double ratio = 1.0;
  CouplingVariant variant = CouplingVariant::CaseI;
  BoundaryFamily bc = BoundaryFamily::FullDirichlet;
  Mesh mesh;
  double abscissa = 0.0;
  DecayFit fit;
  std::string fingerprint;
};

struct ScanResult {
  /// Ordered by (ratio, variant, bc, n, m) as given to the scan.
  std::vector<ScanCell> cells;
  /// One line per infeasible cell.
  std::vector<std::string> skipped;

  const ScanCell* find(double ratio, CouplingVariant variant, BoundaryFamily bc, Mesh mesh) const;
};

/// For every (ratio, variant, bc, mesh): set rho2 for the ratio, validate,
/// assemble, eigensolve, simulate and fit.  Cells run in parallel.
ScanResult wave_speed_scan(const PhysicalParams& base, const MemoryKernel& kernel,
                           const std::vector<double>& ratios,
                           const std::vector<CouplingVariant>& variants,
                           const std::vector<BoundaryFamily>& bcs, const std::vector<Mesh>& meshes,
                           const ScanOptions& options);

struct TrendVerdict {
  std::string name;
  BoundaryFamily bc = BoundaryFamily::FullDirichlet;
  bool passed = false;
  std::string detail;
};

struct ContrastDigest {
  std::vector<TrendVerdict> verdicts;

  bool passed() const;
};

/// Trend tests on a scan, per boundary family:
///   case1_abscissa_uniform  at `unequal`, min |abscissa| >= 0.8 max |abscissa|
///   case2_abscissa_shrinks  at `unequal`, finest |abscissa| <= 0.6 coarsest
///   case1_rate_stable       at `unequal`, m_hat > 0 on the two finest meshes, within 10%
///   case2_rate_decreases    at `unequal`, finest m_hat <= 0.6 coarsest
///   equal_speeds_decay      at `equal`, m_hat > 0 for both variants on every mesh
/// Tests whose cells are missing from the scan are not reported.
ContrastDigest contrast_digest(const ScanResult& scan, double unequal = 2.0, double equal = 1.0);

/// CSV `ratio,variant,bc,n,m,abscissa,m_hat,residual`.
void write_scan_csv(std::ostream& os, const ScanResult& scan);

}  // namespace tvlab

#endif  // TVLAB_DECAY_HPP
