#ifndef TVLAB_SPECTRAL_HPP
#define TVLAB_SPECTRAL_HPP

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tvlab/discretization.hpp"

namespace tvlab {

/// Dense operator A acting on a space with inner product <u, v> = u^T G v.
struct WeightedOperator {
  Eigen::MatrixXd A;
  Eigen::MatrixXd G;
};

/// The generator restricted to its admissible space, in the coordinates of
/// admissible_basis().
WeightedOperator weighted_operator(const DiscreteGenerator& genr);

/// The same operator split along the mirror symmetry x -> l - x.
///
/// Both boundary families and both coupling variants are invariant under the
/// reflection with a fixed parity per field, so the admissible space is the
/// G-orthogonal sum of an even and an odd sector, each invariant under A.
/// Falls back to a single block if the assembled matrices do not commute with
/// the reflection.
std::vector<WeightedOperator> weighted_sectors(const DiscreteGenerator& genr);

/// A expressed in a G-orthonormal frame: with G = L L^T, op = L^T A L^{-T},
/// stored as the diagonal blocks of a block-diagonal op.  Spectra and 2-norms
/// of op are the spectra and G-norms of A.
struct EnergyFrame {
  std::vector<Eigen::MatrixXd> blocks;

  Eigen::Index dim() const;
};

/// Throws std::domain_error if G is not positive definite.
EnergyFrame energy_frame(const WeightedOperator& wop);
EnergyFrame energy_frame(const std::vector<WeightedOperator>& sectors);
EnergyFrame energy_frame(const DiscreteGenerator& genr);

/// Largest dimension accepted by the dense eigensolver.
inline constexpr Eigen::Index kMaxDenseDim = 5000;

struct SpectrumReport {
  /// Sorted by decreasing real part.
  std::vector<std::complex<double>> eigenvalues;
  /// max Re(lambda).
  double abscissa = 0.0;
  /// min |Re(lambda)|, the distance of the spectrum to the imaginary axis.
  double min_imag_gap = 0.0;
  std::string fingerprint;
};

SpectrumReport spectrum(const EnergyFrame& frame);
SpectrumReport spectrum(const WeightedOperator& wop);
/// Throws std::length_error above kMaxDenseDim; reduce n or m.
SpectrumReport spectrum(const DiscreteGenerator& genr);

/// ||(i lambda - A)^{-1}||_G = 1 / sigma_min(i lambda - op).  Returns +inf
/// when i lambda is numerically an eigenvalue.
double resolvent_norm(const EnergyFrame& frame, double lambda);
double resolvent_norm(const WeightedOperator& wop, double lambda);
double resolvent_norm(const DiscreteGenerator& genr, double lambda);

struct ResolventSweep {
  std::vector<double> lambdas;
  std::vector<double> norms;
  double sup_norm = 0.0;
};

/// Evaluates resolvent_norm on a finite, sorted grid; the points are
/// distributed over `threads` workers.
ResolventSweep resolvent_sweep(const EnergyFrame& frame, const std::vector<double>& lambdas,
                               int threads = 1);

/// `count` log-spaced points in [lo, hi], preceded by 0 if include_zero.
std::vector<double> log_lambda_grid(double lo, double hi, int count, bool include_zero);

/// The default sweep: 0 and 50 log-spaced |lambda| in [0.1, 100].
std::vector<double> default_lambda_grid();

void write_spectrum_csv(std::ostream& os, const SpectrumReport& report);
void write_sweep_csv(std::ostream& os, const ResolventSweep& sweep);

}  // namespace tvlab

#endif  // TVLAB_SPECTRAL_HPP
