#ifndef TVLAB_MODEL_HPP
#define TVLAB_MODEL_HPP

#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tvlab {

/// Coefficients of the thermo-viscoelastic Timoshenko beam.
///
/// rho1, rho2 are the mass densities of the transversal and rotational
/// motion, rho3 the heat capacity, k and b the shear and bending stiffness,
/// delta and gamma the conductivities of the type III heat flux, sigma the
/// thermal coupling and l the beam length.
struct PhysicalParams {
  double rho1 = 1.0;
  double rho2 = 2.0;
  double rho3 = 1.0;
  double k = 4.0;
  double b = 4.0;
  double delta = 0.25;
  double gamma = 1.0;
  double sigma = 5.0;
  double l = 1.0;
};

/// Relaxation kernel g of the memory term.
///
/// Only the exponential family g(s) = g0 exp(-a s) is built in.  The `None`
/// form switches memory off entirely (g == 0); it is not a valid kernel for
/// `validate` but is accepted by the assembly to build the memory-free
/// limit of the model.
struct MemoryKernel {
  enum class Form { Exponential, None };

  Form form = Form::Exponential;
  double g0 = 20.0;
  double a = 10.0;
  /// Decay certificate: k1 g(s) <= -g'(s).  The sharp value for the
  /// exponential family is k1 = a.
  double k1 = 10.0;

  static MemoryKernel exponential(double g0, double a) { return {Form::Exponential, g0, a, a}; }
  static MemoryKernel exponential(double g0, double a, double k1) {
    return {Form::Exponential, g0, a, k1};
  }
  static MemoryKernel none() { return {Form::None, 0.0, 1.0, 1.0}; }

  bool active() const { return form != Form::None; }

  double value(double s) const;
  double derivative(double s) const;
  /// Exact integral of g over [s0, s1]; s1 may be +infinity.
  double integral(double s0, double s1) const;
  /// Total mass b0 = integral of g over (0, infinity).
  double total_mass() const { return integral(0.0, std::numeric_limits<double>::infinity()); }
  /// Smallest s with integral of g over (s, infinity) <= tol * b0.
  double truncation_length(double tol) const;
};

enum class BoundaryFamily { FullDirichlet, NeumannDirichlet };

/// Where the thermal coupling acts: on the shear force (CaseI) or on the
/// bending moment next to the memory (CaseII).
enum class CouplingVariant { CaseI, CaseII };

std::string_view to_string(BoundaryFamily bc);
std::string_view to_string(CouplingVariant variant);
BoundaryFamily boundary_from_string(std::string_view tag);
CouplingVariant variant_from_string(std::string_view tag);

struct ValidationEntry {
  std::string condition;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  double b0 = 0.0;
  /// b - b0; only meaningful when ok().
  double beta = 0.0;

  bool ok() const;
  /// Human readable list of the failed entries.
  std::string failures() const;
};

/// Checks positivity of the coefficients and the kernel conditions
/// 0 < g(0) < inf, 0 < b0 < b and k1 g <= -g'.  Never throws.
ValidationReport validate(const PhysicalParams& params, const MemoryKernel& kernel);

/// Squared wave speeds (k / rho1, b / rho2).
std::pair<double, double> wave_speeds(const PhysicalParams& params);

/// Ratio (k / rho1) / (b / rho2); equals 1 for equal wave speeds.
double speed_ratio(const PhysicalParams& params);

/// Copy of `params` with rho2 adjusted so that speed_ratio == ratio.
PhysicalParams with_speed_ratio(PhysicalParams params, double ratio);

}  // namespace tvlab

#endif  // TVLAB_MODEL_HPP
