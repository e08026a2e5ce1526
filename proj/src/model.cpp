#include "tvlab/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tvlab {

double MemoryKernel::value(double s) const {
  if (form == Form::None) return 0.0;
  return g0 * std::exp(-a * s);
}

double MemoryKernel::derivative(double s) const {
  if (form == Form::None) return 0.0;
  return -a * g0 * std::exp(-a * s);
}

double MemoryKernel::integral(double s0, double s1) const {
  if (form == Form::None) return 0.0;
  const double upper = std::isinf(s1) ? 0.0 : std::exp(-a * s1);
  return g0 / a * (std::exp(-a * s0) - upper);
}

double MemoryKernel::truncation_length(double tol) const {
  if (form == Form::None) return 0.0;
  return -std::log(tol) / a;
}

std::string_view to_string(BoundaryFamily bc) {
  return bc == BoundaryFamily::FullDirichlet ? "dirichlet" : "mixed";
}

std::string_view to_string(CouplingVariant variant) {
  return variant == CouplingVariant::CaseI ? "case1" : "case2";
}

BoundaryFamily boundary_from_string(std::string_view tag) {
  if (tag == "dirichlet") return BoundaryFamily::FullDirichlet;
  if (tag == "mixed") return BoundaryFamily::NeumannDirichlet;
  throw std::invalid_argument("unknown boundary family '" + std::string(tag) + "'");
}

CouplingVariant variant_from_string(std::string_view tag) {
  if (tag == "case1") return CouplingVariant::CaseI;
  if (tag == "case2") return CouplingVariant::CaseII;
  throw std::invalid_argument("unknown coupling variant '" + std::string(tag) + "'");
}

bool ValidationReport::ok() const {
  for (const auto& e : entries)
    if (!e.passed) return false;
  return true;
}

std::string ValidationReport::failures() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& e : entries) {
    if (e.passed) continue;
    if (!first) os << "; ";
    os << e.condition << ": " << e.detail;
    first = false;
  }
  return os.str();
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

ValidationReport validate(const PhysicalParams& params, const MemoryKernel& kernel) {
  ValidationReport report;
  auto add = [&](std::string condition, bool passed, std::string detail) {
    report.entries.push_back({std::move(condition), passed, std::move(detail)});
  };

  const std::pair<const char*, double> coefficients[] = {
      {"rho1", params.rho1}, {"rho2", params.rho2},   {"rho3", params.rho3},
      {"k", params.k},       {"b", params.b},         {"delta", params.delta},
      {"gamma", params.gamma}, {"sigma", params.sigma}, {"l", params.l}};
  for (const auto& [name, value] : coefficients) {
    const bool ok = std::isfinite(value) && value > 0.0;
    add(std::string(name) + " > 0", ok,
        ok ? fmt(value) : std::string(name) + " must be positive (got " + fmt(value) + ")");
  }

  if (kernel.form != MemoryKernel::Form::Exponential) {
    add("kernel form", false, "memory kernel must be an exponential g0*exp(-a*s)");
    return report;
  }

  const bool g0_ok = std::isfinite(kernel.g0) && kernel.g0 > 0.0;
  add("0 < g(0) < inf", g0_ok, "g(0) = " + fmt(kernel.g0));
  const bool a_ok = std::isfinite(kernel.a) && kernel.a > 0.0;
  add("a > 0", a_ok, "a = " + fmt(kernel.a));
  if (!g0_ok || !a_ok) return report;

  report.b0 = kernel.total_mass();
  const bool mass_ok = report.b0 < params.b;
  add("0 < b0 < b", mass_ok,
      "b0 = int g = " + fmt(report.b0) + (mass_ok ? " < b = " : " >= b = ") + fmt(params.b));

  // -g' = a g for the exponential family, so k1 g <= -g' iff k1 <= a.
  const bool k1_ok = std::isfinite(kernel.k1) && kernel.k1 > 0.0 && kernel.k1 <= kernel.a;
  add("0 < k1 g <= -g'", k1_ok,
      k1_ok ? "k1 = " + fmt(kernel.k1) + " <= a = " + fmt(kernel.a)
            : "k1 = " + fmt(kernel.k1) + " violates k1 g <= -g' (requires 0 < k1 <= a = " +
                  fmt(kernel.a) + ")");

  if (report.ok()) report.beta = params.b - report.b0;
  return report;
}

std::pair<double, double> wave_speeds(const PhysicalParams& params) {
  return {params.k / params.rho1, params.b / params.rho2};
}

double speed_ratio(const PhysicalParams& params) {
  const auto [shear, bending] = wave_speeds(params);
  return shear / bending;
}

PhysicalParams with_speed_ratio(PhysicalParams params, double ratio) {
  params.rho2 = ratio * params.b * params.rho1 / params.k;
  return params;
}

}  // namespace tvlab
