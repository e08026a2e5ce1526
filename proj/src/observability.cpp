#include "tvlab/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "json.hpp"
#include "tvlab/parallel.hpp"

namespace tvlab {

using cplx = std::complex<double>;

namespace {

// Values of f at the n + 2 nodes of (0, L).
Eigen::VectorXcd nodal(double L, int n, const std::function<double(double)>& f) {
  const double h = L / (n + 1);
  Eigen::VectorXcd out(n + 2);
  for (int i = 0; i <= n + 1; ++i) out(i) = f(i * h);
  return out;
}

// int over [alpha, beta] of |f_x|^2 + |g|^2 for nodal f, g on spacing h.
double piecewise_norm2(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g, double h,
                       double alpha, double beta) {
  const Eigen::Index cells = f.size() - 1;
  double total = 0.0;
  const auto first = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(alpha / h)));
  for (Eigen::Index i = first; i < cells; ++i) {
    const double x0 = i * h;
    if (x0 >= beta) break;
    const double t0 = std::clamp((alpha - x0) / h, 0.0, 1.0);
    const double t1 = std::clamp((beta - x0) / h, 0.0, 1.0);
    if (t1 <= t0) continue;
    const cplx slope = (f(i + 1) - f(i)) / h;
    const cplx d = g(i + 1) - g(i);
    total += std::norm(slope) * (t1 - t0) * h;
    total += h * (std::norm(g(i)) * (t1 - t0) +
                  std::real(std::conj(g(i)) * d) * (t1 * t1 - t0 * t0) +
                  std::norm(d) * (t1 * t1 * t1 - t0 * t0 * t0) / 3.0);
  }
  return total;
}

// Linear interpolation of nodal values at a.
cplx interpolate(const Eigen::VectorXcd& f, double h, double a) {
  const Eigen::Index last = f.size() - 1;
  const auto i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(a / h)), 0, last - 1);
  const double t = std::clamp(a / h - i, 0.0, 1.0);
  return (1.0 - t) * f(i) + t * f(i + 1);
}

Eigen::VectorXcd nodal_derivative(const Eigen::VectorXcd& u, double h) {
  const Eigen::Index last = u.size() - 1;
  Eigen::VectorXcd d(u.size());
  d(0) = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h);
  d(last) = (3.0 * u(last) - 4.0 * u(last - 1) + u(last - 2)) / (2.0 * h);
  for (Eigen::Index i = 1; i < last; ++i) d(i) = (u(i + 1) - u(i - 1)) / (2.0 * h);
  return d;
}

double sine_series(const std::vector<double>& c, double L, double x) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    s += c[j] * std::sin((j + 1) * std::numbers::pi * x / L);
  return s;
}

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

WaveResolventProblem wave_problem(double rho, double k, double L, double lambda, int n,
                                  const std::function<double(double)>& g1,
                                  const std::function<double(double)>& g2) {
  if (!(rho > 0.0 && k > 0.0 && L > 0.0)) throw std::invalid_argument("rho, k and L must be positive");
  if (n < 2) throw std::invalid_argument("need at least two interior nodes");
  WaveResolventProblem prob{rho, k, L, lambda, nodal(L, n, g1), nodal(L, n, g2)};
  prob.g1(0) = prob.g1(n + 1) = 0.0;
  return prob;
}

std::vector<double> eigenfrequencies(const WaveResolventProblem& prob) {
  const int n = prob.n();
  const double c = std::sqrt(prob.k / prob.rho);
  std::vector<double> out(n);
  for (int j = 1; j <= n; ++j)
    out[j - 1] = c * 2.0 / prob.h() * std::sin(j * std::numbers::pi / (2.0 * (n + 1)));
  return out;
}

double resonance_distance(const WaveResolventProblem& prob) {
  double best = std::numeric_limits<double>::infinity();
  for (double w : eigenfrequencies(prob)) best = std::min(best, std::abs(std::abs(prob.lambda) - w));
  return best;
}

WaveSolution solve_wave_resolvent(const WaveResolventProblem& prob) {
  const int n = prob.n();
  if (n < 2 || prob.g2.size() != prob.g1.size())
    throw std::invalid_argument("g1 and g2 must hold the same n + 2 >= 4 nodal values");
  const double dist = resonance_distance(prob);
  if (dist < 1e-10 * std::max(1.0, std::abs(prob.lambda)))
    throw std::domain_error("lambda = " + std::to_string(prob.lambda) +
                            " is a discrete eigenfrequency (distance " + std::to_string(dist) + ")");

  // Eliminating v = i lambda u - g1:
  //   -lambda^2 rho u - k u_xx = rho (g2 + i lambda g1).
  const double h = prob.h();
  const double off = -prob.k / (h * h);
  const double diag = -prob.lambda * prob.lambda * prob.rho + 2.0 * prob.k / (h * h);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, diag);
    if (i > 0) t.emplace_back(i, i - 1, off);
    if (i + 1 < n) t.emplace_back(i, i + 1, off);
  }
  Eigen::SparseMatrix<cplx> T(n, n);
  T.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu(T);
  if (lu.info() != Eigen::Success)
    throw std::domain_error("wave resolvent system is singular (distance to nearest eigenfrequency " +
                            std::to_string(dist) + ")");

  const cplx il(0.0, prob.lambda);
  const Eigen::VectorXcd rhs =
      prob.rho * (prob.g2.segment(1, n) + il * prob.g1.segment(1, n));
  WaveSolution sol{prob.L, h, Eigen::VectorXcd::Zero(n + 2), Eigen::VectorXcd::Zero(n + 2)};
  sol.u.segment(1, n) = lu.solve(rhs);
  sol.v = il * sol.u - prob.g1;
  return sol;
}

double interval_norm2(const WaveSolution& sol, double a1, double a2) {
  return piecewise_norm2(sol.u, sol.v, sol.h, a1, a2);
}

double point_norm2(const WaveSolution& sol, double a) {
  return std::norm(interpolate(nodal_derivative(sol.u, sol.h), sol.h, a)) +
         std::norm(interpolate(sol.v, sol.h, a));
}

double data_norm2(const WaveResolventProblem& prob) {
  return piecewise_norm2(prob.g1, prob.g2, prob.h(), 0.0, prob.L);
}

DataFamily seeded_family(std::uint64_t seed, int count, double lambda_max, int modes, double rho,
                         double k, double L) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, lambda_max);
  std::normal_distribution<double> normal;
  DataFamily family{rho, k, L, {}};
  for (int s = 0; s < count; ++s) {
    DataSample sample;
    sample.lambda = uniform(rng);
    for (int j = 1; j <= modes; ++j) sample.g1_coeffs.push_back(normal(rng) / j);
    for (int j = 1; j <= modes; ++j) sample.g2_coeffs.push_back(normal(rng) / j);
    family.samples.push_back(std::move(sample));
  }
  return family;
}

WaveResolventProblem sample_problem(const DataFamily& family, std::size_t i, int n, bool* perturbed) {
  const DataSample& s = family.samples.at(i);
  const double L = family.L;
  WaveResolventProblem prob = wave_problem(
      family.rho, family.k, L, s.lambda, n,
      [&](double x) { return sine_series(s.g1_coeffs, L, x); },
      [&](double x) { return sine_series(s.g2_coeffs, L, x); });
  const bool moved = resonance_distance(prob) < 1e-6;
  if (moved) prob.lambda += 1e-4;
  if (perturbed) *perturbed = moved;
  return prob;
}

ObservabilityReport measure_constants(const DataFamily& family, int n, double a1, double a2,
                                      double b1, double b2, int threads) {
  const double L = family.L;
  if (!(0.0 <= a1 && a1 < a2 && a2 <= L))
    throw std::invalid_argument("observation interval must satisfy 0 <= a1 < a2 <= L");
  if (!(0.0 <= b1 && b1 < b2 && b2 < L))
    throw std::invalid_argument("extension interval must satisfy 0 <= b1 < b2 < L");

  struct Partial {
    ObservabilitySample sample;
    double c0_prime = 0.0;
    double c1_prime = 0.0;
  };
  std::vector<Partial> parts(family.samples.size());
  parallel_for(parts.size(), threads, [&](std::size_t i) {
    Partial& p = parts[i];
    const WaveResolventProblem prob = sample_problem(family, i, n, &p.sample.perturbed);
    const WaveSolution sol = solve_wave_resolvent(prob);
    const double G = data_norm2(prob);
    const double inside = interval_norm2(sol, a1, a2);
    const double pa1 = point_norm2(sol, a1);
    const double pa2 = point_norm2(sol, a2);
    p.sample.lambda = prob.lambda;
    p.sample.ratio0 = safe_ratio(std::max(pa1, pa2), inside + G);
    p.sample.ratio1 = std::max(safe_ratio(inside, pa1 + G), safe_ratio(inside, pa2 + G));

    const double lam = interval_norm2(sol, b1, b2);
    const double pb2 = point_norm2(sol, b2);
    p.sample.ratio_ext = safe_ratio(interval_norm2(sol, 0.0, L), lam + G);
    p.c0_prime = safe_ratio(pb2, lam + G);
    p.c1_prime = std::max(safe_ratio(interval_norm2(sol, 0.0, b2), pb2 + G),
                          safe_ratio(interval_norm2(sol, b2, L), pb2 + G));
  });

  ObservabilityReport report;
  report.a1 = a1, report.a2 = a2, report.b1 = b1, report.b2 = b2;
  report.n = n;
  double c0p = 0.0, c1p = 0.0;
  for (const auto& p : parts) {
    report.C0_hat = std::max(report.C0_hat, p.sample.ratio0);
    report.C1_hat = std::max(report.C1_hat, p.sample.ratio1);
    report.C_ext_hat = std::max(report.C_ext_hat, p.sample.ratio_ext);
    c0p = std::max(c0p, p.c0_prime);
    c1p = std::max(c1p, p.c1_prime);
  }
  report.C_ext_bound = 2.0 * (c1p * c0p + c1p);
  for (auto& p : parts) {
    p.sample.margin0 = report.C0_hat - p.sample.ratio0;
    p.sample.margin1 = report.C1_hat - p.sample.ratio1;
    report.samples.push_back(p.sample);
  }
  return report;
}

void write_observability_json(std::ostream& os, const ObservabilityReport& report) {
  nlohmann::ordered_json j;
  j["a1"] = report.a1;
  j["a2"] = report.a2;
  j["b1"] = report.b1;
  j["b2"] = report.b2;
  j["n"] = report.n;
  j["C0_hat"] = report.C0_hat;
  j["C1_hat"] = report.C1_hat;
  j["C_ext_hat"] = report.C_ext_hat;
  j["C_ext_bound"] = report.C_ext_bound;
  j["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : report.samples)
    j["samples"].push_back({{"lambda", s.lambda},
                            {"margin0", s.margin0},
                            {"margin1", s.margin1},
                            {"perturbed", s.perturbed}});
  os << j.dump(2) << '\n';
}

}  // namespace tvlab
