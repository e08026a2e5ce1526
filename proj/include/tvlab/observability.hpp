#ifndef TVLAB_OBSERVABILITY_HPP
#define TVLAB_OBSERVABILITY_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace tvlab {

/// i lambda u - v = g1,  i lambda rho v - k u_xx = rho g2 on (0, L) with
/// u(0) = u(L) = 0, discretized by central differences on n interior nodes
/// x_i = i h, h = L / (n + 1).  g1 and g2 hold the values at all n + 2 nodes;
/// g1 must vanish at both ends.
struct WaveResolventProblem {
  double rho = 1.0;
  double k = 1.0;
  double L = 3.14159265358979323846;
  double lambda = 0.0;
  Eigen::VectorXcd g1;
  Eigen::VectorXcd g2;

  int n() const { return static_cast<int>(g1.size()) - 2; }
  double h() const { return L / (n() + 1); }
};

/// Problem with g1, g2 sampled from functions on n interior nodes.
WaveResolventProblem wave_problem(double rho, double k, double L, double lambda, int n,
                                  const std::function<double(double)>& g1,
                                  const std::function<double(double)>& g2);

/// Discrete eigenfrequencies sqrt(k / rho) (2 / h) sin(j pi h / 2L), j = 1..n.
std::vector<double> eigenfrequencies(const WaveResolventProblem& prob);
/// Distance from |lambda| to the nearest discrete eigenfrequency.
double resonance_distance(const WaveResolventProblem& prob);

/// Nodal values (u, v) including the boundary nodes.
struct WaveSolution {
  double L = 0.0;
  double h = 0.0;
  Eigen::VectorXcd u;
  Eigen::VectorXcd v;
};

/// Throws std::domain_error naming the distance to the nearest
/// eigenfrequency when the shifted system is numerically singular.
WaveSolution solve_wave_resolvent(const WaveResolventProblem& prob);

/// int_{a1}^{a2} |u_x|^2 + |v|^2 for the piecewise linear interpolants
/// (integrated exactly, so the norm is additive over subintervals).
double interval_norm2(const WaveSolution& sol, double a1, double a2);
/// |u_x(a)|^2 + |v(a)|^2, with u_x interpolated from second-order nodal
/// derivatives.
double point_norm2(const WaveSolution& sol, double a);
/// ||G||_H^2 = ||g1_x||^2 + ||g2||^2, same quadrature.
double data_norm2(const WaveResolventProblem& prob);

/// Seeded family of band-limited data: g1, g2 are sums of the first `modes`
/// sine modes of (0, L) with N(0, 1/j^2) coefficients, lambda uniform in
/// [0, lambda_max].  Coefficients, not grid values, so the same family can be
/// solved on any mesh.
struct DataSample {
  double lambda = 0.0;
  std::vector<double> g1_coeffs;
  std::vector<double> g2_coeffs;
};

struct DataFamily {
  double rho = 1.0;
  double k = 1.0;
  double L = 3.14159265358979323846;
  std::vector<DataSample> samples;
};

DataFamily seeded_family(std::uint64_t seed, int count = 64, double lambda_max = 20.0,
                         int modes = 5, double rho = 1.0, double k = 1.0,
                         double L = 3.14159265358979323846);

/// Sample i on n interior nodes.  lambda within 1e-6 of a discrete
/// eigenfrequency is moved by 1e-4 and `perturbed` set.
WaveResolventProblem sample_problem(const DataFamily& family, std::size_t i, int n,
                                    bool* perturbed = nullptr);

struct ObservabilitySample {
  double lambda = 0.0;
  bool perturbed = false;
  /// max_j (|u_x(a_j)|^2 + |v(a_j)|^2) / (||V||^2_{a1,a2} + ||G||^2)
  double ratio0 = 0.0;
  /// max_j ||V||^2_{a1,a2} / (|u_x(a_j)|^2 + |v(a_j)|^2 + ||G||^2)
  double ratio1 = 0.0;
  /// ||V||^2_H / (||V||^2_{b1,b2} + ||G||^2)
  double ratio_ext = 0.0;
  double margin0 = 0.0;
  double margin1 = 0.0;
};

struct ObservabilityReport {
  double a1 = 0.0, a2 = 0.0, b1 = 0.0, b2 = 0.0;
  int n = 0;
  /// Smallest constants for which every sample satisfies the point and
  /// interval inequalities on (a1, a2).
  double C0_hat = 0.0;
  double C1_hat = 0.0;
  /// Smallest C with ||V||^2_H <= C (Lambda + ||G||^2), Lambda = ||V||^2_{b1,b2}.
  double C_ext_hat = 0.0;
  /// 2 (C1' C0' + C1') from the point b2 and the intervals (b1, b2), (0, b2),
  /// (b2, L): the constant the extension argument produces.
  double C_ext_bound = 0.0;
  std::vector<ObservabilitySample> samples;
};

/// Requires 0 <= a1 < a2 <= L and 0 <= b1 < b2 < L.  Samples are solved in
/// parallel and aggregated in order.
ObservabilityReport measure_constants(const DataFamily& family, int n, double a1, double a2,
                                      double b1, double b2, int threads = 1);

/// {"a1","a2","b1","b2","C0_hat","C1_hat","samples":[{"lambda","margin0","margin1"}]}
/// plus the extension constants.
void write_observability_json(std::ostream& os, const ObservabilityReport& report);

}  // namespace tvlab

#endif  // TVLAB_OBSERVABILITY_HPP
