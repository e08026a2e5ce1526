#ifndef TVLAB_SIMULATION_HPP
#define TVLAB_SIMULATION_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "tvlab/discretization.hpp"

namespace tvlab {

/// Linear evolution U_t = A U with energy U^T G U / 2 and a closed-form
/// dissipation functional.  A DiscreteGenerator is one; the scalar harness
/// used by the tests is another.
struct EvolutionSystem {
  SparseMatrix A;
  SparseMatrix G;
  std::function<double(const Eigen::VectorXd&)> dissipation;

  double energy(const Eigen::VectorXd& u) const { return 0.5 * u.dot(G * u); }
};

EvolutionSystem evolution_system(const DiscreteGenerator& genr);

/// u_t = a u with G = 1, so that dE/dt = a u^2.
EvolutionSystem scalar_system(double a);

struct TimeScheme {
  double dt = 1e-2;
  double t_end = 20.0;
};

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;
  /// Dissipation functional at the sampled states.
  std::vector<double> dissipation;
  /// Dissipation at the step midpoints (u_k + u_{k+1}) / 2; one per step.
  std::vector<double> midpoint_dissipation;
  Eigen::VectorXd final_state;

  std::size_t size() const { return times.size(); }
};

/// Implicit midpoint (Crank-Nicolson) propagator for a fixed step.
///
/// Factorizes I - dt/2 A once; every step solves
/// (I - dt/2 A) u+ = (I + dt/2 A) u.
class MidpointStepper {
 public:
  MidpointStepper(const SparseMatrix& A, double dt);

  Eigen::VectorXd step(const Eigen::VectorXd& u) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  SparseMatrix dt_A_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

/// One midpoint step.  Factorizations are cached per (generator, dt) for the
/// calling thread.
Eigen::VectorXd step(const DiscreteGenerator& genr, const Eigen::VectorXd& u, double dt);

/// Integrates from u0 and samples energy and dissipation after every step.
/// Throws std::runtime_error naming the step index if the state stops being
/// finite.
EnergyTrace simulate(const EvolutionSystem& system, const Eigen::VectorXd& u0,
                     const TimeScheme& scheme);

EnergyTrace simulate(const DiscreteGenerator& genr, const Eigen::VectorXd& u0,
                     const TimeScheme& scheme);

/// max_k |(E_{k+1} - E_k)/dt - D(midpoint_k)| / max(E_0, 1).
/// Zero for traces with fewer than three samples.
double dissipation_residual(const EnergyTrace& trace);

/// Low-mode initial state: phi0 = sin(pi x / l) (cos for the mixed family),
/// psi0 = sin(2 pi x / l) / 2, theta0 = sin(pi x / l) / 2, zero velocities and
/// history, scaled to unit energy norm (energy 1/2).
Eigen::VectorXd default_initial_state(const DiscreteGenerator& genr);

/// Seeded state with independent standard normal entries in every block,
/// projected to the admissible space and scaled to unit energy norm.
Eigen::VectorXd rough_initial_state(const DiscreteGenerator& genr, std::uint64_t seed);

/// CSV with header `t,energy,dissipation`.
void write_trace_csv(std::ostream& os, const EnergyTrace& trace);

}  // namespace tvlab

#endif  // TVLAB_SIMULATION_HPP
