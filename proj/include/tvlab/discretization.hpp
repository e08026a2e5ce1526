#ifndef TVLAB_DISCRETIZATION_HPP
#define TVLAB_DISCRETIZATION_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "tvlab/model.hpp"

namespace tvlab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform grid on [0, l] with interior nodes x_i = i h, i = 1..n, and the
/// n + 1 cells (x_c, x_{c+1}) between consecutive nodes, c = 0..n.
struct SpatialGrid {
  int n = 0;
  double l = 0.0;
  double h = 0.0;

  int cells() const { return n + 1; }
  /// Position of interior node i (1-based, i = 1..n).
  double node(int i) const { return i * h; }
  /// Center of cell c (0-based, c = 0..n).
  double cell_center(int c) const { return (c + 0.5) * h; }
};

/// Truncated uniform grid on (0, s_max] for the history variable.
///
/// Cell j covers (s_{j-1}, s_j] with s_j = j ds; w_j is the exact kernel mass
/// of that cell, so sum(w) + tail_mass == b0 up to roundoff.
struct HistoryGrid {
  int m = 0;
  double s_max = 0.0;
  double ds = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  double tail_mass = 0.0;
  double b0 = 0.0;
};

struct GridOptions {
  int n = 40;
  int m = 16;
  double tail_tol = 1e-8;
};

/// Largest decay factor a*ds tolerated per history cell with the uniform rule.
inline constexpr double kMaxCellDecay = 2.5;

/// Builds both grids.  Throws std::invalid_argument for n < 4, m < 4,
/// tail_tol outside (0, 1), or an m too small to resolve the kernel over
/// [0, s_max]; the message then names the required m.
std::pair<SpatialGrid, HistoryGrid> build_grids(const PhysicalParams& params,
                                                const MemoryKernel& kernel,
                                                const GridOptions& options);

enum class Field { phi, Phi, psi, Psi, theta, Theta, eta };

/// Block layout of the flat state vector
/// [phi | Phi | psi | Psi | theta | Theta | eta_1 ... eta_m].
///
/// phi and Phi live on the n + 1 cell centers, all other blocks on the n
/// interior nodes; eta_j is the history at s_j.  The inflow value
/// eta(s = 0) = 0 is not stored.
struct StateLayout {
  int n = 0;
  int m = 0;

  int cells() const { return n + 1; }
  Eigen::Index size() const { return 2 * cells() + 4 * n + n * m; }
  Eigen::Index offset(Field f) const;
  Eigen::Index length(Field f) const;
  /// Offset of eta_j, j = 1..m.
  Eigen::Index eta_offset(int j) const { return offset(Field::eta) + (j - 1) * n; }
};

template <typename Derived>
auto segment(const StateLayout& layout, Eigen::MatrixBase<Derived>& u, Field f) {
  return u.segment(layout.offset(f), layout.length(f));
}

template <typename Derived>
auto segment(const StateLayout& layout, const Eigen::MatrixBase<Derived>& u, Field f) {
  return u.segment(layout.offset(f), layout.length(f));
}

template <typename Derived>
auto eta_segment(const StateLayout& layout, const Eigen::MatrixBase<Derived>& u, int j) {
  return u.segment(layout.eta_offset(j), layout.n);
}

/// Discrete generator A_h of U_t = A_h U together with the Gram matrix G_h of
/// the energy norm, so that energy(U) = U^T G_h U / 2.
///
/// For the mixed boundary family the mean of phi and Phi is deflated: A maps
/// the two constant modes to zero and the admissible space is the mean-zero
/// subspace, which A leaves invariant and which is G-orthogonal to the
/// constant modes.
struct DiscreteGenerator {
  PhysicalParams params;
  MemoryKernel kernel;
  BoundaryFamily bc = BoundaryFamily::FullDirichlet;
  CouplingVariant variant = CouplingVariant::CaseI;
  SpatialGrid xgrid;
  HistoryGrid sgrid;
  StateLayout layout;
  double beta = 0.0;
  /// Unique per assembly; copies share it.
  std::uint64_t id = 0;

  SparseMatrix A;
  SparseMatrix G;
  /// Cell-to-node difference used by all derivative terms: (n + 1) x n.
  SparseMatrix D;

  Eigen::Index dim() const { return layout.size(); }
  bool deflated() const { return bc == BoundaryFamily::NeumannDirichlet; }
};

/// Assembles A_h and G_h.  Coefficients may be zero (decoupled and
/// conservative limits, k = 0 decouples phi) but not negative; masses and beta must be positive.
DiscreteGenerator assemble_generator(const PhysicalParams& params, const MemoryKernel& kernel,
                                     BoundaryFamily bc, CouplingVariant variant,
                                     const SpatialGrid& xgrid, const HistoryGrid& sgrid);

DiscreteGenerator assemble_generator(const PhysicalParams& params, const MemoryKernel& kernel,
                                     BoundaryFamily bc, CouplingVariant variant,
                                     const GridOptions& options);

Eigen::VectorXd apply(const DiscreteGenerator& genr, const Eigen::VectorXd& u);

/// U^T G V.
double inner(const DiscreteGenerator& genr, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Half the squared energy norm.
double energy(const DiscreteGenerator& genr, const Eigen::VectorXd& u);

/// Right side of the energy balance evaluated from its closed form:
///   -gamma |D Theta|^2
///   - (1 / 2ds) sum_j (w_j - w_{j+1}) |D eta_j|^2       (kernel decay, w_{m+1} = 0)
///   - (1 / 2ds) sum_j w_j |D (eta_j - eta_{j-1})|^2     (upwind defect, eta_0 = 0)
/// with the h-weighted discrete L2 norm.  Equals U^T G A U for admissible U.
double dissipation(const DiscreteGenerator& genr, const Eigen::VectorXd& u);

/// Projection onto the admissible space (mean-zero phi, Phi for the mixed
/// family, identity otherwise).
Eigen::VectorXd project_admissible(const DiscreteGenerator& genr, Eigen::VectorXd u);

/// Orthonormal basis (Euclidean) of the admissible space; identity for the
/// Dirichlet family.
Eigen::MatrixXd admissible_basis(const DiscreteGenerator& genr);

Eigen::VectorXd sample_nodes(const SpatialGrid& grid, const std::function<double(double)>& f);
Eigen::VectorXd sample_cells(const SpatialGrid& grid, const std::function<double(double)>& f);

/// Writes "row col value" lines (0-based, 17 significant digits).
void write_triplets(std::ostream& os, const SparseMatrix& matrix);

}  // namespace tvlab

#endif  // TVLAB_DISCRETIZATION_HPP
