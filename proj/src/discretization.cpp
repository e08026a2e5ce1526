#include "tvlab/discretization.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

namespace tvlab {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& out, Eigen::Index row0, Eigen::Index col0, const SparseMatrix& block,
               double scale) {
  if (scale == 0.0) return;
  for (int k = 0; k < block.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(block, k); it; ++it)
      out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

void add_identity(Triplets& out, Eigen::Index row0, Eigen::Index col0, Eigen::Index size,
                  double scale) {
  if (scale == 0.0) return;
  for (Eigen::Index i = 0; i < size; ++i) out.emplace_back(row0 + i, col0 + i, scale);
}

void add_dense(Triplets& out, Eigen::Index row0, Eigen::Index col0, const Eigen::MatrixXd& block) {
  for (Eigen::Index j = 0; j < block.cols(); ++j)
    for (Eigen::Index i = 0; i < block.rows(); ++i)
      if (block(i, j) != 0.0) out.emplace_back(row0 + i, col0 + j, block(i, j));
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// (Du)_c = (u_{c+1} - u_c) / h on cells c = 0..n, with u_0 = u_{n+1} = 0.
SparseMatrix node_to_cell_difference(int n, double h) {
  Triplets t;
  for (int c = 0; c <= n; ++c) {
    if (c >= 1) t.emplace_back(c, c - 1, -1.0 / h);
    if (c + 1 <= n) t.emplace_back(c, c, 1.0 / h);
  }
  return from_triplets(n + 1, n, t);
}

// Centered node-to-node difference with homogeneous Dirichlet values.
SparseMatrix centered_difference(int n, double h) {
  Triplets t;
  for (int i = 0; i < n; ++i) {
    if (i >= 1) t.emplace_back(i, i - 1, -0.5 / h);
    if (i + 1 < n) t.emplace_back(i, i + 1, 0.5 / h);
  }
  return from_triplets(n, n, t);
}

// Shear strain S = phi_x + psi evaluated at the shear points.
//
// Dirichlet: shear points are all nodes 0..n+1; at the end nodes phi_x uses
// the antisymmetric ghost cell (phi = 0 on the boundary) and carries the
// trapezoidal weight h/2.  Mixed: phi_x = 0 and psi = 0 at the ends, so the
// shear vanishes there and only interior nodes are kept.
struct ShearOperator {
  SparseMatrix from_phi;
  SparseMatrix from_psi;
  Eigen::VectorXd weights;
};

ShearOperator shear_operator(int n, double h, BoundaryFamily bc) {
  ShearOperator op;
  Triplets tphi, tpsi;
  if (bc == BoundaryFamily::FullDirichlet) {
    const int points = n + 2;
    op.weights = Eigen::VectorXd::Constant(points, h);
    op.weights(0) = op.weights(points - 1) = 0.5 * h;
    tphi.emplace_back(0, 0, 2.0 / h);
    tphi.emplace_back(n + 1, n, -2.0 / h);
    for (int i = 1; i <= n; ++i) {
      tphi.emplace_back(i, i, 1.0 / h);
      tphi.emplace_back(i, i - 1, -1.0 / h);
      tpsi.emplace_back(i, i - 1, 1.0);
    }
    op.from_phi = from_triplets(points, n + 1, tphi);
    op.from_psi = from_triplets(points, n, tpsi);
  } else {
    op.weights = Eigen::VectorXd::Constant(n, h);
    for (int i = 0; i < n; ++i) {
      tphi.emplace_back(i, i + 1, 1.0 / h);
      tphi.emplace_back(i, i, -1.0 / h);
      tpsi.emplace_back(i, i, 1.0);
    }
    op.from_phi = from_triplets(n, n + 1, tphi);
    op.from_psi = from_triplets(n, n, tpsi);
  }
  return op;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

std::pair<SpatialGrid, HistoryGrid> build_grids(const PhysicalParams& params,
                                                const MemoryKernel& kernel,
                                                const GridOptions& options) {
  require(options.n >= 4, "spatial grid needs n >= 4 (got " + std::to_string(options.n) + ")");
  require(params.l > 0.0, "beam length l must be positive");

  SpatialGrid x;
  x.n = options.n;
  x.l = params.l;
  x.h = params.l / (options.n + 1);

  HistoryGrid s;
  if (!kernel.active()) return {x, s};

  require(options.m >= 4, "history grid needs m >= 4 (got " + std::to_string(options.m) + ")");
  require(options.tail_tol > 0.0 && options.tail_tol < 1.0, "tail_tol must lie in (0, 1)");

  s.b0 = kernel.total_mass();
  s.s_max = kernel.truncation_length(options.tail_tol);
  const double decay_per_cell = kernel.a * s.s_max / options.m;
  if (decay_per_cell > kMaxCellDecay) {
    const int required = static_cast<int>(std::ceil(kernel.a * s.s_max / kMaxCellDecay));
    throw std::invalid_argument("history grid m = " + std::to_string(options.m) +
                                " is too coarse for tail_tol; the uniform rule requires m >= " +
                                std::to_string(required));
  }
  s.m = options.m;
  s.ds = s.s_max / s.m;
  s.nodes.resize(s.m);
  s.weights.resize(s.m);
  for (int j = 1; j <= s.m; ++j) {
    s.nodes[j - 1] = j * s.ds;
    s.weights[j - 1] = kernel.integral((j - 1) * s.ds, j * s.ds);
  }
  s.tail_mass = kernel.integral(s.s_max, std::numeric_limits<double>::infinity());
  return {x, s};
}

Eigen::Index StateLayout::offset(Field f) const {
  const Eigen::Index c = cells();
  switch (f) {
    case Field::phi: return 0;
    case Field::Phi: return c;
    case Field::psi: return 2 * c;
    case Field::Psi: return 2 * c + n;
    case Field::theta: return 2 * c + 2 * n;
    case Field::Theta: return 2 * c + 3 * n;
    case Field::eta: return 2 * c + 4 * n;
  }
  return 0;
}

Eigen::Index StateLayout::length(Field f) const {
  switch (f) {
    case Field::phi:
    case Field::Phi: return cells();
    case Field::eta: return static_cast<Eigen::Index>(n) * m;
    default: return n;
  }
}

DiscreteGenerator assemble_generator(const PhysicalParams& p, const MemoryKernel& kernel,
                                     BoundaryFamily bc, CouplingVariant variant,
                                     const SpatialGrid& xgrid, const HistoryGrid& sgrid) {
  require(p.rho1 > 0 && p.rho2 > 0 && p.rho3 > 0, "densities rho1, rho2, rho3 must be positive");
  require(p.k >= 0, "k must be non-negative");
  require(p.b > 0, "b must be positive");
  require(p.delta >= 0 && p.gamma >= 0 && p.sigma >= 0,
          "delta, gamma, sigma must be non-negative");
  require(xgrid.n >= 4 && std::abs(xgrid.h * (xgrid.n + 1) - p.l) <= 1e-12 * p.l,
          "spatial grid does not match the beam length");
  require(kernel.active() == (sgrid.m > 0), "history grid does not match the memory kernel");

  static std::atomic<std::uint64_t> next_id{1};
  DiscreteGenerator g;
  g.id = next_id++;
  g.params = p;
  g.kernel = kernel;
  g.bc = bc;
  g.variant = variant;
  g.xgrid = xgrid;
  g.sgrid = sgrid;
  g.layout = StateLayout{xgrid.n, sgrid.m};
  g.beta = p.b - (kernel.active() ? kernel.total_mass() : 0.0);
  require(g.beta > 0, "beta = b - b0 must be positive");

  const int n = xgrid.n;
  const int m = sgrid.m;
  const int nc = n + 1;
  const double h = xgrid.h;
  const StateLayout& L = g.layout;
  const auto off = [&](Field f) { return L.offset(f); };

  g.D = node_to_cell_difference(n, h);
  const SparseMatrix DtD = SparseMatrix(g.D.transpose()) * g.D;
  const ShearOperator shear = shear_operator(n, h, bc);
  const auto W = shear.weights.asDiagonal();

  // Potential energy Hessian blocks (h-weighted).
  const SparseMatrix K_phiphi = p.k * SparseMatrix(shear.from_phi.transpose() * W * shear.from_phi);
  const SparseMatrix K_phipsi = p.k * SparseMatrix(shear.from_phi.transpose() * W * shear.from_psi);
  const SparseMatrix K_psiphi = K_phipsi.transpose();
  const SparseMatrix K_psipsi =
      p.k * SparseMatrix(shear.from_psi.transpose() * W * shear.from_psi) + g.beta * h * DtD;

  // Gram matrix.
  Triplets gt;
  add_block(gt, off(Field::phi), off(Field::phi), K_phiphi, 1.0);
  add_block(gt, off(Field::phi), off(Field::psi), K_phipsi, 1.0);
  add_block(gt, off(Field::psi), off(Field::phi), K_psiphi, 1.0);
  add_block(gt, off(Field::psi), off(Field::psi), K_psipsi, 1.0);
  add_block(gt, off(Field::theta), off(Field::theta), DtD, p.delta * h);
  for (int j = 1; j <= m; ++j)
    add_block(gt, L.eta_offset(j), L.eta_offset(j), DtD, sgrid.weights[j - 1] * h);
  add_identity(gt, off(Field::Phi), off(Field::Phi), nc, p.rho1 * h);
  add_identity(gt, off(Field::Psi), off(Field::Psi), n, p.rho2 * h);
  add_identity(gt, off(Field::Theta), off(Field::Theta), n, p.rho3 * h);
  if (g.deflated()) {
    // Norm for the constant mode of phi, which the shear energy does not see.
    const double c = p.k * h / (p.l * p.l);
    add_dense(gt, off(Field::phi), off(Field::phi), Eigen::MatrixXd::Constant(nc, nc, c));
  }
  g.G = from_triplets(L.size(), L.size(), gt);

  // Generator.
  Triplets at;
  if (g.deflated()) {
    const Eigen::MatrixXd P =
        Eigen::MatrixXd::Identity(nc, nc) - Eigen::MatrixXd::Constant(nc, nc, 1.0 / nc);
    add_dense(at, off(Field::phi), off(Field::Phi), P);
  } else {
    add_identity(at, off(Field::phi), off(Field::Phi), nc, 1.0);
  }
  add_identity(at, off(Field::psi), off(Field::Psi), n, 1.0);
  add_identity(at, off(Field::theta), off(Field::Theta), n, 1.0);

  // rho1 h Phi_t = -K_phi q + coupling
  add_block(at, off(Field::Phi), off(Field::phi), K_phiphi, -1.0 / (p.rho1 * h));
  add_block(at, off(Field::Phi), off(Field::psi), K_phipsi, -1.0 / (p.rho1 * h));
  // rho2 h Psi_t = -K_psi q - sum_j K_eta_j eta_j + coupling
  add_block(at, off(Field::Psi), off(Field::phi), K_psiphi, -1.0 / (p.rho2 * h));
  add_block(at, off(Field::Psi), off(Field::psi), K_psipsi, -1.0 / (p.rho2 * h));
  for (int j = 1; j <= m; ++j)
    add_block(at, off(Field::Psi), L.eta_offset(j), DtD, -sgrid.weights[j - 1] / p.rho2);
  // rho3 h Theta_t = -delta h D^T D theta - gamma h D^T D Theta + coupling
  add_block(at, off(Field::Theta), off(Field::theta), DtD, -p.delta / p.rho3);
  add_block(at, off(Field::Theta), off(Field::Theta), DtD, -p.gamma / p.rho3);

  if (variant == CouplingVariant::CaseI) {
    // Thermal coupling on the shear force: sigma Theta_x in the Phi row,
    // -sigma Theta in the Psi row, sigma (Phi_x + Psi) in the Theta row.
    add_block(at, off(Field::Phi), off(Field::Theta), g.D, -p.sigma / p.rho1);
    add_block(at, off(Field::Theta), off(Field::Phi), SparseMatrix(g.D.transpose()),
              p.sigma / p.rho3);
    add_identity(at, off(Field::Psi), off(Field::Theta), n, p.sigma / p.rho2);
    add_identity(at, off(Field::Theta), off(Field::Psi), n, -p.sigma / p.rho3);
  } else {
    // Thermal coupling on the bending moment: sigma Theta_x in the Psi row,
    // sigma Psi_x in the Theta row.
    const SparseMatrix Dc = centered_difference(n, h);
    add_block(at, off(Field::Psi), off(Field::Theta), Dc, -p.sigma / p.rho2);
    add_block(at, off(Field::Theta), off(Field::Psi), Dc, -p.sigma / p.rho3);
  }

  // History transport eta_t = Psi - eta_s, first-order upwind with eta(0) = 0.
  for (int j = 1; j <= m; ++j) {
    add_identity(at, L.eta_offset(j), off(Field::Psi), n, 1.0);
    add_identity(at, L.eta_offset(j), L.eta_offset(j), n, -1.0 / sgrid.ds);
    if (j > 1) add_identity(at, L.eta_offset(j), L.eta_offset(j - 1), n, 1.0 / sgrid.ds);
  }
  g.A = from_triplets(L.size(), L.size(), at);
  return g;
}

DiscreteGenerator assemble_generator(const PhysicalParams& params, const MemoryKernel& kernel,
                                     BoundaryFamily bc, CouplingVariant variant,
                                     const GridOptions& options) {
  const auto [x, s] = build_grids(params, kernel, options);
  return assemble_generator(params, kernel, bc, variant, x, s);
}

namespace {

void check_dim(const DiscreteGenerator& genr, const Eigen::VectorXd& u) {
  if (u.size() != genr.dim())
    throw std::invalid_argument("state dimension " + std::to_string(u.size()) +
                                " does not match generator dimension " +
                                std::to_string(genr.dim()));
}

}  // namespace

Eigen::VectorXd apply(const DiscreteGenerator& genr, const Eigen::VectorXd& u) {
  check_dim(genr, u);
  return genr.A * u;
}

double inner(const DiscreteGenerator& genr, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  check_dim(genr, u);
  check_dim(genr, v);
  return u.dot(genr.G * v);
}

double energy(const DiscreteGenerator& genr, const Eigen::VectorXd& u) {
  return 0.5 * inner(genr, u, u);
}

double dissipation(const DiscreteGenerator& genr, const Eigen::VectorXd& u) {
  check_dim(genr, u);
  const StateLayout& L = genr.layout;
  const double h = genr.xgrid.h;
  const auto sq = [&](const Eigen::VectorXd& v) { return h * (genr.D * v).squaredNorm(); };

  double d = -genr.params.gamma * sq(segment(L, u, Field::Theta));
  const auto& w = genr.sgrid.weights;
  const int m = genr.sgrid.m;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(L.n);
  for (int j = 1; j <= m; ++j) {
    const Eigen::VectorXd eta = eta_segment(L, u, j);
    const double w_next = j < m ? w[j] : 0.0;
    d -= (w[j - 1] - w_next) * sq(eta) / (2.0 * genr.sgrid.ds);
    d -= w[j - 1] * sq(eta - prev) / (2.0 * genr.sgrid.ds);
    prev = eta;
  }
  return d;
}

Eigen::VectorXd project_admissible(const DiscreteGenerator& genr, Eigen::VectorXd u) {
  check_dim(genr, u);
  if (!genr.deflated()) return u;
  for (Field f : {Field::phi, Field::Phi}) {
    auto block = segment(genr.layout, u, f);
    block.array() -= block.mean();
  }
  return u;
}

Eigen::MatrixXd admissible_basis(const DiscreteGenerator& genr) {
  const Eigen::Index N = genr.dim();
  if (!genr.deflated()) return Eigen::MatrixXd::Identity(N, N);

  const int nc = genr.layout.cells();
  // Columns 2..nc of the Householder reflector mapping e_1 to the constant
  // vector span the mean-zero subspace.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(nc, 1));
  const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(nc, nc);
  const Eigen::MatrixXd mean_free = full.rightCols(nc - 1);

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(N, N - 2);
  const Eigen::Index phi = genr.layout.offset(Field::phi);
  const Eigen::Index Phi = genr.layout.offset(Field::Phi);
  Q.block(phi, 0, nc, nc - 1) = mean_free;
  Q.block(Phi, nc - 1, nc, nc - 1) = mean_free;
  const Eigen::Index rest = N - 2 * nc;
  Q.bottomRightCorner(rest, rest).setIdentity();
  return Q;
}

Eigen::VectorXd sample_nodes(const SpatialGrid& grid, const std::function<double(double)>& f) {
  Eigen::VectorXd v(grid.n);
  for (int i = 1; i <= grid.n; ++i) v(i - 1) = f(grid.node(i));
  return v;
}

Eigen::VectorXd sample_cells(const SpatialGrid& grid, const std::function<double(double)>& f) {
  Eigen::VectorXd v(grid.cells());
  for (int c = 0; c < grid.cells(); ++c) v(c) = f(grid.cell_center(c));
  return v;
}

void write_triplets(std::ostream& os, const SparseMatrix& matrix) {
  const auto old_precision = os.precision(17);
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(old_precision);
}

}  // namespace tvlab
