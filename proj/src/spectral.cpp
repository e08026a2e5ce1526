#include "tvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Householder>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "tvlab/fingerprint.hpp"
#include "tvlab/parallel.hpp"

namespace tvlab {

namespace {

constexpr double kHalfRoot = 1.0 / std::numbers::sqrt2;

// M <- M Q for Q = diag(Qc, Qc, I) acting on leading blocks phi = [0, nc) and
// Phi = [nc, 2 nc), without forming Q.
Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Qc) {
  const Eigen::Index nc = Qc.rows();
  const Eigen::Index rest = M.cols() - 2 * nc;
  Eigen::MatrixXd out(M.rows(), M.cols() - 2);
  out.leftCols(nc - 1) = M.middleCols(0, nc) * Qc;
  out.middleCols(nc - 1, nc - 1) = M.middleCols(nc, nc) * Qc;
  out.rightCols(rest) = M.rightCols(rest);
  return out;
}

// Q^T M Q for the same Q.
Eigen::MatrixXd restrict_both(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Qc) {
  const Eigen::MatrixXd right = restrict_columns(M, Qc);
  return restrict_columns(right.transpose(), Qc).transpose();
}

// Orthonormal basis of the orthogonal complement of k.
Eigen::MatrixXd complement(const Eigen::VectorXd& k) {
  const Eigen::Index n = k.size();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(k);
  const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return full.rightCols(n - 1);
}

// Parity of each field under x -> l - x, for the even sector.  The shear
// phi_x + psi is odd, so psi has the opposite parity of phi; theta follows
// psi in CaseI (coupled through Phi_x + Psi) and phi in CaseII (through
// Psi_x).
int parity(Field f, CouplingVariant variant) {
  switch (f) {
    case Field::phi:
    case Field::Phi: return 1;
    case Field::theta:
    case Field::Theta: return variant == CouplingVariant::CaseI ? -1 : 1;
    default: return -1;
  }
}

struct Sector {
  SparseMatrix Q;
  // number of phi (and of Phi) columns, which lead the sector
  Eigen::Index phi_columns = 0;
  // coordinates of the constant phi vector within the phi columns
  Eigen::VectorXd phi_constant;
};

Sector sector_basis(const DiscreteGenerator& genr, int sign) {
  const StateLayout& L = genr.layout;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::Index col = 0;
  Sector sector;
  std::vector<double> constant;
  auto add_block = [&](Eigen::Index offset, Eigen::Index points, int par, bool is_phi) {
    for (Eigen::Index i = 0; i < points; ++i) {
      const Eigen::Index mirror = points - 1 - i;
      if (i < mirror) {
        triplets.emplace_back(offset + i, col, kHalfRoot);
        triplets.emplace_back(offset + mirror, col, par * kHalfRoot);
        if (is_phi) constant.push_back(par > 0 ? std::numbers::sqrt2 : 0.0);
        ++col;
      } else if (i == mirror && par > 0) {
        triplets.emplace_back(offset + i, col, 1.0);
        if (is_phi) constant.push_back(1.0);
        ++col;
      }
    }
  };
  for (Field f : {Field::phi, Field::Phi, Field::psi, Field::Psi, Field::theta, Field::Theta}) {
    const Eigen::Index before = col;
    add_block(L.offset(f), L.length(f), sign * parity(f, genr.variant), f == Field::phi);
    if (f == Field::phi) sector.phi_columns = col - before;
  }
  for (int j = 1; j <= L.m; ++j)
    add_block(L.eta_offset(j), L.n, sign * parity(Field::eta, genr.variant), false);

  sector.Q.resize(genr.dim(), col);
  sector.Q.setFromTriplets(triplets.begin(), triplets.end());
  sector.phi_constant = Eigen::Map<Eigen::VectorXd>(constant.data(), constant.size());
  return sector;
}

double max_abs(const SparseMatrix& M) {
  double worst = 0.0;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

Eigen::MatrixXd frame_block(const WeightedOperator& wop) {
  if (wop.A.rows() != wop.A.cols() || wop.G.rows() != wop.A.rows() || wop.G.cols() != wop.A.cols())
    throw std::invalid_argument("operator and Gram matrix dimensions differ");
  const Eigen::LLT<Eigen::MatrixXd> llt(wop.G);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("Gram matrix is not positive definite");
  // op = L^T A L^{-T}: solve L op^T = (L^T A)^T.
  Eigen::MatrixXd opT = (llt.matrixU() * wop.A).transpose();
  llt.matrixL().solveInPlace(opT);
  return opT.transpose();
}

}  // namespace

WeightedOperator weighted_operator(const DiscreteGenerator& genr) {
  WeightedOperator wop{Eigen::MatrixXd(genr.A), Eigen::MatrixXd(genr.G)};
  if (!genr.deflated()) return wop;
  // admissible_basis() is diag(Qc, Qc, I) with phi and Phi leading.
  const Eigen::Index nc = genr.layout.cells();
  const Eigen::MatrixXd Qc = admissible_basis(genr).topLeftCorner(nc, nc - 1);
  return {restrict_both(wop.A, Qc), restrict_both(wop.G, Qc)};
}

std::vector<WeightedOperator> weighted_sectors(const DiscreteGenerator& genr) {
  const Sector even = sector_basis(genr, 1);
  const Sector odd = sector_basis(genr, -1);

  const double tol = 1e-12;
  const SparseMatrix QeT = even.Q.transpose();
  const SparseMatrix QoT = odd.Q.transpose();
  const bool invariant =
      even.Q.cols() + odd.Q.cols() == genr.dim() &&
      max_abs(SparseMatrix(QoT * genr.A * even.Q)) <= tol * max_abs(genr.A) &&
      max_abs(SparseMatrix(QeT * genr.A * odd.Q)) <= tol * max_abs(genr.A) &&
      max_abs(SparseMatrix(QoT * genr.G * even.Q)) <= tol * max_abs(genr.G);
  if (!invariant) return {weighted_operator(genr)};

  std::vector<WeightedOperator> sectors;
  for (const Sector* s : {&even, &odd}) {
    const SparseMatrix QT = s->Q.transpose();
    WeightedOperator wop{Eigen::MatrixXd(SparseMatrix(QT * genr.A * s->Q)),
                         Eigen::MatrixXd(SparseMatrix(QT * genr.G * s->Q))};
    // The constant phi and Phi modes are even; deflate them there.
    if (genr.deflated() && s->phi_constant.squaredNorm() > 0.0) {
      const Eigen::MatrixXd Qc = complement(s->phi_constant);
      wop = {restrict_both(wop.A, Qc), restrict_both(wop.G, Qc)};
    }
    if (wop.A.rows() > 0) sectors.push_back(std::move(wop));
  }
  return sectors;
}

Eigen::Index EnergyFrame::dim() const {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.rows();
  return total;
}

EnergyFrame energy_frame(const WeightedOperator& wop) { return {{frame_block(wop)}}; }

EnergyFrame energy_frame(const std::vector<WeightedOperator>& sectors) {
  EnergyFrame frame;
  for (const auto& wop : sectors) frame.blocks.push_back(frame_block(wop));
  return frame;
}

EnergyFrame energy_frame(const DiscreteGenerator& genr) {
  return energy_frame(weighted_sectors(genr));
}

SpectrumReport spectrum(const EnergyFrame& frame) {
  SpectrumReport report;
  for (const auto& block : frame.blocks) {
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(block, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
    const auto& ev = solver.eigenvalues();
    report.eigenvalues.insert(report.eigenvalues.end(), ev.data(), ev.data() + ev.size());
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const auto& x, const auto& y) {
              return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
            });
  report.abscissa = -std::numeric_limits<double>::infinity();
  report.min_imag_gap = std::numeric_limits<double>::infinity();
  for (const auto& z : report.eigenvalues) {
    report.abscissa = std::max(report.abscissa, z.real());
    report.min_imag_gap = std::min(report.min_imag_gap, std::abs(z.real()));
  }
  return report;
}

SpectrumReport spectrum(const WeightedOperator& wop) { return spectrum(energy_frame(wop)); }

SpectrumReport spectrum(const DiscreteGenerator& genr) {
  if (genr.dim() > kMaxDenseDim)
    throw std::length_error("generator dimension " + std::to_string(genr.dim()) +
                            " exceeds the dense eigensolver cap " + std::to_string(kMaxDenseDim) +
                            "; reduce n or m");
  SpectrumReport report = spectrum(energy_frame(genr));
  report.fingerprint = fingerprint(genr);
  return report;
}

double resolvent_norm(const EnergyFrame& frame, double lambda) {
  double worst = 0.0;
  for (const auto& block : frame.blocks) {
    Eigen::MatrixXcd shifted = -block.cast<std::complex<double>>();
    shifted.diagonal().array() += std::complex<double>(0.0, lambda);
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(shifted);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > std::numeric_limits<double>::epsilon() * std::max(sv(0), 1.0)))
      return std::numeric_limits<double>::infinity();
    worst = std::max(worst, 1.0 / smin);
  }
  return worst;
}

double resolvent_norm(const WeightedOperator& wop, double lambda) {
  return resolvent_norm(energy_frame(wop), lambda);
}

double resolvent_norm(const DiscreteGenerator& genr, double lambda) {
  return resolvent_norm(energy_frame(genr), lambda);
}

ResolventSweep resolvent_sweep(const EnergyFrame& frame, const std::vector<double>& lambdas,
                               int threads) {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!std::isfinite(lambdas[i])) throw std::invalid_argument("lambda grid must be finite");
    if (i > 0 && lambdas[i] < lambdas[i - 1])
      throw std::invalid_argument("lambda grid must be sorted");
  }
  ResolventSweep sweep;
  sweep.lambdas = lambdas;
  sweep.norms.assign(lambdas.size(), 0.0);
  parallel_for(lambdas.size(), threads,
               [&](std::size_t i) { sweep.norms[i] = resolvent_norm(frame, lambdas[i]); });
  for (double v : sweep.norms) sweep.sup_norm = std::max(sweep.sup_norm, v);
  return sweep;
}

std::vector<double> log_lambda_grid(double lo, double hi, int count, bool include_zero) {
  std::vector<double> grid;
  if (include_zero) grid.push_back(0.0);
  if (count == 1) {
    grid.push_back(lo);
    return grid;
  }
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid.push_back(lo * std::exp(step * i));
  grid.back() = hi;
  return grid;
}

std::vector<double> default_lambda_grid() { return log_lambda_grid(0.1, 100.0, 50, true); }

void write_spectrum_csv(std::ostream& os, const SpectrumReport& report) {
  const auto old_precision = os.precision(17);
  os << "re,im\n";
  for (const auto& z : report.eigenvalues) os << z.real() << ',' << z.imag() << '\n';
  os.precision(old_precision);
}

void write_sweep_csv(std::ostream& os, const ResolventSweep& sweep) {
  const auto old_precision = os.precision(17);
  os << "lambda,norm\n";
  for (std::size_t i = 0; i < sweep.lambdas.size(); ++i)
    os << sweep.lambdas[i] << ',' << sweep.norms[i] << '\n';
  os.precision(old_precision);
}

}  // namespace tvlab
