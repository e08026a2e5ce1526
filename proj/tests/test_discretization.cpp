#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "tvlab/discretization.hpp"

using namespace tvlab;

namespace {

const BoundaryFamily kBcs[] = {BoundaryFamily::FullDirichlet, BoundaryFamily::NeumannDirichlet};
const CouplingVariant kVariants[] = {CouplingVariant::CaseI, CouplingVariant::CaseII};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(n);
  for (auto& x : u) x = normal(rng);
  return u;
}

// Entries of A whose row lies in `rows` and column in `cols`.
double block_norm(const DiscreteGenerator& g, std::initializer_list<Field> rows,
                  std::initializer_list<Field> cols) {
  const Eigen::MatrixXd A(g.A);
  double s = 0.0;
  for (Field r : rows)
    for (Field c : cols)
      s += A.block(g.layout.offset(r), g.layout.offset(c), g.layout.length(r), g.layout.length(c))
               .squaredNorm();
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("history grid for g = exp(-s)") {
  PhysicalParams p;
  const MemoryKernel g = MemoryKernel::exponential(1.0, 1.0);
  const auto [x, s] = build_grids(p, g, GridOptions{10, 16, 1e-8});
  CHECK(s.s_max == doctest::Approx(18.420680743952367).epsilon(1e-14));
  CHECK(s.tail_mass <= 1e-8 * s.b0 * (1 + 1e-12));
  double sum = 0.0;
  for (int j = 0; j < s.m; ++j) {
    // Telescoping weights e^{-s_{j-1}} - e^{-s_j}.
    CHECK(s.weights[j] == doctest::Approx(std::exp(-j * s.ds) - std::exp(-(j + 1) * s.ds)).epsilon(1e-13));
    sum += s.weights[j];
  }
  CHECK(std::abs(sum - (1.0 - s.tail_mass)) <= 1e-14);
  CHECK(std::abs(sum + s.tail_mass - s.b0) <= 1e-10);
  CHECK(s.nodes.back() == doctest::Approx(s.s_max));
}

TEST_CASE("spatial grid spacing") {
  PhysicalParams p;
  p.l = std::numbers::pi;
  const auto [x, s] = build_grids(p, MemoryKernel::none(), GridOptions{4, 0, 1e-8});
  CHECK(x.h == doctest::Approx(std::numbers::pi / 5));
  CHECK(std::abs(x.h * (x.n + 1) - p.l) <= 1e-12);
  CHECK(s.m == 0);
}

TEST_CASE("grid preconditions") {
  PhysicalParams p;
  const MemoryKernel g = MemoryKernel::exponential(1.0, 1.0);
  CHECK_THROWS_AS(build_grids(p, g, GridOptions{3, 8, 1e-8}), std::invalid_argument);
  CHECK_THROWS_AS(build_grids(p, g, GridOptions{8, 3, 1e-8}), std::invalid_argument);
  CHECK_THROWS_AS(build_grids(p, g, GridOptions{8, 8, 0.0}), std::invalid_argument);
  // a ds must stay below 2.5: 18.42 / 7 > 2.5.
  try {
    build_grids(p, g, GridOptions{8, 7, 1e-8});
    FAIL("coarse history grid accepted");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("requires m >= 8") != std::string::npos);
  }
}

TEST_CASE("state dimension") {
  // phi and Phi carry one extra cell each: 6n + 2 + n m.
  PhysicalParams p;
  const MemoryKernel g = MemoryKernel::exponential(1.0, 1.0);
  const DiscreteGenerator genr = assemble_generator(p, g, BoundaryFamily::FullDirichlet,
                                                    CouplingVariant::CaseI, GridOptions{4, 4, 1e-4});
  CHECK(genr.dim() == 6 * 4 + 2 + 16);
  CHECK(genr.A.rows() == genr.dim());
  CHECK(genr.G.cols() == genr.dim());
}

TEST_CASE("Gram matrix is symmetric positive definite") {
  for (auto bc : kBcs)
    for (auto v : kVariants) {
      const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, bc, v, GridOptions{12, 8});
      const Eigen::MatrixXd G(genr.G);
      CHECK((G - G.transpose()).norm() == 0.0);
      CHECK(Eigen::LLT<Eigen::MatrixXd>(G).info() == Eigen::Success);
    }
}

TEST_CASE("apply is linear and zero preserving") {
  std::mt19937_64 rng(3);
  const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, BoundaryFamily::FullDirichlet,
                                                    CouplingVariant::CaseI, GridOptions{12, 8});
  CHECK(apply(genr, Eigen::VectorXd::Zero(genr.dim())).norm() == 0.0);
  const Eigen::VectorXd u = random_vector(genr.dim(), rng), v = random_vector(genr.dim(), rng);
  const Eigen::VectorXd lhs = apply(genr, u + v);
  CHECK((lhs - apply(genr, u) - apply(genr, v)).norm() <= 1e-12 * lhs.norm());
  CHECK_THROWS_AS(apply(genr, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("phi-only state reproduces the shear stencils") {
  // phi = sin(pi x / l): Psi_t = -(k / rho2) phi_x, Phi_t = (k / rho1) phi_xx.
  PhysicalParams p;
  const double w = std::numbers::pi / p.l;
  double err_psi = 0.0, err_phi = 0.0, h = 0.0;
  for (int n : {40, 80}) {
    const DiscreteGenerator genr = assemble_generator(p, MemoryKernel{}, BoundaryFamily::FullDirichlet,
                                                      CouplingVariant::CaseI, GridOptions{n, 16});
    Eigen::VectorXd u = Eigen::VectorXd::Zero(genr.dim());
    segment(genr.layout, u, Field::phi) = sample_cells(genr.xgrid, [&](double x) { return std::sin(w * x); });
    const Eigen::VectorXd Au = apply(genr, u);
    CHECK(segment(genr.layout, Au, Field::phi).norm() == 0.0);
    CHECK(segment(genr.layout, Au, Field::Theta).norm() == 0.0);
    const Eigen::VectorXd dpsi = segment(genr.layout, Au, Field::Psi);
    const Eigen::VectorXd dphi = segment(genr.layout, Au, Field::Phi);
    double ep = 0.0, ef = 0.0;
    for (int i = 1; i <= n; ++i)
      ep = std::max(ep, std::abs(dpsi(i - 1) + p.k / p.rho2 * w * std::cos(w * genr.xgrid.node(i))));
    for (int c = 2; c <= n - 2; ++c)
      ef = std::max(ef, std::abs(dphi(c) + p.k / p.rho1 * w * w * std::sin(w * genr.xgrid.cell_center(c))));
    if (n == 40) {
      err_psi = ep, err_phi = ef, h = genr.xgrid.h;
    } else {
      CHECK(std::log2(err_psi / ep) >= 1.9);
      CHECK(std::log2(err_phi / ef) >= 1.9);
      CHECK(ep <= h * h * p.k / p.rho2 * w * w * w);
    }
  }
}

TEST_CASE("CaseI and CaseII differ only in the coupling blocks") {
  for (auto bc : kBcs) {
    const DiscreteGenerator one = assemble_generator(PhysicalParams{}, MemoryKernel{}, bc, CouplingVariant::CaseI, GridOptions{10, 8});
    const DiscreteGenerator two = assemble_generator(PhysicalParams{}, MemoryKernel{}, bc, CouplingVariant::CaseII, GridOptions{10, 8});
    CHECK(Eigen::MatrixXd(one.G - two.G).norm() == 0.0);
    Eigen::MatrixXd diff = Eigen::MatrixXd(one.A) - Eigen::MatrixXd(two.A);
    const StateLayout& L = one.layout;
    const auto zero_block = [&](Field r, Field c) {
      diff.block(L.offset(r), L.offset(c), L.length(r), L.length(c)).setZero();
    };
    CHECK(diff.norm() > 0.0);
    for (Field r : {Field::Phi, Field::Psi}) zero_block(r, Field::Theta), zero_block(Field::Theta, r);
    CHECK(diff.norm() == 0.0);
  }
}

TEST_CASE("zero coupling and no memory decouple the elastic and thermal parts") {
  PhysicalParams p;
  p.sigma = 0.0;
  for (auto bc : kBcs)
    for (auto v : kVariants) {
      const DiscreteGenerator genr = assemble_generator(p, MemoryKernel::none(), bc, v, GridOptions{10, 0});
      const auto elastic = {Field::phi, Field::Phi, Field::psi, Field::Psi};
      const auto thermal = {Field::theta, Field::Theta};
      CHECK(block_norm(genr, elastic, thermal) == 0.0);
      CHECK(block_norm(genr, thermal, elastic) == 0.0);
    }
}

TEST_CASE("energy of psi = sin(x) converges to pi / 4 at second order") {
  PhysicalParams p;
  p.rho1 = p.rho2 = p.rho3 = 1.0;
  p.k = 0.0, p.b = 1.0, p.delta = p.gamma = p.sigma = 0.0, p.l = std::numbers::pi;
  std::vector<double> err, hs;
  for (int n : {25, 50, 100, 200}) {
    const DiscreteGenerator genr = assemble_generator(p, MemoryKernel::none(), BoundaryFamily::FullDirichlet,
                                                      CouplingVariant::CaseI, GridOptions{n, 0});
    Eigen::VectorXd u = Eigen::VectorXd::Zero(genr.dim());
    segment(genr.layout, u, Field::psi) = sample_nodes(genr.xgrid, [](double x) { return std::sin(x); });
    err.push_back(std::abs(energy(genr, u) - std::numbers::pi / 4));
    hs.push_back(genr.xgrid.h);
    CHECK(energy(genr, 2.0 * u) == doctest::Approx(4.0 * energy(genr, u)).epsilon(1e-15));
    CHECK(energy(genr, Eigen::VectorXd::Zero(genr.dim())) == 0.0);
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(std::log(err[i - 1] / err[i]) / std::log(hs[i - 1] / hs[i]) >= 1.9);
  CHECK(err.back() <= hs.back() * hs.back());
}

TEST_CASE("dissipation closed form equals U^T G A U and is non-positive") {
  std::mt19937_64 rng(5);
  for (auto bc : kBcs)
    for (auto v : kVariants) {
      const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, bc, v, GridOptions{12, 8});
      for (int s = 0; s < 1000; ++s) {
        const Eigen::VectorXd u = project_admissible(genr, random_vector(genr.dim(), rng));
        const double quad = inner(genr, apply(genr, u), u);
        const double scale = inner(genr, u, u);
        CHECK(quad <= 1e-12 * scale);
        if (s < 50) CHECK(std::abs(dissipation(genr, u) - quad) <= 1e-10 * scale);
      }
    }
}

TEST_CASE("mixed family deflates the constant phi and Phi modes") {
  std::mt19937_64 rng(9);
  const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, BoundaryFamily::NeumannDirichlet,
                                                    CouplingVariant::CaseI, GridOptions{10, 8});
  CHECK(genr.deflated());
  for (Field f : {Field::phi, Field::Phi}) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(genr.dim());
    segment(genr.layout, c, f).setOnes();
    CHECK(apply(genr, c).norm() <= 1e-12);
    CHECK(project_admissible(genr, c).norm() <= 1e-12);
    // Admissible states are G-orthogonal to the constant mode.
    const Eigen::VectorXd u = project_admissible(genr, random_vector(genr.dim(), rng));
    CHECK(std::abs(inner(genr, c, u)) <= 1e-12 * std::sqrt(inner(genr, u, u) * inner(genr, c, c)));
    CHECK(std::abs(segment(genr.layout, apply(genr, u), f).sum()) <= 1e-11 * u.norm());
  }
  const Eigen::VectorXd u = random_vector(genr.dim(), rng);
  const Eigen::VectorXd pu = project_admissible(genr, u);
  CHECK((project_admissible(genr, pu) - pu).norm() <= 1e-13 * pu.norm());
  const Eigen::MatrixXd B = admissible_basis(genr);
  CHECK(B.cols() == genr.dim() - 2);
  CHECK((B.transpose() * B - Eigen::MatrixXd::Identity(B.cols(), B.cols())).norm() <= 1e-12);
}

TEST_CASE("generator is invertible on the admissible space") {
  for (auto bc : kBcs)
    for (auto v : kVariants) {
      const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, bc, v, GridOptions{10, 8});
      const Eigen::MatrixXd B = admissible_basis(genr);
      const Eigen::MatrixXd Ar = B.transpose() * Eigen::MatrixXd(genr.A) * B;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Ar);
      lu.setThreshold(1e-10);
      CHECK(lu.rank() == Ar.rows());
    }
}

TEST_CASE("triplet export round trips") {
  const DiscreteGenerator genr = assemble_generator(PhysicalParams{}, MemoryKernel{}, BoundaryFamily::FullDirichlet,
                                                    CouplingVariant::CaseII, GridOptions{6, 8});
  std::stringstream ss;
  write_triplets(ss, genr.A);
  Eigen::MatrixXd back = Eigen::MatrixXd::Zero(genr.dim(), genr.dim());
  int r, c;
  double val;
  Eigen::Index lines = 0;
  while (ss >> r >> c >> val) back(r, c) = val, ++lines;
  CHECK(lines == genr.A.nonZeros());
  CHECK((back - Eigen::MatrixXd(genr.A)).norm() == 0.0);
}

TEST_CASE("assembly preconditions") {
  PhysicalParams p;
  p.rho1 = 0.0;
  CHECK_THROWS_AS(assemble_generator(p, MemoryKernel{}, BoundaryFamily::FullDirichlet, CouplingVariant::CaseI, GridOptions{}),
                  std::invalid_argument);
  PhysicalParams q;
  q.b = 1.0;  // b0 = 2
  CHECK_THROWS_AS(assemble_generator(q, MemoryKernel{}, BoundaryFamily::FullDirichlet, CouplingVariant::CaseI, GridOptions{}),
                  std::invalid_argument);
  const DiscreteGenerator a = assemble_generator(PhysicalParams{}, MemoryKernel{}, BoundaryFamily::FullDirichlet,
                                                 CouplingVariant::CaseI, GridOptions{8, 8});
  const DiscreteGenerator b = assemble_generator(PhysicalParams{}, MemoryKernel{}, BoundaryFamily::FullDirichlet,
                                                 CouplingVariant::CaseI, GridOptions{8, 8});
  CHECK(a.id != b.id);
}
