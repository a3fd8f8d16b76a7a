#include "oracles.hpp"

#include "roughlog/assembly.hpp"
#include "roughlog/spectral.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace roughlog;

namespace {

MaskPtr node_square(Scalar h) { return make_domain(ShapeSpec::square(), GridSpec::node_aligned(0, 1, 0, 1, h)); }
MaskPtr node_interval(Scalar h) { return make_domain(ShapeSpec::interval(), GridSpec::node_aligned(0, 1, 0, 0, h)); }

Matrix dense(const DiscreteOperator& op) { return Matrix(op.matrix); }

// Flags of the interior cells of a mask, for the dense oracle.
std::vector<char> flags_of(const DomainMask& m) { return m.interior_flags(); }

}  // namespace

TEST_CASE("1-D Dirichlet stencil by hand") {
  const DiscreteOperator op = assemble_laplacian(node_interval(0.25), BoundaryCondition::dirichlet());
  Matrix expect(3, 3);
  expect << 32, -16, 0, -16, 32, -16, 0, -16, 32;
  CHECK(dense(op) == expect);
  CHECK(op.symmetric);
  CHECK(op.zmatrix);
}

TEST_CASE("Laplacians agree with a dense hand-built oracle") {
  const MaskPtr m = make_domain(ShapeSpec::lshape(), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 12));
  const GridSpec& g = m->grid();
  const Scalar h = g.h;
  const auto f = flags_of(*m);
  const int nx = static_cast<int>(g.nx), ny = static_cast<int>(g.ny);
  CHECK((dense(assemble_laplacian(m, BoundaryCondition::dirichlet())) -
         oracle::laplacian(f, nx, ny, h, oracle::Bc::dirichlet))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  CHECK((dense(assemble_laplacian(m, BoundaryCondition::neumann())) -
         oracle::laplacian(f, nx, ny, h, oracle::Bc::neumann))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  CHECK((dense(assemble_laplacian(m, BoundaryCondition::robin(*m, 3.0))) -
         oracle::laplacian(f, nx, ny, h, oracle::Bc::robin, 3.0))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("Neumann rows sum to zero") {
  const MaskPtr m = make_domain(ShapeSpec::koch(2), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 40));
  const DiscreteOperator op = assemble_laplacian(m, BoundaryCondition::neumann());
  CHECK(op.row_sum_zero);
  const Vector rs = op.matrix * Vector::Ones(op.size());
  CHECK(rs.cwiseAbs().maxCoeff() <= 1e-13 * 1600);
}

TEST_CASE("Robin with huge beta approaches Dirichlet") {
  const MaskPtr m = node_square(1.0 / 16);
  const Scalar d = principal_pair(assemble_laplacian(m, BoundaryCondition::dirichlet())).lambda1;
  const Scalar r = principal_pair(assemble_laplacian(m, BoundaryCondition::robin(*m, 1e6))).lambda1;
  CHECK(std::abs(r - d) / d <= 0.01);
}

TEST_CASE("Robin lambda1 lies strictly between Neumann and Dirichlet") {
  const MaskPtr m = make_domain(ShapeSpec::disk(0.5, 0.5, 0.45), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 24));
  const Scalar n = principal_pair(assemble_laplacian(m, BoundaryCondition::neumann())).lambda1;
  const Scalar r = principal_pair(assemble_laplacian(m, BoundaryCondition::robin(*m, 2.0))).lambda1;
  const Scalar d = principal_pair(assemble_laplacian(m, BoundaryCondition::dirichlet())).lambda1;
  CHECK(n < r);
  CHECK(r < d);
}

TEST_CASE("Robin needs one beta per face") {
  const MaskPtr m = node_square(0.25);
  BoundaryCondition bc = BoundaryCondition::robin(*m, 1.0);
  bc.beta.pop_back();
  CHECK_THROWS_AS(assemble_laplacian(m, bc), Error);
}

TEST_CASE("identity divergence form is the Laplacian bit for bit") {
  const MaskPtr m = make_domain(ShapeSpec::annulus(0.5, 0.5, 0.15, 0.45), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 32));
  for (const BoundaryCondition& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(),
                                      BoundaryCondition::robin(*m, 0.5)}) {
    const DiscreteOperator a = assemble_laplacian(m, bc);
    const DiscreteOperator b = assemble_divergence_form(m, EllipticCoefficients::identity(m->size()), bc);
    CHECK(dense(a) == dense(b));
  }
}

TEST_CASE("constant potential shifts lambda1 exactly") {
  const MaskPtr m = node_square(1.0 / 20);
  EllipticCoefficients k = EllipticCoefficients::identity(m->size());
  const Scalar l0 = principal_pair(assemble_divergence_form(m, k, BoundaryCondition::dirichlet())).lambda1;
  k.c = Vector::Constant(m->size(), 5.0);
  const Scalar l5 = principal_pair(assemble_divergence_form(m, k, BoundaryCondition::dirichlet())).lambda1;
  CHECK(l5 - l0 == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("constant drift in 1-D: lambda1 near pi^2 + 1/4") {
  const MaskPtr m = node_interval(1.0 / 128);
  EllipticCoefficients k = EllipticCoefficients::identity(m->size());
  k.bk[0] = Vector::Ones(m->size());
  const DiscreteOperator op = assemble_divergence_form(m, k, BoundaryCondition::dirichlet());
  CHECK(op.zmatrix);
  CHECK_FALSE(op.symmetric);
  const Scalar l = principal_pair(op).lambda1;
  const Scalar exact = oracle::pi * oracle::pi + 0.25;
  CHECK(std::abs(l - exact) / exact <= 0.02);
  // Dense oracle on the same matrix.
  CHECK(l == doctest::Approx(oracle::lowest_eigenvalue(dense(op))).epsilon(1e-9));
}

TEST_CASE("mixed derivatives break the Z-matrix sign pattern with a warning") {
  const MaskPtr m = node_square(1.0 / 8);
  EllipticCoefficients k = EllipticCoefficients::identity(m->size());
  k.a12 = Vector::Constant(m->size(), 0.5);
  k.a21 = Vector::Constant(m->size(), 0.5);
  k.alpha = 0.0;
  const DiscreteOperator op = assemble_divergence_form(m, k, BoundaryCondition::dirichlet());
  CHECK_FALSE(op.zmatrix);
  CHECK_FALSE(op.warnings.empty());
  CHECK_THROWS_AS(principal_pair(op), Error);
}

TEST_CASE("ellipticity") {
  const Index n = 4;
  EllipticCoefficients k = EllipticCoefficients::identity(n);
  CHECK(validate_ellipticity(k) == doctest::Approx(1.0));
  k.a[0] = Vector::Constant(n, 2.0);
  k.a[1] = Vector::Constant(n, 0.5);
  k.alpha = 0.0;
  CHECK(validate_ellipticity(k) == doctest::Approx(0.5));
  k = EllipticCoefficients::identity(n);
  k.a12 = Vector::Constant(n, 0.9);
  k.a21 = Vector::Constant(n, 0.9);
  k.alpha = 0.0;
  CHECK(validate_ellipticity(k) == doctest::Approx(0.1));
  k.a12 = Vector::Constant(n, 1.5);
  k.a21 = Vector::Constant(n, 1.5);
  CHECK_THROWS_AS(validate_ellipticity(k), Error);
}

TEST_CASE("potentials") {
  const MaskPtr m = node_square(1.0 / 16);
  const DiscreteOperator op = assemble_laplacian(m, BoundaryCondition::dirichlet());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<Scalar> u(0.0, 3.0);
  const Weight w{m, Vector::NullaryExpr(m->size(), [&] { return u(rng); })};
  CHECK(dense(add_potential(op, w, 0.0)) == dense(op));
  const Scalar l0 = principal_pair(op).lambda1;
  CHECK(lambda1_weight(op, Weight::constant(m, 1.0), 7.0) == doctest::Approx(l0 + 7.0).epsilon(1e-11));
  const DiscreteOperator p = add_potential(op, w, 2.0);
  CHECK(p.symmetric);
  CHECK(p.zmatrix);
  CHECK((dense(p) - dense(op)).diagonal().isApprox(2.0 * w.values));

  const MaskPtr other = node_square(1.0 / 8);
  CHECK_THROWS_AS(add_potential(op, Weight::constant(other, 1.0)), Error);
}

TEST_CASE("weight truncation") {
  const MaskPtr m = node_square(1.0 / 32);
  const Weight w = Weight::constant(m, 2.0);
  CHECK(truncate_weight(w, m, 0.0).weight.values == w.values);
  const TruncatedWeight z = truncate_weight(w, m, 0.6);
  CHECK(z.zero_flag);
  CHECK(z.weight.identically_zero());
  const DiscreteOperator op = assemble_laplacian(m, BoundaryCondition::dirichlet());
  Scalar prev = -1.0;
  for (const Scalar d : {0.4, 0.2, 0.1, 0.05, 0.025, 0.0}) {
    const Scalar l = lambda1_weight(op, truncate_weight(w, m, d).weight, 10.0);
    CHECK(l >= prev);
    prev = l;
  }
  CHECK(prev == doctest::Approx(lambda1_weight(op, w, 10.0)));
}

TEST_CASE("resolvent of a connected Z-matrix is entrywise positive") {
  const MaskPtr m = make_domain(ShapeSpec::slit(), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 16));
  REQUIRE(m->size() <= 400);
  const DiscreteOperator op = assemble_laplacian(m, BoundaryCondition::dirichlet());
  const Matrix inv = (Matrix::Identity(op.size(), op.size()) + dense(op)).inverse();
  CHECK(inv.minCoeff() > 0.0);
}

TEST_CASE("assembly is deterministic and exports MatrixMarket") {
  const MaskPtr m = node_square(1.0 / 6);
  const DiscreteOperator a = assemble_laplacian(m, BoundaryCondition::robin(*m, 1.0));
  const DiscreteOperator b = assemble_laplacian(m, BoundaryCondition::robin(*m, 1.0));
  CHECK(dense(a) == dense(b));
  std::ostringstream out;
  write_matrix_market(out, a.matrix);
  CHECK(out.str().rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
}
