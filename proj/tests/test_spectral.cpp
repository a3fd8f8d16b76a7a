#include "oracles.hpp"

#include "roughlog/spectral.hpp"

#include <doctest.h>

#include <random>

using namespace roughlog;

namespace {

MaskPtr node_square(Scalar h) { return make_domain(ShapeSpec::square(), GridSpec::node_aligned(0, 1, 0, 1, h)); }
MaskPtr node_interval(Scalar h) { return make_domain(ShapeSpec::interval(), GridSpec::node_aligned(0, 1, 0, 0, h)); }

DiscreteOperator dirichlet(const MaskPtr& m) { return assemble_laplacian(m, BoundaryCondition::dirichlet()); }

Vector random_nonnegative(std::mt19937_64& rng, Index n, Scalar hi = 1.0) {
  std::uniform_real_distribution<Scalar> u(0.0, hi);
  return Vector::NullaryExpr(n, [&] { return u(rng); });
}

Scalar dominant_modulus(const Matrix& a) { return Eigen::EigenSolver<Matrix>(a).eigenvalues().cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("resolvent solves") {
  const MaskPtr sq = node_square(1.0 / 16);
  const DiscreteOperator d = dirichlet(sq);
  CHECK(resolvent_solve(d, 1.0, Vector::Zero(d.size())).cwiseAbs().maxCoeff() == 0.0);

  const MaskPtr cells = make_domain(ShapeSpec::lshape(), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 16));
  const DiscreteOperator n = assemble_laplacian(cells, BoundaryCondition::neumann());
  const Vector one = resolvent_solve(n, 1.0, Vector::Ones(n.size()));
  CHECK((one.array() - 1.0).abs().maxCoeff() <= 1e-12);

  std::mt19937_64 rng(5);
  const Matrix inv = (Matrix::Identity(d.size(), d.size()) + Matrix(d.matrix)).partialPivLu().inverse();
  REQUIRE(inv.minCoeff() > 0.0);
  for (int k = 0; k < 5; ++k) {
    const Vector f = random_nonnegative(rng, d.size());
    const Vector u = resolvent_solve(d, 1.0, f);
    CHECK(u.minCoeff() > 0.0);
    CHECK((u - inv * f).norm() <= 1e-10 * f.norm());
  }
}

TEST_CASE("1-D Dirichlet principal eigenvalue matches the Toeplitz formula") {
  const Scalar h = 1.0 / 64;
  const PrincipalPair p = principal_pair(dirichlet(node_interval(h)));
  CHECK(p.lambda1 == doctest::Approx(oracle::dirichlet_1d(1, h)).epsilon(1e-8));
  CHECK(p.lambda1 == doctest::Approx(9.8678).epsilon(1e-4));
  CHECK(p.u.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.u.minCoeff() > 0.0);
  CHECK(p.residual <= 1e-10 * (1.0 + p.lambda1));
}

TEST_CASE("2-D Dirichlet square converges to 2 pi^2 at second order") {
  Scalar prev_err = 0.0;
  for (const Scalar h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const PrincipalPair p = principal_pair(dirichlet(node_square(h)));
    CHECK(p.lambda1 == doctest::Approx(oracle::dirichlet_2d(1, 1, h)).epsilon(1e-8));
    const Scalar err = std::abs(p.lambda1 - 2 * oracle::pi * oracle::pi);
    if (prev_err > 0.0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.05));
    prev_err = err;
  }
}

TEST_CASE("constant shift moves lambda1 and keeps the vector") {
  const DiscreteOperator op = dirichlet(make_domain(ShapeSpec::koch(2), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 32)));
  const PrincipalPair a = principal_pair(op);
  const PrincipalPair b = principal_pair(shift(op, 5.0));
  CHECK(b.lambda1 - a.lambda1 == doctest::Approx(5.0).epsilon(1e-10));
  CHECK((a.u - b.u).norm() <= 1e-8);
}

TEST_CASE("principal pair refuses a disconnected mask") {
  std::vector<char> f(9 * 4, 1);
  for (int j = 0; j < 4; ++j) f[j * 9 + 4] = 0;
  const MaskPtr m = DomainMask::from_flags(GridSpec{9, 4, 0.1, 0, 0}, f);
  CHECK_THROWS_AS(principal_pair(dirichlet(m)), Error);
}

TEST_CASE("principal vector is unique across random starts") {
  const DiscreteOperator op = dirichlet(make_domain(ShapeSpec::slit(), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 24)));
  const PrincipalPair ref = principal_pair(op);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<Scalar> u(0.01, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vector start = Vector::NullaryExpr(op.size(), [&] { return u(rng); });
    EigenOptions o;
    o.start = &start;
    const PrincipalPair p = principal_pair(op, o);
    CHECK((p.u - ref.u).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("spectral radius of the resolvent") {
  const DiscreteOperator op = dirichlet(make_domain(ShapeSpec::lshape(), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 20)));
  REQUIRE(op.size() <= 400);
  const Scalar l1 = principal_pair(op).lambda1;
  for (const Scalar w : {1.0, 0.5 - l1, 100.0}) {
    const Matrix inv = (w * Matrix::Identity(op.size(), op.size()) + Matrix(op.matrix)).inverse();
    CHECK(dominant_modulus(inv) == doctest::Approx(1.0 / (w + l1)).epsilon(1e-8));
  }
}

TEST_CASE("spectral radii strictly dominate for ordered weights") {
  const MaskPtr m = node_square(1.0 / 12);
  const DiscreteOperator op = dirichlet(m);
  REQUIRE(op.size() <= 200);
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<Index> cell(0, m->size() - 1);
  for (int k = 0; k < 50; ++k) {
    const Vector m1 = random_nonnegative(rng, op.size(), 5.0);
    Vector m2 = m1;
    m2[cell(rng)] += 0.5 + k * 0.1;
    const Matrix id = Matrix::Identity(op.size(), op.size());
    const Matrix s = (id + Matrix(add_diagonal(op, m2).matrix)).inverse();
    const Matrix t = (id + Matrix(add_diagonal(op, m1).matrix)).inverse();
    REQUIRE(s.minCoeff() > 0.0);
    REQUIRE((t - s).minCoeff() >= -1e-15);
    CHECK(dominant_modulus(s) < dominant_modulus(t));
    CHECK(lambda1_weight(op, Weight{m, m1}) < lambda1_weight(op, Weight{m, m2}));
  }
}

TEST_CASE("lambda1 of a weight") {
  const MaskPtr m = node_square(1.0 / 16);
  const DiscreteOperator op = dirichlet(m);
  const Scalar l0 = principal_pair(op).lambda1;
  std::mt19937_64 rng(29);
  const Weight w{m, random_nonnegative(rng, m->size(), 3.0)};
  CHECK(lambda1_weight(op, w, 0.0) == doctest::Approx(l0).epsilon(1e-12));
  CHECK(lambda1_weight(op, Weight::constant(m, 1.0), 2.5) == doctest::Approx(l0 + 2.5).epsilon(1e-11));
  CHECK(lambda1_weight(op, w, 2.0) == doctest::Approx(oracle::lowest_eigenvalue(Matrix(add_potential(op, w, 2.0).matrix)))
                                          .epsilon(1e-9));
}

TEST_CASE("spectral gap") {
  const Scalar h = 1.0 / 32;
  const DiscreteOperator op = dirichlet(node_interval(h));
  const GapReport g = spectral_gap(op);
  const Scalar expect = 2.0 / (h * h) * (std::cos(oracle::pi * h) - std::cos(2 * oracle::pi * h));
  CHECK(g.gap == doctest::Approx(expect).epsilon(1e-9));
  CHECK(g.all_real);
  CHECK(spectral_gap(shift(op, 3.0)).gap == doctest::Approx(expect).epsilon(1e-9));

  const MaskPtr m = node_interval(1.0 / 32);
  EllipticCoefficients k = EllipticCoefficients::identity(m->size());
  k.bk[0] = Vector::Ones(m->size());
  const DiscreteOperator drift = assemble_divergence_form(m, k, BoundaryCondition::dirichlet());
  const GapReport gd = spectral_gap(drift);
  CHECK(gd.all_real);
  CHECK(gd.gap > 0.0);
  const auto ev = Eigen::EigenSolver<Matrix>(Matrix(drift.matrix)).eigenvalues();
  CHECK(ev.imag().cwiseAbs().maxCoeff() <= 1e-8);

  CHECK_THROWS_AS(spectral_gap(dirichlet(node_square(1.0 / 32)), 400), Error);
}

TEST_CASE("lambda star of a nondegenerate weight diverges") {
  const MaskPtr m = node_interval(1.0 / 32);
  const LambdaStarResult r = lambda_star(dirichlet(m), Weight::constant(m, 1.0));
  CHECK(r.infinite);
  CHECK(std::isinf(r.value));
  for (std::size_t k = 1; k < r.gamma_trace.size(); ++k) {
    CHECK(r.gamma_trace[k].second >= r.gamma_trace[k - 1].second);
  }
}

TEST_CASE("lambda star of a half-interval weight") {
  const Scalar h = 1.0 / 128;
  const MaskPtr m = node_interval(h);
  const Weight w = Weight::indicator(m, [](Scalar x, Scalar) { return x <= 0.5; });
  const LambdaStarResult r = lambda_star(dirichlet(m), w);
  REQUIRE_FALSE(r.infinite);
  // Increments still halve at 2^30, so no convergence flag, only the extrapolation.
  CHECK(r.extrapolated);
  CHECK(r.value >= r.gamma_trace.back().second);
  // Zero set: the 63 nodes in (1/2, 1), a Dirichlet chain of its own.
  const Scalar sub = 2.0 / (h * h) * (1.0 - std::cos(oracle::pi / 64));
  CHECK(r.value == doctest::Approx(sub).epsilon(1e-6));
  CHECK(std::abs(r.value - 4 * oracle::pi * oracle::pi) / (4 * oracle::pi * oracle::pi) <= 0.02);
}

TEST_CASE("lambda star of a weight vanishing on a subsquare") {
  const Scalar h = 1.0 / 32;
  const MaskPtr m = node_square(h);
  const Weight w = Weight::indicator(
      m, [](Scalar x, Scalar y) { return !(x > 0.25 && x < 0.75 && y > 0.25 && y < 0.75); });
  const LambdaStarResult r = lambda_star(dirichlet(m), w);
  REQUIRE_FALSE(r.infinite);
  const MaskPtr inner = make_domain(ShapeSpec::square(0.25, 0.75, 0.25, 0.75),
                                    GridSpec::node_aligned(0.25, 0.75, 0.25, 0.75, h));
  const Scalar sub = principal_pair(dirichlet(inner)).lambda1;
  CHECK(std::abs(r.value - sub) / sub <= 0.02);
  CHECK(std::abs(sub - 8 * oracle::pi * oracle::pi) / (8 * oracle::pi * oracle::pi) <= 0.02);
}

TEST_CASE("eigenvector comparison") {
  const MaskPtr m = node_square(1.0 / 32);
  const DiscreteOperator op = dirichlet(m);
  const ComparisonResult zero = eigenvector_comparison(op, Weight::zero(m));
  CHECK(zero.c_min == doctest::Approx(1.0).epsilon(1e-9));

  auto bump = [&](Scalar height) {
    Weight w{m, Vector::Zero(m->size())};
    for (Index c = 0; c < m->size(); ++c) {
      const Scalar r2 = (m->center(c) - Eigen::Vector2d(0.5, 0.5)).squaredNorm();
      w.values[c] = height * std::max(0.0, 1.0 - r2 / 0.04);
    }
    return w;
  };
  const ComparisonResult one = eigenvector_comparison(op, bump(1.0));
  const ComparisonResult ten = eigenvector_comparison(op, bump(10.0));
  CHECK(std::isfinite(one.c_min));
  CHECK(std::isfinite(ten.c_min));
  CHECK(ten.c_min > one.c_min);
  for (const ComparisonResult* r : {&one, &ten}) {
    CHECK((r->u0.u - r->c_min * r->um.u).maxCoeff() <= 1e-12);
    CHECK(r->max_violation <= 1e-12);
  }

  CHECK_THROWS_AS(eigenvector_comparison(op, Weight::constant(m, 1.0)), Error);
}

TEST_CASE("weight continuity probe") {
  const MaskPtr m = node_square(1.0 / 32);
  const DiscreteOperator op = dirichlet(m);
  const Weight w = Weight::constant(m, 10.0);
  const ProbeResult p = weight_continuity_probe(op, w, {0.3, 0.2, 0.1, 0.05, 0.025, 0.0});
  REQUIRE(p.rows.size() == 6);
  CHECK(p.rows.back().delta == 0.0);
  CHECK(p.rows.back().lambda1 == p.lambda1_full);
  for (std::size_t k = 0; k + 1 < p.rows.size(); ++k) {
    CHECK(p.rows[k].lambda1 < p.lambda1_full);
    CHECK(p.rows[k].lambda1 <= p.rows[k + 1].lambda1);
    CHECK(p.lambda1_full - p.rows[k].lambda1 <= 10.0);
    CHECK(p.rows[k].vector_distance >= p.rows[k + 1].vector_distance);
  }
  CHECK(p.rows.back().vector_distance <= 1e-10);
}
