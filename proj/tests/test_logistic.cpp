#include "oracles.hpp"

#include "roughlog/logistic.hpp"
#include "roughlog/semigroup.hpp"

#include <doctest.h>

#include <random>

using namespace roughlog;

namespace {

MaskPtr node_square(Scalar h) { return make_domain(ShapeSpec::square(), GridSpec::node_aligned(0, 1, 0, 1, h)); }
MaskPtr node_interval(Scalar h) { return make_domain(ShapeSpec::interval(), GridSpec::node_aligned(0, 1, 0, 0, h)); }

// Neumann Laplacian on 8x8 cells, m = 1: every constant is in the kernel of A.
LogisticProblem neumann_problem(Scalar lambda, Nonlinearity g = Nonlinearity::linear()) {
  const MaskPtr m = make_domain(ShapeSpec::square(), GridSpec::cell_aligned(0, 1, 0, 1, 0.125));
  return {assemble_laplacian(m, BoundaryCondition::neumann()), Weight::constant(m, 1.0), std::move(g), lambda};
}

LogisticProblem interval_problem(Scalar offset, Scalar h = 1.0 / 64) {
  const MaskPtr m = node_interval(h);
  const DiscreteOperator op = assemble_laplacian(m, BoundaryCondition::dirichlet());
  return {op, Weight::constant(m, 1.0), Nonlinearity::linear(), oracle::dirichlet_1d(1, h) + offset};
}

LogisticProblem degenerate_problem(Scalar h = 1.0 / 16) {
  const MaskPtr m = node_square(h);
  const Weight w = Weight::indicator(
      m, [](Scalar x, Scalar y) { return !(x > 0.25 && x < 0.75 && y > 0.25 && y < 0.75); });
  return {assemble_laplacian(m, BoundaryCondition::dirichlet()), w, Nonlinearity::linear(), 0.0};
}

Scalar inf_norm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("nonlinearity families") {
  const std::vector<Nonlinearity> gs = {Nonlinearity::linear(), Nonlinearity::power(2.5), Nonlinearity::log1p(),
                                        Nonlinearity::polynomial({1.0, 0.0, 2.0})};
  for (const Nonlinearity& g : gs) {
    g.validate(3);
    CHECK(g.g(0, 0.0) == 0.0);
    CHECK(g.g(0, -2.0) == -g.g(0, 2.0));
    for (const Scalar xi : {1e-3, 0.5, 3.0}) {
      CHECK(g.dg(0, xi) > 0.0);
      const Scalar fd = (g.g(0, xi + 1e-6) - g.g(0, xi - 1e-6)) / 2e-6;
      CHECK(g.dg(0, xi) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(Nonlinearity::power(2.0).g(0, 3.0) == 9.0);
  CHECK(Nonlinearity::log1p().g(0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(Nonlinearity::polynomial({1.0, 2.0}).g(0, 2.0) == doctest::Approx(2.0 + 8.0));
  CHECK_THROWS_AS(Nonlinearity::power(0.5).validate(1), Error);
  CHECK_THROWS_AS(Nonlinearity::polynomial({0.0}).validate(1), Error);
  const Nonlinearity scaled = Nonlinearity::linear().with_factor(Vector::LinSpaced(3, 1.0, 3.0));
  CHECK(scaled.g(2, 2.0) == doctest::Approx(6.0));
}

TEST_CASE("existence interval") {
  const LogisticProblem n = neumann_problem(0.7);
  const ExistenceInterval a = existence_interval(n.op, n.m);
  CHECK(std::abs(a.low) <= 1e-10);
  CHECK(std::isinf(a.high));

  const LogisticProblem d = interval_problem(1.0);
  const ExistenceInterval b = existence_interval(d.op, d.m);
  CHECK(b.low == doctest::Approx(oracle::dirichlet_1d(1, 1.0 / 64)).epsilon(1e-9));
  CHECK(b.low == doctest::Approx(9.8678).epsilon(1e-4));
  CHECK(std::isinf(b.high));

  const LogisticProblem g = degenerate_problem();
  const ExistenceInterval c = existence_interval(g.op, g.m);
  CHECK(c.low == doctest::Approx(oracle::dirichlet_2d(1, 1, 1.0 / 16)).epsilon(1e-9));
  const MaskPtr inner = make_domain(ShapeSpec::square(0.25, 0.75, 0.25, 0.75),
                                    GridSpec::node_aligned(0.25, 0.75, 0.25, 0.75, 1.0 / 16));
  const Scalar sub = principal_pair(assemble_laplacian(inner, BoundaryCondition::dirichlet())).lambda1;
  CHECK(std::abs(c.high - sub) / sub <= 0.02);
}

TEST_CASE("subsolution") {
  // lambda1 of the Neumann operator is zero only to the eigen-solver tolerance.
  const Subsolution s = build_subsolution(neumann_problem(0.7));
  CHECK((s.sub.array() - 0.63).abs().maxCoeff() <= 1e-10);
  CHECK(s.residual_max <= 1e-12);

  const Subsolution q = build_subsolution(neumann_problem(0.7, Nonlinearity::power(2.0)));
  CHECK((q.sub.array() - 0.9 * std::sqrt(0.7)).abs().maxCoeff() <= 1e-10);

  const Subsolution near = build_subsolution(interval_problem(1e-3));
  CHECK(near.epsilon > 0.0);
  CHECK(near.sub.minCoeff() > 0.0);
  CHECK(near.residual_max <= 1e-10);
  CHECK(inf_norm(near.sub) == doctest::Approx(0.9e-3).epsilon(1e-6));

  CHECK_THROWS_AS(build_subsolution(interval_problem(-0.5)), Error);
}

TEST_CASE("supersolution") {
  const LogisticProblem n = neumann_problem(0.7);
  const Supersolution s = build_supersolution(n);
  CHECK(s.lambda_gamma > 0.7);
  CHECK(s.lambda_gamma == doctest::Approx(s.gamma).epsilon(1e-9));
  CHECK(s.residual_min >= -1e-10);
  CHECK(s.super.minCoeff() > 0.0);

  LogisticProblem g = degenerate_problem();
  const ExistenceInterval iv = existence_interval(g.op, g.m);
  g.lambda = 0.5 * (iv.low + iv.high);
  const Supersolution d = build_supersolution(g, iv.high);
  CHECK(std::isfinite(d.gamma));
  CHECK(std::isfinite(d.kappa));
  CHECK(d.lambda_gamma > g.lambda);
  CHECK(d.residual_min >= -1e-10 * (1.0 + inf_norm(d.super)));

  g.lambda = iv.high + 1.0;
  CHECK_THROWS_AS(build_supersolution(g, iv.high), Error);
  // Without the estimate the gamma search itself runs into the saturation.
  CHECK_THROWS_AS(build_supersolution(g, std::numeric_limits<Scalar>::infinity()), Error);
}

TEST_CASE("ordering the pair") {
  const LogisticProblem n = neumann_problem(0.7);
  const SubSuperPair a = order_pair(n, build_subsolution(n), build_supersolution(n));
  CHECK(a.kappa_doublings == 0);
  CHECK((a.super - a.sub).minCoeff() > 0.0);

  LogisticProblem g = degenerate_problem();
  const ExistenceInterval iv = existence_interval(g.op, g.m);
  g.lambda = 0.5 * (iv.low + iv.high);
  const Subsolution sub = build_subsolution(g);
  const Supersolution super = build_supersolution(g, iv.high);
  const SubSuperPair b = order_pair(g, sub, super);
  CHECK((b.super - b.sub).minCoeff() > 0.0);
  CHECK(b.kappa >= b.epsilon * b.comparison_constant);

  Supersolution tiny = super;
  tiny.kappa = 1e-9;
  tiny.super = tiny.kappa * tiny.phi.u;
  const SubSuperPair c = order_pair(g, sub, tiny);
  CHECK(c.kappa_doublings > 0);
  CHECK((c.super - c.sub).minCoeff() > 0.0);
  CHECK(logistic_residual(g, c.super).minCoeff() >= -1e-10 * (1.0 + inf_norm(c.super)));
}

TEST_CASE("omega") {
  const LogisticProblem n = neumann_problem(0.7);
  CHECK(pick_omega(n, 2.0, 0.0) == doctest::Approx(4.3).epsilon(1e-14));

  LogisticProblem half = n;
  half.m = Weight::indicator(n.op.mask, [](Scalar x, Scalar) { return x < 0.5; });
  const Vector w = omega_field(half, Vector::Constant(half.op.size(), 2.0), 0.0);
  for (Index c = 0; c < w.size(); ++c) CHECK(w[c] == (half.m.values[c] > 0.0 ? 4.3 : 1.0));

  LogisticProblem sq = neumann_problem(0.7, Nonlinearity::power(2.0));
  sq.m = Weight::constant(sq.op.mask, 2.0);
  const Scalar k = 1.5;
  CHECK(pick_omega(sq, k, 0.0) == doctest::Approx(3.0 * k * k * 2.0 - 0.7 + 1.0).epsilon(1e-12));

  // Floor at 1 - lambda1.
  CHECK(pick_omega(n, 0.0, -4.0) == doctest::Approx(5.0));
}

TEST_CASE("constant Neumann solution") {
  const LogisticProblem n = neumann_problem(0.7);
  const LogisticSolution s = solve_logistic(n);
  CHECK((s.u.array() - 0.7).abs().maxCoeff() <= 1e-9);
  CHECK(s.iterations_above > 0);
  CHECK(s.iterations_below > 0);
  CHECK(s.limit_gap <= 1e-8);
  CHECK(s.residual <= s.residual_tol);
  CHECK(s.stability_margin == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(s.pev_gap <= 1e-8);
  const VerifyReport r = verify_solution(n, Vector::Constant(n.op.size(), 0.7));
  CHECK(r.pev_gap <= 1e-8);
  CHECK(r.pass_residual);
  CHECK(r.pass_semigroup);
}

TEST_CASE("1-D Dirichlet solution against a Newton oracle") {
  const LogisticProblem p = interval_problem(0.5);
  const SubSuperPair pair = order_pair(p, build_subsolution(p), build_supersolution(p));
  const LogisticSolution s = monotone_solve(p, pair);
  CHECK(s.u.minCoeff() > 0.0);
  CHECK((s.u - pair.sub).minCoeff() >= 0.0);
  CHECK((pair.super - s.u).minCoeff() >= 0.0);
  CHECK(s.residual <= s.residual_tol);
  CHECK(s.limit_gap <= 1e-8);
  CHECK(s.stability_margin > 0.0);

  const Matrix a(p.op.matrix);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<Scalar> u(0.5, 2.0);
  for (int k = 0; k < 10; ++k) {
    const Vector start = Vector::NullaryExpr(p.op.size(), [&] { return u(rng); }).cwiseProduct(pair.super);
    const Vector newton = oracle::newton_logistic(a, p.m.values, p.lambda, start);
    CHECK(inf_norm(newton - s.u) <= 1e-8 * std::max(1.0, inf_norm(s.u)));
  }

  const VerifyReport r = verify_solution(p, s.u);
  CHECK(r.pev_gap <= 1e-6);
  CHECK(r.pass_semigroup);
  CHECK(r.positive);

  Vector noisy = s.u;
  std::uniform_real_distribution<Scalar> e(-0.1, 0.1);
  for (Index i = 0; i < noisy.size(); ++i) noisy[i] *= 1.0 + e(rng);
  CHECK(verify_solution(p, noisy).pev_gap > 1e-3);
  CHECK_FALSE(verify_solution(p, noisy).pass_residual);
}

TEST_CASE("below lambda1 the iteration collapses to zero") {
  const LogisticProblem p = interval_problem(-1.0);
  CHECK(decay_probe(p, 10000) < 1e-6);
  CHECK_THROWS_AS(solve_logistic(p), Error);
}

TEST_CASE("stability of the zero state") {
  const ZeroStateReport z = zero_state_margin(interval_problem(0.5));
  CHECK(z.margin == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(z.unstable);
  CHECK_FALSE(zero_state_margin(interval_problem(-0.5)).unstable);
}

TEST_CASE("Tarski monotonicity of the fixed-point map") {
  for (const LogisticProblem& p : {neumann_problem(0.7), interval_problem(2.0)}) {
    const SubSuperPair pair = order_pair(p, build_subsolution(p), build_supersolution(p));
    const ShiftedSolver solver(p.op, omega_field(p, pair.super, pair.lambda1));
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<Scalar> u(0.0, 1.0);
    Scalar worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vector hi = Vector::NullaryExpr(p.op.size(), [&] { return u(rng); }).cwiseProduct(pair.super);
      const Vector lo = Vector::NullaryExpr(p.op.size(), [&] { return u(rng); }).cwiseProduct(hi);
      const Vector d = fixed_point_map(p, solver, hi) - fixed_point_map(p, solver, lo);
      worst = std::min(worst, d.minCoeff() / std::max(1.0, inf_norm(pair.super)));
    }
    CHECK(worst >= -1e-12);
  }
}

TEST_CASE("branch") {
  const LogisticProblem n = neumann_problem(0.0);
  const Branch b = continue_branch(n, {0.2, 0.4, 0.6, 0.8, 1.0});
  REQUIRE(b.sup_norms.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(b.sup_norms[k] == doctest::Approx(b.lambdas[k]).epsilon(1e-8));
    CHECK((b.solutions[k].u.array() - b.lambdas[k]).abs().maxCoeff() <= 1e-8);
  }
  CHECK(b.min_increase > 0.0);

  const LogisticProblem d = interval_problem(0.0);
  const Scalar l1 = d.lambda;
  const Branch c = continue_branch(d, {l1 + 1e-3, l1 + 1e-2, l1 + 1e-1, l1 + 1.0});
  CHECK(c.sup_norms.front() < 1e-2);
  for (std::size_t k = 1; k < c.sup_norms.size(); ++k) CHECK(c.sup_norms[k] > c.sup_norms[k - 1]);
  CHECK(c.min_increase > 0.0);

  CHECK_THROWS_AS(continue_branch(d, {l1 + 1.0, l1 + 0.5}), Error);
}

TEST_CASE("branch derivative") {
  const LogisticProblem n = neumann_problem(0.7);
  const Derivative v = branch_derivative(n, Vector::Constant(n.op.size(), 0.7));
  CHECK((v.v.array() - 1.0).abs().maxCoeff() <= 1e-10);

  const LogisticProblem p = interval_problem(0.5);
  const LogisticSolution s = solve_logistic(p);
  const Derivative dv = branch_derivative(p, s.u, true);
  CHECK(dv.v.minCoeff() > 0.0);
  CHECK(dv.fd_relative_error >= 0.0);
  CHECK(dv.fd_relative_error <= 1e-3);

  // Near lambda1 the derivative grows like the reciprocal margin.
  std::vector<Scalar> products;
  for (const Scalar off : {1e-2, 1e-1}) {
    const LogisticProblem q = interval_problem(off);
    const LogisticSolution sq = solve_logistic(q);
    products.push_back(sq.stability_margin * inf_norm(branch_derivative(q, sq.u).v));
  }
  CHECK(products[0] / products[1] == doctest::Approx(1.0).epsilon(0.5));
}
