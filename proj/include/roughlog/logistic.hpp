#pragma once

#include "roughlog/assembly.hpp"
#include "roughlog/common.hpp"
#include "roughlog/spectral.hpp"

#include <string>
#include <vector>

namespace roughlog {

enum class GFamily { power, log1p, polynomial };

/// g(x, xi) = factor(x) * g0(xi), extended oddly to xi < 0.
class Nonlinearity {
 public:
  static Nonlinearity power(Scalar p);
  static Nonlinearity linear() { return power(1.0); }
  static Nonlinearity log1p();
  // g0(xi) = sum_k coeffs[k] xi^(k+1); constant term is zero by construction.
  static Nonlinearity polynomial(std::vector<Scalar> coeffs);

  Nonlinearity with_factor(Vector factor) const;

  GFamily family() const { return family_; }
  std::string describe() const;

  Scalar g(Index cell, Scalar xi) const { return factor(cell) * odd(xi, &Nonlinearity::g0); }
  Scalar dg(Index cell, Scalar xi) const { return factor(cell) * dg0(std::abs(xi)); }
  // g + xi dg, the slope of xi -> g(xi) xi.
  Scalar envelope(Index cell, Scalar xi) const { return g(cell, xi) + xi * dg(cell, xi); }

  Vector g(const Vector& u) const;
  Vector dg(const Vector& u) const;

  // Checks g(0) = 0, dg > 0 on xi > 0 and growth g(1e6) >= 10 g(1).
  void validate(Index n) const;

 private:
  Scalar g0(Scalar xi) const;
  Scalar dg0(Scalar xi) const;
  Scalar odd(Scalar xi, Scalar (Nonlinearity::*f)(Scalar) const) const {
    return xi < 0.0 ? -(this->*f)(-xi) : (this->*f)(xi);
  }
  Scalar factor(Index cell) const { return factor_.size() ? factor_[cell] : 1.0; }

  GFamily family_ = GFamily::power;
  Scalar p_ = 1.0;
  std::vector<Scalar> coeffs_;
  Vector factor_;
};

struct LogisticProblem {
  DiscreteOperator op;
  Weight m;
  Nonlinearity g;
  Scalar lambda = 0.0;
};

struct LogisticOptions {
  Scalar step_tol = 1e-10;  // on the estimated distance to the limit, relative to 1 + |u|
  Scalar slack = 1e-12;     // monotonicity and order-interval slack, relative to max(1, |u|)
  Scalar agree_tol = 1e-8;  // from-above vs from-below limits
  Scalar safety = 0.9;
  int omega_samples = 1024;
  long max_iterations = 2000000;
  Scalar cap = 1152921504606846976.0;  // 2^60
  EigenOptions eigen;
  LambdaStarOptions lstar;
};

struct ExistenceInterval {
  Scalar low = 0.0;
  Scalar high = 0.0;  // +inf when lambda* diverges
  LambdaStarResult lstar;
};

ExistenceInterval existence_interval(const DiscreteOperator& op, const Weight& m, const LogisticOptions& options = {});

struct Subsolution {
  Scalar epsilon = 0.0;
  Vector sub;
  PrincipalPair psi;
  Scalar residual_max = 0.0;  // max of A s - lambda s + m g(s) s, <= 0 up to roundoff
};

Subsolution build_subsolution(const LogisticProblem& problem, const LogisticOptions& options = {});

struct Supersolution {
  Scalar kappa = 0.0;
  Vector super;
  PrincipalPair phi;
  Scalar gamma = 0.0;
  Scalar delta = 0.0;
  Weight m_delta;
  Scalar lambda_gamma = 0.0;    // lambda1(gamma m_delta)
  Scalar residual_min = 0.0;    // min of A s - lambda s + m g(s) s, >= 0 up to roundoff
};

// lambda_star_estimate < 0 means "compute it".
Supersolution build_supersolution(const LogisticProblem& problem, Scalar lambda_star_estimate = -1.0,
                                  const LogisticOptions& options = {});

struct SubSuperPair {
  Scalar epsilon = 0.0;
  Vector sub;
  Scalar kappa = 0.0;
  Vector super;
  Scalar gamma = 0.0;
  Scalar delta = 0.0;
  Scalar omega = 0.0;
  Scalar comparison_constant = 0.0;
  Scalar lambda1 = 0.0;  // lambda1(A)
  int kappa_doublings = 0;
};

SubSuperPair order_pair(const LogisticProblem& problem, const Subsolution& sub, const Supersolution& super,
                        const LogisticOptions& options = {});

// omega = max over cells and xi in [0, k] of m (g + xi dg) - lambda, floored at 0,
// plus 1; raised if needed so that omega > -lambda1.
Scalar pick_omega(const LogisticProblem& problem, Scalar k_bound, Scalar lambda1, int samples = 1024);
// Same with a per-cell bound: only xi in [0, bound_i] is sampled at cell i.
Scalar pick_omega(const LogisticProblem& problem, const Vector& bound, Scalar lambda1, int samples = 1024);
// The cellwise shift whose maximum is pick_omega: omega_i = max(m_i env_i - lambda, 0) + 1,
// floored at 1 - lambda1. The monotone map stays monotone with diag(omega_i) in place of omega I.
Vector omega_field(const LogisticProblem& problem, const Vector& bound, Scalar lambda1, int samples = 1024);

struct LogisticSolution {
  Vector u;
  Scalar lambda = 0.0;
  long iterations_above = 0;
  long iterations_below = 0;
  Scalar residual = 0.0;
  Scalar residual_tol = 0.0;
  Scalar limit_gap = 0.0;  // |from above - from below|_inf
  Scalar stability_margin = 0.0;
  Scalar pev_gap = 0.0;
  Scalar omega = 0.0;
};

// Residual A u - lambda u + m g(u) u.
Vector logistic_residual(const LogisticProblem& problem, const Vector& u);

// The map u -> (W + A)^{-1} (lambda u + W u - m g(u) u), W = diag(solver.shift()).
Vector fixed_point_map(const LogisticProblem& problem, const ShiftedSolver& solver, const Vector& u);

// below_start, when given, must be a subsolution between pair.sub and the solution.
LogisticSolution monotone_solve(const LogisticProblem& problem, const SubSuperPair& pair,
                                const LogisticOptions& options = {}, const Vector* below_start = nullptr);

// The full construction: interval, sub, super, ordering, iteration.
LogisticSolution solve_logistic(const LogisticProblem& problem, const LogisticOptions& options = {},
                                Scalar lambda_star_estimate = -1.0, const Vector* below_start = nullptr);

struct VerifyReport {
  Scalar residual = 0.0;
  Scalar pev_gap = 0.0;
  Scalar semigroup_violation = 0.0;  // max of u - e^{lambda t} T(t) u
  bool positive = false;
  bool pass_residual = false;
  bool pass_pev = false;
  bool pass_semigroup = false;
};

VerifyReport verify_solution(const LogisticProblem& problem, const Vector& u, Scalar residual_tol = 1e-10,
                             Scalar pev_tol = 1e-6, const LogisticOptions& options = {});

Scalar stability_margin(const LogisticProblem& problem, const Vector& u, const EigenOptions& options = {});

struct ZeroStateReport {
  Scalar margin = 0.0;  // lambda1(A) - lambda
  bool unstable = false;
};

ZeroStateReport zero_state_margin(const LogisticProblem& problem, const EigenOptions& options = {});

struct Derivative {
  Vector v;
  Scalar fd_relative_error = -1.0;  // < 0 when no finite-difference check ran
};

// Solves (A + m g(u) + m dg(u) u - lambda) v = u. With fd_check, compares
// against (u_{lambda+eta} - u_{lambda-eta}) / 2 eta.
Derivative branch_derivative(const LogisticProblem& problem, const Vector& u, bool fd_check = false,
                             Scalar eta = 1e-4, const LogisticOptions& options = {});

struct Branch {
  std::vector<Scalar> lambdas;
  std::vector<LogisticSolution> solutions;
  std::vector<Vector> derivatives;
  std::vector<Scalar> sup_norms;
  Scalar lambda1 = 0.0;
  Scalar lambda_star = 0.0;
  Scalar min_increase = 0.0;  // smallest componentwise step between neighbours
};

Branch continue_branch(const LogisticProblem& problem_template, const std::vector<Scalar>& lambda_grid,
                       bool with_derivatives = false, const LogisticOptions& options = {});

// Iterates the fixed-point map from u0 (or ones) for lambda below lambda1 and
// returns the sup norm after `iterations` steps.
Scalar decay_probe(const LogisticProblem& problem, long iterations = 10000, const Vector* u0 = nullptr);

}  // namespace roughlog
