#include "roughlog/logistic.hpp"

#include "roughlog/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace roughlog {

// ---- Nonlinearity ---------------------------------------------------------

Nonlinearity Nonlinearity::power(Scalar p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorKind::invalid_argument, "power nonlinearity needs p >= 1");
  Nonlinearity g;
  g.family_ = GFamily::power;
  g.p_ = p;
  return g;
}

Nonlinearity Nonlinearity::log1p() {
  Nonlinearity g;
  g.family_ = GFamily::log1p;
  return g;
}

Nonlinearity Nonlinearity::polynomial(std::vector<Scalar> coeffs) {
  bool any = false;
  for (const Scalar c : coeffs) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorKind::invalid_argument, "polynomial nonlinearity needs nonnegative finite coefficients");
    }
    any = any || c > 0.0;
  }
  if (!any) throw Error(ErrorKind::invalid_argument, "polynomial nonlinearity needs a positive coefficient");
  Nonlinearity g;
  g.family_ = GFamily::polynomial;
  g.coeffs_ = std::move(coeffs);
  return g;
}

Nonlinearity Nonlinearity::with_factor(Vector factor) const {
  if (factor.size() && !(factor.minCoeff() > 0.0 && factor.allFinite())) {
    throw Error(ErrorKind::invalid_argument, "nonlinearity factor must be positive and finite");
  }
  Nonlinearity g = *this;
  g.factor_ = std::move(factor);
  return g;
}

std::string Nonlinearity::describe() const {
  std::ostringstream out;
  switch (family_) {
    case GFamily::power:
      if (p_ == 1.0) {
        out << "linear";
      } else {
        out << "power(" << p_ << ")";
      }
      break;
    case GFamily::log1p: out << "log1p"; break;
    case GFamily::polynomial:
      out << "polynomial(";
      for (std::size_t k = 0; k < coeffs_.size(); ++k) out << (k ? "," : "") << coeffs_[k];
      out << ")";
      break;
  }
  if (factor_.size()) out << " with cell factor";
  return out.str();
}

Scalar Nonlinearity::g0(Scalar xi) const {
  switch (family_) {
    case GFamily::power: return p_ == 1.0 ? xi : std::pow(xi, p_);
    case GFamily::log1p: return std::log1p(xi);
    case GFamily::polynomial: {
      Scalar s = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) s = (s + *it) * xi;
      return s;
    }
  }
  return 0.0;
}

Scalar Nonlinearity::dg0(Scalar xi) const {
  switch (family_) {
    case GFamily::power: return p_ == 1.0 ? 1.0 : p_ * std::pow(xi, p_ - 1.0);
    case GFamily::log1p: return 1.0 / (1.0 + xi);
    case GFamily::polynomial: {
      Scalar s = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 0;) s = s * xi + static_cast<Scalar>(k + 1) * coeffs_[k];
      return s;
    }
  }
  return 0.0;
}

Vector Nonlinearity::g(const Vector& u) const {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = g(i, u[i]);
  return out;
}

Vector Nonlinearity::dg(const Vector& u) const {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = dg(i, u[i]);
  return out;
}

void Nonlinearity::validate(Index n) const {
  if (factor_.size() && factor_.size() != n) {
    throw Error(ErrorKind::invalid_argument, "nonlinearity factor does not match the mask size");
  }
  if (g0(0.0) != 0.0) throw Error(ErrorKind::invalid_argument, "nonlinearity must vanish at 0");
  for (const Scalar xi : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e6}) {
    if (!(dg0(xi) > 0.0)) throw Error(ErrorKind::invalid_argument, "nonlinearity must be strictly increasing on xi > 0");
  }
  if (!(g0(1e6) >= 10.0 * g0(1.0))) {
    throw Error(ErrorKind::invalid_argument, "nonlinearity must grow without bound (g(1e6) < 10 g(1))");
  }
}

// ---- helpers ---------------------------------------------------------------

namespace {

constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();

Scalar inf_norm(const SparseMatrix& a) {
  Scalar best = 0.0;
  for (Index r = 0; r < a.outerSize(); ++r) {
    Scalar s = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

// Per-cell magnitude of the terms of the residual, used to scale roundoff slack.
Vector residual_scale(const LogisticProblem& pb, const Vector& u) {
  Vector s(u.size());
  const SparseMatrix& a = pb.op.matrix;
  for (Index i = 0; i < a.outerSize(); ++i) {
    Scalar t = 0.0;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) t += std::abs(it.value() * u[it.col()]);
    s[i] = t + std::abs(pb.lambda * u[i]) + std::abs(pb.m.values[i] * pb.g.g(i, u[i]) * u[i]);
  }
  return s;
}

void check_problem(const LogisticProblem& pb) {
  require_positive_structure(pb.op, "the logistic solver");
  require_same_mask(pb.op.mask, pb.m.mask, "weight is defined on a different mask than the operator");
  if (!pb.m.is_admissible()) throw Error(ErrorKind::precondition, "weight must be >= 0 and positive somewhere");
  pb.g.validate(pb.op.size());
}

DiscreteOperator potential_op(const LogisticProblem& pb, const Vector& u, bool linearized) {
  Vector pot = pb.m.values.cwiseProduct(pb.g.g(u));
  if (linearized) pot += pb.m.values.cwiseProduct(pb.g.dg(u)).cwiseProduct(u);
  return add_diagonal(pb.op, pot);
}

struct IterationResult {
  Vector u;
  long iterations = 0;
  Scalar omega = 0.0;
};

}  // namespace

Vector logistic_residual(const LogisticProblem& problem, const Vector& u) {
  return problem.op.matrix * u - problem.lambda * u + problem.m.values.cwiseProduct(problem.g.g(u)).cwiseProduct(u);
}

Vector fixed_point_map(const LogisticProblem& problem, const ShiftedSolver& solver, const Vector& u) {
  const Vector& w = solver.shift();
  Vector rhs(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    rhs[i] = (problem.lambda + w[i]) * u[i] - problem.m.values[i] * problem.g.g(i, u[i]) * u[i];
  }
  return solver.solve(rhs);
}

// ---- interval, sub, super ------------------------------------------------

ExistenceInterval existence_interval(const DiscreteOperator& op, const Weight& m, const LogisticOptions& options) {
  ExistenceInterval out;
  out.low = principal_pair(op, options.eigen).lambda1;
  out.lstar = lambda_star(op, m, default_gamma_schedule(), options.lstar);
  out.high = out.lstar.value;
  return out;
}

Subsolution build_subsolution(const LogisticProblem& problem, const LogisticOptions& options) {
  check_problem(problem);
  Subsolution out;
  out.psi = principal_pair(problem.op, options.eigen);
  const Scalar target = problem.lambda - out.psi.lambda1;
  if (!(target > 0.0)) {
    std::ostringstream msg;
    msg << "lambda = " << problem.lambda << " <= lambda1(A) = " << out.psi.lambda1
        << "; no positive subsolution of the form eps*psi exists";
    throw Error(ErrorKind::precondition, msg.str());
  }
  const Index n = problem.op.size();
  auto peak = [&](Scalar xi) {
    Scalar best = 0.0;
    for (Index i = 0; i < n; ++i) best = std::max(best, problem.m.values[i] * problem.g.g(i, xi));
    return best;
  };
  // Largest xi with max_x m g(x, xi) < lambda - lambda1, by bracketing and bisection.
  Scalar lo = 0.0, hi = 1.0;
  while (peak(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > options.cap) throw Error(ErrorKind::no_convergence, "subsolution bracket exceeded the cap");
  }
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const Scalar mid = 0.5 * (lo + hi);
    (peak(mid) < target ? lo : hi) = mid;
  }
  const Scalar psi_max = out.psi.u.maxCoeff();
  out.epsilon = options.safety * lo / psi_max;
  out.sub = out.epsilon * out.psi.u;
  const Vector r = logistic_residual(problem, out.sub);
  const Vector s = residual_scale(problem, out.sub);
  out.residual_max = r.maxCoeff();
  for (Index i = 0; i < n; ++i) {
    if (r[i] > 1e-10 * std::max<Scalar>(1.0, s[i])) {
      std::ostringstream msg;
      msg << "subsolution residual " << r[i] << " > 0 at cell " << i;
      throw Error(ErrorKind::precondition, msg.str());
    }
  }
  return out;
}

Supersolution build_supersolution(const LogisticProblem& problem, Scalar lambda_star_estimate,
                                  const LogisticOptions& options) {
  check_problem(problem);
  const Scalar lambda = problem.lambda;
  Scalar lstar = lambda_star_estimate;
  if (lstar < 0.0) lstar = lambda_star(problem.op, problem.m, default_gamma_schedule(), options.lstar).value;
  if (std::isfinite(lstar) && lambda >= lstar) {
    std::ostringstream msg;
    msg << "lambda = " << lambda << " >= lambda* estimate " << lstar << "; no positive supersolution exists";
    throw Error(ErrorKind::precondition, msg.str());
  }
  const Scalar margin = std::isfinite(lstar) ? 0.25 * (lstar - lambda) : 1e-3 * (1.0 + std::abs(lambda));

  Supersolution out;
  EigenOptions eig = options.eigen;
  Vector warm;
  Scalar gamma = 1.0;
  Scalar prev = -std::numeric_limits<Scalar>::infinity();
  int flat = 0;
  while (true) {
    if (warm.size()) eig.start = &warm;
    const PrincipalPair p = principal_pair(add_potential(problem.op, problem.m, gamma), eig);
    warm = p.u;
    if (p.lambda1 > lambda + margin) break;
    flat = p.lambda1 - prev <= 1e-12 * (1.0 + std::abs(p.lambda1)) ? flat + 1 : 0;
    prev = p.lambda1;
    gamma *= 2.0;
    if (gamma > options.cap || flat >= 3) {
      std::ostringstream msg;
      msg << "gamma search failed: lambda1(gamma m) = " << p.lambda1 << " at gamma = " << gamma / 2.0
          << " saturates below lambda + margin = " << lambda + margin;
      throw Error(ErrorKind::no_convergence, msg.str());
    }
  }
  out.gamma = gamma;

  // Halve delta until lambda1(gamma m_delta) > lambda. Below h/2 the truncation
  // keeps every cell, so the last step uses m itself, which succeeds by the
  // choice of gamma.
  const Vector dist = exterior_distance(*problem.op.mask);
  Scalar delta = 0.5 * dist.maxCoeff();
  const Scalar floor = 0.5 * problem.op.h();
  while (true) {
    const bool last = delta < floor;
    const TruncatedWeight md = truncate_weight(problem.m, problem.op.mask, last ? 0.0 : delta);
    if (!md.zero_flag) {
      eig.start = &warm;
      PrincipalPair p = principal_pair(add_potential(problem.op, md.weight, gamma), eig);
      if (p.lambda1 > lambda) {
        out.delta = last ? 0.0 : delta;
        out.m_delta = md.weight;
        out.lambda_gamma = p.lambda1;
        out.phi = std::move(p);
        break;
      }
    }
    if (last) throw Error(ErrorKind::no_convergence, "delta search failed to reach lambda1(gamma m_delta) > lambda");
    delta *= 0.5;
  }

  // kappa: m g(kappa phi) >= gamma m_delta wherever m_delta > 0.
  const Index n = problem.op.size();
  Scalar kappa = 1.0;
  auto covers = [&](Scalar k) {
    for (Index i = 0; i < n; ++i) {
      const Scalar md = out.m_delta.values[i];
      if (md > 0.0 && problem.m.values[i] * problem.g.g(i, k * out.phi.u[i]) < gamma * md) return false;
    }
    return true;
  };
  while (!covers(kappa)) {
    kappa *= 2.0;
    if (kappa > options.cap) {
      std::ostringstream msg;
      msg << "kappa exceeded the cap (gamma = " << gamma << ", delta = " << out.delta
          << ", min phi = " << out.phi.u.minCoeff() << ")";
      throw Error(ErrorKind::no_convergence, msg.str());
    }
  }
  out.kappa = kappa;
  out.super = kappa * out.phi.u;
  const Vector r = logistic_residual(problem, out.super);
  const Vector s = residual_scale(problem, out.super);
  out.residual_min = r.minCoeff();
  for (Index i = 0; i < n; ++i) {
    if (r[i] < -1e-10 * std::max<Scalar>(1.0, s[i])) {
      std::ostringstream msg;
      msg << "supersolution residual " << r[i] << " < 0 at cell " << i;
      throw Error(ErrorKind::precondition, msg.str());
    }
  }
  return out;
}

SubSuperPair order_pair(const LogisticProblem& problem, const Subsolution& sub, const Supersolution& super,
                        const LogisticOptions& options) {
  SubSuperPair pair;
  pair.epsilon = sub.epsilon;
  pair.sub = sub.sub;
  pair.gamma = super.gamma;
  pair.delta = super.delta;
  pair.lambda1 = sub.psi.lambda1;
  pair.comparison_constant = sub.psi.u.cwiseQuotient(super.phi.u).maxCoeff();
  // Doubling kappa keeps kappa*phi a supersolution since g is increasing. The
  // residual is re-checked anyway so that a caller-supplied kappa below the
  // certified one is raised until it qualifies.
  Scalar kappa = super.kappa;
  auto ordered = [&](Scalar k) { return ((k * super.phi.u - pair.sub).array() > 0.0).all(); };
  auto is_super = [&](Scalar k) {
    const Vector u = k * super.phi.u;
    const Vector r = logistic_residual(problem, u);
    const Vector s = residual_scale(problem, u);
    for (Index i = 0; i < r.size(); ++i) {
      if (r[i] < -1e-10 * std::max<Scalar>(1.0, s[i])) return false;
    }
    return true;
  };
  while (!ordered(kappa) || !is_super(kappa)) {
    kappa *= 2.0;
    ++pair.kappa_doublings;
    if (kappa > options.cap) {
      throw Error(ErrorKind::no_convergence, "ordering sub <= super needs kappa beyond the cap; the comparison "
                                             "hypotheses (connected mask, Z-matrix) are likely violated");
    }
  }
  pair.kappa = kappa;
  pair.super = kappa * super.phi.u;
  pair.omega = pick_omega(problem, pair.super, pair.lambda1, options.omega_samples);
  return pair;
}

Scalar pick_omega(const LogisticProblem& problem, Scalar k_bound, Scalar lambda1, int samples) {
  return pick_omega(problem, Vector::Constant(problem.op.size(), k_bound), lambda1, samples);
}

Scalar pick_omega(const LogisticProblem& problem, const Vector& bound, Scalar lambda1, int samples) {
  return omega_field(problem, bound, lambda1, samples).maxCoeff();
}

Vector omega_field(const LogisticProblem& problem, const Vector& bound, Scalar lambda1, int samples) {
  Vector w(bound.size());
  for (Index i = 0; i < bound.size(); ++i) {
    const Scalar m = problem.m.values[i];
    // Running maximum over the samples is the monotone envelope on [0, k].
    Scalar env = 0.0;
    if (m > 0.0) {
      const Scalar k = std::max<Scalar>(bound[i], 0.0);
      for (int s = 0; s <= samples; ++s) {
        const Scalar xi = k * static_cast<Scalar>(s) / samples;
        env = std::max(env, problem.g.envelope(i, xi));
      }
    }
    w[i] = std::max(std::max(m * env - problem.lambda, 0.0) + 1.0, 1.0 - lambda1);
  }
  return w;
}

// ---- monotone iteration ------------------------------------------------------

namespace {

struct Run {
  const LogisticProblem& pb;
  const LogisticOptions& opt;
  Scalar lambda1;
  Scalar a_norm;

  Scalar residual_tol(const Vector& u) const {
    return std::max(1e-10, 64.0 * eps * a_norm * sup_norm(u));
  }

  // from_above: iterate from `start` down to the limit, keeping it >= floor_v.
  // Otherwise iterate up, keeping it <= ceiling.
  IterationResult iterate(const Vector& start, bool from_above, const Vector& bound_v, const char* label) const {
    IterationResult res;
    Vector u = start;
    Vector weight_cell = pb.m.values;
    auto load = [&](const Vector& v) { return weight_cell.cwiseProduct(v).maxCoeff(); };
    auto factor = [&](const Vector& bound) {
      const Vector w = omega_field(pb, bound, lambda1, opt.omega_samples);
      res.omega = w.maxCoeff();
      return std::make_unique<ShiftedSolver>(pb.op, w);
    };
    auto solver = factor(from_above ? u : bound_v);
    Scalar trigger = load(u);

    Scalar prev_step = std::numeric_limits<Scalar>::infinity();
    Scalar rate = 1.0;
    for (long it = 1; it <= opt.max_iterations; ++it) {
      Vector v = fixed_point_map(pb, *solver, u);
      const Scalar slack = opt.slack * std::max<Scalar>(1.0, sup_norm(u));
      const Vector diff = v - u;
      const Scalar bad_order = from_above ? diff.maxCoeff() : -diff.minCoeff();
      const Scalar bad_box = from_above ? (bound_v - v).maxCoeff() : (v - bound_v).maxCoeff();
      if (bad_order > slack || bad_box > slack) {
        std::ostringstream msg;
        msg << label << " iteration " << it << " left the monotone order (violation "
            << std::max(bad_order, bad_box) << ", omega " << res.omega << ")";
        throw Error(ErrorKind::monotonicity, msg.str());
      }
      const Scalar step = sup_norm(diff);
      u = std::move(v);
      res.iterations = it;

      if (prev_step > 0.0 && std::isfinite(prev_step)) {
        const Scalar r = step / prev_step;
        rate = std::max(r, 0.5 * (rate + r));
      }
      prev_step = step;
      const Scalar scale = 1.0 + sup_norm(u);
      const bool floor_hit = step <= 64.0 * eps * scale;
      const bool small = rate < 1.0 && step <= opt.step_tol * scale &&
                         step * rate / (1.0 - rate) <= opt.step_tol * scale;
      if (floor_hit || small) {
        if (sup_norm(logistic_residual(pb, u)) <= residual_tol(u) || floor_hit) break;
      }

      // Iterates from above are supersolutions, so the order interval shrinks
      // and smaller shifts keep the map monotone on it.
      if (from_above && load(u) < 0.5 * trigger) {
        trigger = load(u);
        solver = factor(u);
        prev_step = std::numeric_limits<Scalar>::infinity();
        rate = 1.0;
      }
      if (it == opt.max_iterations) {
        std::ostringstream msg;
        msg << label << " iteration did not converge in " << it << " steps (last step " << step << ")";
        throw Error(ErrorKind::no_convergence, msg.str());
      }
    }
    res.u = std::move(u);
    return res;
  }
};

}  // namespace

LogisticSolution monotone_solve(const LogisticProblem& problem, const SubSuperPair& pair,
                                const LogisticOptions& options, const Vector* below_start) {
  check_problem(problem);
  const Index n = problem.op.size();
  if (pair.sub.size() != n || pair.super.size() != n) throw Error(ErrorKind::invalid_argument, "pair has the wrong size");
  const Run run{problem, options, pair.lambda1, inf_norm(problem.op.matrix)};

  LogisticSolution sol;
  sol.lambda = problem.lambda;
  const IterationResult above = run.iterate(pair.super, true, pair.sub, "from-above");
  Vector start = pair.sub;
  if (below_start) start = start.cwiseMax(below_start->cwiseMin(above.u));
  const IterationResult below = run.iterate(start, false, above.u, "from-below");

  sol.iterations_above = above.iterations;
  sol.iterations_below = below.iterations;
  sol.omega = below.omega;
  sol.limit_gap = sup_norm(above.u - below.u);
  const Scalar ra = sup_norm(logistic_residual(problem, above.u));
  const Scalar rb = sup_norm(logistic_residual(problem, below.u));
  sol.u = ra <= rb ? above.u : below.u;
  sol.residual = std::min(ra, rb);
  sol.residual_tol = run.residual_tol(sol.u);
  if (sol.limit_gap > options.agree_tol * std::max<Scalar>(1.0, sup_norm(sol.u))) {
    std::ostringstream msg;
    msg << "limits from above and below differ by " << sol.limit_gap;
    throw Error(ErrorKind::uniqueness, msg.str());
  }
  if (!(sol.u.minCoeff() > 0.0)) throw Error(ErrorKind::monotonicity, "limit is not strictly positive");

  EigenOptions eig = options.eigen;
  eig.start = &sol.u;
  sol.pev_gap = std::abs(problem.lambda - principal_pair(potential_op(problem, sol.u, false), eig).lambda1);
  sol.stability_margin = principal_pair(potential_op(problem, sol.u, true), eig).lambda1 - problem.lambda;
  return sol;
}

LogisticSolution solve_logistic(const LogisticProblem& problem, const LogisticOptions& options,
                                Scalar lambda_star_estimate, const Vector* below_start) {
  const Subsolution sub = build_subsolution(problem, options);
  const Supersolution super = build_supersolution(problem, lambda_star_estimate, options);
  const SubSuperPair pair = order_pair(problem, sub, super, options);
  return monotone_solve(problem, pair, options, below_start);
}

// ---- verification ------------------------------------------------------------

VerifyReport verify_solution(const LogisticProblem& problem, const Vector& u, Scalar residual_tol, Scalar pev_tol,
                             const LogisticOptions& options) {
  VerifyReport rep;
  rep.positive = u.size() == problem.op.size() && u.minCoeff() > 0.0;
  if (!rep.positive) return rep;
  rep.residual = sup_norm(logistic_residual(problem, u));
  rep.pass_residual = rep.residual <= residual_tol;
  EigenOptions eig = options.eigen;
  eig.start = &u;
  rep.pev_gap = std::abs(problem.lambda - principal_pair(potential_op(problem, u, false), eig).lambda1);
  rep.pass_pev = rep.pev_gap <= pev_tol;
  // u <= e^{lambda t} T(t) u, with the implicit-Euler T and its own growth factor.
  const Scalar t = 0.01;
  const int steps = 100;
  const Scalar dt = t / steps;
  const Vector tu = evolve(Stepper{problem.op, dt, Scheme::implicit_euler}, u, t);
  const Scalar growth = std::pow(1.0 + dt * problem.lambda, steps);
  rep.semigroup_violation = (u - growth * tu).maxCoeff();
  rep.pass_semigroup = rep.semigroup_violation <= 1e-10 * std::max<Scalar>(1.0, sup_norm(u));
  return rep;
}

Scalar stability_margin(const LogisticProblem& problem, const Vector& u, const EigenOptions& options) {
  EigenOptions eig = options;
  if (!eig.start) eig.start = &u;
  return principal_pair(potential_op(problem, u, true), eig).lambda1 - problem.lambda;
}

ZeroStateReport zero_state_margin(const LogisticProblem& problem, const EigenOptions& options) {
  ZeroStateReport rep;
  rep.margin = principal_pair(problem.op, options).lambda1 - problem.lambda;
  rep.unstable = rep.margin < 0.0;
  return rep;
}

Derivative branch_derivative(const LogisticProblem& problem, const Vector& u, bool fd_check, Scalar eta,
                             const LogisticOptions& options) {
  const DiscreteOperator lin = potential_op(problem, u, true);
  EigenOptions eig = options.eigen;
  eig.start = &u;
  const Scalar margin = principal_pair(lin, eig).lambda1 - problem.lambda;
  if (!(margin > 1e-10 * (1.0 + std::abs(problem.lambda)))) {
    std::ostringstream msg;
    msg << "linearization is singular or unstable (margin " << margin << "); refusing near the branch endpoint";
    throw Error(ErrorKind::precondition, msg.str());
  }
  Derivative d;
  d.v = ShiftedSolver(lin, -problem.lambda).solve(u);
  if (fd_check) {
    const Scalar lstar = lambda_star(problem.op, problem.m, default_gamma_schedule(), options.lstar).value;
    LogisticProblem lo = problem, hi = problem;
    lo.lambda -= eta;
    hi.lambda += eta;
    const Vector ul = solve_logistic(lo, options, lstar).u;
    const Vector uh = solve_logistic(hi, options, lstar, &ul).u;
    const Vector fd = (uh - ul) / (2.0 * eta);
    d.fd_relative_error = sup_norm(fd - d.v) / sup_norm(d.v);
  }
  return d;
}

Branch continue_branch(const LogisticProblem& problem_template, const std::vector<Scalar>& lambda_grid,
                       bool with_derivatives, const LogisticOptions& options) {
  check_problem(problem_template);
  for (std::size_t k = 1; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] > lambda_grid[k - 1])) throw Error(ErrorKind::invalid_argument, "lambda grid must increase");
  }
  Branch br;
  br.lambda1 = principal_pair(problem_template.op, options.eigen).lambda1;
  br.lambda_star = lambda_star(problem_template.op, problem_template.m, default_gamma_schedule(), options.lstar).value;
  for (const Scalar l : lambda_grid) {
    if (!(l > br.lambda1) || !(l < br.lambda_star)) {
      std::ostringstream msg;
      msg << "lambda = " << l << " lies outside the existence interval (" << br.lambda1 << ", " << br.lambda_star << ")";
      throw Error(ErrorKind::precondition, msg.str());
    }
  }
  br.min_increase = std::numeric_limits<Scalar>::infinity();
  LogisticProblem pb = problem_template;
  for (const Scalar l : lambda_grid) {
    pb.lambda = l;
    const Vector* warm = br.solutions.empty() ? nullptr : &br.solutions.back().u;
    LogisticSolution sol = solve_logistic(pb, options, br.lambda_star, warm);
    if (warm) {
      const Scalar inc = (sol.u - *warm).minCoeff();
      if (inc < -1e-10 * std::max<Scalar>(1.0, sup_norm(sol.u))) {
        std::ostringstream msg;
        msg << "branch is not increasing between lambda = " << br.lambdas.back() << " and " << l << " (step " << inc << ")";
        throw Error(ErrorKind::monotonicity, msg.str());
      }
      br.min_increase = std::min(br.min_increase, inc);
    }
    if (with_derivatives) br.derivatives.push_back(branch_derivative(pb, sol.u, false, 1e-4, options).v);
    br.lambdas.push_back(l);
    br.sup_norms.push_back(sup_norm(sol.u));
    br.solutions.push_back(std::move(sol));
  }
  return br;
}

Scalar decay_probe(const LogisticProblem& problem, long iterations, const Vector* u0) {
  check_problem(problem);
  const PrincipalPair psi = principal_pair(problem.op);
  // c psi is a supersolution whenever lambda < lambda1, so the iterates decrease.
  Vector u = u0 ? *u0 : Vector(psi.u / psi.u.maxCoeff());
  const Scalar omega = pick_omega(problem, sup_norm(u), psi.lambda1);
  const ShiftedSolver solver(problem.op, omega);
  for (long k = 0; k < iterations; ++k) u = fixed_point_map(problem, solver, u);
  return sup_norm(u);
}

}  // namespace roughlog
