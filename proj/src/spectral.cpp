#include "roughlog/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace roughlog {

using ColSparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;

struct ShiftedSolver::Impl {
  ColSparse matrix;
  std::unique_ptr<Eigen::SimplicialLDLT<ColSparse, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt;
  std::unique_ptr<Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>>> lu;
};

ShiftedSolver::ShiftedSolver(const DiscreteOperator& op, Scalar omega)
    : ShiftedSolver(op, Vector::Constant(op.size(), omega)) {}

ShiftedSolver::ShiftedSolver(const DiscreteOperator& op, const Vector& shift)
    : impl_(std::make_unique<Impl>()), shift_(shift), n_(op.size()) {
  if (shift.size() != n_) throw Error(ErrorKind::invalid_argument, "shift vector has the wrong size");
  ColSparse m = op.matrix;
  for (Index i = 0; i < n_; ++i) m.coeffRef(i, i) += shift[i];
  m.makeCompressed();
  impl_->matrix = std::move(m);
  if (op.symmetric) {
    impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<ColSparse, Eigen::Lower, Eigen::AMDOrdering<int>>>();
    impl_->ldlt->compute(impl_->matrix);
    if (impl_->ldlt->info() != Eigen::Success) {
      throw Error(ErrorKind::solver_failure, "LDL^T factorization of (omega I + A) failed");
    }
  } else {
    impl_->lu = std::make_unique<Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>>>();
    // Diagonal pivots on Z-matrices: the M-matrix LU needs no pivoting and
    // keeps its sign pattern.
    if (op.zmatrix) impl_->lu->setPivotThreshold(0.0);
    impl_->lu->compute(impl_->matrix);
    if (impl_->lu->info() != Eigen::Success) {
      throw Error(ErrorKind::solver_failure, "LU factorization of (omega I + A) failed: " + impl_->lu->lastErrorMessage());
    }
  }
}

ShiftedSolver::~ShiftedSolver() = default;
ShiftedSolver::ShiftedSolver(ShiftedSolver&&) noexcept = default;
ShiftedSolver& ShiftedSolver::operator=(ShiftedSolver&&) noexcept = default;

Vector ShiftedSolver::solve(const Vector& f) const {
  if (impl_->ldlt) return impl_->ldlt->solve(f);
  return impl_->lu->solve(f);
}

Vector resolvent_solve(const DiscreteOperator& op, Scalar omega, const Vector& f) {
  if (f.size() != op.size()) throw Error(ErrorKind::invalid_argument, "right-hand side has the wrong size");
  const Scalar fn = f.norm();
  if (fn == 0.0) return Vector::Zero(op.size());
  ShiftedSolver solver(op, omega);
  Vector u = solver.solve(f);
  auto residual = [&](const Vector& x) { return (op.matrix * x + omega * x - f).norm(); };
  Scalar r = residual(u);
  if (!(r <= 1e-10 * fn)) {
    u += solver.solve(f - op.matrix * u - omega * u);
    r = residual(u);
  }
  if (!(r <= 1e-10 * fn)) {
    std::ostringstream msg;
    msg << "residual " << r / fn << " relative after refinement; (omega I + A) is singular or ill-conditioned "
        << "(condition estimate >= " << r / (fn * std::numeric_limits<Scalar>::epsilon()) << ")";
    throw Error(ErrorKind::solver_failure, msg.str());
  }
  return u;
}

Scalar default_shift(const DiscreteOperator& op) { return 1.0 + std::max(0.0, -gershgorin_lower(op.matrix)); }

void require_positive_structure(const DiscreteOperator& op, const char* what) {
  if (!op.zmatrix) {
    throw Error(ErrorKind::not_zmatrix, std::string(what) + " needs a Z-matrix (the positivity theory does not apply)");
  }
  if (!is_connected(*op.mask)) {
    throw Error(ErrorKind::disconnected, std::string(what) + " needs a connected mask (the operator is reducible)");
  }
}

namespace {

Scalar inf_norm(const SparseMatrix& a) {
  Scalar best = 0.0;
  for (Index r = 0; r < a.outerSize(); ++r) {
    Scalar s = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

Vector random_positive(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> dist(0.5, 1.5);
  Vector u(n);
  for (Index i = 0; i < n; ++i) u[i] = dist(rng);
  return u;
}

// Positive left eigenvector of the resolvent by a short inverse iteration on A^T.
Vector left_vector(const DiscreteOperator& op, Scalar omega, const Vector& start) {
  DiscreteOperator t = op;
  t.matrix = op.matrix.transpose();
  ShiftedSolver solver(t, omega);
  Vector v = start;
  for (int k = 0; k < 500; ++k) {
    Vector w = solver.solve(v);
    w /= w.norm();
    const Scalar change = (w - v).norm();
    v = std::move(w);
    if (change < 1e-14) break;
  }
  return v;
}

}  // namespace

PrincipalPair principal_pair(const DiscreteOperator& op, const EigenOptions& options) {
  require_positive_structure(op, "principal_pair");
  const Index n = op.size();
  PrincipalPair pair;
  pair.omega = default_shift(op);
  ShiftedSolver solver(op, pair.omega);

  Vector u = options.start && options.start->size() == n ? options.start->cwiseAbs() : random_positive(n, options.seed);
  if (u.minCoeff() <= 0.0) u.array() += 1e-3 * u.maxCoeff() + std::numeric_limits<Scalar>::min();
  u /= u.norm();

  const Scalar roundoff = 64.0 * std::numeric_limits<Scalar>::epsilon() * inf_norm(op.matrix);
  Scalar lambda_prev = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar best_residual = std::numeric_limits<Scalar>::infinity();
  int best_at = 0;
  Vector left;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Vector w = solver.solve(u);
    u = w / w.norm();
    const Vector au = op.matrix * u;
    const Scalar lambda = left.size() ? left.dot(au) / left.dot(u) : u.dot(au);
    const Scalar residual = (au - lambda * u).norm();
    const Scalar tol = std::max(options.residual_tol * (1.0 + std::abs(lambda)), roundoff);
    const bool settled = std::abs(lambda - lambda_prev) <= options.lambda_tol * std::max<Scalar>(1.0, std::abs(lambda));
    pair.lambda1 = lambda;
    pair.residual = residual;
    pair.iterations = it;
    if (settled && residual <= tol) {
      pair.u = std::move(u);
      pair.two_sided = left.size() > 0;
      return pair;
    }
    if (residual < 0.5 * best_residual) {
      best_residual = residual;
      best_at = it;
    } else if (!op.symmetric && left.size() == 0 && it - best_at > 200) {
      left = left_vector(op, pair.omega, u);
    }
    lambda_prev = lambda;
  }
  std::ostringstream msg;
  msg << "inverse iteration stopped after " << options.max_iterations << " iterations with residual "
      << pair.residual << " (lambda estimate " << pair.lambda1 << ")";
  throw Error(ErrorKind::no_convergence, msg.str());
}

Scalar lambda1_weight(const DiscreteOperator& op, const Weight& m, Scalar scale, const EigenOptions& options) {
  return principal_pair(add_potential(op, m, scale), options).lambda1;
}

GapReport spectral_gap(const DiscreteOperator& op, Index dense_cap, Scalar degenerate_tol) {
  require_positive_structure(op, "spectral_gap");
  const Index n = op.size();
  if (n > dense_cap) {
    throw Error(ErrorKind::over_dense_cap,
                "spectral_gap needs a dense eigensolve; n = " + std::to_string(n) + " exceeds the cap " +
                    std::to_string(dense_cap));
  }
  if (n < 2) throw Error(ErrorKind::invalid_argument, "spectral_gap needs at least two cells");
  const Matrix dense = Matrix(op.matrix);
  GapReport report;
  if (op.symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(dense, Eigen::EigenvaluesOnly);
    report.real_parts = es.eigenvalues();
  } else {
    Eigen::EigenSolver<Matrix> es(dense, false);
    report.real_parts = es.eigenvalues().real();
    report.max_imag = es.eigenvalues().imag().cwiseAbs().maxCoeff();
  }
  std::sort(report.real_parts.begin(), report.real_parts.end());
  const Scalar scale = std::max<Scalar>(1.0, report.real_parts.cwiseAbs().maxCoeff());
  report.all_real = report.max_imag <= 1e-10 * scale;
  report.lambda1 = report.real_parts[0];
  report.gap = report.real_parts[1] - report.real_parts[0];
  report.near_degenerate = report.gap <= degenerate_tol * scale;
  return report;
}

std::vector<Scalar> default_gamma_schedule(int k_max) {
  std::vector<Scalar> s;
  for (int k = 0; k <= k_max; ++k) s.push_back(std::ldexp(1.0, k));
  return s;
}

LambdaStarResult lambda_star(const DiscreteOperator& op, const Weight& m, const std::vector<Scalar>& schedule,
                             const LambdaStarOptions& options) {
  if (!m.is_admissible()) throw Error(ErrorKind::precondition, "lambda_star needs m >= 0 with m > 0 somewhere");
  LambdaStarResult res;
  EigenOptions eig = options.eigen;
  Vector warm;
  int small_steps = 0;
  for (const Scalar gamma : schedule) {
    if (warm.size()) eig.start = &warm;
    PrincipalPair p = principal_pair(add_potential(op, m, gamma), eig);
    warm = p.u;
    res.gamma_trace.emplace_back(gamma, p.lambda1);
    const std::size_t k = res.gamma_trace.size();
    if (k < 2) continue;
    const Scalar inc = res.gamma_trace[k - 1].second - res.gamma_trace[k - 2].second;
    small_steps = inc < options.tol * (1.0 + std::abs(p.lambda1)) ? small_steps + 1 : 0;
    if (small_steps >= options.converged_after) {
      res.converged = true;
      break;
    }
  }
  const auto& tr = res.gamma_trace;
  const Scalar last = tr.back().second;
  res.value = last;
  if (tr.size() >= 2 && tr.back().second - tr[tr.size() - 2].second > options.divergence_threshold) {
    res.infinite = true;
    res.value = std::numeric_limits<Scalar>::infinity();
    return res;
  }
  if (tr.size() >= 3) {
    const Scalar x0 = tr[tr.size() - 3].second;
    const Scalar x1 = tr[tr.size() - 2].second;
    const Scalar d1 = x1 - x0;
    const Scalar d2 = last - x1;
    const Scalar denom = d2 - d1;
    if (d1 > 0.0 && d2 > 0.0 && denom < 0.0) {
      const Scalar aitken = last - d2 * d2 / denom;
      if (std::isfinite(aitken) && aitken >= last) {
        res.value = aitken;
        res.extrapolated = true;
      }
    }
  }
  return res;
}

ComparisonResult eigenvector_comparison(const DiscreteOperator& op, const Weight& m, const EigenOptions& options) {
  require_same_mask(op.mask, m.mask, "weight is defined on a different mask than the operator");
  if (!m.nonnegative()) throw Error(ErrorKind::precondition, "eigenvector_comparison needs m >= 0");
  const Vector dist = exterior_distance(*op.mask);
  const Scalar layer = op.h() * (1.0 + 1e-12);
  for (Index c = 0; c < op.size(); ++c) {
    if (m.values[c] > 0.0 && dist[c] <= layer) {
      throw Error(ErrorKind::precondition, "support of m touches the boundary layer at cell " + std::to_string(c) +
                                               "; compact support in the domain is required");
    }
  }
  ComparisonResult res;
  res.u0 = principal_pair(op, options);
  EigenOptions warm = options;
  warm.start = &res.u0.u;
  res.um = principal_pair(add_potential(op, m), warm);
  res.c_min = res.u0.u.cwiseQuotient(res.um.u).maxCoeff();
  res.max_violation = (res.u0.u - res.c_min * res.um.u).maxCoeff();
  return res;
}

ProbeResult weight_continuity_probe(const DiscreteOperator& op, const Weight& m, const std::vector<Scalar>& deltas,
                                    Scalar scale, const EigenOptions& options) {
  for (std::size_t k = 1; k < deltas.size(); ++k) {
    if (!(deltas[k] < deltas[k - 1])) throw Error(ErrorKind::invalid_argument, "delta schedule must decrease");
  }
  ProbeResult res;
  const PrincipalPair full = principal_pair(add_potential(op, m, scale), options);
  res.lambda1_full = full.lambda1;
  EigenOptions eig = options;
  eig.start = &full.u;
  for (const Scalar delta : deltas) {
    const TruncatedWeight md = truncate_weight(m, op.mask, delta);
    if (md.weight.values == m.values) {  // nothing truncated: reuse the full pair
      res.rows.push_back({delta, full.lambda1, 0.0, md.support.count()});
      continue;
    }
    const PrincipalPair p = principal_pair(add_potential(op, md.weight, scale), eig);
    res.rows.push_back({delta, p.lambda1, (p.u - full.u).norm(), md.support.count()});
  }
  return res;
}

}  // namespace roughlog
