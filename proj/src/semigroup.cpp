#include "roughlog/semigroup.hpp"

#include "roughlog/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

namespace roughlog {

Vector evolve(const Stepper& stepper, const Vector& u0, Scalar t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::invalid_argument, "evolve needs t >= 0");
  if (!(stepper.dt > 0.0)) throw Error(ErrorKind::invalid_argument, "evolve needs dt > 0");
  if (u0.size() != stepper.op.size()) throw Error(ErrorKind::invalid_argument, "initial state has the wrong size");
  if (t == 0.0) return u0;
  const auto steps = static_cast<long>(std::ceil(t / stepper.dt - 1e-12));
  const Scalar dt = t / static_cast<Scalar>(steps);
  Vector u = u0;
  if (stepper.scheme == Scheme::implicit_euler) {
    // (I + dt A) u' = u  <=>  (I/dt + A) u' = u/dt
    const ShiftedSolver solver(stepper.op, 1.0 / dt);
    for (long k = 0; k < steps; ++k) u = solver.solve(u / dt);
  } else {
    const ShiftedSolver solver(stepper.op, 2.0 / dt);
    for (long k = 0; k < steps; ++k) u = solver.solve((2.0 / dt) * u - stepper.op.matrix * u);
  }
  return u;
}

namespace {

void require_cap(Index n, Index cap, const char* what) {
  if (n > cap) {
    throw Error(ErrorKind::over_dense_cap, std::string(what) + " needs dense matrices; n = " + std::to_string(n) +
                                               " exceeds the cap " + std::to_string(cap));
  }
}

// Spectral norm through the largest singular value.
Scalar spectral_norm(const Matrix& x) {
  Eigen::BDCSVD<Matrix> svd(x);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

Matrix matrix_power(Matrix base, int n) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = result * base;
      }
    }
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

}  // namespace

Propagator dense_propagator(const DiscreteOperator& op, Scalar t, Index dense_cap) {
  const Index n = op.size();
  require_cap(n, dense_cap, "dense_propagator");
  if (!(t >= 0.0)) throw Error(ErrorKind::invalid_argument, "dense_propagator needs t >= 0");
  Propagator p;
  p.t = t;
  if (t == 0.0) {
    p.T = Matrix::Identity(n, n);
    return p;
  }
  const Matrix a = Matrix(op.matrix);
  if (!op.zmatrix) {
    p.T = (-t * a).exp();
    p.accuracy = 1e-14;
    return p;
  }

  // e^{-tA} = e^{-ts} e^{t(sI - A)}, and sI - A >= 0 entrywise.
  const Scalar s = std::max(0.0, a.diagonal().maxCoeff());
  Matrix b = -a;
  b.diagonal().array() += s;
  const Scalar norm = b.cwiseAbs().colwise().sum().maxCoeff() * t;
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Scalar theta = std::ldexp(t, -squarings);
  b *= theta;

  Matrix e = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  Scalar tail = 1.0;
  for (int k = 1; k <= 60; ++k) {
    term = (term * b) / static_cast<Scalar>(k);
    e += term;
    const Scalar term_norm = term.colwise().sum().maxCoeff();
    tail = term_norm / e.colwise().sum().maxCoeff();
    if (tail < 1e-18) break;
  }
  e *= std::exp(-theta * s);
  for (int k = 0; k < squarings; ++k) e = e * e;
  p.T = std::move(e);
  p.accuracy = std::ldexp(tail + static_cast<Scalar>(n) * std::numeric_limits<Scalar>::epsilon(), squarings);
  return p;
}

Scalar kato_defect(const SparseMatrix& a, const Vector& u) {
  // Row i of A u+ - 1_{u_i>0} A u, summed term by term as A_ij (u+_j - 1_{u_i>0} u_j)
  // so no cancellation between the two products can masquerade as a violation.
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < a.outerSize(); ++i) {
    const bool pos = u[i] > 0.0;
    Scalar s = 0.0;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      const Scalar uj = u[it.col()];
      s += it.value() * (std::max(uj, 0.0) - (pos ? uj : 0.0));
    }
    worst = std::max(worst, s);
  }
  return worst;
}

Scalar check_kato(const DiscreteOperator& op, const Vector& u) {
  if (!op.zmatrix) throw Error(ErrorKind::not_zmatrix, "check_kato needs a Z-matrix (-A must generate a positive semigroup)");
  if (u.size() != op.size()) throw Error(ErrorKind::invalid_argument, "vector has the wrong size");
  return kato_defect(op.matrix, u);
}

Scalar check_sandwich(const DiscreteOperator& op, const Weight& m, Scalar t, Index dense_cap) {
  require_same_mask(op.mask, m.mask, "weight is defined on a different mask than the operator");
  const Matrix tt = dense_propagator(op, t, dense_cap).T;
  const Matrix tm = dense_propagator(add_potential(op, m), t, dense_cap).T;
  const Scalar w = m.max();
  const Scalar lower = (std::exp(-w * t) * tt - tm).maxCoeff();
  const Scalar upper = (tm - std::exp(w * t) * tt).maxCoeff();
  return std::max(lower, upper);
}

Scalar check_trotter(const DiscreteOperator& op, const Weight& m, Scalar t, int n_steps, Index dense_cap) {
  require_same_mask(op.mask, m.mask, "weight is defined on a different mask than the operator");
  if (n_steps < 1) throw Error(ErrorKind::invalid_argument, "check_trotter needs n_steps >= 1");
  const Scalar tau = t / n_steps;
  Matrix step = dense_propagator(op, tau, dense_cap).T;
  step *= (-tau * m.values).array().exp().matrix().asDiagonal();
  const Matrix split = matrix_power(step, n_steps);
  const Matrix exact = dense_propagator(add_potential(op, m), t, dense_cap).T;
  return spectral_norm(split - exact);
}

Scalar check_domination(const DiscreteOperator& lower, const DiscreteOperator& upper, Scalar t, Index dense_cap) {
  require_same_mask(lower.mask, upper.mask, "domination check needs both operators on the same mask");
  return (dense_propagator(lower, t, dense_cap).T - dense_propagator(upper, t, dense_cap).T).maxCoeff();
}

Scalar check_gaussian_domination(const DiscreteOperator& op, Scalar t, Index dense_cap) {
  const Matrix tt = dense_propagator(op, t, dense_cap).T;
  const DomainMask& mask = *op.mask;
  const int dim = mask.dim();
  const Scalar h = mask.h();
  const Scalar scale = std::pow(4.0 * std::numbers::pi * t, -0.5 * dim) * std::pow(h, dim);
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < mask.size(); ++i) {
    const Eigen::Vector2d xi = mask.center(i);
    for (Index j = 0; j < mask.size(); ++j) {
      const Scalar r2 = (xi - mask.center(j)).squaredNorm();
      worst = std::max(worst, tt(i, j) - scale * std::exp(-r2 / (4.0 * t)));
    }
  }
  return worst;
}

SubmarkovReport check_submarkov(const DiscreteOperator& op, Scalar t, Index dense_cap) {
  if (!op.zmatrix) throw Error(ErrorKind::not_zmatrix, "check_submarkov needs a Z-matrix");
  SubmarkovReport r;
  Vector ones = Vector::Ones(op.size());
  Vector v;
  if (op.size() <= dense_cap) {
    v = dense_propagator(op, t, dense_cap).T * ones;
  } else {
    r.dense = false;
    v = evolve(Stepper{op, t / 100.0, Scheme::implicit_euler}, ones, t);
  }
  r.max_excess = (v - ones).maxCoeff();
  r.min_value = v.minCoeff();
  return r;
}

PositivityCertificate check_positivity_improving(const DiscreteOperator& op, Scalar t, Index source) {
  if (!op.zmatrix) throw Error(ErrorKind::not_zmatrix, "check_positivity_improving needs a Z-matrix");
  if (!(t > 0.0)) throw Error(ErrorKind::invalid_argument, "check_positivity_improving needs t > 0");
  if (source < 0 || source >= op.size()) throw Error(ErrorKind::invalid_argument, "source cell out of range");
  Vector point = Vector::Zero(op.size());
  point[source] = 1.0;
  const Vector u = evolve(Stepper{op, t, Scheme::implicit_euler}, point, t);
  PositivityCertificate cert;
  cert.min_entry = u.minCoeff();
  cert.min_in_component = std::numeric_limits<Scalar>::infinity();
  const DomainMask& mask = *op.mask;
  for (Index c = 0; c < op.size(); ++c) {
    if (mask.component(c) == mask.component(source)) {
      cert.min_in_component = std::min(cert.min_in_component, u[c]);
    } else {
      cert.max_off_component = std::max(cert.max_off_component, std::abs(u[c]));
    }
  }
  cert.positivity_improving = cert.min_entry > 0.0;
  return cert;
}

std::vector<Scalar> ultracontractivity_window(const DiscreteOperator& op, int count) {
  const Scalar lo = 2.0 * op.h() * op.h();
  const Scalar hi = 0.1 / principal_pair(op).lambda1;
  std::vector<Scalar> ts;
  if (!(hi > lo) || count < 2) return ts;
  for (int k = 0; k < count; ++k) {
    ts.push_back(lo * std::pow(hi / lo, static_cast<Scalar>(k) / (count - 1)));
  }
  return ts;
}

UltraFit fit_ultracontractivity(const DiscreteOperator& op, const std::vector<Scalar>& t_list, Index dense_cap) {
  const Index n = op.size();
  require_cap(n, dense_cap, "fit_ultracontractivity");
  const Scalar h = op.h();
  const int dim = op.mask->dim();
  UltraFit fit;
  for (const Scalar t : t_list) {
    if (t > 0.0 && h * h / t <= 0.5 * (1.0 + 1e-12)) fit.t.push_back(t);
  }
  if (fit.t.size() < 4) {
    throw Error(ErrorKind::invalid_argument, "fit_ultracontractivity needs at least 4 times with h^2/t <= 0.5, got " +
                                                 std::to_string(fit.t.size()));
  }
  const Scalar scale = std::pow(h, -0.5 * dim);
  if (op.symmetric) {
    // Row norms of V e^{-tD} V^T: |row_i|^2 = sum_k V_ik^2 e^{-2 t d_k}.
    Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(op.matrix)};
    const Matrix v2 = es.eigenvectors().cwiseAbs2();
    for (const Scalar t : fit.t) {
      const Vector decay = (-2.0 * t * es.eigenvalues()).array().exp().matrix();
      fit.norms.push_back(std::sqrt((v2 * decay).maxCoeff()) * scale);
    }
  } else {
    for (const Scalar t : fit.t) {
      fit.norms.push_back(dense_propagator(op, t, dense_cap).T.rowwise().norm().maxCoeff() * scale);
    }
  }
  // Least-squares slope of log norm against -log t.
  const auto m = static_cast<Index>(fit.t.size());
  Vector x(m), y(m);
  for (Index k = 0; k < m; ++k) {
    x[k] = -std::log(fit.t[static_cast<std::size_t>(k)]);
    y[k] = std::log(fit.norms[static_cast<std::size_t>(k)]);
  }
  const Vector xc = x.array() - x.mean();
  fit.exponent = xc.dot(y.array().matrix() - Vector::Constant(m, y.mean())) / xc.squaredNorm();
  return fit;
}

}  // namespace roughlog
