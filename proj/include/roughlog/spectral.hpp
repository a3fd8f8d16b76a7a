#pragma once

#include "roughlog/assembly.hpp"
#include "roughlog/common.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace roughlog {

/// Factorization of (omega I + A). Symmetric operators use LDL^T, the rest
/// use sparse LU. For Z-matrices both keep diagonal pivots, so the solve of an
/// M-matrix with a nonnegative right-hand side stays nonnegative bit for bit.
class ShiftedSolver {
 public:
  ShiftedSolver(const DiscreteOperator& op, Scalar omega);
  // Cellwise shift: factorizes diag(shift) + A.
  ShiftedSolver(const DiscreteOperator& op, const Vector& shift);
  ~ShiftedSolver();
  ShiftedSolver(ShiftedSolver&&) noexcept;
  ShiftedSolver& operator=(ShiftedSolver&&) noexcept;

  Vector solve(const Vector& f) const;
  Scalar omega() const { return shift_.maxCoeff(); }
  const Vector& shift() const { return shift_; }
  Index size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Vector shift_;
  Index n_ = 0;
};

// Solves (omega I + A) u = f and checks the residual against 1e-10 ||f||.
Vector resolvent_solve(const DiscreteOperator& op, Scalar omega, const Vector& f);

struct EigenOptions {
  Scalar lambda_tol = 1e-12;    // relative change in the eigenvalue
  Scalar residual_tol = 1e-10;  // scaled by 1 + |lambda|
  int max_iterations = 10000;
  std::uint64_t seed = default_seed;
  const Vector* start = nullptr;  // positive warm start, optional
};

struct PrincipalPair {
  Scalar lambda1 = 0.0;
  Vector u;  // unit Euclidean norm, strictly positive
  Scalar residual = 0.0;
  int iterations = 0;
  Scalar omega = 0.0;
  bool two_sided = false;
};

// Shift omega = 1 + max(0, -Gershgorin lower bound).
Scalar default_shift(const DiscreteOperator& op);

// Refuses operators that are not Z-matrices or whose mask is disconnected.
void require_positive_structure(const DiscreteOperator& op, const char* what);

PrincipalPair principal_pair(const DiscreteOperator& op, const EigenOptions& options = {});

Scalar lambda1_weight(const DiscreteOperator& op, const Weight& m, Scalar scale = 1.0,
                      const EigenOptions& options = {});

struct GapReport {
  Scalar lambda1 = 0.0;
  Scalar gap = 0.0;
  bool all_real = true;
  bool near_degenerate = false;
  Scalar max_imag = 0.0;
  Vector real_parts;  // ascending
};

GapReport spectral_gap(const DiscreteOperator& op, Index dense_cap = 900, Scalar degenerate_tol = 1e-10);

struct LambdaStarOptions {
  Scalar tol = 1e-8;  // increment threshold, relative to 1 + |lambda|
  Scalar divergence_threshold = 0.5;
  int converged_after = 3;
  EigenOptions eigen;
};

struct LambdaStarResult {
  Scalar value = 0.0;  // +inf when diverging
  bool infinite = false;
  bool extrapolated = false;
  bool converged = false;
  std::vector<std::pair<Scalar, Scalar>> gamma_trace;
};

std::vector<Scalar> default_gamma_schedule(int k_max = 30);

LambdaStarResult lambda_star(const DiscreteOperator& op, const Weight& m,
                             const std::vector<Scalar>& schedule = default_gamma_schedule(),
                             const LambdaStarOptions& options = {});

struct ComparisonResult {
  Scalar c_min = 0.0;
  Scalar max_violation = 0.0;  // max_i u0_i - c_min um_i
  PrincipalPair u0;
  PrincipalPair um;
};

// max over cells of u0/um, for principal vectors of A and A + m. The support
// of m must stay away from cells that touch the exterior.
ComparisonResult eigenvector_comparison(const DiscreteOperator& op, const Weight& m,
                                        const EigenOptions& options = {});

struct ProbeRow {
  Scalar delta = 0.0;
  Scalar lambda1 = 0.0;
  Scalar vector_distance = 0.0;  // ||u_delta - u||_2
  Index support = 0;
};

struct ProbeResult {
  Scalar lambda1_full = 0.0;
  std::vector<ProbeRow> rows;
};

// lambda1(A + scale m_delta) along a decreasing delta schedule.
ProbeResult weight_continuity_probe(const DiscreteOperator& op, const Weight& m, const std::vector<Scalar>& deltas,
                                    Scalar scale = 1.0, const EigenOptions& options = {});

}  // namespace roughlog
