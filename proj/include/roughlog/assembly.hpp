#pragma once

#include "roughlog/common.hpp"
#include "roughlog/domain.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace roughlog {

enum class BcKind { dirichlet, neumann, robin };

const char* to_string(BcKind kind);
BcKind bc_kind_from_string(const std::string& name);

/// Robin data is one beta per entry of boundary_faces(mask), in that order.
struct BoundaryCondition {
  BcKind kind = BcKind::dirichlet;
  std::vector<Scalar> beta;
  Scalar beta_floor = 0.0;  // declared lower bound for beta

  static BoundaryCondition dirichlet() { return {BcKind::dirichlet, {}, 0.0}; }
  static BoundaryCondition neumann() { return {BcKind::neumann, {}, 0.0}; }
  static BoundaryCondition robin(const DomainMask& mask, Scalar beta);
};

/// Per-cell coefficients of
///   Au = -sum_k d_k( sum_j a_kj d_j u + a_k u ) + sum_k b_k d_k u + c u.
/// Only the first dim() entries of the per-axis arrays are read.
struct EllipticCoefficients {
  std::array<Vector, 2> a;   // a_11, a_22
  Vector a12, a21;           // off-diagonal, empty means zero
  std::array<Vector, 2> ak;  // empty means zero
  std::array<Vector, 2> bk;  // empty means zero
  Vector c;                  // empty means zero
  Scalar alpha = 0.0;        // declared ellipticity constant, 0 = not declared

  static EllipticCoefficients identity(Index n);
  Index size() const { return a[0].size(); }
  bool has_off_diagonal() const { return a12.size() > 0 || a21.size() > 0; }
};

/// A + m and its friends. Flags are measured on the stored matrix, not assumed.
struct DiscreteOperator {
  SparseMatrix matrix;
  MaskPtr mask;
  BoundaryCondition bc;
  bool symmetric = false;
  bool zmatrix = false;
  bool row_sum_zero = false;
  std::vector<std::string> warnings;

  Index size() const { return matrix.rows(); }
  Scalar h() const { return mask->h(); }
  // Recompute symmetric / zmatrix / row_sum_zero from the matrix.
  void refresh_flags();
};

/// Nonnegative weight on the interior cells of a mask.
struct Weight {
  MaskPtr mask;
  Vector values;

  static Weight constant(const MaskPtr& mask, Scalar value);
  static Weight zero(const MaskPtr& mask) { return constant(mask, 0.0); }
  // 1 on cells whose center satisfies the predicate, 0 elsewhere.
  template <typename Pred>
  static Weight indicator(const MaskPtr& mask, Pred&& inside, Scalar value = 1.0) {
    Weight w{mask, Vector::Zero(mask->size())};
    for (Index c = 0; c < mask->size(); ++c) {
      const Eigen::Vector2d x = mask->center(c);
      if (inside(x.x(), x.y())) w.values[c] = value;
    }
    return w;
  }

  bool nonnegative() const { return values.size() == 0 || values.minCoeff() >= 0.0; }
  bool identically_zero() const { return values.size() == 0 || values.maxCoeff() <= 0.0; }
  // m >= 0 and m > 0 somewhere.
  bool is_admissible() const { return nonnegative() && !identically_zero(); }
  Scalar max() const { return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff(); }
};

DiscreteOperator assemble_laplacian(const MaskPtr& mask, const BoundaryCondition& bc);
DiscreteOperator assemble_divergence_form(const MaskPtr& mask, const EllipticCoefficients& coeffs,
                                          const BoundaryCondition& bc);

// A + scale * diag(m).
DiscreteOperator add_potential(const DiscreteOperator& op, const Weight& m, Scalar scale = 1.0);
// A + scale * diag(v) for a raw cell vector.
DiscreteOperator add_diagonal(const DiscreteOperator& op, const Vector& v, Scalar scale = 1.0);
DiscreteOperator shift(const DiscreteOperator& op, Scalar c);

struct TruncatedWeight {
  Weight weight;
  CellSet support;
  bool zero_flag = false;  // legal for eigenvalue work, not an admissible weight
};

TruncatedWeight truncate_weight(const Weight& m, const MaskPtr& mask, Scalar delta);

// Minimum over cells of the smallest eigenvalue of the symmetrized tensor.
// Throws an ellipticity error naming the first offending cell when <= 0.
Scalar validate_ellipticity(const EllipticCoefficients& coeffs, int dim = 2);

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix);

// Lower Gershgorin bound min_i (A_ii - sum_{j != i} |A_ij|).
Scalar gershgorin_lower(const SparseMatrix& matrix);

void require_same_mask(const MaskPtr& a, const MaskPtr& b, const char* what);

}  // namespace roughlog
