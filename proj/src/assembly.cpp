#include "roughlog/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace roughlog {

const char* to_string(BcKind kind) {
  switch (kind) {
    case BcKind::dirichlet: return "dirichlet";
    case BcKind::neumann: return "neumann";
    case BcKind::robin: return "robin";
  }
  return "?";
}

BcKind bc_kind_from_string(const std::string& name) {
  for (auto kind : {BcKind::dirichlet, BcKind::neumann, BcKind::robin}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::invalid_argument, "unknown boundary condition '" + name + "'");
}

BoundaryCondition BoundaryCondition::robin(const DomainMask& mask, Scalar beta) {
  if (!(beta > 0.0)) throw Error(ErrorKind::invalid_argument, "Robin beta must be > 0");
  return {BcKind::robin, std::vector<Scalar>(boundary_faces(mask).size(), beta), beta};
}

EllipticCoefficients EllipticCoefficients::identity(Index n) {
  EllipticCoefficients k;
  k.a = {Vector::Ones(n), Vector::Ones(n)};
  k.alpha = 1.0;
  return k;
}

void DiscreteOperator::refresh_flags() {
  zmatrix = true;
  row_sum_zero = true;
  for (Index r = 0; r < matrix.outerSize(); ++r) {
    Scalar sum = 0.0, abs_sum = 0.0;
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
      if (it.col() != r && it.value() > 0.0) zmatrix = false;
      sum += it.value();
      abs_sum += std::abs(it.value());
    }
    if (std::abs(sum) > 1e-13 * abs_sum) row_sum_zero = false;
  }
  const SparseMatrix t = matrix.transpose();
  symmetric = t.nonZeros() == matrix.nonZeros();
  for (Index r = 0; symmetric && r < matrix.outerSize(); ++r) {
    SparseMatrix::InnerIterator a(matrix, r), b(t, r);
    for (; a && b; ++a, ++b) {
      if (a.col() != b.col() || a.value() != b.value()) {
        symmetric = false;
        break;
      }
    }
    if (symmetric && (a || b)) symmetric = false;
  }
}

Weight Weight::constant(const MaskPtr& mask, Scalar value) {
  return Weight{mask, Vector::Constant(mask->size(), value)};
}

void require_same_mask(const MaskPtr& a, const MaskPtr& b, const char* what) {
  if (a == b) return;
  if (!a || !b || !(*a == *b)) throw Error(ErrorKind::mask_mismatch, what);
}

namespace {

Scalar harmonic(Scalar a, Scalar b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

Scalar entry(const Vector& v, Index c) { return v.size() == 0 ? 0.0 : v[c]; }

void check_size(const Vector& v, Index n, const char* name, bool optional) {
  if ((optional && v.size() == 0) || v.size() == n) return;
  throw Error(ErrorKind::assembly, std::string("coefficient ") + name + " has " + std::to_string(v.size()) +
                                       " entries, expected " + std::to_string(n));
}

void check_bc(const DomainMask& mask, const BoundaryCondition& bc) {
  if (bc.kind != BcKind::robin) return;
  const std::size_t faces = boundary_faces(mask).size();
  if (bc.beta.size() != faces) {
    throw Error(ErrorKind::assembly, "Robin face missing a beta value (" + std::to_string(bc.beta.size()) +
                                         " given for " + std::to_string(faces) + " faces)");
  }
  for (std::size_t f = 0; f < faces; ++f) {
    if (!(bc.beta[f] > 0.0) || bc.beta[f] < bc.beta_floor) {
      throw Error(ErrorKind::assembly, "Robin beta at face " + std::to_string(f) + " is below the declared floor");
    }
  }
}

DiscreteOperator assemble(const MaskPtr& mask, const EllipticCoefficients& k, const BoundaryCondition& bc) {
  const Index n = mask->size();
  const int dim = mask->dim();
  const Scalar h = mask->h();
  const Scalar h2 = h * h;
  for (int axis = 0; axis < dim; ++axis) {
    check_size(k.a[static_cast<std::size_t>(axis)], n, axis == 0 ? "a11" : "a22", false);
    check_size(k.ak[static_cast<std::size_t>(axis)], n, "a_k", true);
    check_size(k.bk[static_cast<std::size_t>(axis)], n, "b_k", true);
  }
  check_size(k.a12, n, "a12", true);
  check_size(k.a21, n, "a21", true);
  check_size(k.c, n, "c", true);
  check_bc(*mask, bc);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(n) * (dim == 2 ? 9 : 3));
  std::size_t face = 0;
  bool cross_terms = false;

  for (Index c = 0; c < n; ++c) {
    Scalar diag = entry(k.c, c);
    for (int d = 0; d < 2 * dim; ++d) {
      const auto axis = static_cast<std::size_t>(d / 2);
      const Scalar side = d % 2 == 1 ? 1.0 : -1.0;
      const Index nb = mask->neighbor(c, d);
      const Scalar a_c = k.a[axis][c];

      // Diffusion.
      if (nb >= 0) {
        const Scalar coef = harmonic(a_c, k.a[axis][nb]) / h2;
        diag += coef;
        trips.emplace_back(c, nb, -coef);
      } else if (bc.kind == BcKind::dirichlet) {
        diag += a_c / h2;
      } else if (bc.kind == BcKind::robin) {
        const Scalar beta = bc.beta[face];
        diag += a_c * beta / (h * (a_c + beta * h));
      }

      // -d_k(a_k u): conservative upwind, velocity -a_k.
      if (k.ak[axis].size() > 0) {
        if (nb >= 0) {
          const Scalar out = side * -0.5 * (k.ak[axis][c] + k.ak[axis][nb]);
          if (out > 0.0) {
            diag += out / h;
          } else if (out < 0.0) {
            trips.emplace_back(c, nb, out / h);
          }
        } else if (bc.kind == BcKind::dirichlet) {
          const Scalar out = side * -k.ak[axis][c];
          if (out > 0.0) diag += out / h;
        }
      }

      // b_k d_k u: upwind from the side the drift comes from.
      if (k.bk[axis].size() > 0) {
        const Scalar b = k.bk[axis][c];
        const bool upwind_side = (b > 0.0 && side < 0.0) || (b < 0.0 && side > 0.0);
        if (upwind_side) {
          const Scalar coef = std::abs(b) / h;
          if (nb >= 0) {
            diag += coef;
            trips.emplace_back(c, nb, -coef);
          } else if (bc.kind == BcKind::dirichlet) {
            diag += coef;
          }
        }
      }

      if (nb < 0) ++face;
    }

    // -(a12 + a21) d_xy u on the diagonal neighbours.
    if (dim == 2 && k.has_off_diagonal()) {
      const Scalar s = (entry(k.a12, c) + entry(k.a21, c)) / (4.0 * h2);
      if (s != 0.0) {
        const auto [i, j] = mask->position(c);
        const std::array<std::array<int, 3>, 4> corners{{{1, 1, -1}, {-1, -1, -1}, {1, -1, 1}, {-1, 1, 1}}};
        for (const auto& [di, dj, sign] : corners) {
          const Index nb = mask->cell_at(i + di, j + dj);
          if (nb >= 0) trips.emplace_back(c, nb, sign * s);
        }
        cross_terms = true;
      }
    }
    trips.emplace_back(c, c, diag);
  }

  DiscreteOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  op.mask = mask;
  op.bc = bc;
  op.refresh_flags();
  if (!is_connected(*mask)) op.warnings.emplace_back("mask is disconnected; the operator is reducible");
  if (mask->under_resolved()) op.warnings.emplace_back("mask under-resolves the shape's smallest feature");
  if (cross_terms && !op.zmatrix) {
    op.warnings.emplace_back("mixed-derivative terms produced positive off-diagonal entries; not a Z-matrix");
  }
  return op;
}

}  // namespace

DiscreteOperator assemble_laplacian(const MaskPtr& mask, const BoundaryCondition& bc) {
  return assemble(mask, EllipticCoefficients::identity(mask->size()), bc);
}

DiscreteOperator assemble_divergence_form(const MaskPtr& mask, const EllipticCoefficients& coeffs,
                                          const BoundaryCondition& bc) {
  if (coeffs.size() != mask->size()) {
    throw Error(ErrorKind::assembly, "coefficient vectors do not match the mask size");
  }
  validate_ellipticity(coeffs, mask->dim());
  return assemble(mask, coeffs, bc);
}

DiscreteOperator add_diagonal(const DiscreteOperator& op, const Vector& v, Scalar scale) {
  if (v.size() != op.size()) throw Error(ErrorKind::mask_mismatch, "diagonal vector does not match the operator");
  DiscreteOperator out = op;
  if (scale != 0.0) {
    for (Index i = 0; i < out.size(); ++i) out.matrix.coeffRef(i, i) += scale * v[i];
  }
  const bool symmetric = out.symmetric;
  const bool zmatrix = out.zmatrix;
  out.refresh_flags();
  // A diagonal update cannot change either property.
  out.symmetric = symmetric;
  out.zmatrix = zmatrix;
  return out;
}

DiscreteOperator add_potential(const DiscreteOperator& op, const Weight& m, Scalar scale) {
  require_same_mask(op.mask, m.mask, "weight is defined on a different mask than the operator");
  return add_diagonal(op, m.values, scale);
}

DiscreteOperator shift(const DiscreteOperator& op, Scalar c) {
  return add_diagonal(op, Vector::Ones(op.size()), c);
}

TruncatedWeight truncate_weight(const Weight& m, const MaskPtr& mask, Scalar delta) {
  require_same_mask(m.mask, mask, "weight is defined on a different mask");
  TruncatedWeight out{m, interior_truncation(mask, delta), false};
  for (Index c = 0; c < mask->size(); ++c) {
    if (!out.support.contains(c)) out.weight.values[c] = 0.0;
  }
  out.zero_flag = out.weight.identically_zero();
  return out;
}

Scalar validate_ellipticity(const EllipticCoefficients& coeffs, int dim) {
  const Index n = coeffs.size();
  if (n == 0) throw Error(ErrorKind::ellipticity, "empty coefficient set");
  Scalar alpha_min = std::numeric_limits<Scalar>::infinity();
  for (Index c = 0; c < n; ++c) {
    Scalar lo = coeffs.a[0][c];
    if (dim == 2) {
      const Scalar a11 = coeffs.a[0][c];
      const Scalar a22 = coeffs.a[1][c];
      const Scalar s = 0.5 * (entry(coeffs.a12, c) + entry(coeffs.a21, c));
      const Scalar mean = 0.5 * (a11 + a22);
      const Scalar half = 0.5 * (a11 - a22);
      lo = mean - std::sqrt(half * half + s * s);
    }
    if (!std::isfinite(lo) || lo <= 0.0) {
      std::ostringstream msg;
      msg << "smallest tensor eigenvalue " << lo << " <= 0 at cell " << c;
      throw Error(ErrorKind::ellipticity, msg.str());
    }
    alpha_min = std::min(alpha_min, lo);
  }
  if (coeffs.alpha > alpha_min * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "declared alpha " << coeffs.alpha << " exceeds the measured minimum " << alpha_min;
    throw Error(ErrorKind::ellipticity, msg.str());
  }
  return alpha_min;
}

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  char buf[64];
  for (Index r = 0; r < matrix.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << r + 1 << ' ' << it.col() + 1 << ' ' << buf << '\n';
    }
  }
}

Scalar gershgorin_lower(const SparseMatrix& matrix) {
  Scalar lower = std::numeric_limits<Scalar>::infinity();
  for (Index r = 0; r < matrix.outerSize(); ++r) {
    Scalar d = 0.0, off = 0.0;
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
      if (it.col() == r) {
        d += it.value();
      } else {
        off += std::abs(it.value());
      }
    }
    lower = std::min(lower, d - off);
  }
  return lower;
}

}  // namespace roughlog
