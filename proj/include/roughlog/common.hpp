#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace roughlog {

using Scalar = double;
using Index = Eigen::Index;

template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<Scalar>;
using Matrix = MatrixX<Scalar>;
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<Scalar>;

enum class ErrorKind {
  degenerate_domain,
  invalid_argument,
  mask_mismatch,
  assembly,
  ellipticity,
  not_zmatrix,
  disconnected,
  solver_failure,
  no_convergence,
  over_dense_cap,
  precondition,
  monotonicity,
  uniqueness,
  config,
  io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library. `kind` lets callers (and the CLI)
/// tell structured numerical failures from usage errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Componentwise positive part u+ = max(u, 0).
template <typename Derived>
auto positive_part(const Eigen::MatrixBase<Derived>& u) {
  return u.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived>
typename Derived::Scalar sup_norm(const Eigen::MatrixBase<Derived>& u) {
  return u.size() == 0 ? typename Derived::Scalar(0) : u.cwiseAbs().maxCoeff();
}

constexpr std::uint64_t default_seed = 20240531ULL;

}  // namespace roughlog
