#pragma once

#include "roughlog/assembly.hpp"
#include "roughlog/common.hpp"

#include <vector>

namespace roughlog {

enum class Scheme { implicit_euler, crank_nicolson };

struct Stepper {
  DiscreteOperator op;
  Scalar dt = 1e-3;
  Scheme scheme = Scheme::implicit_euler;
};

// ceil(t/dt) steps with dt shrunk so that the steps land exactly on t.
Vector evolve(const Stepper& stepper, const Vector& u0, Scalar t);

constexpr Index default_dense_cap = 900;

struct Propagator {
  Matrix T;  // e^{-tA}
  Scalar t = 0.0;
  Scalar accuracy = 0.0;  // estimated relative truncation error
};

// Scaling and squaring. For Z-matrices the series is taken on the nonnegative
// matrix t(sI - A), so every entry of the result is a sum of nonnegative terms.
Propagator dense_propagator(const DiscreteOperator& op, Scalar t, Index dense_cap = default_dense_cap);

// max_i (A u+)_i - 1_{u_i > 0} (A u)_i. Kato predicts <= 0.
Scalar check_kato(const DiscreteOperator& op, const Vector& u);
// The same quantity without the Z-matrix requirement, for negative controls.
Scalar kato_defect(const SparseMatrix& a, const Vector& u);

// Largest entrywise violation of e^{-wt} T <= T_m <= e^{wt} T, w = max|m|.
Scalar check_sandwich(const DiscreteOperator& op, const Weight& m, Scalar t, Index dense_cap = default_dense_cap);

// Spectral norm of (e^{-(t/n)A} e^{-(t/n)m})^n - e^{-t(A+m)}.
Scalar check_trotter(const DiscreteOperator& op, const Weight& m, Scalar t, int n_steps,
                     Index dense_cap = default_dense_cap);

// max entry of T_lower(t) - T_upper(t).
Scalar check_domination(const DiscreteOperator& lower, const DiscreteOperator& upper, Scalar t,
                        Index dense_cap = default_dense_cap);

// max entry of T(t) - G(t) h^N with G the free-space heat kernel sampled at cell centers.
Scalar check_gaussian_domination(const DiscreteOperator& op, Scalar t, Index dense_cap = default_dense_cap);

struct SubmarkovReport {
  Scalar max_excess = 0.0;  // max_i (T(t)1)_i - 1
  Scalar min_value = 0.0;   // min_i (T(t)1)_i
  bool dense = true;
};

SubmarkovReport check_submarkov(const DiscreteOperator& op, Scalar t, Index dense_cap = default_dense_cap);

struct PositivityCertificate {
  Scalar min_entry = 0.0;            // over all cells
  Scalar min_in_component = 0.0;     // over the source's component
  Scalar max_off_component = 0.0;    // over the other components
  bool positivity_improving = false; // min_entry > 0
};

// One implicit-Euler step of length t from a point mass at `source`.
PositivityCertificate check_positivity_improving(const DiscreteOperator& op, Scalar t, Index source = 0);

struct UltraFit {
  Scalar exponent = 0.0;
  std::vector<Scalar> t;
  std::vector<Scalar> norms;
};

// Log-spaced times inside [2h^2, 0.1/lambda1].
std::vector<Scalar> ultracontractivity_window(const DiscreteOperator& op, int count = 8);

UltraFit fit_ultracontractivity(const DiscreteOperator& op, const std::vector<Scalar>& t_list,
                                Index dense_cap = default_dense_cap);

}  // namespace roughlog
