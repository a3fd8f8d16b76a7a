#include "roughlog/acceptance.hpp"

#include "roughlog/assembly.hpp"
#include "roughlog/domain.hpp"
#include "roughlog/logistic.hpp"
#include "roughlog/semigroup.hpp"
#include "roughlog/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace roughlog {

SuiteLevel suite_level_from_string(const std::string& name) {
  if (name == "quick") return SuiteLevel::quick;
  if (name == "full") return SuiteLevel::full;
  throw Error(ErrorKind::config, "level must be 'quick' or 'full', got '" + name + "'");
}

std::vector<int> suite_criteria(SuiteLevel level) {
  if (level == SuiteLevel::quick) return {1, 3, 7, 10, 13};
  std::vector<int> all(15);
  for (int k = 0; k < 15; ++k) all[k] = k + 1;
  return all;
}

int worker_count() {
  const char* env = std::getenv("ROUGHLOG_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 64));
}

namespace {

constexpr Scalar pi = std::numbers::pi;

using Rng = std::mt19937_64;

Scalar uniform(Rng& rng, Scalar a, Scalar b) { return std::uniform_real_distribution<Scalar>(a, b)(rng); }

std::string fmt(Scalar x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

MaskPtr unit_interval(Scalar h) { return make_domain(ShapeSpec::interval(), GridSpec::node_aligned(0, 1, 0, 0, h)); }
MaskPtr unit_square(Scalar h) { return make_domain(ShapeSpec::square(), GridSpec::node_aligned(0, 1, 0, 1, h)); }

// m = 0 on the open subsquare (1/4, 3/4)^2, 1 elsewhere.
Weight degenerate_weight(const MaskPtr& mask) {
  return Weight::indicator(mask, [](Scalar x, Scalar y) {
    return !(x > 0.25 && x < 0.75 && y > 0.25 && y < 0.75);
  });
}

// Random fill of a small grid, reduced to its largest connected component.
MaskPtr random_connected_mask(Rng& rng, Index max_cells) {
  while (true) {
    const Index nx = std::uniform_int_distribution<Index>(8, 40)(rng);
    const Index ny = std::uniform_int_distribution<Index>(8, 40)(rng);
    if (nx * ny > max_cells) continue;
    const Scalar fill = uniform(rng, 0.65, 0.95);
    GridSpec grid{nx, ny, 1.0 / static_cast<Scalar>(std::max(nx, ny)), 0.0, 0.0};
    std::vector<char> flags(static_cast<std::size_t>(nx * ny));
    for (char& f : flags) f = uniform(rng, 0, 1) < fill;
    if (std::none_of(flags.begin(), flags.end(), [](char f) { return f; })) continue;
    const MaskPtr raw = DomainMask::from_flags(grid, flags);
    std::vector<Index> sizes(static_cast<std::size_t>(raw->component_count()), 0);
    for (Index c = 0; c < raw->size(); ++c) ++sizes[static_cast<std::size_t>(raw->component(c))];
    const Index best = std::max_element(sizes.begin(), sizes.end()) - sizes.begin();
    if (sizes[static_cast<std::size_t>(best)] < 20) continue;
    std::vector<char> keep(flags.size(), 0);
    for (Index c = 0; c < raw->size(); ++c) {
      if (raw->component(c) == best) {
        const auto p = raw->position(c);
        keep[static_cast<std::size_t>(p[1] * nx + p[0])] = 1;
      }
    }
    return DomainMask::from_flags(grid, keep);
  }
}

BoundaryCondition random_bc(Rng& rng, const DomainMask& mask) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return BoundaryCondition::dirichlet();
    case 1: return BoundaryCondition::neumann();
    default: {
      BoundaryCondition bc = BoundaryCondition::robin(mask, 1.0);
      for (Scalar& b : bc.beta) b = uniform(rng, 0.1, 10.0);
      bc.beta_floor = 0.1;
      return bc;
    }
  }
}

// Divergence form with random diffusion, drifts and potential. Upwinding
// keeps it a Z-matrix.
DiscreteOperator random_operator(Rng& rng, const MaskPtr& mask) {
  const Index n = mask->size();
  EllipticCoefficients k = EllipticCoefficients::identity(n);
  for (int d = 0; d < 2; ++d) {
    k.a[d] = Vector::NullaryExpr(n, [&] { return uniform(rng, 0.5, 2.0); });
    k.ak[d] = Vector::NullaryExpr(n, [&] { return uniform(rng, -2.0, 2.0); });
    k.bk[d] = Vector::NullaryExpr(n, [&] { return uniform(rng, -2.0, 2.0); });
  }
  k.c = Vector::NullaryExpr(n, [&] { return uniform(rng, 0.0, 1.0); });
  k.alpha = 0.0;
  return assemble_divergence_form(mask, k, random_bc(rng, *mask));
}

Weight random_weight(Rng& rng, const MaskPtr& mask, Scalar top) {
  return Weight{mask, Vector::NullaryExpr(mask->size(), [&] { return uniform(rng, 0.0, top); })};
}

using Body = std::function<void(CriterionResult&, Rng&)>;

struct Entry {
  int id;
  const char* name;
  double time_limit;
  Body body;
};

// ---- criteria ----------------------------------------------------------------

void c1(CriterionResult& r, Rng&) {
  std::vector<Scalar> err;
  Scalar rel64 = 0.0;
  for (const int n : {32, 64, 128}) {
    const Scalar h = 1.0 / n;
    const Scalar l = principal_pair(assemble_laplacian(unit_interval(h), BoundaryCondition::dirichlet())).lambda1;
    const Scalar closed = 2.0 / (h * h) * (1.0 - std::cos(pi * h));
    if (n == 64) rel64 = std::abs(l - closed) / closed;
    err.push_back(std::abs(l - pi * pi));
  }
  const Scalar o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
  r.value = rel64;
  r.tolerance = 1e-8;
  r.relation = "<=";
  r.numeric_pass = rel64 <= 1e-8 && std::abs(o1 - 2.0) <= 0.2 && std::abs(o2 - 2.0) <= 0.2;
  r.detail = "orders " + fmt(o1) + ", " + fmt(o2) + " (need 2.0 +- 0.2)";
}

void c2(CriterionResult& r, Rng&) {
  std::vector<Scalar> err;
  for (const int n : {32, 64, 128}) {
    const Scalar l = principal_pair(assemble_laplacian(unit_square(1.0 / n), BoundaryCondition::dirichlet())).lambda1;
    err.push_back(l - 2.0 * pi * pi);
  }
  const Scalar q1 = err[0] / err[1], q2 = err[1] / err[2];
  r.value = q2;
  r.tolerance = 4.0;
  r.relation = "in [3.6, 4.4]";
  auto ok = [](Scalar q) { return q >= 3.6 && q <= 4.4; };
  r.numeric_pass = ok(q1) && ok(q2);
  r.detail = "ratios " + fmt(q1) + " (1/32 vs 1/64), " + fmt(q2) + " (1/64 vs 1/128); error at 1/128 " + fmt(err[2]);
}

void c3(CriterionResult& r, Rng& rng) {
  Scalar worst = std::numeric_limits<Scalar>::infinity();
  Index largest = 0;
  for (int k = 0; k < 100; ++k) {
    const MaskPtr mask = random_connected_mask(rng, 2000);
    largest = std::max(largest, mask->size());
    const DiscreteOperator op = assemble_laplacian(mask, random_bc(rng, *mask));
    const Weight m1 = random_weight(rng, mask, 5.0);
    Weight m2 = m1;
    for (Index c = 0; c < mask->size(); ++c) {
      if (uniform(rng, 0, 1) < 0.2) m2.values[c] += uniform(rng, 0.1, 1.0);
    }
    if (m2.values == m1.values) m2.values[0] += 0.5;
    const Scalar l1 = lambda1_weight(op, m1), l2 = lambda1_weight(op, m2);
    worst = std::min(worst, l2 - l1);
  }
  r.value = worst;
  r.tolerance = 1e-10;
  r.relation = ">";
  r.numeric_pass = worst > 1e-10;
  r.detail = "100 pairs, largest mask " + std::to_string(largest) + " cells";
}

void c4(CriterionResult& r, Rng&) {
  const MaskPtr mask = unit_square(1.0 / 32);
  const DiscreteOperator op = assemble_laplacian(mask, BoundaryCondition::dirichlet());
  Weight m{mask, Vector(mask->size())};
  for (Index c = 0; c < mask->size(); ++c) {
    const Eigen::Vector2d x = mask->center(c);
    m.values[c] = 10.0 * (1.0 + std::sin(3.0 * x.x()) * std::cos(2.0 * x.y()));
  }
  std::vector<Scalar> deltas;
  for (Scalar d = 0.25; d > 0.25 / 64; d *= 0.5) deltas.push_back(d);
  deltas.push_back(0.0);
  const ProbeResult probe = weight_continuity_probe(op, m, deltas);
  Scalar drop = 0.0;
  for (std::size_t k = 1; k < probe.rows.size(); ++k) {
    drop = std::max(drop, probe.rows[k - 1].lambda1 - probe.rows[k].lambda1);
  }
  const ProbeRow& last = probe.rows.back();
  const Scalar gap = std::abs(last.lambda1 - probe.lambda1_full);
  r.value = gap;
  r.tolerance = 1e-6;
  r.relation = "<";
  const Scalar mono_slack = 1e-10 * (1.0 + probe.lambda1_full);
  r.numeric_pass = gap < 1e-6 && last.vector_distance < 1e-4 && drop <= mono_slack;
  std::ostringstream d;
  d << "lambda1(m_delta):";
  for (const ProbeRow& row : probe.rows) d << " " << fmt(row.lambda1);
  d << "; max decrease " << fmt(drop) << "; final |u_delta - u| " << fmt(last.vector_distance) << " (< 1e-4)";
  r.detail = d.str();
}

void c5(CriterionResult& r, Rng&) {
  const MaskPtr mask = unit_square(1.0 / 128);
  const DiscreteOperator op = assemble_laplacian(mask, BoundaryCondition::dirichlet());
  const LambdaStarResult ls = lambda_star(op, degenerate_weight(mask), default_gamma_schedule(20));
  std::vector<char> flags(static_cast<std::size_t>(mask->grid().cell_count()), 0);
  for (Index c = 0; c < mask->size(); ++c) {
    const Eigen::Vector2d x = mask->center(c);
    if (x.x() > 0.25 && x.x() < 0.75 && x.y() > 0.25 && x.y() < 0.75) {
      const auto p = mask->position(c);
      flags[static_cast<std::size_t>(p[1] * mask->grid().nx + p[0])] = 1;
    }
  }
  const MaskPtr sub = DomainMask::from_flags(mask->grid(), flags);
  const Scalar oracle = principal_pair(assemble_laplacian(sub, BoundaryCondition::dirichlet())).lambda1;
  const Scalar rel = ls.infinite ? std::numeric_limits<Scalar>::infinity() : std::abs(ls.value - oracle) / oracle;
  r.value = rel;
  r.tolerance = 0.02;
  r.relation = "<=";
  r.numeric_pass = rel <= 0.02;
  r.detail = "lambda* " + fmt(ls.value) + ", sub-mask lambda1 " + fmt(oracle) + ", continuum 8 pi^2 = " +
             fmt(8 * pi * pi) + (ls.extrapolated ? ", extrapolated" : "");
}

void c6(CriterionResult& r, Rng& rng) {
  const MaskPtr mask = unit_square(1.0 / 32);
  const DiscreteOperator op = assemble_laplacian(mask, BoundaryCondition::dirichlet());
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  Scalar cmax = 0.0;
  bool finite = true;
  for (int k = 0; k < 20; ++k) {
    const Scalar cx = uniform(rng, 0.3, 0.7), cy = uniform(rng, 0.3, 0.7), rad = uniform(rng, 0.05, 0.2);
    const Scalar height = uniform(rng, 1.0, 50.0);
    Weight m{mask, Vector::Zero(mask->size())};
    for (Index c = 0; c < mask->size(); ++c) {
      const Scalar q = (mask->center(c) - Eigen::Vector2d(cx, cy)).squaredNorm() / (rad * rad);
      m.values[c] = height * std::max(0.0, 1.0 - q);
    }
    if (m.identically_zero()) m.values[mask->cell_at(16, 16)] = height;
    const ComparisonResult cr = eigenvector_comparison(op, m);
    finite = finite && std::isfinite(cr.c_min);
    cmax = std::max(cmax, cr.c_min);
    worst = std::max(worst, cr.max_violation);
  }
  r.value = worst;
  r.tolerance = 1e-12;
  r.relation = "<=";
  r.numeric_pass = finite && worst <= 1e-12;
  r.detail = "20 bumps, largest c_min " + fmt(cmax);
}

void c7(CriterionResult& r, Rng& rng) {
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  int non_z = 0;
  for (int k = 0; k < 20; ++k) {
    const MaskPtr mask = random_connected_mask(rng, 1600);
    const DiscreteOperator op = random_operator(rng, mask);
    if (!op.zmatrix) ++non_z;
    for (int v = 0; v < 50; ++v) {
      Vector u = Vector::NullaryExpr(mask->size(), [&] { return uniform(rng, -1.0, 1.0); });
      u[0] = 1.0;
      u[mask->size() - 1] = -1.0;
      worst = std::max(worst, check_kato(op, u));
    }
  }
  r.value = worst;
  r.tolerance = 1e-12;
  r.relation = "<=";
  r.numeric_pass = worst <= 1e-12 && non_z == 0;
  r.detail = "1000 vectors on 20 operators";
}

void c8(CriterionResult& r, Rng& rng) {
  const MaskPtr square = unit_square(1.0 / 20);
  const MaskPtr line = unit_interval(1.0 / 64);
  std::vector<DiscreteOperator> ops = {
      assemble_laplacian(square, BoundaryCondition::dirichlet()),
      assemble_laplacian(square, BoundaryCondition::neumann()),
      assemble_laplacian(square, BoundaryCondition::robin(*square, 2.0)),
      assemble_laplacian(line, BoundaryCondition::dirichlet()),
  };
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  for (const DiscreteOperator& op : ops) {
    const Weight m = random_weight(rng, op.mask, 20.0);
    for (const Scalar t : {0.005, 0.02}) worst = std::max(worst, check_sandwich(op, m, t));
  }
  r.value = worst;
  r.tolerance = 1e-8;
  r.relation = "<=";
  r.numeric_pass = worst <= 1e-8;
  r.detail = "4 operators (n <= 361), t in {0.005, 0.02}";
}

void c9(CriterionResult& r, Rng&) {
  struct Case {
    DiscreteOperator op;
    Weight m;
    Scalar t;
    const char* label;
  };
  const MaskPtr line = unit_interval(1.0 / 64);
  const MaskPtr square = unit_square(1.0 / 20);
  auto smooth = [](const MaskPtr& mask, Scalar amp, Scalar freq) {
    Weight m{mask, Vector(mask->size())};
    for (Index c = 0; c < mask->size(); ++c) {
      const Eigen::Vector2d x = mask->center(c);
      m.values[c] = amp * (1.0 + std::sin(freq * (x.x() + 0.7 * x.y())));
    }
    return m;
  };
  std::vector<Case> cases;
  cases.push_back({assemble_laplacian(line, BoundaryCondition::dirichlet()), smooth(line, 5.0, 7.0), 0.05, "1-D dirichlet"});
  cases.push_back({assemble_laplacian(square, BoundaryCondition::dirichlet()), smooth(square, 5.0, 7.0), 0.05,
                   "2-D dirichlet"});
  cases.push_back({assemble_laplacian(square, BoundaryCondition::robin(*square, 1.0)), smooth(square, 2.0, 4.0), 0.1,
                   "2-D robin"});
  bool ok = true;
  Scalar far = 2.0;
  std::ostringstream d;
  for (const Case& c : cases) {
    const Scalar e1 = check_trotter(c.op, c.m, c.t, 64);
    const Scalar e2 = check_trotter(c.op, c.m, c.t, 128);
    const Scalar q = e1 / e2;
    ok = ok && q >= 1.7 && q <= 2.3;
    if (std::abs(q - 2.0) >= std::abs(far - 2.0)) far = q;
    d << c.label << " " << fmt(q) << "; ";
  }
  r.value = far;
  r.tolerance = 2.0;
  r.relation = "in [1.7, 2.3]";
  r.numeric_pass = ok;
  r.detail = d.str() + "n_steps 64 -> 128";
}

void c10(CriterionResult& r, Rng&) {
  const MaskPtr mask = make_domain(ShapeSpec::square(), GridSpec::cell_aligned(0, 1, 0, 1, 1.0 / 16));
  LogisticProblem pb{assemble_laplacian(mask, BoundaryCondition::neumann()), Weight::constant(mask, 1.0),
                     Nonlinearity::linear(), 0.7};
  const LogisticSolution sol = solve_logistic(pb);
  const Scalar err = sup_norm(sol.u - Vector::Constant(mask->size(), 0.7));
  const Derivative v = branch_derivative(pb, sol.u);
  const Scalar verr = sup_norm(v.v - Vector::Ones(mask->size()));
  const Scalar merr = std::abs(sol.stability_margin - 0.7);
  r.value = err;
  r.tolerance = 1e-8;
  r.relation = "<=";
  r.numeric_pass = err <= 1e-8 && verr <= 1e-6 && merr <= 1e-6;
  r.detail = "|v - 1| " + fmt(verr) + " (<= 1e-6), stability margin " + fmt(sol.stability_margin) + " (0.7 +- 1e-6)";
}

void c11(CriterionResult& r, Rng&) {
  const MaskPtr line = unit_interval(1.0 / 64);
  const MaskPtr square = unit_square(1.0 / 32);
  LogisticProblem p1{assemble_laplacian(line, BoundaryCondition::dirichlet()), Weight::constant(line, 1.0),
                     Nonlinearity::linear(), 0.0};
  p1.lambda = principal_pair(p1.op).lambda1 + 5.0;
  LogisticProblem p2{assemble_laplacian(square, BoundaryCondition::dirichlet()), degenerate_weight(square),
                     Nonlinearity::linear(), 0.0};
  const Scalar lstar = lambda_star(p2.op, p2.m).value;
  p2.lambda = 0.5 * lstar;
  bool ok = true;
  Scalar worst_gap = 0.0;
  std::ostringstream d;
  for (const auto* pb : {&p1, &p2}) {
    const LogisticSolution s = solve_logistic(*pb, {}, pb == &p2 ? lstar : -1.0);
    const Scalar rel_gap = s.limit_gap / std::max<Scalar>(1.0, sup_norm(s.u));
    worst_gap = std::max(worst_gap, rel_gap);
    ok = ok && rel_gap <= 1e-8 && s.pev_gap <= 1e-6 && s.stability_margin > 0.0;
    d << (pb == &p1 ? "1-D" : "2-D degenerate") << ": pev_gap " << fmt(s.pev_gap) << ", margin "
      << fmt(s.stability_margin) << "; ";
  }
  r.value = worst_gap;
  r.tolerance = 1e-8;
  r.relation = "<=";
  r.numeric_pass = ok;
  r.detail = d.str() + "gap relative to max(1, |u|)";
}

void c12(CriterionResult& r, Rng&) {
  const MaskPtr square = unit_square(1.0 / 32);
  LogisticProblem pb{assemble_laplacian(square, BoundaryCondition::dirichlet()), degenerate_weight(square),
                     Nonlinearity::linear(), 0.0};
  const Scalar l1 = principal_pair(pb.op).lambda1;
  const Scalar lstar = lambda_star(pb.op, pb.m).value;
  std::vector<Scalar> grid = {l1 + 1e-3, l1 + 1e-2, l1 + 1e-1, l1 + 1.0};
  for (const Scalar f : {0.35, 0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.95}) grid.push_back(f * lstar);
  const Branch br = continue_branch(pb, grid);
  // Final approach: the last decade of lambda* - lambda, i.e. from the point
  // whose distance to lambda* is ten times the last one.
  const Scalar far_gap = 10.0 * (lstar - grid.back());
  std::size_t mid = 0;
  while (lstar - grid[mid] > far_gap * (1.0 + 1e-12)) ++mid;
  const Scalar growth = br.sup_norms.back() / br.sup_norms[mid];
  r.value = growth;
  r.tolerance = 10.0;
  r.relation = ">=";
  r.numeric_pass = br.min_increase > 0.0 && br.sup_norms.front() < 1e-2 && growth >= 10.0;
  r.detail = "12 points, min pointwise increase " + fmt(br.min_increase) + ", sup at lambda1+1e-3 " +
             fmt(br.sup_norms.front()) + ", sup " + fmt(br.sup_norms[mid]) + " -> " + fmt(br.sup_norms.back()) +
             " from lambda " + fmt(grid[mid]) + " to " + fmt(grid.back());
}

void c13(CriterionResult& r, Rng&) {
  const MaskPtr square = unit_square(1.0 / 20);
  const Scalar t = 0.02;
  const DiscreteOperator d = assemble_laplacian(square, BoundaryCondition::dirichlet());
  const DiscreteOperator n = assemble_laplacian(square, BoundaryCondition::neumann());
  const DiscreteOperator b = assemble_laplacian(square, BoundaryCondition::robin(*square, 1.0));
  const Scalar db = check_domination(d, b, t), bn = check_domination(b, n, t), dn = check_domination(d, n, t);
  const SubmarkovReport sn = check_submarkov(n, t), sr = check_submarkov(b, t);
  const Scalar neumann_dev = std::max(std::abs(sn.max_excess), std::abs(1.0 - sn.min_value));
  const Scalar gauss = check_gaussian_domination(d, t);
  const Scalar worst = std::max({db, bn, dn});
  r.value = worst;
  r.tolerance = 1e-8;
  r.relation = "<=";
  r.numeric_pass = worst <= 1e-8 && neumann_dev <= 1e-12 && sr.max_excess <= 1e-10 && sr.min_value < 1.0 &&
                   gauss <= 5e-3;
  r.detail = "D<=R " + fmt(db) + ", R<=N " + fmt(bn) + ", D<=N " + fmt(dn) + "; |T_N 1 - 1| " + fmt(neumann_dev) +
             " (<= 1e-12); Robin excess " + fmt(sr.max_excess) + ", min " + fmt(sr.min_value) + "; Gaussian " +
             fmt(gauss) + " (<= 5e-3)";
}

void c14(CriterionResult& r, Rng&) {
  const MaskPtr square = unit_square(1.0 / 20);
  const PositivityCertificate good =
      check_positivity_improving(assemble_laplacian(square, BoundaryCondition::dirichlet()), 0.01, 0);
  // Two squares separated by an empty column.
  GridSpec grid{21, 10, 0.05, 0.0, 0.0};
  std::vector<char> flags(static_cast<std::size_t>(grid.cell_count()), 1);
  for (Index j = 0; j < grid.ny; ++j) flags[static_cast<std::size_t>(j * grid.nx + 10)] = 0;
  const MaskPtr split = DomainMask::from_flags(grid, flags);
  const PositivityCertificate bad =
      check_positivity_improving(assemble_laplacian(split, BoundaryCondition::dirichlet()), 0.01, 0);
  r.value = good.min_entry;
  r.tolerance = 0.0;
  r.relation = ">";
  r.numeric_pass = good.positivity_improving && bad.min_in_component > 0.0 && bad.max_off_component == 0.0 &&
                   !bad.positivity_improving;
  r.detail = "disconnected control: min in component " + fmt(bad.min_in_component) + ", max off component " +
             fmt(bad.max_off_component);
}

void c15(CriterionResult& r, Rng&) {
  const DiscreteOperator d1 = assemble_laplacian(unit_interval(1.0 / 64), BoundaryCondition::dirichlet());
  const DiscreteOperator d2 = assemble_laplacian(unit_square(1.0 / 30), BoundaryCondition::dirichlet());
  const Scalar e1 = fit_ultracontractivity(d1, ultracontractivity_window(d1)).exponent;
  const Scalar e2 = fit_ultracontractivity(d2, ultracontractivity_window(d2)).exponent;
  r.value = e2;
  r.tolerance = 0.5;
  r.relation = "in [0.4, 0.6]";
  r.numeric_pass = std::abs(e1 - 0.25) <= 0.1 && std::abs(e2 - 0.5) <= 0.1;
  r.detail = "1-D exponent " + fmt(e1) + " (0.25 +- 0.1), 2-D exponent " + fmt(e2);
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {1, "1-D Dirichlet eigenvalue", 1.0, c1},
      {2, "2-D Dirichlet eigenvalue convergence", 10.0, c2},
      {3, "strict eigenvalue monotonicity", 30.0, c3},
      {4, "eigenvalue continuity along m_delta", 20.0, c4},
      {5, "lambda* on the degenerate square", 60.0, c5},
      {6, "eigenvector comparison", 30.0, c6},
      {7, "Kato inequality", 10.0, c7},
      {8, "semigroup sandwich", 60.0, c8},
      {9, "Trotter first order", 60.0, c9},
      {10, "logistic exact case", 5.0, c10},
      {11, "uniqueness and eigenvalue identity", 60.0, c11},
      {12, "branch structure", 300.0, c12},
      {13, "dominations and submarkov", 90.0, c13},
      {14, "positivity improving", 5.0, c14},
      {15, "ultracontractivity exponent", 60.0, c15},
  };
  return entries;
}

}  // namespace

CriterionResult run_criterion(int id, std::uint64_t seed) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [id](const Entry& e) { return e.id == id; });
  if (it == reg.end()) throw Error(ErrorKind::invalid_argument, "no criterion " + std::to_string(id));
  CriterionResult r;
  r.id = id;
  r.name = it->name;
  r.time_limit = it->time_limit;
  // Each criterion draws from its own stream so results do not depend on which others ran.
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(id)));
  const auto start = std::chrono::steady_clock::now();
  try {
    it->body(r, rng);
  } catch (const std::exception& e) {
    r.numeric_pass = false;
    r.value = std::numeric_limits<Scalar>::quiet_NaN();
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_suite(SuiteLevel level, std::uint64_t seed, int threads) {
  const std::vector<int> ids = suite_criteria(level);
  std::vector<CriterionResult> out(ids.size());
  if (threads <= 1) {
    for (std::size_t k = 0; k < ids.size(); ++k) out[k] = run_criterion(ids[k], seed);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(threads, static_cast<int>(ids.size())); ++w) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < ids.size();) out[k] = run_criterion(ids[k], seed);
    });
  }
  for (std::thread& t : pool) t.join();
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.pass() ? "PASS" : "FAIL") << "  [" << std::setw(2) << r.id << "] " << r.name << ": value " << fmt(r.value)
    << " " << r.relation;
  if (r.relation.rfind("in ", 0) != 0) s << " " << fmt(r.tolerance);
  s << "; " << std::fixed << std::setprecision(2) << r.seconds
    << " s (limit " << std::setprecision(0) << r.time_limit << " s)";
  if (!r.detail.empty()) s << "; " << r.detail;
  return s.str();
}

}  // namespace roughlog
