#include "roughlog/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace roughlog {

using nlohmann::json;

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::eig: return "eig";
    case TaskKind::lstar: return "lstar";
    case TaskKind::solve: return "solve";
    case TaskKind::branch: return "branch";
    case TaskKind::semigroup_check: return "semigroup-check";
    case TaskKind::verify: return "verify";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& name) {
  for (TaskKind k : {TaskKind::eig, TaskKind::lstar, TaskKind::solve, TaskKind::branch, TaskKind::semigroup_check,
                     TaskKind::verify}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::config, "unknown task '" + name + "'");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::config, path + ": " + what);
}

// Reads fields of one JSON object and remembers which keys were consumed, so
// typos surface as errors instead of silently falling back to defaults.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }
  ~Node() = default;

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  Scalar number(const std::string& key, std::optional<Scalar> fallback = {}) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      fail(at(key), "required number is missing");
    }
    const json& v = j_[key];
    if (!v.is_number()) fail(at(key), "expected a number");
    const Scalar x = v.get<Scalar>();
    if (!std::isfinite(x)) fail(at(key), "must be finite");
    return x;
  }

  Scalar positive(const std::string& key, std::optional<Scalar> fallback = {}) {
    const Scalar x = number(key, fallback);
    if (!(x > 0.0)) fail(at(key), "must be > 0");
    return x;
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = {}) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      fail(at(key), "required string is missing");
    }
    if (!j_[key].is_string()) fail(at(key), "expected a string");
    return j_[key].get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_boolean()) fail(at(key), "expected true or false");
    return j_[key].get<bool>();
  }

  const json* child(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_[key] : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(at(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

DomainConfig parse_domain(const json& j, const std::string& path) {
  Node n(j, path);
  DomainConfig d;
  const std::string shape = n.text("shape");
  try {
    d.shape.kind = shape_kind_from_string(shape);
  } catch (const Error&) {
    fail(n.at("shape"), "unknown shape '" + shape + "'");
  }
  switch (d.shape.kind) {
    case ShapeKind::interval: d.shape = ShapeSpec::interval(); break;
    case ShapeKind::lshape: d.shape = ShapeSpec::lshape(); break;
    case ShapeKind::slit: d.shape = ShapeSpec::slit(); break;
    default: break;
  }
  d.shape.x0 = n.number("x0", d.shape.x0);
  d.shape.x1 = n.number("x1", d.shape.x1);
  d.shape.y0 = n.number("y0", d.shape.y0);
  d.shape.y1 = n.number("y1", d.shape.y1);
  d.shape.cx = n.number("cx", d.shape.cx);
  d.shape.cy = n.number("cy", d.shape.cy);
  d.shape.radius = n.number("radius", d.shape.radius);
  d.shape.inner_radius = n.number("inner_radius", d.shape.inner_radius);
  d.shape.level = static_cast<int>(n.number("level", d.shape.level));
  d.shape.power = n.number("power", d.shape.power);
  d.h = n.positive("h");
  const std::string grid = n.text("grid", std::string("node"));
  if (grid != "node" && grid != "cell") fail(n.at("grid"), "expected 'node' or 'cell'");
  d.node_aligned = grid == "node";
  n.finish();
  try {
    d.shape.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return d;
}

OperatorConfig parse_operator(const json& j, const std::string& path) {
  Node n(j, path);
  OperatorConfig o;
  o.type = n.text("type", std::string("laplacian"));
  if (o.type != "laplacian" && o.type != "divergence") fail(n.at("type"), "expected 'laplacian' or 'divergence'");
  const json* bc = n.child("bc");
  if (!bc) fail(n.at("bc"), "required object is missing");
  {
    Node b(*bc, n.at("bc"));
    const std::string kind = b.text("kind");
    try {
      o.bc = bc_kind_from_string(kind);
    } catch (const Error&) {
      fail(b.at("kind"), "unknown boundary condition '" + kind + "'");
    }
    if (o.bc == BcKind::robin) {
      o.beta = b.positive("beta");
    } else if (b.has("beta")) {
      fail(b.at("beta"), "only meaningful for robin");
    }
    b.finish();
  }
  if (const json* c = n.child("coefficients")) {
    if (o.type != "divergence") fail(n.at("coefficients"), "only meaningful for type 'divergence'");
    Node k(*c, n.at("coefficients"));
    o.a11 = k.number("a11", 1.0);
    o.a22 = k.number("a22", 1.0);
    o.a12 = k.number("a12", 0.0);
    o.a21 = k.number("a21", 0.0);
    o.ax = k.number("ax", 0.0);
    o.ay = k.number("ay", 0.0);
    o.bx = k.number("bx", 0.0);
    o.by = k.number("by", 0.0);
    o.c = k.number("c", 0.0);
    k.finish();
  }
  n.finish();
  return o;
}

WeightConfig parse_weight(const json& j, const std::string& path) {
  Node n(j, path);
  WeightConfig w;
  w.kind = n.text("kind");
  if (w.kind == "constant") {
    w.value = n.number("value");
  } else if (w.kind == "bump") {
    w.value = n.positive("height");
    w.cx = n.number("cx");
    w.cy = n.number("cy", 0.0);
    w.radius = n.positive("radius");
  } else if (w.kind == "indicator") {
    const json* r = n.child("region");
    if (!r) fail(n.at("region"), "required object is missing");
    Node rn(*r, n.at("region"));
    w.x0 = rn.number("x0");
    w.x1 = rn.number("x1");
    w.y0 = rn.number("y0", -std::numeric_limits<Scalar>::infinity());
    w.y1 = rn.number("y1", std::numeric_limits<Scalar>::infinity());
    rn.finish();
    w.value = n.number("inside", 1.0);
    w.outside = n.number("outside", 0.0);
  } else if (w.kind == "product") {
    const json* f = n.child("factors");
    if (!f || !f->is_array() || f->empty()) fail(n.at("factors"), "expected a nonempty array");
    for (std::size_t k = 0; k < f->size(); ++k) {
      w.factors.push_back(parse_weight((*f)[k], n.at("factors") + "[" + std::to_string(k) + "]"));
    }
  } else {
    fail(n.at("kind"), "unknown weight kind '" + w.kind + "'");
  }
  n.finish();
  return w;
}

NonlinearityConfig parse_nonlinearity(const json& j, const std::string& path) {
  Node n(j, path);
  NonlinearityConfig g;
  g.family = n.text("family");
  if (g.family == "power") {
    g.p = n.number("p");
    if (!(g.p >= 1.0)) fail(n.at("p"), "must be >= 1");
  } else if (g.family == "polynomial") {
    const json* c = n.child("coeffs");
    if (!c || !c->is_array() || c->empty()) fail(n.at("coeffs"), "expected a nonempty array of numbers");
    for (std::size_t k = 0; k < c->size(); ++k) {
      if (!(*c)[k].is_number()) fail(n.at("coeffs") + "[" + std::to_string(k) + "]", "expected a number");
      g.coeffs.push_back((*c)[k].get<Scalar>());
    }
  } else if (g.family != "linear" && g.family != "log1p") {
    fail(n.at("family"), "unknown family '" + g.family + "'");
  }
  n.finish();
  return g;
}

LambdaSpec parse_lambda(const json& j, const std::string& path) {
  if (j.is_number()) return {"absolute", j.get<Scalar>()};
  Node n(j, path);
  LambdaSpec l;
  int given = 0;
  for (const char* mode : {"absolute", "offset", "star_fraction"}) {
    if (n.has(mode)) {
      l.mode = mode;
      l.value = n.number(mode);
      ++given;
    }
  }
  if (given != 1) fail(path, "give exactly one of absolute, offset, star_fraction");
  if (l.mode == "offset" && !(l.value > 0.0)) fail(n.at("offset"), "must be > 0");
  if (l.mode == "star_fraction" && !(l.value > 0.0 && l.value < 1.0)) fail(n.at("star_fraction"), "must be in (0, 1)");
  n.finish();
  return l;
}

TaskConfig parse_task(const json& j, const std::string& path) {
  Node n(j, path);
  TaskConfig t;
  const std::string name = n.text("name");
  try {
    t.kind = task_kind_from_string(name);
  } catch (const Error&) {
    fail(n.at("name"), "unknown task '" + name + "'");
  }
  if (t.kind == TaskKind::solve) {
    const json* l = n.child("lambda");
    if (!l) fail(n.at("lambda"), "required for task solve");
    t.lambda = parse_lambda(*l, n.at("lambda"));
    t.fd_check = n.flag("fd_check", false);
    t.derivatives = n.flag("derivatives", t.fd_check);
  }
  if (t.kind == TaskKind::branch) {
    const json* ls = n.child("lambdas");
    if (!ls || !ls->is_array() || ls->empty()) fail(n.at("lambdas"), "expected a nonempty array");
    for (std::size_t k = 0; k < ls->size(); ++k) {
      t.lambdas.push_back(parse_lambda((*ls)[k], n.at("lambdas") + "[" + std::to_string(k) + "]"));
    }
    t.derivatives = n.flag("derivatives", false);
  }
  if (t.kind == TaskKind::semigroup_check) {
    t.t = n.positive("t", 0.02);
    if (const json* s = n.child("n_steps")) {
      if (!s->is_array() || s->size() < 2) fail(n.at("n_steps"), "expected an array of at least two step counts");
      t.n_steps.clear();
      for (std::size_t k = 0; k < s->size(); ++k) {
        if (!(*s)[k].is_number_integer() || (*s)[k].get<int>() < 1) {
          fail(n.at("n_steps") + "[" + std::to_string(k) + "]", "expected a positive integer");
        }
        t.n_steps.push_back((*s)[k].get<int>());
      }
    }
    t.kato_vectors = static_cast<int>(n.positive("kato_vectors", 50));
  }
  if (t.kind == TaskKind::lstar) t.gamma_kmax = static_cast<int>(n.positive("gamma_kmax", 30));
  if (t.kind == TaskKind::verify) {
    t.level = n.text("level", std::string("quick"));
    if (t.level != "quick" && t.level != "full") fail(n.at("level"), "expected 'quick' or 'full'");
  }
  n.finish();
  return t;
}

Tolerances parse_tolerances(const json& j, const std::string& path) {
  Node n(j, path);
  Tolerances t;
  t.eigen_lambda = n.positive("eigen_lambda", t.eigen_lambda);
  t.eigen_residual = n.positive("eigen_residual", t.eigen_residual);
  t.lstar = n.positive("lstar", t.lstar);
  t.step = n.positive("step", t.step);
  t.agree = n.positive("agree", t.agree);
  t.residual = n.positive("residual", t.residual);
  t.pev = n.positive("pev", t.pev);
  t.kato = n.positive("kato", t.kato);
  t.semigroup = n.positive("semigroup", t.semigroup);
  n.finish();
  return t;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  Node root(doc, "");
  ExperimentConfig cfg;
  cfg.source = doc;
  const json* seed = root.child("seed");
  if (!seed) fail("seed", "required (reproducibility); pass it in the config or with --seed");
  if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
    fail("seed", "expected a nonnegative integer");
  }
  cfg.seed = seed->get<std::uint64_t>();
  cfg.output = root.text("output", std::string("out"));

  const json* task = root.child("task");
  if (!task) fail("task", "required object is missing");
  cfg.task = parse_task(*task, "task");

  const bool needs_problem = cfg.task.kind != TaskKind::verify;
  const json* dom = root.child("domain");
  const json* op = root.child("operator");
  const json* w = root.child("weight");
  const json* g = root.child("nonlinearity");
  if (needs_problem) {
    if (!dom) fail("domain", "required object is missing");
    if (!op) fail("operator", "required object is missing");
  }
  if (dom) cfg.domain = parse_domain(*dom, "domain");
  if (op) cfg.op = parse_operator(*op, "operator");
  const bool needs_weight = cfg.task.kind == TaskKind::lstar || cfg.task.kind == TaskKind::solve ||
                            cfg.task.kind == TaskKind::branch || cfg.task.kind == TaskKind::semigroup_check;
  if (needs_weight && !w) fail("weight", "required for task " + std::string(to_string(cfg.task.kind)));
  if (w) cfg.weight = parse_weight(*w, "weight");
  const bool needs_g = cfg.task.kind == TaskKind::solve || cfg.task.kind == TaskKind::branch;
  if (needs_g && !g) fail("nonlinearity", "required for task " + std::string(to_string(cfg.task.kind)));
  if (g) cfg.g = parse_nonlinearity(*g, "nonlinearity");
  if (const json* t = root.child("tolerances")) cfg.tol = parse_tolerances(*t, "tolerances");
  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, path + ": cannot open");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, path + ": " + e.what());
  }
  return parse_config(doc);
}

MaskPtr build_mask(const DomainConfig& cfg) {
  const ShapeSpec& s = cfg.shape;
  const bool one_d = s.kind == ShapeKind::interval;
  const Scalar y0 = one_d ? 0.0 : s.y0, y1 = one_d ? 0.0 : s.y1;
  const GridSpec grid = cfg.node_aligned ? GridSpec::node_aligned(s.x0, s.x1, y0, y1, cfg.h)
                                         : GridSpec::cell_aligned(s.x0, s.x1, y0, y1, cfg.h);
  return make_domain(s, grid);
}

DiscreteOperator build_operator(const MaskPtr& mask, const OperatorConfig& cfg) {
  BoundaryCondition bc;
  switch (cfg.bc) {
    case BcKind::dirichlet: bc = BoundaryCondition::dirichlet(); break;
    case BcKind::neumann: bc = BoundaryCondition::neumann(); break;
    case BcKind::robin: bc = BoundaryCondition::robin(*mask, cfg.beta); break;
  }
  if (cfg.type == "laplacian") return assemble_laplacian(mask, bc);
  const Index n = mask->size();
  auto fill = [n](Scalar v) { return v == 0.0 ? Vector() : Vector(Vector::Constant(n, v)); };
  EllipticCoefficients k = EllipticCoefficients::identity(n);
  k.a[0] = Vector::Constant(n, cfg.a11);
  k.a[1] = Vector::Constant(n, cfg.a22);
  k.a12 = fill(cfg.a12);
  k.a21 = fill(cfg.a21);
  k.ak = {fill(cfg.ax), fill(cfg.ay)};
  k.bk = {fill(cfg.bx), fill(cfg.by)};
  k.c = fill(cfg.c);
  k.alpha = 0.0;
  return assemble_divergence_form(mask, k, bc);
}

Weight build_weight(const MaskPtr& mask, const WeightConfig& cfg) {
  if (cfg.kind == "constant") return Weight::constant(mask, cfg.value);
  if (cfg.kind == "bump") {
    Weight w{mask, Vector::Zero(mask->size())};
    for (Index c = 0; c < mask->size(); ++c) {
      const Eigen::Vector2d x = mask->center(c);
      const Scalar r2 = ((x - Eigen::Vector2d(cfg.cx, mask->dim() == 1 ? 0.0 : cfg.cy)) / cfg.radius).squaredNorm();
      w.values[c] = cfg.value * std::max(0.0, 1.0 - r2);
    }
    return w;
  }
  if (cfg.kind == "indicator") {
    Weight w = Weight::constant(mask, cfg.outside);
    for (Index c = 0; c < mask->size(); ++c) {
      const Eigen::Vector2d x = mask->center(c);
      const bool inside = x.x() > cfg.x0 && x.x() < cfg.x1 && (mask->dim() == 1 || (x.y() > cfg.y0 && x.y() < cfg.y1));
      if (inside) w.values[c] = cfg.value;
    }
    return w;
  }
  Weight w = Weight::constant(mask, 1.0);
  for (const WeightConfig& f : cfg.factors) w.values = w.values.cwiseProduct(build_weight(mask, f).values);
  return w;
}

Nonlinearity build_nonlinearity(const NonlinearityConfig& cfg) {
  if (cfg.family == "power") return Nonlinearity::power(cfg.p);
  if (cfg.family == "log1p") return Nonlinearity::log1p();
  if (cfg.family == "polynomial") return Nonlinearity::polynomial(cfg.coeffs);
  return Nonlinearity::linear();
}

LogisticOptions build_options(const Tolerances& tol, std::uint64_t seed) {
  LogisticOptions o;
  o.eigen.seed = seed;
  o.eigen.lambda_tol = tol.eigen_lambda;
  o.eigen.residual_tol = tol.eigen_residual;
  o.lstar.tol = tol.lstar;
  o.lstar.eigen = o.eigen;
  o.step_tol = tol.step;
  o.agree_tol = tol.agree;
  return o;
}

}  // namespace roughlog
