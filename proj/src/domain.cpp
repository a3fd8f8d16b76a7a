#include "roughlog/domain.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

namespace roughlog {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_domain: return "degenerate domain";
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::mask_mismatch: return "mask mismatch";
    case ErrorKind::assembly: return "assembly error";
    case ErrorKind::ellipticity: return "ellipticity violation";
    case ErrorKind::not_zmatrix: return "not a Z-matrix";
    case ErrorKind::disconnected: return "disconnected domain";
    case ErrorKind::solver_failure: return "solver failure";
    case ErrorKind::no_convergence: return "no convergence";
    case ErrorKind::over_dense_cap: return "dense cap exceeded";
    case ErrorKind::precondition: return "precondition violated";
    case ErrorKind::monotonicity: return "monotonicity violation";
    case ErrorKind::uniqueness: return "uniqueness failure";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

namespace {

constexpr std::array<std::array<int, 2>, 4> offsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

Index count_cells(Scalar length, Scalar h) {
  const Scalar ratio = length / h;
  const Scalar rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max<Scalar>(1.0, ratio)) {
    throw Error(ErrorKind::invalid_argument, "box length is not an integer multiple of h");
  }
  return static_cast<Index>(rounded);
}

using Point = Eigen::Vector2d;

std::vector<Point> koch_polygon(const ShapeSpec& s) {
  // Equilateral triangle inscribed in the bounding box, counter-clockwise.
  const Scalar side = 0.75 * std::min(s.x1 - s.x0, s.y1 - s.y0);
  const Scalar height = side * std::sqrt(3.0) / 2.0;
  const Point c{s.cx, s.cy};
  // Centroid at c; snowflake bumps stay inside the box for this side length.
  std::vector<Point> poly{c + Point{-side / 2, -height / 3}, c + Point{side / 2, -height / 3},
                          c + Point{0.0, 2 * height / 3}};
  const Scalar cos60 = 0.5;
  const Scalar sin60 = std::sqrt(3.0) / 2.0;
  for (int k = 0; k < s.level; ++k) {
    std::vector<Point> next;
    next.reserve(poly.size() * 4);
    for (std::size_t e = 0; e < poly.size(); ++e) {
      const Point p = poly[e];
      const Point q = poly[(e + 1) % poly.size()];
      const Point d = (q - p) / 3.0;
      const Point a = p + d;
      const Point b = p + 2.0 * d;
      // Rotate d by -60 degrees: the outward side of a CCW edge.
      const Point peak = a + Point{cos60 * d.x() + sin60 * d.y(), -sin60 * d.x() + cos60 * d.y()};
      next.push_back(p);
      next.push_back(a);
      next.push_back(peak);
      next.push_back(b);
    }
    poly = std::move(next);
  }
  return poly;
}

bool point_in_polygon(const std::vector<Point>& poly, Scalar x, Scalar y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > y) != (b.y() > y)) {
      const Scalar xc = a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

// Slit {x = xs, ys0 <= y < ys1} meets the half-open cell [ax, ax+h) x [ay, ay+h).
bool cell_meets_slit(const ShapeSpec& s, Scalar ax, Scalar ay, Scalar h) {
  const Scalar xs = 0.5 * (s.x0 + s.x1);
  const Scalar ys0 = s.y0;
  const Scalar ys1 = 0.5 * (s.y0 + s.y1);
  return ax <= xs && xs < ax + h && ay < ys1 && ay + h > ys0;
}

// Exact 1-D squared distance transform (lower envelope of parabolas).
void distance_transform_1d(const std::vector<Scalar>& f, std::vector<Scalar>& d) {
  const std::size_t n = f.size();
  std::vector<std::size_t> v(n);
  std::vector<Scalar> z(n + 1);
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::size_t k = 0;
  std::size_t first = n;
  for (std::size_t q = 0; q < n; ++q) {
    if (std::isfinite(f[q])) {
      first = q;
      break;
    }
  }
  d.assign(n, inf);
  if (first == n) return;
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    const auto sq = static_cast<Scalar>(q);
    Scalar s;
    while (true) {
      const auto sv = static_cast<Scalar>(v[k]);
      s = ((f[q] + sq * sq) - (f[v[k]] + sv * sv)) / (2.0 * sq - 2.0 * sv);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<Scalar>(q)) ++k;
    const Scalar diff = static_cast<Scalar>(q) - static_cast<Scalar>(v[k]);
    d[q] = diff * diff + f[v[k]];
  }
}

}  // namespace

GridSpec GridSpec::node_aligned(Scalar x0, Scalar x1, Scalar y0, Scalar y1, Scalar h) {
  GridSpec g;
  g.h = h;
  g.nx = count_cells(x1 - x0, h) + 1;
  g.ox = x0 - 0.5 * h;
  if (y1 > y0) {
    g.ny = count_cells(y1 - y0, h) + 1;
    g.oy = y0 - 0.5 * h;
  } else {
    g.ny = 1;
    g.oy = 0.0;
  }
  g.validate();
  return g;
}

GridSpec GridSpec::cell_aligned(Scalar x0, Scalar x1, Scalar y0, Scalar y1, Scalar h) {
  GridSpec g;
  g.h = h;
  g.nx = count_cells(x1 - x0, h);
  g.ox = x0;
  if (y1 > y0) {
    g.ny = count_cells(y1 - y0, h);
    g.oy = y0;
  } else {
    g.ny = 1;
    g.oy = 0.0;
  }
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::invalid_argument, "grid cell width h must be > 0");
  if (nx < 1 || ny < 1) throw Error(ErrorKind::invalid_argument, "grid needs at least one cell per axis");
}

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::interval: return "interval";
    case ShapeKind::square: return "square";
    case ShapeKind::disk: return "disk";
    case ShapeKind::lshape: return "lshape";
    case ShapeKind::slit: return "slit";
    case ShapeKind::koch: return "koch";
    case ShapeKind::cusp: return "cusp";
    case ShapeKind::annulus: return "annulus";
  }
  return "?";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  for (auto kind : {ShapeKind::interval, ShapeKind::square, ShapeKind::disk, ShapeKind::lshape, ShapeKind::slit,
                    ShapeKind::koch, ShapeKind::cusp, ShapeKind::annulus}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::invalid_argument, "unknown shape '" + name + "'");
}

ShapeSpec ShapeSpec::interval(Scalar a, Scalar b) {
  ShapeSpec s;
  s.kind = ShapeKind::interval;
  s.x0 = a;
  s.x1 = b;
  s.y0 = s.y1 = 0.0;
  return s;
}

ShapeSpec ShapeSpec::square(Scalar x0, Scalar x1, Scalar y0, Scalar y1) {
  ShapeSpec s;
  s.kind = ShapeKind::square;
  s.x0 = x0;
  s.x1 = x1;
  s.y0 = y0;
  s.y1 = y1;
  return s;
}

ShapeSpec ShapeSpec::disk(Scalar cx, Scalar cy, Scalar r) {
  ShapeSpec s;
  s.kind = ShapeKind::disk;
  s.cx = cx;
  s.cy = cy;
  s.radius = r;
  return s;
}

ShapeSpec ShapeSpec::lshape() {
  ShapeSpec s;
  s.kind = ShapeKind::lshape;
  return s;
}

ShapeSpec ShapeSpec::slit() {
  ShapeSpec s;
  s.kind = ShapeKind::slit;
  return s;
}

ShapeSpec ShapeSpec::koch(int level) {
  ShapeSpec s;
  s.kind = ShapeKind::koch;
  s.level = level;
  return s;
}

ShapeSpec ShapeSpec::cusp(Scalar power) {
  ShapeSpec s;
  s.kind = ShapeKind::cusp;
  s.power = power;
  return s;
}

ShapeSpec ShapeSpec::annulus(Scalar cx, Scalar cy, Scalar r_in, Scalar r_out) {
  ShapeSpec s;
  s.kind = ShapeKind::annulus;
  s.cx = cx;
  s.cy = cy;
  s.inner_radius = r_in;
  s.radius = r_out;
  return s;
}

void ShapeSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); };
  if (!(x1 > x0)) fail("shape box needs x1 > x0");
  if (kind != ShapeKind::interval && !(y1 > y0)) fail("shape box needs y1 > y0");
  switch (kind) {
    case ShapeKind::disk:
      if (!(radius > 0)) fail("disk radius must be > 0");
      break;
    case ShapeKind::annulus:
      if (!(inner_radius > 0) || !(radius > inner_radius)) fail("annulus needs 0 < r_in < r_out");
      break;
    case ShapeKind::koch:
      if (level < 0 || level > 5) fail("koch level must lie in [0, 5]");
      break;
    case ShapeKind::cusp:
      if (power < 2 || power > 6) fail("cusp power must lie in [2, 6]");
      break;
    default: break;
  }
}

Scalar ShapeSpec::smallest_feature() const {
  const Scalar w = x1 - x0;
  const Scalar hgt = y1 - y0;
  switch (kind) {
    case ShapeKind::interval: return w;
    case ShapeKind::square: return std::min(w, hgt);
    case ShapeKind::disk: return 2.0 * radius;
    case ShapeKind::lshape:
    case ShapeKind::slit: return 0.5 * std::min(w, hgt);
    case ShapeKind::koch: return 0.75 * std::min(w, hgt) / std::pow(3.0, level);
    case ShapeKind::cusp: return hgt * std::pow(0.5, power);
    case ShapeKind::annulus: return radius - inner_radius;
  }
  return w;
}

bool ShapeSpec::contains(Scalar x, Scalar y) const {
  const bool in_box = x > x0 && x < x1 && y > y0 && y < y1;
  switch (kind) {
    case ShapeKind::interval: return x > x0 && x < x1;
    case ShapeKind::square:
    case ShapeKind::slit: return in_box;
    case ShapeKind::disk: return std::hypot(x - cx, y - cy) < radius;
    case ShapeKind::lshape: {
      const Scalar xm = 0.5 * (x0 + x1);
      const Scalar ym = 0.5 * (y0 + y1);
      return in_box && !(x >= xm && y >= ym);
    }
    case ShapeKind::koch: return point_in_polygon(koch_polygon(*this), x, y);
    case ShapeKind::cusp: {
      if (!in_box) return false;
      const Scalar len = x1 - x0;
      const Scalar half = 0.5 * (y1 - y0) * std::pow((x - x0) / len, power);
      return std::abs(y - 0.5 * (y0 + y1)) < half;
    }
    case ShapeKind::annulus: {
      const Scalar r = std::hypot(x - cx, y - cy);
      return r > inner_radius && r < radius;
    }
  }
  return false;
}

std::shared_ptr<const DomainMask> DomainMask::from_flags(const GridSpec& grid, std::vector<char> interior,
                                                         bool under_resolved) {
  grid.validate();
  if (static_cast<Index>(interior.size()) != grid.cell_count()) {
    throw Error(ErrorKind::invalid_argument, "interior flag count does not match the grid");
  }
  std::shared_ptr<DomainMask> mask(new DomainMask());
  mask->grid_ = grid;
  mask->interior_ = std::move(interior);
  mask->under_resolved_ = under_resolved;
  mask->index_.assign(mask->interior_.size(), -1);
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      const auto flat = static_cast<std::size_t>(j * grid.nx + i);
      if (mask->interior_[flat]) {
        mask->index_[flat] = static_cast<Index>(mask->cells_.size());
        mask->cells_.push_back({i, j});
      }
    }
  }
  if (mask->cells_.empty()) throw Error(ErrorKind::degenerate_domain, "mask has no interior cells");

  const int ndir = 2 * grid.dim();
  mask->neighbors_.assign(mask->cells_.size() * 4, -1);
  for (std::size_t c = 0; c < mask->cells_.size(); ++c) {
    const auto [i, j] = mask->cells_[c];
    for (int d = 0; d < ndir; ++d) {
      mask->neighbors_[c * 4 + static_cast<std::size_t>(d)] = mask->cell_at(i + offsets[d][0], j + offsets[d][1]);
    }
  }

  mask->component_.assign(mask->cells_.size(), -1);
  std::queue<Index> queue;
  for (Index start = 0; start < mask->size(); ++start) {
    if (mask->component_[static_cast<std::size_t>(start)] >= 0) continue;
    const Index id = mask->component_count_++;
    mask->component_[static_cast<std::size_t>(start)] = id;
    queue.push(start);
    while (!queue.empty()) {
      const Index c = queue.front();
      queue.pop();
      for (int d = 0; d < ndir; ++d) {
        const Index nb = mask->neighbor(c, d);
        if (nb >= 0 && mask->component_[static_cast<std::size_t>(nb)] < 0) {
          mask->component_[static_cast<std::size_t>(nb)] = id;
          queue.push(nb);
        }
      }
    }
  }
  return mask;
}

Index DomainMask::cell_at(Index i, Index j) const {
  if (!in_grid(i, j)) return -1;
  return index_[static_cast<std::size_t>(j * grid_.nx + i)];
}

Eigen::Vector2d DomainMask::center(Index cell) const {
  const auto [i, j] = position(cell);
  return {grid_.center_x(i), grid_.center_y(j)};
}

Index CellSet::count() const {
  return static_cast<Index>(std::count(members.begin(), members.end(), char{1}));
}

MaskPtr make_domain(const ShapeSpec& shape, const GridSpec& grid) {
  shape.validate();
  grid.validate();
  if (shape.kind == ShapeKind::interval && grid.dim() != 1) {
    throw Error(ErrorKind::invalid_argument, "interval shape needs a 1-D grid (ny == 1)");
  }
  if (shape.kind != ShapeKind::interval && grid.dim() != 2) {
    throw Error(ErrorKind::invalid_argument, std::string(to_string(shape.kind)) + " shape needs a 2-D grid");
  }
  std::vector<char> flags(static_cast<std::size_t>(grid.cell_count()), 0);
  // The koch polygon is built once rather than per cell.
  std::vector<Point> poly;
  if (shape.kind == ShapeKind::koch) poly = koch_polygon(shape);
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      const Scalar x = grid.center_x(i);
      const Scalar y = grid.center_y(j);
      // Centers within rounding distance of the boundary count as exterior, so
      // node-aligned grids do not depend on how i*h happens to round.
      const Scalar e = 1e-9 * grid.h;
      auto member = [&](Scalar px, Scalar py) {
        return shape.kind == ShapeKind::koch ? point_in_polygon(poly, px, py) : shape.contains(px, py);
      };
      bool inside = member(x, y) && member(x - e, y) && member(x + e, y);
      if (inside && grid.dim() == 2) inside = member(x, y - e) && member(x, y + e);
      if (inside && shape.kind == ShapeKind::slit) {
        const Scalar ax = grid.ox + static_cast<Scalar>(i) * grid.h;
        const Scalar ay = grid.oy + static_cast<Scalar>(j) * grid.h;
        inside = !cell_meets_slit(shape, ax, ay, grid.h);
      }
      flags[static_cast<std::size_t>(j * grid.nx + i)] = inside ? 1 : 0;
    }
  }
  const bool under_resolved = shape.smallest_feature() < 4.0 * grid.h;
  return DomainMask::from_flags(grid, std::move(flags), under_resolved);
}

bool is_connected(const DomainMask& mask) { return mask.component_count() == 1; }

Vector exterior_distance(const DomainMask& mask) {
  const GridSpec& g = mask.grid();
  const bool two_d = g.dim() == 2;
  // Pad by one ring so that off-grid space counts as exterior.
  const Index px = g.nx + 2;
  const Index py = two_d ? g.ny + 2 : 1;
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> f(static_cast<std::size_t>(px * py), 0.0);
  for (Index c = 0; c < mask.size(); ++c) {
    const auto [i, j] = mask.position(c);
    const Index pj = two_d ? j + 1 : 0;
    f[static_cast<std::size_t>(pj * px + i + 1)] = inf;
  }
  std::vector<Scalar> line, out;
  // Rows, then columns.
  for (Index j = 0; j < py; ++j) {
    line.assign(f.begin() + j * px, f.begin() + (j + 1) * px);
    distance_transform_1d(line, out);
    std::copy(out.begin(), out.end(), f.begin() + j * px);
  }
  if (two_d) {
    for (Index i = 0; i < px; ++i) {
      line.resize(static_cast<std::size_t>(py));
      for (Index j = 0; j < py; ++j) line[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>(j * px + i)];
      distance_transform_1d(line, out);
      for (Index j = 0; j < py; ++j) f[static_cast<std::size_t>(j * px + i)] = out[static_cast<std::size_t>(j)];
    }
  }
  Vector dist(mask.size());
  for (Index c = 0; c < mask.size(); ++c) {
    const auto [i, j] = mask.position(c);
    const Index pj = two_d ? j + 1 : 0;
    dist[c] = std::sqrt(f[static_cast<std::size_t>(pj * px + i + 1)]) * g.h;
  }
  return dist;
}

CellSet interior_truncation(const MaskPtr& mask, Scalar delta) {
  if (!(delta >= 0.0)) throw Error(ErrorKind::invalid_argument, "truncation depth delta must be >= 0");
  CellSet set{mask, std::vector<char>(static_cast<std::size_t>(mask->size()), 0)};
  const Vector dist = exterior_distance(*mask);
  const Scalar threshold = delta + 0.5 * mask->h();
  for (Index c = 0; c < mask->size(); ++c) set.members[static_cast<std::size_t>(c)] = dist[c] > threshold ? 1 : 0;
  return set;
}

std::vector<BoundaryFace> boundary_faces(const DomainMask& mask) {
  std::vector<BoundaryFace> faces;
  const Scalar measure = std::pow(mask.h(), mask.dim() - 1);
  for (Index c = 0; c < mask.size(); ++c) {
    for (int d = 0; d < mask.directions(); ++d) {
      if (mask.neighbor(c, d) < 0) faces.push_back({c, d, measure});
    }
  }
  return faces;
}

void write_mask(std::ostream& out, const DomainMask& mask) {
  const GridSpec& g = mask.grid();
  std::ostringstream header;
  header.precision(17);
  header << g.nx << ' ' << g.ny << ' ' << g.h << ' ' << g.ox << ' ' << g.oy << '\n';
  out << header.str();
  const auto& flags = mask.interior_flags();
  for (Index j = 0; j < g.ny; ++j) {
    for (Index i = 0; i < g.nx; ++i) out << (flags[static_cast<std::size_t>(j * g.nx + i)] ? '1' : '0');
    out << '\n';
  }
}

MaskPtr read_mask(std::istream& in) {
  GridSpec g;
  if (!(in >> g.nx >> g.ny >> g.h >> g.ox >> g.oy)) throw Error(ErrorKind::io, "malformed mask header");
  g.validate();
  std::vector<char> flags;
  flags.reserve(static_cast<std::size_t>(g.cell_count()));
  char ch;
  while (static_cast<Index>(flags.size()) < g.cell_count() && in.get(ch)) {
    if (ch == '0' || ch == '1') {
      flags.push_back(ch == '1' ? 1 : 0);
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      throw Error(ErrorKind::io, std::string("unexpected character '") + ch + "' in mask body");
    }
  }
  if (static_cast<Index>(flags.size()) != g.cell_count()) throw Error(ErrorKind::io, "truncated mask body");
  return DomainMask::from_flags(g, std::move(flags));
}

}  // namespace roughlog
