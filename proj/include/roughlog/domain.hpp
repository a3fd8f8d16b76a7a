#pragma once

#include "roughlog/common.hpp"

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace roughlog {

/// Uniform cell grid. Cell (i, j) has center origin + (i + 1/2, j + 1/2) h.
/// A grid with ny == 1 is one-dimensional.
struct GridSpec {
  Index nx = 1;
  Index ny = 1;
  Scalar h = 1.0;
  Scalar ox = 0.0;
  Scalar oy = 0.0;

  int dim() const { return ny == 1 ? 1 : 2; }
  Index cell_count() const { return nx * ny; }
  Scalar center_x(Index i) const { return ox + (static_cast<Scalar>(i) + 0.5) * h; }
  Scalar center_y(Index j) const { return dim() == 1 ? 0.0 : oy + (static_cast<Scalar>(j) + 0.5) * h; }

  // Grid whose outermost cell centers sit on the edges of [x0, x1] x [y0, y1].
  // Dirichlet data on exterior centers is then imposed exactly on the box
  // boundary. Passing y0 == y1 gives a 1-D grid.
  static GridSpec node_aligned(Scalar x0, Scalar x1, Scalar y0, Scalar y1, Scalar h);
  // Grid whose cells tile [x0, x1] x [y0, y1] exactly.
  static GridSpec cell_aligned(Scalar x0, Scalar x1, Scalar y0, Scalar y1, Scalar h);

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

enum class ShapeKind { interval, square, disk, lshape, slit, koch, cusp, annulus };

const char* to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

/// Declarative shape. Which fields matter depends on `kind`; the
/// bounding box [x0, x1] x [y0, y1] positions every shape.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::square;
  Scalar x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  Scalar cx = 0.5, cy = 0.5;
  Scalar radius = 0.5;
  Scalar inner_radius = 0.25;
  int level = 2;     // koch
  Scalar power = 2;  // cusp

  static ShapeSpec interval(Scalar a = 0.0, Scalar b = 1.0);
  static ShapeSpec square(Scalar x0 = 0.0, Scalar x1 = 1.0, Scalar y0 = 0.0, Scalar y1 = 1.0);
  static ShapeSpec disk(Scalar cx, Scalar cy, Scalar r);
  static ShapeSpec lshape();
  static ShapeSpec slit();
  static ShapeSpec koch(int level);
  static ShapeSpec cusp(Scalar power);
  static ShapeSpec annulus(Scalar cx, Scalar cy, Scalar r_in, Scalar r_out);

  void validate() const;
  // Width of the thinnest part of the shape, used for the resolution warning.
  Scalar smallest_feature() const;
  // Membership of a point in the shape's open region.
  bool contains(Scalar x, Scalar y) const;
};

enum Direction : int { minus_x = 0, plus_x = 1, minus_y = 2, plus_y = 3 };

/// Rasterized bounded domain: interior cells, 2N-neighbour adjacency and
/// connected components. Immutable after construction.
class DomainMask {
 public:
  static std::shared_ptr<const DomainMask> from_flags(const GridSpec& grid, std::vector<char> interior,
                                                      bool under_resolved = false);

  const GridSpec& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  int directions() const { return 2 * grid_.dim(); }
  Scalar h() const { return grid_.h; }
  Index size() const { return static_cast<Index>(cells_.size()); }

  bool in_grid(Index i, Index j) const { return i >= 0 && j >= 0 && i < grid_.nx && j < grid_.ny; }
  // Interior cell index at grid position (i, j), or -1.
  Index cell_at(Index i, Index j) const;
  std::array<Index, 2> position(Index cell) const { return cells_[static_cast<std::size_t>(cell)]; }
  Eigen::Vector2d center(Index cell) const;
  // Interior neighbour across the face in `dir`, or -1 when that face is on the boundary.
  Index neighbor(Index cell, int dir) const {
    return neighbors_[static_cast<std::size_t>(cell * 4 + dir)];
  }
  Index component(Index cell) const { return component_[static_cast<std::size_t>(cell)]; }
  Index component_count() const { return component_count_; }
  bool under_resolved() const { return under_resolved_; }
  const std::vector<char>& interior_flags() const { return interior_; }

  bool operator==(const DomainMask& other) const {
    return grid_ == other.grid_ && interior_ == other.interior_;
  }

 private:
  DomainMask() = default;

  GridSpec grid_;
  std::vector<char> interior_;
  std::vector<Index> index_;
  std::vector<std::array<Index, 2>> cells_;
  std::vector<Index> neighbors_;
  std::vector<Index> component_;
  Index component_count_ = 0;
  bool under_resolved_ = false;
};

using MaskPtr = std::shared_ptr<const DomainMask>;

/// Subset of the interior cells of a mask.
struct CellSet {
  MaskPtr mask;
  std::vector<char> members;

  Index count() const;
  bool contains(Index cell) const { return members[static_cast<std::size_t>(cell)] != 0; }
};

struct BoundaryFace {
  Index cell;
  int direction;
  Scalar measure;
};

MaskPtr make_domain(const ShapeSpec& shape, const GridSpec& grid);

bool is_connected(const DomainMask& mask);

// Euclidean distance from every interior cell center to the nearest
// non-interior cell center (cells outside the grid count as exterior).
Vector exterior_distance(const DomainMask& mask);

// Cells whose exterior distance exceeds delta + h/2.
CellSet interior_truncation(const MaskPtr& mask, Scalar delta);

std::vector<BoundaryFace> boundary_faces(const DomainMask& mask);

// Text format: header `nx ny h ox oy`, then ny rows of nx `0`/`1` characters.
void write_mask(std::ostream& out, const DomainMask& mask);
MaskPtr read_mask(std::istream& in);

}  // namespace roughlog
