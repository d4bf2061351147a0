#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svfem/types.hpp"

namespace svfem {

enum class BoundaryTag : unsigned char {
  interior,
  dirichlet,
  slip_top,
  slip_bottom,
  periodic_left,
  periodic_right,
  periodic_bottom,
  periodic_top,
};

std::string_view to_string(BoundaryTag tag);
std::optional<BoundaryTag> parse_boundary_tag(std::string_view name);

enum class Axis { x, y };

/// Edge of the triangulation. Vertices are stored with v[0] < v[1]; cells[0]
/// is the lower-indexed adjacent cell and its outward normal defines the
/// global facet normal. cells[1] == -1 on the boundary.
struct Facet {
  std::array<int, 2> v{};
  std::array<int, 2> cells{-1, -1};
  std::array<int, 2> local{-1, -1};  // local facet number inside cells[i]
};

/// Two boundary facets identified by translation: x(second) = x(first) + shift.
struct PeriodicPair {
  int first = -1;
  int second = -1;
  Vec2 shift = Vec2::Zero();
};

/// Interior face as seen by face integrals: either an interior facet or a
/// periodic pair. The normal is the outward normal of the minus cell, which is
/// always the lower-indexed cell; points on the plus side are x + shift.
struct Face {
  int minus_cell = -1;
  int minus_local = -1;
  int plus_cell = -1;
  int plus_local = -1;
  int minus_facet = -1;
  int plus_facet = -1;
  Vec2 shift = Vec2::Zero();
};

struct CellGeometry {
  Vec2 origin = Vec2::Zero();
  Mat2 jacobian = Mat2::Identity();
  double det = 1.0;
  Mat2 inverse = Mat2::Identity();
  Mat2 inverse_transpose = Mat2::Identity();
  double h = 0.0;  // longest edge
  std::array<Vec2, 3> normals{};
  std::array<double, 3> lengths{};

  Vec2 map(const Vec2& ref) const { return origin + jacobian * ref; }
  Vec2 pull_back(const Vec2& x) const { return inverse * (x - origin); }
  double area() const { return 0.5 * det; }
};

enum class StructuredPattern { crisscross_2x2, uniform_diag };

/// Conforming 2D simplicial triangulation. Immutable after construction apart
/// from tagging and periodic identification, which happen before any space is
/// built on top of it.
class Mesh {
 public:
  Mesh() = default;

  /// Builds facet connectivity; every boundary facet is tagged dirichlet.
  /// Cells with negative orientation are flipped, degenerate ones rejected.
  static Mesh from_cells(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }
  int num_boundary_facets() const;

  const Vec2& vertex(int i) const { return vertices_[i]; }
  std::span<const Vec2> vertices() const { return vertices_; }
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }
  std::span<const std::array<int, 3>> cells() const { return cells_; }
  const Facet& facet(int f) const { return facets_[f]; }
  std::span<const Facet> facets() const { return facets_; }
  /// Global facet index of local facet i (opposite local vertex i).
  int cell_facet(int c, int i) const { return cell_facets_[c][i]; }
  BoundaryTag tag(int f) const { return tags_[f]; }
  bool is_boundary(int f) const { return facets_[f].cells[1] < 0; }

  std::span<const PeriodicPair> periodic_pairs() const { return periodic_pairs_; }
  /// Partner facet of a periodic facet, -1 otherwise.
  int periodic_partner(int f) const { return partner_[f]; }
  std::span<const Face> interior_faces() const { return faces_; }

  CellGeometry geometry(int c) const;
  double cell_area(int c) const;
  double total_area() const;
  double max_h() const;
  /// Vertices (a, b) of local facet i of cell c, in counter-clockwise order.
  std::array<int, 2> local_facet_vertices(int c, int i) const;

  void set_tag(int f, BoundaryTag tag);
  /// Tags all boundary facets lying on the given side of the bounding box.
  void tag_side(Axis axis, bool upper, BoundaryTag tag);

  /// Pairs boundary facets on the lower and upper side of the bounding box in
  /// the given direction. Throws mesh_mismatch when they are not translates.
  void identify_periodic(Axis axis, double period);
  bool is_periodic(Axis axis) const;

  std::array<double, 4> bounding_box() const;  // xmin, xmax, ymin, ymax

 private:
  void rebuild_faces();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> cell_facets_;
  std::vector<BoundaryTag> tags_;
  std::vector<PeriodicPair> periodic_pairs_;
  std::vector<int> partner_;
  std::vector<Face> faces_;
  std::vector<std::pair<Axis, double>> periodic_axes_;

  friend Mesh refine_uniform(const Mesh& mesh);
};

/// Structured triangulation of [x0,x1]x[y0,y1] with 2*nx*ny cells.
Mesh build_structured(int nx, int ny, StructuredPattern pattern, double x0 = 0.0, double x1 = 1.0,
                      double y0 = 0.0, double y1 = 1.0);

/// Red refinement: every triangle is split into four through edge midpoints.
Mesh refine_uniform(const Mesh& mesh);
Mesh refine_uniform(const Mesh& mesh, int times);

/// Delaunay triangulation (Bowyer-Watson) of a point set; the result covers
/// the convex hull of the points.
Mesh delaunay_triangulation(std::span<const Vec2> points);

/// Deterministic unstructured mesh of the unit square: boundary_segments per
/// side and interior_points Halton-distributed interior vertices, smoothed.
Mesh build_unstructured_square(int boundary_segments, int interior_points, int smoothing_sweeps = 4);

/// Plain-text mesh format: "verts V cells C", V lines "x y", C lines "i j k",
/// optional "tags" section with lines "v0 v1 tagname".
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

}  // namespace svfem
