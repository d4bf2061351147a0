#include "svfem/mesh.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "svfem/error.hpp"

namespace svfem {

namespace {

constexpr double kGeomTol = 1e-10;

double signed_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double coord(const Vec2& p, Axis axis) { return axis == Axis::x ? p.x() : p.y(); }

}  // namespace

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::dirichlet: return "dirichlet";
    case BoundaryTag::slip_top: return "slip_top";
    case BoundaryTag::slip_bottom: return "slip_bottom";
    case BoundaryTag::periodic_left: return "periodic_left";
    case BoundaryTag::periodic_right: return "periodic_right";
    case BoundaryTag::periodic_bottom: return "periodic_bottom";
    case BoundaryTag::periodic_top: return "periodic_top";
  }
  return "interior";
}

std::optional<BoundaryTag> parse_boundary_tag(std::string_view name) {
  for (auto tag : {BoundaryTag::interior, BoundaryTag::dirichlet, BoundaryTag::slip_top,
                   BoundaryTag::slip_bottom, BoundaryTag::periodic_left, BoundaryTag::periodic_right,
                   BoundaryTag::periodic_bottom, BoundaryTag::periodic_top}) {
    if (to_string(tag) == name) return tag;
  }
  return std::nullopt;
}

Mesh Mesh::from_cells(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells) {
  Mesh mesh;
  const int nv = static_cast<int>(vertices.size());
  for (auto& cell : cells) {
    for (int v : cell) {
      if (v < 0 || v >= nv) throw Error(ErrorCode::invalid_argument, "cell references missing vertex");
    }
    const double a2 = signed_area2(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
    if (std::abs(a2) <= 0.0) throw Error(ErrorCode::invalid_argument, "degenerate cell");
    if (a2 < 0) std::swap(cell[1], cell[2]);
  }
  mesh.vertices_ = std::move(vertices);
  mesh.cells_ = std::move(cells);

  std::map<std::pair<int, int>, int> lookup;
  mesh.cell_facets_.resize(mesh.cells_.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      int a = mesh.cells_[c][(i + 1) % 3];
      int b = mesh.cells_[c][(i + 2) % 3];
      auto key = std::minmax(a, b);
      auto it = lookup.find({key.first, key.second});
      if (it == lookup.end()) {
        Facet f;
        f.v = {key.first, key.second};
        f.cells = {c, -1};
        f.local = {i, -1};
        lookup.emplace(std::pair{key.first, key.second}, mesh.num_facets());
        mesh.cell_facets_[c][i] = mesh.num_facets();
        mesh.facets_.push_back(f);
      } else {
        Facet& f = mesh.facets_[it->second];
        if (f.cells[1] >= 0) throw Error(ErrorCode::invalid_argument, "non-manifold facet");
        f.cells[1] = c;
        f.local[1] = i;
        mesh.cell_facets_[c][i] = it->second;
      }
    }
  }
  mesh.tags_.resize(mesh.facets_.size());
  for (int f = 0; f < mesh.num_facets(); ++f) {
    mesh.tags_[f] = mesh.is_boundary(f) ? BoundaryTag::dirichlet : BoundaryTag::interior;
  }
  mesh.partner_.assign(mesh.facets_.size(), -1);
  mesh.rebuild_faces();
  return mesh;
}

int Mesh::num_boundary_facets() const {
  return static_cast<int>(std::count_if(facets_.begin(), facets_.end(),
                                        [](const Facet& f) { return f.cells[1] < 0; }));
}

CellGeometry Mesh::geometry(int c) const {
  CellGeometry g;
  const auto& cell = cells_[c];
  const Vec2& a = vertices_[cell[0]];
  const Vec2& b = vertices_[cell[1]];
  const Vec2& p = vertices_[cell[2]];
  g.origin = a;
  g.jacobian.col(0) = b - a;
  g.jacobian.col(1) = p - a;
  g.det = g.jacobian.determinant();
  g.inverse = g.jacobian.inverse();
  g.inverse_transpose = g.inverse.transpose();
  g.h = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2& s = vertices_[cell[(i + 1) % 3]];
    const Vec2& e = vertices_[cell[(i + 2) % 3]];
    Vec2 edge = e - s;
    g.lengths[i] = edge.norm();
    g.normals[i] = Vec2(edge.y(), -edge.x()) / g.lengths[i];
    g.h = std::max(g.h, g.lengths[i]);
  }
  return g;
}

double Mesh::cell_area(int c) const {
  const auto& cell = cells_[c];
  return 0.5 * signed_area2(vertices_[cell[0]], vertices_[cell[1]], vertices_[cell[2]]);
}

double Mesh::total_area() const {
  double area = 0.0;
  for (int c = 0; c < num_cells(); ++c) area += cell_area(c);
  return area;
}

double Mesh::max_h() const {
  double h = 0.0;
  for (int c = 0; c < num_cells(); ++c) h = std::max(h, geometry(c).h);
  return h;
}

std::array<int, 2> Mesh::local_facet_vertices(int c, int i) const {
  return {cells_[c][(i + 1) % 3], cells_[c][(i + 2) % 3]};
}

void Mesh::set_tag(int f, BoundaryTag tag) {
  if (!is_boundary(f) && tag != BoundaryTag::interior) {
    throw Error(ErrorCode::invalid_argument, "boundary tag on interior facet");
  }
  tags_[f] = tag;
}

std::array<double, 4> Mesh::bounding_box() const {
  std::array<double, 4> box{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
                            std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
  for (const auto& v : vertices_) {
    box[0] = std::min(box[0], v.x());
    box[1] = std::max(box[1], v.x());
    box[2] = std::min(box[2], v.y());
    box[3] = std::max(box[3], v.y());
  }
  return box;
}

void Mesh::tag_side(Axis axis, bool upper, BoundaryTag tag) {
  auto box = bounding_box();
  const double target = axis == Axis::x ? (upper ? box[1] : box[0]) : (upper ? box[3] : box[2]);
  const double scale = std::max({1.0, std::abs(box[0]), std::abs(box[1]), std::abs(box[2]), std::abs(box[3])});
  for (int f = 0; f < num_facets(); ++f) {
    if (!is_boundary(f)) continue;
    const auto& fv = facets_[f].v;
    if (std::abs(coord(vertices_[fv[0]], axis) - target) < kGeomTol * scale &&
        std::abs(coord(vertices_[fv[1]], axis) - target) < kGeomTol * scale) {
      tags_[f] = tag;
    }
  }
}

void Mesh::identify_periodic(Axis axis, double period) {
  if (!(period > 0)) throw Error(ErrorCode::invalid_argument, "period must be positive");
  auto box = bounding_box();
  const double lower = axis == Axis::x ? box[0] : box[2];
  const double upper = lower + period;
  const double scale = std::max({1.0, std::abs(lower), std::abs(upper)});
  const double tol = kGeomTol * scale;
  const Vec2 shift = axis == Axis::x ? Vec2(period, 0.0) : Vec2(0.0, period);
  const BoundaryTag low_tag = axis == Axis::x ? BoundaryTag::periodic_left : BoundaryTag::periodic_bottom;
  const BoundaryTag high_tag = axis == Axis::x ? BoundaryTag::periodic_right : BoundaryTag::periodic_top;

  std::vector<int> low, high;
  for (int f = 0; f < num_facets(); ++f) {
    if (!is_boundary(f)) continue;
    const Vec2& a = vertices_[facets_[f].v[0]];
    const Vec2& b = vertices_[facets_[f].v[1]];
    if (std::abs(coord(a, axis) - lower) < tol && std::abs(coord(b, axis) - lower) < tol) low.push_back(f);
    if (std::abs(coord(a, axis) - upper) < tol && std::abs(coord(b, axis) - upper) < tol) high.push_back(f);
  }
  if (low.empty() || low.size() != high.size()) {
    throw Error(ErrorCode::mesh_mismatch, "periodic sides have " + std::to_string(low.size()) + " and " +
                                              std::to_string(high.size()) + " facets");
  }
  std::vector<char> used(high.size(), 0);
  std::vector<PeriodicPair> pairs;
  for (int f : low) {
    const Vec2 a = vertices_[facets_[f].v[0]] + shift;
    const Vec2 b = vertices_[facets_[f].v[1]] + shift;
    int match = -1;
    for (std::size_t j = 0; j < high.size(); ++j) {
      if (used[j]) continue;
      const Vec2& p = vertices_[facets_[high[j]].v[0]];
      const Vec2& q = vertices_[facets_[high[j]].v[1]];
      if (((a - p).norm() < tol && (b - q).norm() < tol) || ((a - q).norm() < tol && (b - p).norm() < tol)) {
        match = static_cast<int>(j);
        break;
      }
    }
    if (match < 0) throw Error(ErrorCode::mesh_mismatch, "periodic facet without translated partner");
    used[match] = 1;
    const int g = high[match];
    if (facets_[f].cells[0] == facets_[g].cells[0]) {
      throw Error(ErrorCode::mesh_mismatch, "periodic pair inside a single cell");
    }
    pairs.push_back({f, g, shift});
  }
  for (const auto& p : pairs) {
    tags_[p.first] = low_tag;
    tags_[p.second] = high_tag;
    partner_[p.first] = p.second;
    partner_[p.second] = p.first;
    periodic_pairs_.push_back(p);
  }
  periodic_axes_.emplace_back(axis, period);
  rebuild_faces();
}

bool Mesh::is_periodic(Axis axis) const {
  return std::any_of(periodic_axes_.begin(), periodic_axes_.end(),
                     [axis](const auto& p) { return p.first == axis; });
}

void Mesh::rebuild_faces() {
  faces_.clear();
  for (int f = 0; f < num_facets(); ++f) {
    const Facet& facet = facets_[f];
    if (facet.cells[1] < 0) continue;
    faces_.push_back({facet.cells[0], facet.local[0], facet.cells[1], facet.local[1], f, f, Vec2::Zero()});
  }
  for (const auto& p : periodic_pairs_) {
    const Facet& a = facets_[p.first];
    const Facet& b = facets_[p.second];
    if (a.cells[0] < b.cells[0]) {
      faces_.push_back({a.cells[0], a.local[0], b.cells[0], b.local[0], p.first, p.second, p.shift});
    } else {
      faces_.push_back({b.cells[0], b.local[0], a.cells[0], a.local[0], p.second, p.first, -p.shift});
    }
  }
}

Mesh build_structured(int nx, int ny, StructuredPattern pattern, double x0, double x1, double y0, double y1) {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::invalid_argument, "nx and ny must be positive");
  if (pattern == StructuredPattern::crisscross_2x2 && (nx % 2 != 0 || ny % 2 != 0)) {
    throw Error(ErrorCode::invalid_argument, "crisscross-2x2 needs even nx and ny");
  }
  if (!(x1 > x0) || !(y1 > y0)) throw Error(ErrorCode::invalid_argument, "empty rectangle");
  std::vector<Vec2> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Exact endpoints so that periodic translates match bit for bit.
      const double x = i == nx ? x1 : x0 + (x1 - x0) * i / nx;
      const double y = j == ny ? y1 : y0 + (y1 - y0) * j / ny;
      vertices.emplace_back(x, y);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      bool diag_ac = true;
      if (pattern == StructuredPattern::crisscross_2x2) diag_ac = (i % 2) == (j % 2);
      if (diag_ac) {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      } else {
        cells.push_back({a, b, d});
        cells.push_back({b, c, d});
      }
    }
  }
  return Mesh::from_cells(std::move(vertices), std::move(cells));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Vec2> vertices(mesh.vertices_.begin(), mesh.vertices_.end());
  const int nv = mesh.num_vertices();
  for (const auto& f : mesh.facets_) {
    vertices.push_back(0.5 * (mesh.vertices_[f.v[0]] + mesh.vertices_[f.v[1]]));
  }
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * mesh.cells_.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& v = mesh.cells_[c];
    const int ma = nv + mesh.cell_facets_[c][0];
    const int mb = nv + mesh.cell_facets_[c][1];
    const int mc = nv + mesh.cell_facets_[c][2];
    cells.push_back({v[0], mc, mb});
    cells.push_back({mc, v[1], ma});
    cells.push_back({mb, ma, v[2]});
    cells.push_back({ma, mb, mc});
  }
  Mesh fine = Mesh::from_cells(std::move(vertices), std::move(cells));

  std::map<std::pair<int, int>, int> lookup;
  for (int f = 0; f < fine.num_facets(); ++f) lookup[{fine.facets_[f].v[0], fine.facets_[f].v[1]}] = f;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    const int m = nv + f;
    for (int end : mesh.facets_[f].v) {
      auto key = std::minmax(end, m);
      fine.tags_[lookup.at({key.first, key.second})] = mesh.tags_[f];
    }
  }
  for (const auto& [axis, period] : mesh.periodic_axes_) fine.identify_periodic(axis, period);
  return fine;
}

Mesh refine_uniform(const Mesh& mesh, int times) {
  Mesh result = mesh;
  for (int i = 0; i < times; ++i) result = refine_uniform(result);
  return result;
}

namespace {

struct DelaunayTriangle {
  std::array<int, 3> v;
  Vec2 center;
  double radius2;
};

DelaunayTriangle make_triangle(const std::vector<Vec2>& pts, int a, int b, int c) {
  if (signed_area2(pts[a], pts[b], pts[c]) < 0) std::swap(b, c);
  const Vec2& A = pts[a];
  const Vec2& B = pts[b];
  const Vec2& C = pts[c];
  const double d = 2.0 * (A.x() * (B.y() - C.y()) + B.x() * (C.y() - A.y()) + C.x() * (A.y() - B.y()));
  const double a2 = A.squaredNorm(), b2 = B.squaredNorm(), c2 = C.squaredNorm();
  Vec2 center((a2 * (B.y() - C.y()) + b2 * (C.y() - A.y()) + c2 * (A.y() - B.y())) / d,
              (a2 * (C.x() - B.x()) + b2 * (A.x() - C.x()) + c2 * (B.x() - A.x())) / d);
  return {{a, b, c}, center, (A - center).squaredNorm()};
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

}  // namespace

Mesh delaunay_triangulation(std::span<const Vec2> points) {
  if (points.size() < 3) throw Error(ErrorCode::invalid_argument, "need at least three points");
  std::vector<Vec2> pts(points.begin(), points.end());
  double xmin = pts[0].x(), xmax = xmin, ymin = pts[0].y(), ymax = ymin;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const double span = std::max(xmax - xmin, ymax - ymin);
  const Vec2 mid(0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
  const int n = static_cast<int>(pts.size());
  pts.push_back(mid + Vec2(-100.0 * span, -100.0 * span));
  pts.push_back(mid + Vec2(100.0 * span, -100.0 * span));
  pts.push_back(mid + Vec2(0.0, 100.0 * span));

  std::vector<DelaunayTriangle> tris{make_triangle(pts, n, n + 1, n + 2)};
  for (int p = 0; p < n; ++p) {
    const Vec2& x = pts[p];
    std::vector<DelaunayTriangle> keep;
    std::map<std::pair<int, int>, int> edges;  // count of cavity triangles per edge
    keep.reserve(tris.size() + 2);
    for (const auto& t : tris) {
      if ((x - t.center).squaredNorm() < t.radius2 * (1.0 - 1e-12)) {
        for (int i = 0; i < 3; ++i) {
          auto e = std::minmax(t.v[i], t.v[(i + 1) % 3]);
          ++edges[{e.first, e.second}];
        }
      } else {
        keep.push_back(t);
      }
    }
    for (const auto& [edge, count] : edges) {
      if (count == 1) keep.push_back(make_triangle(pts, edge.first, edge.second, p));
    }
    tris = std::move(keep);
  }
  std::vector<std::array<int, 3>> cells;
  for (const auto& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    if (std::abs(signed_area2(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]])) < 1e-14 * span * span) continue;
    cells.push_back(t.v);
  }
  std::sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) {
    const Vec2 ca = pts[a[0]] + pts[a[1]] + pts[a[2]];
    const Vec2 cb = pts[b[0]] + pts[b[1]] + pts[b[2]];
    if (std::abs(ca.y() - cb.y()) > 1e-12) return ca.y() < cb.y();
    return ca.x() < cb.x();
  });
  pts.resize(n);
  return Mesh::from_cells(std::move(pts), std::move(cells));
}

Mesh build_unstructured_square(int boundary_segments, int interior_points, int smoothing_sweeps) {
  if (boundary_segments < 1 || interior_points < 0) {
    throw Error(ErrorCode::invalid_argument, "bad unstructured mesh parameters");
  }
  std::vector<Vec2> pts;
  const int m = boundary_segments;
  for (int i = 0; i < m; ++i) pts.emplace_back(static_cast<double>(i) / m, 0.0);
  for (int i = 0; i < m; ++i) pts.emplace_back(1.0, static_cast<double>(i) / m);
  for (int i = 0; i < m; ++i) pts.emplace_back(1.0 - static_cast<double>(i) / m, 1.0);
  for (int i = 0; i < m; ++i) pts.emplace_back(0.0, 1.0 - static_cast<double>(i) / m);
  const int nb = static_cast<int>(pts.size());

  const double spacing = 1.0 / std::sqrt(static_cast<double>(nb + interior_points));
  double dmin = 0.9 * spacing;
  int index = 1;
  while (static_cast<int>(pts.size()) < nb + interior_points) {
    Vec2 cand(halton(index, 2), halton(index, 3));
    ++index;
    if (index % 5000 == 0) dmin *= 0.9;
    bool ok = cand.x() > 0.4 * spacing && cand.x() < 1.0 - 0.4 * spacing && cand.y() > 0.4 * spacing &&
              cand.y() < 1.0 - 0.4 * spacing;
    for (const auto& p : pts) {
      if (!ok) break;
      ok = (p - cand).norm() >= dmin;
    }
    if (ok) pts.push_back(cand);
  }

  Mesh mesh = delaunay_triangulation(pts);
  for (int sweep = 0; sweep < smoothing_sweeps; ++sweep) {
    std::vector<Vec2> sum(mesh.num_vertices(), Vec2::Zero());
    std::vector<int> count(mesh.num_vertices(), 0);
    for (const auto& f : mesh.facets()) {
      sum[f.v[0]] += mesh.vertex(f.v[1]);
      sum[f.v[1]] += mesh.vertex(f.v[0]);
      ++count[f.v[0]];
      ++count[f.v[1]];
    }
    std::vector<Vec2> moved(mesh.vertices().begin(), mesh.vertices().end());
    // Boundary vertices come first in the point list and stay fixed.
    for (int v = nb; v < mesh.num_vertices(); ++v) moved[v] = sum[v] / count[v];
    mesh = delaunay_triangulation(moved);
  }
  return mesh;
}

Mesh read_mesh(std::istream& in) {
  std::string word;
  int nv = 0, nc = 0;
  std::string word2;
  if (!(in >> word >> nv >> word2 >> nc) || word != "verts" || word2 != "cells" || nv < 3 || nc < 1) {
    throw Error(ErrorCode::io_error, "mesh header must read 'verts <V> cells <C>'");
  }
  std::vector<Vec2> vertices(nv);
  for (auto& v : vertices) {
    if (!(in >> v.x() >> v.y())) throw Error(ErrorCode::io_error, "truncated vertex list");
  }
  std::vector<std::array<int, 3>> cells(nc);
  for (auto& c : cells) {
    if (!(in >> c[0] >> c[1] >> c[2])) throw Error(ErrorCode::io_error, "truncated cell list");
  }
  Mesh mesh = Mesh::from_cells(std::move(vertices), std::move(cells));
  if (in >> word) {
    if (word != "tags") throw Error(ErrorCode::io_error, "unexpected section '" + word + "'");
    std::map<std::pair<int, int>, int> lookup;
    for (int f = 0; f < mesh.num_facets(); ++f) lookup[{mesh.facet(f).v[0], mesh.facet(f).v[1]}] = f;
    int a = 0, b = 0;
    bool periodic_x = false, periodic_y = false;
    while (in >> a >> b >> word) {
      auto tag = parse_boundary_tag(word);
      if (!tag) throw Error(ErrorCode::io_error, "unknown tag '" + word + "'");
      auto key = std::minmax(a, b);
      auto it = lookup.find({key.first, key.second});
      if (it == lookup.end() || !mesh.is_boundary(it->second)) {
        throw Error(ErrorCode::io_error, "tag on a non-boundary facet");
      }
      if (*tag == BoundaryTag::periodic_left || *tag == BoundaryTag::periodic_right) {
        periodic_x = true;
      } else if (*tag == BoundaryTag::periodic_bottom || *tag == BoundaryTag::periodic_top) {
        periodic_y = true;
      } else {
        mesh.set_tag(it->second, *tag);
      }
    }
    auto box = mesh.bounding_box();
    if (periodic_x) mesh.identify_periodic(Axis::x, box[1] - box[0]);
    if (periodic_y) mesh.identify_periodic(Axis::y, box[3] - box[2]);
  }
  return mesh;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open mesh file " + path);
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "verts " << mesh.num_vertices() << " cells " << mesh.num_cells() << "\n";
  for (const auto& v : mesh.vertices()) buf << v.x() << " " << v.y() << "\n";
  for (const auto& c : mesh.cells()) buf << c[0] << " " << c[1] << " " << c[2] << "\n";
  buf << "tags\n";
  for (int f = 0; f < mesh.num_facets(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    buf << mesh.facet(f).v[0] << " " << mesh.facet(f).v[1] << " " << to_string(mesh.tag(f)) << "\n";
  }
  out << buf.str();
  if (!out) throw Error(ErrorCode::io_error, "failed to write mesh");
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path + " for writing");
  write_mesh(out, mesh);
}

}  // namespace svfem
