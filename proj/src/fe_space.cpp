#include "svfem/fe_space.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "svfem/error.hpp"

namespace svfem {

namespace {

EnrichmentElement make_enrichment(int k) {
  return k == 1 ? EnrichmentElement::rt0() : EnrichmentElement::bubble_complement(k - 1);
}

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b) {
    parent[b] = a;
  } else {
    parent[a] = b;
  }
}

VelocityBasis map_velocity_basis(const CellGeometry& g, std::span<const double> signs, const Eigen::VectorXd& lag,
                                 const Eigen::MatrixX2d& lag_grad, const Eigen::MatrixX3d& lag_hess,
                                 const Eigen::MatrixX2d& enr, const Eigen::MatrixX4d& enr_grad,
                                 const Eigen::VectorXd& enr_div) {
  const int nl = static_cast<int>(lag.size());
  const int nr = static_cast<int>(enr.rows());
  const int n = 2 * nl + nr;
  VelocityBasis b;
  b.value.setZero(n, 2);
  b.grad.setZero(n, 4);
  b.lap.setZero(n, 2);
  b.div.setZero(n);
  const Mat2& ji = g.inverse;
  const Mat2 kk = ji * ji.transpose();
  const Eigen::MatrixX2d grad = lag_grad * ji;
  for (int a = 0; a < nl; ++a) {
    const double lap = lag_hess(a, 0) * kk(0, 0) + 2.0 * lag_hess(a, 1) * kk(0, 1) + lag_hess(a, 2) * kk(1, 1);
    for (int comp = 0; comp < 2; ++comp) {
      const int i = 2 * a + comp;
      b.value(i, comp) = lag(a);
      b.grad(i, 2 * comp) = grad(a, 0);
      b.grad(i, 2 * comp + 1) = grad(a, 1);
      b.lap(i, comp) = lap;
      b.div(i) = grad(a, comp);
    }
  }
  const double inv_det = 1.0 / g.det;
  const Mat2& jac = g.jacobian;
  for (int r = 0; r < nr; ++r) {
    const int i = 2 * nl + r;
    const double s = signs[i] * inv_det;
    const Vec2 v = jac * Vec2(enr(r, 0), enr(r, 1));
    b.value(i, 0) = s * v.x();
    b.value(i, 1) = s * v.y();
    Mat2 gr;
    gr << enr_grad(r, 0), enr_grad(r, 1), enr_grad(r, 2), enr_grad(r, 3);
    const Mat2 pg = jac * gr * ji;
    b.grad(i, 0) = s * pg(0, 0);
    b.grad(i, 1) = s * pg(0, 1);
    b.grad(i, 2) = s * pg(1, 0);
    b.grad(i, 3) = s * pg(1, 1);
    b.div(i) = s * enr_div(r);
  }
  return b;
}

}  // namespace

Eigen::MatrixX2d piola_values(const CellGeometry& g, const Eigen::MatrixX2d& ref) {
  return (ref * g.jacobian.transpose()) / g.det;
}

Eigen::VectorXd piola_divergences(const CellGeometry& g, const Eigen::VectorXd& ref) { return ref / g.det; }

FESpace::FESpace(const Mesh& mesh, int order)
    : mesh_(std::make_shared<const Mesh>(mesh)),
      order_(order),
      lagrange_(order),
      enrichment_(make_enrichment(order)),
      pressure_(order - 1) {
  const Mesh& m = *mesh_;
  const int nc = m.num_cells();
  const int k = order_;
  geometry_.resize(nc);
  for (int c = 0; c < nc; ++c) geometry_[c] = m.geometry(c);

  for (int f = 0; f < m.num_facets(); ++f) {
    const BoundaryTag tag = m.tag(f);
    const bool periodic = tag == BoundaryTag::periodic_left || tag == BoundaryTag::periodic_right ||
                          tag == BoundaryTag::periodic_bottom || tag == BoundaryTag::periodic_top;
    if (periodic && m.periodic_partner(f) < 0) {
      throw Error(ErrorCode::mesh_mismatch, "periodic facet " + std::to_string(f) + " has no partner");
    }
  }

  // Vertices identified through periodic pairs share one node.
  std::vector<int> parent(m.num_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& pair : m.periodic_pairs()) {
    const Facet& a = m.facet(pair.first);
    const Facet& b = m.facet(pair.second);
    for (int va : a.v) {
      for (int vb : b.v) {
        if ((m.vertex(va) + pair.shift - m.vertex(vb)).norm() < 1e-10) unite(parent, va, vb);
      }
    }
  }
  std::vector<int> root(m.num_vertices());
  std::vector<int> vertex_node(m.num_vertices(), -1);
  int nv = 0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    root[v] = find_root(parent, v);
    if (root[v] == v) vertex_node[v] = nv++;
  }
  for (int v = 0; v < m.num_vertices(); ++v) vertex_node[v] = vertex_node[root[v]];

  std::vector<int> edge_id(m.num_facets(), -1);
  int ne = 0;
  for (int f = 0; f < m.num_facets(); ++f) {
    const int partner = m.periodic_partner(f);
    if (partner >= 0 && partner < f) continue;
    edge_id[f] = ne++;
  }
  for (int f = 0; f < m.num_facets(); ++f) {
    const int partner = m.periodic_partner(f);
    if (partner >= 0 && partner < f) edge_id[f] = edge_id[partner];
  }

  const int nl = lagrange_.ndof();
  const int ni = (k - 1) * (k - 2) / 2;
  n_nodes_ = nv + ne * (k - 1) + nc * ni;
  nodes_.resize(static_cast<std::size_t>(nc) * nl);
  for (int c = 0; c < nc; ++c) {
    const auto& cv = m.cell(c);
    for (int a = 0; a < nl; ++a) {
      const NodeLocation& loc = lagrange_.location(a);
      int node = -1;
      switch (loc.kind) {
        case NodeLocation::Kind::vertex:
          node = vertex_node[cv[loc.entity]];
          break;
        case NodeLocation::Kind::edge: {
          const int va = cv[(loc.entity + 1) % 3];
          const int vb = cv[(loc.entity + 2) % 3];
          const bool forward = root[va] < root[vb];
          const int pos = forward ? loc.position : k - loc.position;
          node = nv + edge_id[m.cell_facet(c, loc.entity)] * (k - 1) + pos - 1;
          break;
        }
        case NodeLocation::Kind::interior:
          node = nv + ne * (k - 1) + c * ni + loc.entity;
          break;
      }
      nodes_[static_cast<std::size_t>(c) * nl + a] = node;
    }
  }

  // Enrichment numbering.
  const int nr = enrichment_.ndof();
  const int nloc = local_velocity_dofs();
  vdofs_.assign(static_cast<std::size_t>(nc) * nloc, -1);
  vsigns_.assign(static_cast<std::size_t>(nc) * nloc, 1.0);
  for (int c = 0; c < nc; ++c) {
    for (int a = 0; a < nl; ++a) {
      for (int comp = 0; comp < 2; ++comp) vdofs_[c * nloc + 2 * a + comp] = 2 * nodes_[c * nl + a] + comp;
    }
  }
  if (facet_enrichment()) {
    const auto faces = m.interior_faces();
    n_r_ = static_cast<int>(faces.size());
    for (int fi = 0; fi < n_r_; ++fi) {
      const Face& face = faces[fi];
      vdofs_[face.minus_cell * nloc + 2 * nl + face.minus_local] = n_ct() + fi;
      vsigns_[face.minus_cell * nloc + 2 * nl + face.minus_local] = 1.0;
      vdofs_[face.plus_cell * nloc + 2 * nl + face.plus_local] = n_ct() + fi;
      vsigns_[face.plus_cell * nloc + 2 * nl + face.plus_local] = -1.0;
    }
  } else {
    n_r_ = nc * nr;
    for (int c = 0; c < nc; ++c) {
      for (int r = 0; r < nr; ++r) vdofs_[c * nloc + 2 * nl + r] = n_ct() + c * nr + r;
    }
  }

  // Boundary constraints.
  std::vector<std::vector<int>> facet_local_nodes(3);
  for (int i = 0; i < 3; ++i) {
    facet_local_nodes[i] = {(i + 1) % 3, (i + 2) % 3};
    for (int a = 0; a < nl; ++a) {
      const NodeLocation& loc = lagrange_.location(a);
      if (loc.kind == NodeLocation::Kind::edge && loc.entity == i) facet_local_nodes[i].push_back(a);
    }
  }
  std::vector<char> fixed(n_u(), 0);
  for (int f = 0; f < m.num_facets(); ++f) {
    if (!m.is_boundary(f)) continue;
    const BoundaryTag tag = m.tag(f);
    const Facet& fc = m.facet(f);
    const int c = fc.cells[0];
    const int li = fc.local[0];
    if (tag == BoundaryTag::dirichlet) {
      for (int a : facet_local_nodes[li]) {
        fixed[2 * nodes_[c * nl + a]] = 1;
        fixed[2 * nodes_[c * nl + a] + 1] = 1;
      }
    } else if (tag == BoundaryTag::slip_top || tag == BoundaryTag::slip_bottom) {
      const Vec2 d = m.vertex(fc.v[1]) - m.vertex(fc.v[0]);
      int comp = -1;
      if (std::abs(d.y()) <= 1e-12 * d.norm()) comp = 1;
      if (std::abs(d.x()) <= 1e-12 * d.norm()) comp = 0;
      if (comp < 0) throw Error(ErrorCode::unsupported_geometry, "slip condition on a non axis-aligned facet");
      for (int a : facet_local_nodes[li]) fixed[2 * nodes_[c * nl + a] + comp] = 1;
    }
  }
  free_index_.assign(n_u(), -1);
  for (int i = 0; i < n_ct(); ++i) {
    if (!fixed[i]) {
      free_index_[i] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(i);
    }
  }
  n_ct_free_ = static_cast<int>(free_dofs_.size());
  for (int i = n_ct(); i < n_u(); ++i) {
    free_index_[i] = static_cast<int>(free_dofs_.size());
    free_dofs_.push_back(i);
  }

  pressure_means_ = Eigen::VectorXd::Zero(n_p());
  for (int c = 0; c < nc; ++c) pressure_means_(pressure_dof(c, 0)) = geometry_[c].area();
}

std::span<const int> FESpace::cell_velocity_dofs(int c) const {
  const int n = local_velocity_dofs();
  return {vdofs_.data() + static_cast<std::size_t>(c) * n, static_cast<std::size_t>(n)};
}

std::span<const double> FESpace::cell_velocity_signs(int c) const {
  const int n = local_velocity_dofs();
  return {vsigns_.data() + static_cast<std::size_t>(c) * n, static_cast<std::size_t>(n)};
}

std::span<const int> FESpace::cell_nodes(int c) const {
  const int n = lagrange_.ndof();
  return {nodes_.data() + static_cast<std::size_t>(c) * n, static_cast<std::size_t>(n)};
}

Vector FESpace::interpolate(const VectorFunction& u, double t) const {
  Vector out = Vector::Zero(n_u());
  if (!u) return out;
  const int nl = lagrange_.ndof();
  for (int c = 0; c < mesh_->num_cells(); ++c) {
    const auto nodes = cell_nodes(c);
    for (int a = 0; a < nl; ++a) {
      const Vec2 val = u(t, geometry_[c].map(lagrange_.nodes()[a]));
      out(2 * nodes[a]) = val.x();
      out(2 * nodes[a] + 1) = val.y();
    }
  }
  apply_constraints(out);
  return out;
}

void FESpace::apply_constraints(Vector& u) const {
  for (int i = 0; i < n_ct(); ++i) {
    if (free_index_[i] < 0) u(i) = 0.0;
  }
}

ReferenceTables FESpace::tabulate(const QuadRule& rule) const {
  ReferenceTables t;
  t.rule = rule;
  for (const Vec2& x : rule.points) {
    t.lag.push_back(lagrange_.values(x));
    t.lag_grad.push_back(lagrange_.gradients(x));
    t.lag_hess.push_back(lagrange_.hessians(x));
    t.enr.push_back(enrichment_.values(x));
    t.enr_grad.push_back(enrichment_.gradients(x));
    t.enr_div.push_back(enrichment_.divergences(x));
    t.pres.push_back(pressure_.values(x));
  }
  return t;
}

void FESpace::cell_values(int c, const ReferenceTables& tables, CellValues& out) const {
  const CellGeometry& g = geometry_[c];
  const int nq = tables.rule.size();
  out.cell = c;
  out.jxw.resize(nq);
  out.x.resize(nq);
  out.u.resize(nq);
  out.p.resize(nq);
  const auto signs = cell_velocity_signs(c);
  for (int q = 0; q < nq; ++q) {
    out.jxw[q] = tables.rule.weights[q] * g.det;
    out.x[q] = g.map(tables.rule.points[q]);
    out.u[q] = map_velocity_basis(g, signs, tables.lag[q], tables.lag_grad[q], tables.lag_hess[q], tables.enr[q],
                                  tables.enr_grad[q], tables.enr_div[q]);
    out.p[q] = tables.pres[q];
  }
}

VelocityBasis FESpace::velocity_basis(int c, const Vec2& ref) const {
  return map_velocity_basis(geometry_[c], cell_velocity_signs(c), lagrange_.values(ref), lagrange_.gradients(ref),
                            lagrange_.hessians(ref), enrichment_.values(ref), enrichment_.gradients(ref),
                            enrichment_.divergences(ref));
}

Eigen::VectorXd FESpace::pressure_basis(int /*c*/, const Vec2& ref) const { return pressure_.values(ref); }

Eigen::VectorXd FESpace::gather(const Vector& u, int c) const {
  const auto dofs = cell_velocity_dofs(c);
  Eigen::VectorXd local(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) local(i) = dofs[i] >= 0 ? u(dofs[i]) : 0.0;
  return local;
}

namespace {

Eigen::VectorXd masked(Eigen::VectorXd local, int n_ct_local, Part part) {
  if (part == Part::ct) local.tail(local.size() - n_ct_local).setZero();
  if (part == Part::R) local.head(n_ct_local).setZero();
  return local;
}

}  // namespace

Vec2 FESpace::evaluate(const Vector& u, int c, const Vec2& ref, Part part) const {
  const Eigen::VectorXd local = masked(gather(u, c), 2 * lagrange_.ndof(), part);
  const VelocityBasis b = velocity_basis(c, ref);
  return b.value.transpose() * local;
}

Mat2 FESpace::evaluate_gradient(const Vector& u, int c, const Vec2& ref, Part part) const {
  const Eigen::VectorXd local = masked(gather(u, c), 2 * lagrange_.ndof(), part);
  const VelocityBasis b = velocity_basis(c, ref);
  const Eigen::Vector4d g = b.grad.transpose() * local;
  Mat2 out;
  out << g(0), g(1), g(2), g(3);
  return out;
}

double FESpace::evaluate_pressure(const Vector& p, int c, const Vec2& ref) const {
  const Eigen::VectorXd v = pressure_.values(ref);
  return v.dot(p.segment(pressure_dof(c, 0), pressure_.ndof()));
}

}  // namespace svfem
