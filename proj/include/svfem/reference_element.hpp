#pragma once

#include <Eigen/Core>
#include <vector>

#include "svfem/types.hpp"

namespace svfem {

/// Exponent pair of the monomial x^px * y^py.
struct Monomial {
  int px = 0;
  int py = 0;
  int degree() const { return px + py; }
};

/// All monomials of total degree <= degree, ordered by degree.
std::vector<Monomial> monomials_up_to(int degree);

/// Values, first and second derivatives of a monomial list at a point.
struct MonomialTable {
  Eigen::VectorXd value, dx, dy, dxx, dxy, dyy;
};
MonomialTable tabulate_monomials(const std::vector<Monomial>& monos, const Vec2& x);

enum class ElementKind { lagrange, rt0_facet, rt_bubble_complement };

/// Where a Lagrange node lives on the reference triangle.
struct NodeLocation {
  enum class Kind { vertex, edge, interior } kind = Kind::vertex;
  int entity = 0;    // vertex number, local facet number or interior index
  int position = 0;  // 1..k-1 along the local facet direction for edge nodes
};

/// Nodal P_k basis on the principal lattice of the reference triangle.
/// Local facet i is opposite vertex i and runs from vertex i+1 to vertex i+2.
class LagrangeElement {
 public:
  explicit LagrangeElement(int order);

  ElementKind kind() const { return ElementKind::lagrange; }
  int order() const { return order_; }
  int ndof() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const NodeLocation& location(int i) const { return locations_[i]; }

  Eigen::VectorXd values(const Vec2& x) const;
  /// Rows: dofs; columns: d/dx, d/dy.
  Eigen::MatrixX2d gradients(const Vec2& x) const;
  /// Rows: dofs; columns: xx, xy, yy.
  Eigen::MatrixX3d hessians(const Vec2& x) const;

 private:
  int order_;
  std::vector<Vec2> nodes_;
  std::vector<NodeLocation> locations_;
  std::vector<Monomial> monos_;
  Eigen::MatrixXd coeffs_;  // monomial coefficients, one column per dof
};

/// Vector-valued enrichment basis on the reference triangle: either the three
/// RT0 facet functions (x - p_i) with unit outward flux through facet i, or a
/// basis of a complement of the divergence-free interior bubbles of RT_r.
class EnrichmentElement {
 public:
  static EnrichmentElement rt0();
  /// SVD construction; throws construction_failure on unexpected ranks.
  static EnrichmentElement bubble_complement(int r);

  ElementKind kind() const { return kind_; }
  int order() const { return order_; }  // RT order r
  int ndof() const { return static_cast<int>(cx_.cols()); }

  /// Rows: dofs; columns: components.
  Eigen::MatrixX2d values(const Vec2& x) const;
  /// Per dof a 2x2 Jacobian stored row-major as (d1/dx, d1/dy, d2/dx, d2/dy).
  Eigen::MatrixX4d gradients(const Vec2& x) const;
  Eigen::VectorXd divergences(const Vec2& x) const;

  /// dim RT_r^int (interior bubbles) and the dimension of its
  /// divergence-free part found during construction.
  int interior_dimension() const { return interior_dim_; }
  int divergence_free_dimension() const { return interior_dim_ - ndof(); }
  /// sigma_max / sigma_min of the divergence map on the returned span.
  double divergence_condition() const { return condition_; }
  double smallest_singular_value() const { return sigma_min_; }
  /// Divergence-free interior bubbles (for tests), same layout as the basis.
  const Eigen::MatrixXd& kernel_x() const { return kernel_x_; }
  const Eigen::MatrixXd& kernel_y() const { return kernel_y_; }
  const std::vector<Monomial>& monomials() const { return monos_; }

 private:
  EnrichmentElement() = default;

  ElementKind kind_ = ElementKind::rt0_facet;
  int order_ = 0;
  std::vector<Monomial> monos_;
  Eigen::MatrixXd cx_, cy_;
  Eigen::MatrixXd kernel_x_, kernel_y_;
  int interior_dim_ = 0;
  double condition_ = 1.0;
  double sigma_min_ = 0.0;
};

/// Modal basis of P_m on the reference triangle: the constant first, then
/// monomials shifted to zero mean. Zero mean is preserved by affine maps.
class PressureElement {
 public:
  explicit PressureElement(int order);
  int order() const { return order_; }
  int ndof() const { return static_cast<int>(monos_.size()); }
  Eigen::VectorXd values(const Vec2& x) const;

 private:
  int order_;
  std::vector<Monomial> monos_;
  Eigen::VectorXd means_;
};

}  // namespace svfem
