#pragma once

#include <random>

#include "svfem/fe_space.hpp"
#include "svfem/mesh.hpp"

namespace testing {

inline svfem::Mesh two_cell_mesh() {
  return svfem::Mesh::from_cells({{0.0, 0.0}, {1.0, 0.1}, {1.1, 1.0}, {-0.1, 0.9}}, {{0, 1, 2}, {0, 2, 3}});
}

inline svfem::Mesh torus(int n, svfem::StructuredPattern pattern = svfem::StructuredPattern::crisscross_2x2) {
  using namespace svfem;
  Mesh m = build_structured(n, n, pattern);
  m.tag_side(Axis::x, false, BoundaryTag::periodic_left);
  m.tag_side(Axis::x, true, BoundaryTag::periodic_right);
  m.tag_side(Axis::y, false, BoundaryTag::periodic_bottom);
  m.tag_side(Axis::y, true, BoundaryTag::periodic_top);
  m.identify_periodic(Axis::x, 1.0);
  m.identify_periodic(Axis::y, 1.0);
  return m;
}

inline svfem::Vector random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  svfem::Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

}  // namespace testing
