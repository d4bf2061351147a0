#include <doctest.h>

#include <sstream>
#include <string>

#include "svfem/config.hpp"
#include "svfem/error.hpp"
#include "svfem/vtk.hpp"

using namespace svfem;

TEST_CASE("presets survive an INI round trip") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const SimulationConfig c = preset(name);
    c.validate();
    std::stringstream io;
    write_config(io, c);
    const SimulationConfig back = read_config(io);
    CHECK(back == c);
  }
}

TEST_CASE("edited configuration values are read back exactly") {
  SimulationConfig c = preset("kelvin-helmholtz");
  c.nu = 1.0 / 3.0;
  c.dt = 0.1 * c.delta0;
  c.dump_times = {0.0, 0.25, 1.0 / 7.0};
  c.seed = 4242;
  std::stringstream io;
  write_config(io, c);
  const SimulationConfig back = read_config(io);
  CHECK(back.nu == c.nu);
  CHECK(back.dt == c.dt);
  CHECK(back.dump_times == c.dump_times);
  CHECK(back == c);
}

TEST_CASE("bad configurations are rejected") {
  CHECK_THROWS_AS(preset("no-such-preset"), Error);
  SimulationConfig c = preset("example1");
  c.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = preset("example1");
  c.order = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  std::stringstream junk("[run\npreset = ");
  CHECK_THROWS(read_config(junk));
}

TEST_CASE("example1 mesh levels") {
  MeshSpec ms;
  int cells = 0;
  for (int level = 0; level <= 2; ++level) {
    ms.level = level;
    const Mesh m = build_mesh(ms);
    if (level > 0) CHECK(m.num_cells() == 4 * cells);
    cells = m.num_cells();
  }
  CHECK(cells * 4 == 7424);
}

namespace {

std::string next(std::istream& in) {
  std::string s;
  in >> s;
  return s;
}

}  // namespace

TEST_CASE("vtk output of a rigid rotation") {
  Mesh m = build_structured(3, 3, StructuredPattern::uniform_diag);
  for (int f = 0; f < m.num_facets(); ++f) {
    if (m.is_boundary(f)) m.set_tag(f, BoundaryTag::interior);
  }
  const FESpace s(m, 2);
  const Vector u = s.interpolate([](double, const Vec2& x) { return Vec2(-x(1), x(0)); });
  const Vector p = Vector::Zero(s.n_p());
  std::stringstream out;
  write_vtk(out, s, u, p, "rotation");

  std::string line;
  std::getline(out, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  std::getline(out, line);
  CHECK(line == "rotation");
  CHECK(next(out) == "ASCII");
  CHECK(next(out) == "DATASET");
  CHECK(next(out) == "UNSTRUCTURED_GRID");
  CHECK(next(out) == "POINTS");
  int nv = 0;
  out >> nv;
  CHECK(nv == m.num_vertices());
  next(out);
  for (int i = 0; i < 3 * nv; ++i) next(out);
  CHECK(next(out) == "CELLS");
  int nc = 0, size = 0;
  out >> nc >> size;
  CHECK(nc == m.num_cells());
  CHECK(size == 4 * nc);
  for (int i = 0; i < size; ++i) next(out);
  CHECK(next(out) == "CELL_TYPES");
  out >> nc;
  for (int i = 0; i < nc; ++i) CHECK(next(out) == "5");
  CHECK(next(out) == "POINT_DATA");
  out >> nv;
  CHECK(next(out) == "VECTORS");
  next(out);
  next(out);
  for (int v = 0; v < nv; ++v) {
    double a, b, z;
    out >> a >> b >> z;
    const Vec2 x = m.vertices()[v];
    CHECK(a == doctest::Approx(-x(1)).epsilon(1e-12));
    CHECK(b == doctest::Approx(x(0)).epsilon(1e-12));
  }
  CHECK(next(out) == "CELL_DATA");
  out >> nc;
  for (const char* name : {"vorticity", "pressure", "divergence"}) {
    CHECK(next(out) == "SCALARS");
    CHECK(next(out) == name);
    next(out);
    next(out);
    next(out);
    next(out);
    for (int c = 0; c < nc; ++c) {
      double v;
      out >> v;
      const double expected = std::string(name) == "vorticity" ? 2.0 : 0.0;
      CHECK(v == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
    }
  }
  CHECK(out.good());
}
