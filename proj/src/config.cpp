#include "svfem/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "svfem/error.hpp"
#include "svfem/problems.hpp"

namespace svfem {

namespace pt = boost::property_tree;

namespace {

std::string number(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + number(v[i]);
  return s;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(std::stod(item.substr(b)));
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(ErrorCode::invalid_argument, "not a boolean: '" + s + "'");
}

template <class T>
void read(const pt::ptree& t, const std::string& key, T& v) {
  const auto node = t.get_optional<std::string>(key);
  if (!node) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      v = parse_bool(*node);
    } else if constexpr (std::is_same_v<T, std::string>) {
      v = *node;
    } else if constexpr (std::is_same_v<T, double>) {
      v = std::stod(*node);
    } else {
      v = static_cast<T>(std::stol(*node));
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::invalid_argument, "bad value for " + key + ": '" + *node + "'");
  }
}

}  // namespace

std::string to_string(StructuredPattern p) {
  return p == StructuredPattern::crisscross_2x2 ? "crisscross" : "uniform_diag";
}

StructuredPattern parse_pattern(const std::string& s) {
  if (s == "crisscross") return StructuredPattern::crisscross_2x2;
  if (s == "uniform_diag") return StructuredPattern::uniform_diag;
  throw Error(ErrorCode::invalid_argument, "unknown mesh pattern '" + s + "'");
}

std::string to_string(InitialProjection p) { return p == InitialProjection::leray ? "leray" : "interpolate"; }

InitialProjection parse_projection(const std::string& s) {
  if (s == "leray") return InitialProjection::leray;
  if (s == "interpolate") return InitialProjection::interpolate;
  throw Error(ErrorCode::invalid_argument, "unknown initial projection '" + s + "'");
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, m); };
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(t_end > 0.0)) fail("t_end must be positive");
  if (order < 1 || order > 4) fail("order must be in 1..4");
  if (scheme.reduced && order < 2) fail("the reduced scheme needs order >= 2");
  if (mesh.level < 0) fail("level must be non-negative");
  if (mesh.source == "structured" && mesh.n < 1) fail("structured mesh needs n >= 1");
  if (!(mesh.extent > 0.0)) fail("extent must be positive");
  if (!(nu >= 0.0)) fail("nu must be non-negative");
  if (diagnostics_every < 1) fail("diagnostics_every must be positive");
  if (fields_every < 0) fail("fields_every must be non-negative");
  if (!(time_unit > 0.0)) fail("time_unit must be positive");
  for (const auto& [name, ok] : {std::pair{forcing, forcing == "manufactured" || forcing == "none"},
                                 std::pair{initial, initial == "manufactured" || initial == "shear_layer" ||
                                                        initial == "swirl" || initial == "compact_vortex" ||
                                                        initial == "zero"},
                                 std::pair{mesh.boundary, mesh.boundary == "dirichlet" || mesh.boundary == "torus" ||
                                                              mesh.boundary == "shear_layer"}}) {
    if (!ok) fail("unknown setting '" + name + "'");
  }
}

int SimulationConfig::steps() const { return static_cast<int>(std::llround(t_end / dt)); }

std::vector<std::string> preset_names() {
  return {"example1", "example1-robustness", "kelvin-helmholtz", "conservation-suite"};
}

SimulationConfig preset(const std::string& name) {
  SimulationConfig c;
  c.preset = name;
  if (name == "example1" || name == "example1-robustness") {
    // full horizon T = 3; desk scale stops at 0.1
    c.scheme.variant = SchemeVariant::vol_S2;
    c.scheme.integrator = TimeIntegrator::crank_nicolson;
    c.scheme.reduced = true;
    c.scheme.frozen_factorization = true;
    c.order = 2;
    c.mesh.source = "example1";
    c.mesh.level = name == "example1" ? 0 : 1;
    c.nu = 1e-6;
    c.forcing = "manufactured";
    c.initial = "manufactured";
    c.pressure_scale = 20.0;
    c.dt = 1e-3;
    c.t_end = 0.1;
    c.out_dir = "out/" + name;
    c.diagnostics_every = 10;
    if (name == "example1-robustness") c.scheme.rhs_degree = 12;
    return c;
  }
  if (name == "kelvin-helmholtz") {
    // full run: 256x256 cells to t/delta0 = 400; desk scale 32x32 to 10
    c.scheme.variant = SchemeVariant::vol_S2;
    c.scheme.integrator = TimeIntegrator::crank_nicolson;
    c.scheme.convection = ConvectionTreatment::linearized;
    c.scheme.reduced = true;
    c.scheme.frozen_factorization = true;
    c.order = 2;
    c.mesh.source = "structured";
    c.mesh.n = 32;
    c.mesh.pattern = StructuredPattern::crisscross_2x2;
    c.mesh.boundary = "shear_layer";
    c.delta0 = 1.0 / 28.0;
    c.u_inf = 1.0;
    c.c_n = 1e-3;
    c.nu = 1.0 / 280000.0;
    c.gamma = 1.0;
    c.forcing = "none";
    c.initial = "shear_layer";
    c.time_unit = c.delta0;
    c.dt = 1e-3 * c.delta0;
    c.t_end = 10.0 * c.delta0;
    c.dump_times = {0.0, 5.0, 10.0};
    c.diagnostics_every = 10;
    c.out_dir = "out/kelvin-helmholtz";
    return c;
  }
  if (name == "conservation-suite") {
    c.order = 2;
    c.mesh.source = "structured";
    c.mesh.n = 4;
    c.mesh.boundary = "torus";
    c.nu = 1e-3;
    c.forcing = "none";
    c.initial = "swirl";
    c.dt = 0.02;
    c.t_end = 2.0;
    c.out_dir = "out/conservation-suite";
    return c;
  }
  throw Error(ErrorCode::invalid_argument, "unknown preset '" + name + "'");
}

SimulationConfig read_config(std::istream& in) {
  pt::ptree t;
  try {
    pt::read_ini(in, t);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::invalid_argument, std::string("config: ") + e.what());
  }
  std::string base = "custom";
  read(t, "run.preset", base);
  SimulationConfig c;
  if (base != "custom") c = preset(base);
  c.preset = base;

  std::string s;
  if (s.clear(), read(t, "scheme.variant", s), !s.empty()) c.scheme.variant = parse_scheme_variant(s);
  if (s.clear(), read(t, "scheme.integrator", s), !s.empty()) c.scheme.integrator = parse_time_integrator(s);
  if (s.clear(), read(t, "scheme.convection", s), !s.empty()) c.scheme.convection = parse_convection(s);
  read(t, "scheme.reduced", c.scheme.reduced);
  read(t, "scheme.frozen_factorization", c.scheme.frozen_factorization);
  read(t, "scheme.picard_tol", c.scheme.picard_tol);
  read(t, "scheme.picard_max", c.scheme.picard_max);

  read(t, "discretization.order", c.order);
  read(t, "discretization.mesh", c.mesh.source);
  read(t, "discretization.n", c.mesh.n);
  read(t, "discretization.extent", c.mesh.extent);
  if (s.clear(), read(t, "discretization.pattern", s), !s.empty()) c.mesh.pattern = parse_pattern(s);
  read(t, "discretization.boundary", c.mesh.boundary);
  read(t, "discretization.level", c.mesh.level);
  read(t, "discretization.rhs_degree", c.scheme.rhs_degree);

  read(t, "physics.nu", c.nu);
  read(t, "physics.forcing", c.forcing);
  read(t, "physics.initial", c.initial);
  if (s.clear(), read(t, "physics.projection", s), !s.empty()) c.projection = parse_projection(s);
  read(t, "physics.gradient_force", c.gradient_force);
  read(t, "physics.pressure_scale", c.pressure_scale);
  read(t, "physics.delta0", c.delta0);
  read(t, "physics.u_inf", c.u_inf);
  read(t, "physics.c_n", c.c_n);

  read(t, "time.dt", c.dt);
  read(t, "time.t_end", c.t_end);
  read(t, "time.unit", c.time_unit);

  read(t, "stabilization.alpha", c.alpha);
  read(t, "stabilization.gamma", c.gamma);

  read(t, "output.dir", c.out_dir);
  read(t, "output.diagnostics_every", c.diagnostics_every);
  read(t, "output.fields_every", c.fields_every);
  if (auto d = t.get_optional<std::string>("output.dump_times")) c.dump_times = parse_list(*d);
  read(t, "run.seed", c.seed);
  read(t, "run.desk_scale", c.desk_scale);
  c.validate();
  return c;
}

SimulationConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return read_config(in);
}

void write_config(std::ostream& out, const SimulationConfig& c) {
  pt::ptree t;
  t.put("run.preset", c.preset);
  t.put("run.seed", std::to_string(c.seed));
  t.put("run.desk_scale", c.desk_scale ? "true" : "false");
  t.put("scheme.variant", to_string(c.scheme.variant));
  t.put("scheme.integrator", to_string(c.scheme.integrator));
  t.put("scheme.convection", to_string(c.scheme.convection));
  t.put("scheme.reduced", c.scheme.reduced ? "true" : "false");
  t.put("scheme.frozen_factorization", c.scheme.frozen_factorization ? "true" : "false");
  t.put("scheme.picard_tol", number(c.scheme.picard_tol));
  t.put("scheme.picard_max", std::to_string(c.scheme.picard_max));
  t.put("discretization.order", std::to_string(c.order));
  t.put("discretization.mesh", c.mesh.source);
  t.put("discretization.n", std::to_string(c.mesh.n));
  t.put("discretization.extent", number(c.mesh.extent));
  t.put("discretization.pattern", to_string(c.mesh.pattern));
  t.put("discretization.boundary", c.mesh.boundary);
  t.put("discretization.level", std::to_string(c.mesh.level));
  t.put("discretization.rhs_degree", std::to_string(c.scheme.rhs_degree));
  t.put("physics.nu", number(c.nu));
  t.put("physics.forcing", c.forcing);
  t.put("physics.initial", c.initial);
  t.put("physics.projection", to_string(c.projection));
  t.put("physics.gradient_force", number(c.gradient_force));
  t.put("physics.pressure_scale", number(c.pressure_scale));
  t.put("physics.delta0", number(c.delta0));
  t.put("physics.u_inf", number(c.u_inf));
  t.put("physics.c_n", number(c.c_n));
  t.put("time.dt", number(c.dt));
  t.put("time.t_end", number(c.t_end));
  t.put("time.unit", number(c.time_unit));
  t.put("stabilization.alpha", number(c.alpha));
  t.put("stabilization.gamma", number(c.gamma));
  t.put("output.dir", c.out_dir);
  t.put("output.diagnostics_every", std::to_string(c.diagnostics_every));
  t.put("output.fields_every", std::to_string(c.fields_every));
  t.put("output.dump_times", list(c.dump_times));
  pt::write_ini(out, t);
}

void write_config_file(const std::string& path, const SimulationConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  write_config(out, config);
}

bool operator==(const SimulationConfig& a, const SimulationConfig& b) {
  const SchemeSpec &x = a.scheme, &y = b.scheme;
  const bool scheme = x.variant == y.variant && x.integrator == y.integrator && x.convection == y.convection &&
                      x.picard_tol == y.picard_tol && x.picard_max == y.picard_max && x.reduced == y.reduced &&
                      x.frozen_factorization == y.frozen_factorization && x.rhs_degree == y.rhs_degree;
  const bool mesh = a.mesh.source == b.mesh.source && a.mesh.n == b.mesh.n && a.mesh.extent == b.mesh.extent && a.mesh.pattern == b.mesh.pattern &&
                    a.mesh.boundary == b.mesh.boundary && a.mesh.level == b.mesh.level;
  return scheme && mesh && a.preset == b.preset && a.order == b.order && a.nu == b.nu && a.forcing == b.forcing &&
         a.initial == b.initial && a.projection == b.projection && a.gradient_force == b.gradient_force &&
         a.pressure_scale == b.pressure_scale && a.delta0 == b.delta0 && a.u_inf == b.u_inf && a.c_n == b.c_n &&
         a.dt == b.dt && a.t_end == b.t_end && a.alpha == b.alpha && a.gamma == b.gamma &&
         a.out_dir == b.out_dir && a.diagnostics_every == b.diagnostics_every &&
         a.fields_every == b.fields_every && a.dump_times == b.dump_times && a.time_unit == b.time_unit &&
         a.seed == b.seed && a.desk_scale == b.desk_scale;
}

Mesh build_mesh(const MeshSpec& spec) {
  Mesh m;
  if (spec.source == "example1") {
    m = read_mesh_file(std::string(SVFEM_DATA_DIR) + "/meshes/example1_level0.mesh");
  } else if (spec.source == "structured") {
    m = build_structured(spec.n, spec.n, spec.pattern, 0.0, spec.extent, 0.0, spec.extent);
  } else {
    m = read_mesh_file(spec.source);
  }
  m = refine_uniform(m, spec.level);
  if (spec.boundary == "torus" || spec.boundary == "shear_layer") {
    m.tag_side(Axis::x, false, BoundaryTag::periodic_left);
    m.tag_side(Axis::x, true, BoundaryTag::periodic_right);
    const auto box = m.bounding_box();
    m.identify_periodic(Axis::x, box[1] - box[0]);
    if (spec.boundary == "torus") {
      m.tag_side(Axis::y, false, BoundaryTag::periodic_bottom);
      m.tag_side(Axis::y, true, BoundaryTag::periodic_top);
      m.identify_periodic(Axis::y, box[3] - box[2]);
    } else {
      m.tag_side(Axis::y, false, BoundaryTag::slip_bottom);
      m.tag_side(Axis::y, true, BoundaryTag::slip_top);
    }
  }
  return m;
}

}  // namespace svfem
