#include "svfem/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <set>
#include <optional>
#include <sstream>

#include "svfem/error.hpp"
#include "svfem/problems.hpp"
#include "svfem/vtk.hpp"

#ifndef SVFEM_GIT_REVISION
#define SVFEM_GIT_REVISION "unknown"
#endif

namespace svfem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

StarTerm star_term(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::upwind_dg: return StarTerm::upwind;
    case SchemeVariant::vol_S1: return StarTerm::S1;
    case SchemeVariant::vol_S2: return StarTerm::S2;
  }
  return StarTerm::none;
}

ManufacturedFlow manufactured(const SimulationConfig& c) {
  ManufacturedFlow mf;
  mf.nu = c.nu;
  mf.pressure_scale = c.pressure_scale;
  return mf;
}

std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
}

}  // namespace

Simulation::Simulation(const SimulationConfig& config, Execution execution)
    : config_((config.validate(), config)),
      mesh_(build_mesh(config.mesh)),
      space_(mesh_, config.order),
      solver_(space_, config.physical(), config.scheme, execution) {}

VectorFunction Simulation::forcing() const {
  VectorFunction base;
  if (config_.forcing == "manufactured") base = manufactured(config_).forcing_function();
  const double lambda = config_.gradient_force;
  if (lambda == 0.0) return base;
  return [base, lambda](double t, const Vec2& x) {
    Vec2 f = lambda * gradient_potential_grad(x);
    if (base) f += base(t, x);
    return f;
  };
}

VectorFunction Simulation::initial_velocity() const {
  const std::string& kind = config_.initial;
  if (kind == "manufactured") return manufactured(config_).velocity_function();
  if (kind == "shear_layer") {
    ShearLayer kh;
    kh.delta0 = config_.delta0;
    kh.u_inf = config_.u_inf;
    kh.c_n = config_.c_n;
    return kh.velocity_function();
  }
  if (kind == "swirl") return [](double, const Vec2& x) { return periodic_swirl(x); };
  if (kind == "compact_vortex") {
    const auto box = mesh_.bounding_box();
    CompactVortex v;
    v.center = Vec2(0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3]));
    return v.velocity_function();
  }
  return [](double, const Vec2&) { return Vec2(0.0, 0.0); };
}

VectorFunction Simulation::exact_velocity() const {
  if (config_.initial != "manufactured" || config_.forcing != "manufactured") return {};
  return manufactured(config_).velocity_function();
}

GradientFunction Simulation::exact_gradient() const {
  if (config_.initial != "manufactured" || config_.forcing != "manufactured") return {};
  return manufactured(config_).gradient_function();
}

FlowState Simulation::initial_state() { return solver_.set_initial(initial_velocity(), config_.projection, 0.0); }

RunResult run_simulation(const SimulationConfig& config, const RunOptions& options, Execution execution) {
  const auto t0 = Clock::now();
  Simulation sim(config, execution);
  const FESpace& s = sim.space();
  FlowSolver& solver = sim.solver();
  const VectorFunction f = sim.forcing();
  const bool shear = config.initial == "shear_layer";

  RunResult r;
  r.n_u = s.n_u();
  r.n_p = s.n_p();
  r.system_u = solver.system_velocity_dofs();
  r.system_p = solver.system_pressure_dofs();

  std::optional<ErrorAccumulator> errors;
  if (sim.exact_velocity()) {
    errors.emplace(s, sim.exact_velocity(), sim.exact_gradient(), config.nu, star_term(config.scheme.variant));
  }

  std::set<int> dump_steps;
  for (double d : config.dump_times) dump_steps.insert(static_cast<int>(std::llround(d * config.time_unit / config.dt)));
  if (options.write_files) ensure_dir(config.out_dir);

  auto dump = [&](const FlowState& st) {
    std::ostringstream name;
    name << config.out_dir << "/fields_" << std::setw(6) << std::setfill('0') << st.step << ".vtk";
    std::ostringstream title;
    title << config.preset << " t=" << csv_number(st.t);
    write_vtk_file(name.str(), s, st.u, st.p, title.str());
    r.files.push_back(name.str());
  };
  std::optional<ThicknessProbe> probe;
  if (shear) probe.emplace(s);
  auto diagnose = [&](const FlowState& st, double energy, double mass) {
    const Momenta m = momenta(s, st.u);
    const double thickness = probe ? (*probe)(st.u, config.u_inf) : std::numeric_limits<double>::quiet_NaN();
    r.diagnostics.push(st.t, {energy, enstrophy(s, st.u), thickness, mass, m.linear(0), m.linear(1), m.angular});
  };

  FlowState st = sim.initial_state();
  double energy = kinetic_energy(s, st.u);
  double mass = mass_residual(s, st.u);
  r.max_mass_residual = mass;
  r.energy.push(st.t, energy);
  diagnose(st, energy, mass);
  if (errors) errors->add(st.t, st.u);
  if (options.write_files && (dump_steps.count(0) || config.fields_every > 0)) dump(st);

  const int steps = config.steps();
  for (int n = 1; n <= steps; ++n) {
    const StepReport rep = solver.step(st, config.dt, f);
    r.picard_iterations += rep.picard_iterations;
    const double next = kinetic_energy(s, st.u);
    r.max_energy_increase = std::max(r.max_energy_increase, next - energy);
    energy = next;
    mass = mass_residual(solver.context(), st.u);
    r.max_mass_residual = std::max(r.max_mass_residual, mass);
    r.energy.push(st.t, energy);
    if (errors) errors->add(st.t, st.u);
    if (n % config.diagnostics_every == 0 || n == steps) diagnose(st, energy, mass);
    if (options.write_files &&
        (dump_steps.count(n) || (config.fields_every > 0 && n % config.fields_every == 0))) {
      dump(st);
    }
    if (options.on_step && !options.on_step(st)) break;
  }
  r.steps = st.step;
  r.factorizations = solver.factorizations();
  if (errors) {
    r.linf_l2 = errors->linf_l2();
    r.star_norm = errors->star_norm();
  }
  r.final_state = std::move(st);
  r.seconds = seconds_since(t0);

  if (options.write_files) {
    r.diagnostics.write_csv_file(config.out_dir + "/diagnostics.csv");
    r.energy.write_csv_file(config.out_dir + "/energy.csv");
    r.files.push_back(config.out_dir + "/diagnostics.csv");
    r.files.push_back(config.out_dir + "/energy.csv");
    write_manifest(config.out_dir + "/manifest.json", config, "run",
                   {{"linf_l2", r.linf_l2},
                    {"star_norm", r.star_norm},
                    {"max_mass_residual", r.max_mass_residual},
                    {"max_energy_increase", r.max_energy_increase},
                    {"steps", r.steps},
                    {"seconds", r.seconds}});
  }
  return r;
}

std::vector<ConvergenceRow> run_convergence(const SimulationConfig& config, int levels, std::ostream* progress) {
  if (levels < 2) throw Error(ErrorCode::invalid_argument, "a convergence study needs at least two levels");
  std::vector<ConvergenceRow> rows;
  for (int i = 0; i < levels; ++i) {
    SimulationConfig c = config;
    c.mesh.level = config.mesh.level + i;
    const Mesh m = build_mesh(c.mesh);
    const RunResult run = run_simulation(c);
    ConvergenceRow row;
    row.level = c.mesh.level;
    row.cells = m.num_cells();
    row.h = m.max_h();
    row.n_u = run.n_u;
    row.n_p = run.n_p;
    row.linf_l2 = run.linf_l2;
    row.star_norm = run.star_norm;
    row.max_mass_residual = run.max_mass_residual;
    row.seconds = run.seconds;
    if (!rows.empty()) {
      const ConvergenceRow& prev = rows.back();
      const double dh = std::log(prev.h / row.h);
      row.rate_l2 = std::log(prev.linf_l2 / row.linf_l2) / dh;
      row.rate_star = std::log(prev.star_norm / row.star_norm) / dh;
    }
    rows.push_back(row);
    if (progress) {
      *progress << "  " << to_string(c.scheme.variant) << " level " << row.level << ": L2 " << row.linf_l2
                << " star " << row.star_norm << " rate " << row.rate_l2 << " (" << row.seconds << " s)\n";
    }
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "level,cells,h,n_u,n_p,linf_l2,star_norm,rate_l2,rate_star,max_mass_residual\n";
  for (const auto& r : rows) {
    out << r.level << "," << r.cells << "," << csv_number(r.h) << "," << r.n_u << "," << r.n_p << ","
        << csv_number(r.linf_l2) << "," << csv_number(r.star_norm) << "," << csv_number(r.rate_l2) << ","
        << csv_number(r.rate_star) << "," << csv_number(r.max_mass_residual) << "\n";
  }
}

std::vector<RobustnessRow> run_robustness(const SimulationConfig& config, const std::vector<double>& nus,
                                          double lambda, std::ostream* progress) {
  const Mesh m = build_mesh(config.mesh);
  const FESpace s(m, config.order);
  std::vector<RobustnessRow> rows;
  for (double nu : nus) {
    SimulationConfig c = config;
    c.nu = nu;
    c.gradient_force = 0.0;
    const RunResult base = run_simulation(c);
    const double base_norm = std::sqrt(2.0 * kinetic_energy(s, base.final_state.u));
    for (double l : {0.0, lambda}) {
      RobustnessRow row;
      row.nu = nu;
      row.lambda = l;
      RunResult run;
      if (l == 0.0) {
        run = base;
      } else {
        c.gradient_force = l;
        run = run_simulation(c);
      }
      row.linf_l2 = run.linf_l2;
      row.star_norm = run.star_norm;
      row.max_mass_residual = run.max_mass_residual;
      row.max_picard = run.steps > 0 ? (run.picard_iterations + run.steps - 1) / run.steps : 0;
      const Vector d = run.final_state.u - base.final_state.u;
      row.velocity_change = std::sqrt(2.0 * kinetic_energy(s, d)) / base_norm;
      rows.push_back(row);
      if (progress) {
        *progress << "  nu " << nu << " lambda " << l << ": L2 " << row.linf_l2 << " change "
                  << row.velocity_change << "\n";
      }
    }
  }
  return rows;
}

void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows) {
  out << "nu,lambda,linf_l2,star_norm,velocity_change,max_mass_residual,mean_picard\n";
  for (const auto& r : rows) {
    out << csv_number(r.nu) << "," << csv_number(r.lambda) << "," << csv_number(r.linf_l2) << ","
        << csv_number(r.star_norm) << "," << csv_number(r.velocity_change) << ","
        << csv_number(r.max_mass_residual) << "," << r.max_picard << "\n";
  }
}

double form_identity_residual(FlowSolver& solver, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  const FormContext& ctx = solver.context();
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector w = random_divergence_free(solver, rng);
    const SparseOperator dg = assemble_c_dG(ctx, w);
    const SparseMatrix diff = dg.matrix() - assemble_c_vol(ctx, w).matrix() - assemble_c_R(ctx, w).matrix();
    double m = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
    worst = std::max(worst, m / dg.max_abs());
  }
  return worst;
}

Vector random_divergence_free(FlowSolver& solver, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector w(solver.space().n_u());
  for (auto& v : w) v = d(rng);
  return solver.project(w);
}

double skew_residual(FlowSolver& solver, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector w = random_divergence_free(solver, rng);
    const SparseMatrix c = assemble_c_vol(solver.context(), w).matrix();
    Vector v(w.size());
    for (auto& x : v) x = d(rng);
    solver.space().apply_constraints(v);
    const Vector av = v.cwiseAbs();
    const double scale = av.dot(c.cwiseAbs() * av);
    worst = std::max(worst, std::abs(v.dot(c * v)) / scale);
  }
  return worst;
}

double bubble_divergence_constant(const FESpace& space, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  const QuadRule rule = triangle_rule(2 * space.order());
  const ReferenceTables tables = space.tabulate(rule);
  const int nb = space.enrichment().ndof();
  double worst = 0.0;
  CellValues cv;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    space.cell_values(c, tables, cv);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nb, nb), dd = mass;
    for (int q = 0; q < rule.size(); ++q) {
      const auto v = cv.u[q].value.bottomRows(nb);
      const auto dv = cv.u[q].div.tail(nb);
      mass += cv.jxw[q] * v * v.transpose();
      dd += cv.jxw[q] * dv * dv.transpose();
    }
    const double h = space.geometry(c).h;
    for (int i = 0; i < samples; ++i) {
      Eigen::VectorXd b(nb);
      for (auto& x : b) x = d(rng);
      worst = std::max(worst, std::sqrt(b.dot(mass * b) / b.dot(dd * b)) / h);
    }
  }
  return worst;
}

std::vector<CheckResult> run_conservation_suite(const SimulationConfig& config, unsigned seed,
                                                std::ostream* progress) {
  std::vector<CheckResult> out;
  auto report = [&](std::string name, double value, double tol, bool ok) {
    out.push_back({std::move(name), value, tol, ok});
    if (progress) {
      *progress << "  " << (ok ? "ok   " : "FAIL ") << out.back().name << ": " << value << " (tolerance " << tol
                << ")\n";
    }
  };
  auto below = [&](std::string name, double value, double tol) { report(std::move(name), value, tol, value <= tol); };

  // form identity on the manufactured-flow grid refined once
  {
    MeshSpec ms;
    ms.source = "example1";
    ms.level = 1;
    const Mesh m = build_mesh(ms);
    for (int k : {1, 2}) {
      const FESpace s(m, k);
      FlowSolver solver(s, {}, {});
      below("c_dG - c_vol - c_R, k=" + std::to_string(k), form_identity_residual(solver, 10, seed), 1e-12);
    }
  }

  // skew-symmetry, energy and momentum on the torus
  SimulationConfig torus = config;
  torus.forcing = "none";
  torus.gradient_force = 0.0;
  torus.initial = "swirl";
  torus.mesh.boundary = "torus";
  torus.scheme.variant = SchemeVariant::vol_S2;
  torus.scheme.integrator = TimeIntegrator::crank_nicolson;
  torus.t_end = 100 * torus.dt;
  double mass = 0.0;
  {
    Simulation sim(torus);
    below("skew symmetry of c_vol", skew_residual(sim.solver(), 10, seed + 1), 1e-12);

    FlowSolver& solver = sim.solver();
    const FESpace& s = sim.space();
    const SparseMatrix l = torus.nu * solver.laplace().matrix() + solver.stabilization();
    FlowState st = sim.initial_state();
    const double e0 = kinetic_energy(s, st.u);
    const Momenta m0 = momenta(s, st.u);
    double balance = 0.0, drift = 0.0;
    mass = mass_residual(s, st.u);
    for (int n = 0; n < torus.steps(); ++n) {
      const Vector old = st.u;
      solver.step(st, torus.dt, nullptr);
      const Vector mid = 0.5 * (old + st.u);
      const double r = kinetic_energy(s, st.u) - kinetic_energy(s, old) + torus.dt * mid.dot(l * mid);
      balance = std::max(balance, std::abs(r) / e0);
      drift = std::max(drift, (momenta(s, st.u).linear - m0.linear).norm() / m0.linear.norm());
      mass = std::max(mass, mass_residual(s, st.u));
    }
    below("Crank-Nicolson energy balance per step / E0", balance, 1e-10);
    below("linear momentum drift on the torus", drift, 1e-8);
  }

  // angular momentum of a compact vortex in a Dirichlet box
  {
    SimulationConfig box = torus;
    box.mesh.source = "structured";
    box.mesh.boundary = "dirichlet";
    box.mesh.n = std::max(32, config.mesh.n * 8);
    box.mesh.level = 0;
    box.initial = "compact_vortex";
    Simulation sim(box);
    const FESpace& s = sim.space();
    FlowState st = sim.initial_state();
    const Momenta m0 = momenta(s, st.u);
    double drift = 0.0;
    for (int n = 0; n < box.steps(); ++n) {
      sim.solver().step(st, box.dt, nullptr);
      drift = std::max(drift, std::abs(momenta(s, st.u).angular - m0.angular) / std::abs(m0.angular));
      mass = std::max(mass, mass_residual(s, st.u));
    }
    below("angular momentum drift of a compact vortex", drift, 1e-8);
  }

  // backward Euler with upwinding dissipates
  {
    SimulationConfig uw = torus;
    uw.scheme.variant = SchemeVariant::upwind_dg;
    uw.scheme.integrator = TimeIntegrator::backward_euler;
    uw.t_end = 20 * uw.dt;
    const RunResult r = run_simulation(uw);
    mass = std::max(mass, r.max_mass_residual);
    below("upwind backward Euler energy increase per step", r.max_energy_increase, 1e-12);
  }
  below("mass residual over the suite", mass, 1e-10);
  return out;
}

void write_checks_csv(std::ostream& out, const std::vector<CheckResult>& checks) {
  out << "check,value,tolerance,passed\n";
  for (const auto& c : checks) {
    out << "\"" << c.name << "\"," << csv_number(c.value) << "," << csv_number(c.tolerance) << ","
        << (c.passed ? 1 : 0) << "\n";
  }
}

std::string git_revision() { return SVFEM_GIT_REVISION; }

void write_manifest(const std::string& path, const SimulationConfig& config, const std::string& command,
                    const std::vector<std::pair<std::string, double>>& results) {
  std::stringstream ini;
  write_config(ini, config);
  boost::property_tree::ptree tree;
  boost::property_tree::read_ini(ini, tree);
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [section, keys] : tree) {
    for (const auto& [key, value] : keys) cfg[section][key] = value.data();
  }
  nlohmann::json j;
  j["command"] = command;
  j["git_revision"] = git_revision();
  j["preset"] = config.preset;
  j["desk_scale"] = config.desk_scale;
  j["config"] = cfg;
  nlohmann::json res = nlohmann::json::object();
  for (const auto& [k, v] : results) {
    if (std::isfinite(v)) {
      res[k] = v;
    } else {
      res[k] = nullptr;
    }
  }
  j["results"] = res;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace svfem
