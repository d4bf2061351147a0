// Command-line driver for the experiment suites.
#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "svfem/config.hpp"
#include "svfem/error.hpp"
#include "svfem/experiments.hpp"

using namespace svfem;

namespace {

struct Overrides {
  std::optional<int> level, order;
  std::optional<std::string> scheme;
  std::optional<double> dt, tend;
  std::optional<std::string> out;
  std::optional<unsigned> seed;
  std::optional<std::string> config;
  bool serial = false;

  void add_to(CLI::App* app) {
    app->add_option("--level", level, "Refinement level (first level for convergence)");
    app->add_option("--order", order, "Polynomial order k");
    app->add_option("--scheme", scheme, "upwind_dg, vol_S1 or vol_S2");
    app->add_option("--dt", dt, "Time step");
    app->add_option("--tend", tend, "Final time");
    app->add_option("--out", out, "Output directory");
    app->add_option("--seed", seed, "Seed of the randomized batteries");
    app->add_option("--config", config, "INI file replacing the preset")->check(CLI::ExistingFile);
    app->add_flag("--serial", serial, "Serial assembly kernels");
  }

  SimulationConfig apply(SimulationConfig c) const {
    if (config) c = read_config_file(*config);
    if (level) c.mesh.level = *level;
    if (order) c.order = *order;
    if (scheme) c.scheme.variant = parse_scheme_variant(*scheme);
    if (dt) c.dt = *dt;
    if (tend) c.t_end = *tend;
    if (out) c.out_dir = *out;
    if (seed) c.seed = *seed;
    c.validate();
    return c;
  }
  Execution execution() const { return serial ? Execution::serial : Execution::parallel; }
};

void prepare(const SimulationConfig& c) {
  std::filesystem::create_directories(c.out_dir);
  write_config_file(c.out_dir + "/config.ini", c);
  if (c.desk_scale) std::cout << "# desk-scale run (" << c.preset << "), not the full published setup\n";
}

int convergence(const SimulationConfig& base, int levels, bool all) {
  prepare(base);
  std::vector<SchemeVariant> variants{base.scheme.variant};
  if (all) variants = {SchemeVariant::upwind_dg, SchemeVariant::vol_S1, SchemeVariant::vol_S2};
  std::vector<std::pair<std::string, double>> results;
  for (SchemeVariant v : variants) {
    SimulationConfig c = base;
    c.scheme.variant = v;
    std::cout << "convergence " << to_string(v) << "\n";
    const auto rows = run_convergence(c, levels, &std::cout);
    std::ofstream out(c.out_dir + "/convergence_" + to_string(v) + ".csv");
    write_convergence_csv(out, rows);
    results.emplace_back(to_string(v) + ".rate_l2", rows.back().rate_l2);
    results.emplace_back(to_string(v) + ".finest_l2", rows.back().linf_l2);
  }
  write_manifest(base.out_dir + "/manifest.json", base, "convergence", results);
  return 0;
}

int robustness(const SimulationConfig& c, const std::vector<double>& nus, double lambda) {
  prepare(c);
  const auto rows = run_robustness(c, nus, lambda, &std::cout);
  std::ofstream out(c.out_dir + "/robustness.csv");
  write_robustness_csv(out, rows);
  double change = 0.0;
  for (const auto& r : rows) change = std::max(change, r.velocity_change);
  write_manifest(c.out_dir + "/manifest.json", c, "robustness", {{"max_velocity_change", change}});
  return 0;
}

int simulate(const SimulationConfig& c, Execution exec, const std::string& command) {
  prepare(c);
  RunOptions opts;
  opts.write_files = true;
  const int every = std::max(1, c.steps() / 20);
  opts.on_step = [&](const FlowState& st) {
    if (st.step % every == 0) std::cout << "  step " << st.step << " t = " << st.t << "\n" << std::flush;
    return true;
  };
  const RunResult r = run_simulation(c, opts, exec);
  const auto& d = r.diagnostics.values();
  std::cout << command << ": " << r.steps << " steps in " << r.seconds << " s, " << r.factorizations
            << " factorizations, " << r.picard_iterations << " Picard iterations\n";
  std::cout << "  energy " << d.front()[0] << " -> " << d.back()[0] << ", enstrophy " << d.front()[1] << " -> "
            << d.back()[1] << "\n";
  if (std::isfinite(d.front()[2])) {
    std::cout << "  vorticity thickness " << d.front()[2] << " -> " << d.back()[2] << " (delta0 = " << c.delta0
              << ")\n";
  }
  if (std::isfinite(r.linf_l2)) std::cout << "  errors: L2 " << r.linf_l2 << " star " << r.star_norm << "\n";
  std::cout << "  max mass residual " << r.max_mass_residual << ", max energy increase " << r.max_energy_increase
            << "\n  output in " << c.out_dir << "\n";
  return 0;
}

int conserve(const SimulationConfig& c) {
  prepare(c);
  const auto checks = run_conservation_suite(c, c.seed, &std::cout);
  std::ofstream out(c.out_dir + "/conservation.csv");
  write_checks_csv(out, checks);
  std::vector<std::pair<std::string, double>> results;
  bool ok = true;
  for (const auto& ch : checks) {
    results.emplace_back(ch.name, ch.value);
    ok = ok && ch.passed;
  }
  write_manifest(c.out_dir + "/manifest.json", c, "conserve", results);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enriched Scott-Vogelius Navier-Stokes experiments"};
  app.require_subcommand(1);

  Overrides conv_o, rob_o, kh_o, cons_o;
  int levels = 4;
  bool all = false;
  auto* conv = app.add_subcommand("convergence", "Manufactured-flow convergence study");
  conv_o.add_to(conv);
  conv->add_option("--levels", levels, "Number of mesh levels")->check(CLI::Range(2, 8));
  conv->add_flag("--all", all, "All three scheme variants");

  std::vector<double> nus{1e-2, 1e-4, 1e-6};
  double lambda = 1e4;
  auto* rob = app.add_subcommand("robustness", "Viscosity and gradient-force probes");
  rob_o.add_to(rob);
  rob->add_option("--nu", nus, "Viscosities")->delimiter(',');
  rob->add_option("--lambda", lambda, "Gradient force scale");

  int kh_n = 0;
  auto* kh = app.add_subcommand("kh", "Kelvin-Helmholtz shear layer");
  kh_o.add_to(kh);
  kh->add_option("--n", kh_n, "Cells per side");

  auto* cons = app.add_subcommand("conserve", "Conservation and form-identity batteries");
  cons_o.add_to(cons);

  std::string config_path;
  Overrides run_o;
  auto* run = app.add_subcommand("run", "Run a configuration file");
  run->add_option("file", config_path, "INI file")->required()->check(CLI::ExistingFile);
  run_o.add_to(run);

  std::string preset_name, preset_out;
  auto* pre = app.add_subcommand("preset", "Print or save a preset as INI");
  pre->add_option("name", preset_name, "Preset name")->required()->check(CLI::IsMember(preset_names()));
  pre->add_option("-o,--output", preset_out, "Write to a file instead of stdout");

  std::string mesh_source = "structured", mesh_pattern = "crisscross", mesh_out;
  int mesh_n = 8, mesh_level = 0;
  auto* mesh = app.add_subcommand("mesh", "Generate a mesh file");
  mesh->add_option("--source", mesh_source, "structured, example1 or a mesh file");
  mesh->add_option("--n", mesh_n, "Cells per side for structured meshes");
  mesh->add_option("--pattern", mesh_pattern, "crisscross or uniform_diag");
  mesh->add_option("--level", mesh_level, "Uniform refinements");
  mesh->add_option("-o,--output", mesh_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*conv) return convergence(conv_o.apply(preset("example1")), levels, all);
    if (*rob) return robustness(rob_o.apply(preset("example1-robustness")), nus, lambda);
    if (*kh) {
      SimulationConfig c = preset("kelvin-helmholtz");
      if (kh_n > 0) c.mesh.n = kh_n;
      c = kh_o.apply(c);
      return simulate(c, kh_o.execution(), "kh");
    }
    if (*cons) return conserve(cons_o.apply(preset("conservation-suite")));
    if (*run) {
      run_o.config = config_path;
      const SimulationConfig c = run_o.apply(SimulationConfig{});
      return simulate(c, run_o.execution(), "run");
    }
    if (*pre) {
      const SimulationConfig c = preset(preset_name);
      if (preset_out.empty()) {
        write_config(std::cout, c);
      } else {
        write_config_file(preset_out, c);
      }
      return 0;
    }
    if (*mesh) {
      MeshSpec ms;
      ms.source = mesh_source;
      ms.n = mesh_n;
      ms.pattern = parse_pattern(mesh_pattern);
      ms.level = mesh_level;
      const Mesh m = build_mesh(ms);
      write_mesh_file(mesh_out, m);
      std::cout << m.num_vertices() << " vertices, " << m.num_cells() << " cells -> " << mesh_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
