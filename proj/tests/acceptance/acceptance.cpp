// One pass/fail line per acceptance criterion.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "svfem/config.hpp"
#include "svfem/diagnostics.hpp"
#include "svfem/experiments.hpp"
#include "svfem/problems.hpp"

using namespace svfem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
  bool pass = false;
  std::string text;
};

std::map<int, Line> lines;
double max_mass = 0.0;

void record(int id, bool pass, const std::string& text) { lines[id] = {pass, text}; }

void note_mass(double m) { max_mass = std::max(max_mass, m); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

double l2_ct_difference(const FESpace& s, const Vector& a, const Vector& b) {
  Vector d = a - b, x = a;
  d.tail(s.n_R()).setZero();
  x.tail(s.n_R()).setZero();
  return std::sqrt(kinetic_energy(s, d) / kinetic_energy(s, x));
}

void form_identity() {
  const auto t0 = Clock::now();
  MeshSpec ms;
  ms.level = 1;
  const Mesh m = build_mesh(ms);
  double worst = 0.0;
  for (int k : {1, 2}) {
    const FESpace s(m, k);
    FlowSolver solver(s, {}, {});
    worst = std::max(worst, form_identity_residual(solver, 10, 20240 + k));
  }
  const double t = since(t0);
  record(2, worst <= 1e-12 && t < 10.0,
         "form identity max|C_dG - C_vol - C_R| / max|C_dG| = " + fmt(worst) + " (<= 1e-12), " + fmt(t) +
             " s (< 10 s)");
}

void conservation() {
  const SimulationConfig c = preset("conservation-suite");
  const auto checks = run_conservation_suite(c, 7);
  std::map<std::string, CheckResult> by;
  for (const auto& ch : checks) by[ch.name] = ch;
  const auto& skew = by["skew symmetry of c_vol"];
  const auto& energy = by["Crank-Nicolson energy balance per step / E0"];
  record(3, skew.passed && energy.passed,
         "skew |v^T C_vol(w) v| / scale = " + fmt(skew.value) + " (<= 1e-12), CN energy residual per step / E0 = " +
             fmt(energy.value) + " (<= 1e-10)");
  const auto& lin = by["linear momentum drift on the torus"];
  const auto& ang = by["angular momentum drift of a compact vortex"];
  record(4, lin.passed && ang.passed,
         "momentum drift torus " + fmt(lin.value) + ", angular momentum drift compact vortex " + fmt(ang.value) +
             " (<= 1e-8, 100 steps)");
  const auto& uw = by["upwind backward Euler energy increase per step"];
  record(5, uw.passed, "upwind backward Euler max E(n+1) - E(n) = " + fmt(uw.value) + " (<= 1e-12)");
  note_mass(by["mass residual over the suite"].value);
}

void convergence() {
  const auto t0 = Clock::now();
  SimulationConfig c = preset("example1");
  std::map<SchemeVariant, std::vector<ConvergenceRow>> rows;
  std::string detail;
  bool rates = true;
  for (auto v : {SchemeVariant::upwind_dg, SchemeVariant::vol_S1, SchemeVariant::vol_S2}) {
    c.scheme.variant = v;
    rows[v] = run_convergence(c, 4);
    const double rate = rows[v].back().rate_l2;
    rates = rates && rate >= 1.7;
    detail += to_string(v) + " rate " + fmt(rate) + " err " + fmt(rows[v].back().linf_l2) + "; ";
    for (const auto& r : rows[v]) note_mass(r.max_mass_residual);
  }
  const double t = since(t0);
  const bool order = rows[SchemeVariant::upwind_dg].back().linf_l2 <= rows[SchemeVariant::vol_S1].back().linf_l2;
  record(6, rates && order && t <= 600.0,
         "convergence L_inf(L2) finest rates >= 1.7, upwind <= vol_S1 on the finest level: " + detail + fmt(t) +
             " s (<= 600 s)");
}

void robustness() {
  const SimulationConfig c = preset("example1-robustness");
  const auto rows = run_robustness(c, {1e-2, 1e-4, 1e-6}, 1e4);
  double lo = INFINITY, hi = 0.0, change = 0.0;
  for (const auto& r : rows) {
    note_mass(r.max_mass_residual);
    if (r.lambda == 0.0) {
      lo = std::min(lo, r.linf_l2);
      hi = std::max(hi, r.linf_l2);
    } else {
      change = std::max(change, r.velocity_change);
    }
  }
  record(7, hi / lo <= 3.0,
         "errors over nu in {1e-2, 1e-4, 1e-6}: " + fmt(lo) + " .. " + fmt(hi) + ", ratio " + fmt(hi / lo) +
             " (<= 3)");
  record(8, change <= 1e-8, "gradient force 1e4 grad(phi) changes the velocity by " + fmt(change) + " (<= 1e-8)");
}

void reduced() {
  SimulationConfig c = preset("example1");
  c.mesh.level = 1;
  c.scheme.convection = ConvectionTreatment::explicit_rhs;
  c.scheme.frozen_factorization = false;
  c.scheme.variant = SchemeVariant::vol_S2;
  c.t_end = 10 * c.dt;
  c.scheme.reduced = false;
  const RunResult full = run_simulation(c);
  c.scheme.reduced = true;
  const RunResult red = run_simulation(c);
  note_mass(full.max_mass_residual);
  note_mass(red.max_mass_residual);
  const Mesh m1 = build_mesh(c.mesh);
  const FESpace s1(m1, 2);
  const double diff = l2_ct_difference(s1, full.final_state.u, red.final_state.u);

  c.mesh.level = 3;
  const Mesh m3 = build_mesh(c.mesh);
  const FESpace s3(m3, 2);
  const int nu = s3.n_ct(), np = m3.num_cells();
  record(9, diff <= 1e-8 && nu == 30082 && np == 7424,
         "reduced vs full u^ct relative L2 difference " + fmt(diff) + " (<= 1e-8); level-3 reduced counts " +
             std::to_string(nu) + " velocity / " + std::to_string(np) + " pressure (30082 / 7424; " +
             std::to_string(s3.n_ct_free()) + " velocity after the boundary conditions)");
}

void bubble_constant() {
  MeshSpec ms;
  std::vector<double> cs;
  for (int level = 0; level <= 3; ++level) {
    ms.level = level;
    const Mesh m = build_mesh(ms);
    cs.push_back(bubble_divergence_constant(FESpace(m, 2), 20, 99));
  }
  double lo = INFINITY, hi = 0.0;
  std::string list;
  for (double v : cs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    list += fmt(v) + " ";
  }
  record(10, hi / lo <= 1.5,
         "max ||v|| / (h ||div v||) over random bubbles, levels 0..3: " + list + "ratio " + fmt(hi / lo) +
             " (<= 1.5)");
}

void kelvin_helmholtz() {
  const SimulationConfig c = preset("kelvin-helmholtz");
  const RunResult r = run_simulation(c, {}, Execution::serial);
  note_mass(r.max_mass_residual);
  const auto& v = r.diagnostics.values();
  const double delta = v.front()[2];
  const double dev = std::abs(delta / c.delta0 - 1.0);
  const double ens0 = v.front()[1], ens1 = v.back()[1];
  const bool ok = dev <= 0.02 && ens1 < ens0 && r.max_energy_increase <= 1e-8 && r.seconds <= 900.0;
  record(11, ok,
         "KH 32x32: delta(0) / delta0 = " + fmt(delta / c.delta0) + " (within 2%: " + (dev <= 0.02 ? "yes" : "no") +
             "), enstrophy " + fmt(ens0) + " -> " + fmt(ens1) + ", max energy increase " +
             fmt(r.max_energy_increase) + " (<= 1e-8), " + fmt(r.seconds) + " s (<= 900 s)");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, void (*)()>> parts{{2, form_identity}, {3, conservation}, {6, convergence},
                                                      {7, robustness},    {9, reduced},      {10, bubble_constant},
                                                      {11, kelvin_helmholtz}};
  // optional list of criteria to run, e.g. "acceptance 2 9"
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto wanted = [&](int id) {
    if (only.empty()) return true;
    for (int o : only)
      if (o == id || (id == 3 && (o == 4 || o == 5)) || (id == 7 && o == 8)) return true;
    return false;
  };
  for (const auto& [id, fn] : parts) {
    if (!wanted(id)) continue;
    const auto t0 = Clock::now();
    fn();
    std::cerr << "[criterion " << id << " done in " << fmt(since(t0)) << " s]\n";
  }
  if (only.empty()) {
    record(1, max_mass <= 1e-10,
           "mass residual ||div u^s|| / (1 + ||grad u^ct||) over all runs = " + fmt(max_mass) + " (<= 1e-10)");
  }
  bool all = true;
  for (const auto& [id, line] : lines) {
    std::cout << (line.pass ? "PASS" : "FAIL") << " " << id << ": " << line.text << "\n";
    all = all && line.pass;
  }
  return all ? 0 : 1;
}
