#include "svfem/time_solver.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "svfem/error.hpp"

namespace svfem {

std::string to_string(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::upwind_dg: return "upwind_dg";
    case SchemeVariant::vol_S1: return "vol_S1";
    case SchemeVariant::vol_S2: return "vol_S2";
  }
  return "?";
}

std::string to_string(TimeIntegrator v) {
  return v == TimeIntegrator::backward_euler ? "backward_euler" : "crank_nicolson";
}

std::string to_string(ConvectionTreatment v) {
  switch (v) {
    case ConvectionTreatment::picard_implicit: return "picard_implicit";
    case ConvectionTreatment::linearized: return "linearized";
    case ConvectionTreatment::explicit_rhs: return "explicit_rhs";
    case ConvectionTreatment::none: return "none";
  }
  return "?";
}

SchemeVariant parse_scheme_variant(const std::string& s) {
  if (s == "upwind_dg" || s == "upwind") return SchemeVariant::upwind_dg;
  if (s == "vol_S1" || s == "S1") return SchemeVariant::vol_S1;
  if (s == "vol_S2" || s == "S2") return SchemeVariant::vol_S2;
  throw Error(ErrorCode::invalid_argument, "unknown scheme variant '" + s + "'");
}

TimeIntegrator parse_time_integrator(const std::string& s) {
  if (s == "backward_euler" || s == "be") return TimeIntegrator::backward_euler;
  if (s == "crank_nicolson" || s == "cn") return TimeIntegrator::crank_nicolson;
  throw Error(ErrorCode::invalid_argument, "unknown time integrator '" + s + "'");
}

ConvectionTreatment parse_convection(const std::string& s) {
  for (auto c : {ConvectionTreatment::picard_implicit, ConvectionTreatment::linearized,
                 ConvectionTreatment::explicit_rhs, ConvectionTreatment::none}) {
    if (s == to_string(c)) return c;
  }
  throw Error(ErrorCode::invalid_argument, "unknown convection treatment '" + s + "'");
}

struct FlowSolver::System {
  SparseMatrix k0;
  ColMatrix saddle;
  std::unique_ptr<LinearSolver> lu;
  double dt = 0.0;
  bool lagged = false;  // direct_ holds a factorization of k0 + some convection
};

namespace {

// The pressure is fixed by pinning the constant mode `pin`; a dense mean
// row would ruin the fill-reducing ordering.
ColMatrix saddle_matrix(const SparseMatrix& trial, const SparseMatrix& k, const SparseMatrix& g, int pin) {
  const ColMatrix t = trial;
  const ColMatrix kt = ColMatrix(t.transpose()) * ColMatrix(k) * t;
  const int nv = static_cast<int>(t.cols());
  const int np = static_cast<int>(g.rows());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(kt.nonZeros() + 2 * g.nonZeros() + 1);
  for (int j = 0; j < kt.outerSize(); ++j) {
    for (ColMatrix::InnerIterator it(kt, j); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (int i = 0; i < g.outerSize(); ++i) {
    if (i == pin) continue;
    for (SparseMatrix::InnerIterator it(g, i); it; ++it) {
      trip.emplace_back(nv + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), nv + it.row(), it.value());
    }
  }
  trip.emplace_back(nv + pin, nv + pin, 1.0);
  ColMatrix a(nv + np, nv + np);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

}  // namespace

FlowSolver::FlowSolver(const FESpace& space, PhysicalParameters phys, SchemeSpec scheme, Execution execution,
                       SolverFactory factory)
    : space_(space), ctx_(space, execution), phys_(phys), scheme_(scheme), factory_(std::move(factory)) {
  if (!(phys_.nu >= 0.0) || !(phys_.gamma >= 0.0) || !(phys_.alpha > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "nu, gamma must be non-negative and alpha positive");
  }
  if (scheme_.picard_max < 1) throw Error(ErrorCode::invalid_argument, "picard_max must be positive");
  if (scheme_.reduced && space_.facet_enrichment()) {
    throw Error(ErrorCode::unsupported_degree, "the reduced scheme needs bubble enrichment (k >= 2)");
  }
  ctx_.alpha = phys_.alpha;
  if (scheme_.rhs_degree > 0) ctx_.degrees.rhs = scheme_.rhs_degree;
  mass_ = assemble_d_h(ctx_);
  a_ = assemble_a_h(ctx_);
  b_ = assemble_b(ctx_);
  time_mass_ = mass_.matrix();
  viscous_ = phys_.nu * a_.matrix();
  if (scheme_.variant == SchemeVariant::vol_S1) {
    stab_ = phys_.gamma * assemble_S(ctx_, Stabilization::S1).matrix();
    time_mass_ += stab_;
  } else if (scheme_.variant == SchemeVariant::vol_S2) {
    stab_ = phys_.gamma * assemble_S(ctx_, Stabilization::S2).matrix();
    viscous_ += stab_;
  } else {
    stab_ = SparseMatrix(space_.n_u(), space_.n_u());
  }
  build_reduction();
  ctx_.enable_cache();
}

FlowSolver::~FlowSolver() = default;

void FlowSolver::build_reduction() {
  const int nct = space_.n_ct();
  const int nc = space_.mesh().num_cells();
  const int npl = space_.local_pressure_dofs();
  const int nll = 2 * space_.lagrange().ndof();
  const auto free = space_.free_velocity_dofs();
  const SparseMatrix& b = b_.matrix();

  if (!space_.facet_enrichment()) {
    const int nb = space_.enrichment().ndof();
    std::vector<Eigen::Triplet<double>> trip;
    local_div_.resize(nc);
    for (int c = 0; c < nc; ++c) {
      const auto dofs = space_.cell_velocity_dofs(c);
      Eigen::MatrixXd bq_ct(npl - 1, nll), bq_b(npl - 1, nb);
      for (int i = 1; i < npl; ++i) {
        const int row = space_.pressure_dof(c, i);
        for (int j = 0; j < nll; ++j) bq_ct(i - 1, j) = b.coeff(row, dofs[j]);
        for (int j = 0; j < nb; ++j) bq_b(i - 1, j) = b.coeff(row, dofs[nll + j]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(bq_b);
      if (!lu.isInvertible()) {
        throw Error(ErrorCode::construction_failure, "bubble divergence block singular on cell " + std::to_string(c));
      }
      local_div_[c] = bq_b;
      const Eigen::MatrixXd r = lu.solve(bq_ct);
      for (int i = 0; i < nb; ++i) {
        for (int j = 0; j < nll; ++j) {
          if (r(i, j) != 0.0) trip.emplace_back(dofs[nll + i] - nct, dofs[j], r(i, j));
        }
      }
    }
    recon_.resize(space_.n_R(), nct);
    // a periodic node may appear twice in a cell; duplicates are summed
    recon_.setFromTriplets(trip.begin(), trip.end());
  }

  std::vector<Eigen::Triplet<double>> trip;
  if (scheme_.reduced) {
    const int nf = space_.n_ct_free();
    const SparseMatrix rt = recon_.transpose();  // row-major rows = ct dofs
    for (int j = 0; j < nf; ++j) {
      const int d = free[j];
      trip.emplace_back(d, j, 1.0);
      for (SparseMatrix::InnerIterator it(rt, d); it; ++it) trip.emplace_back(nct + it.col(), j, -it.value());
    }
    trial_.resize(space_.n_u(), nf);
    trial_.setFromTriplets(trip.begin(), trip.end());
    SparseMatrix b0(nc, space_.n_u());
    std::vector<Eigen::Triplet<double>> bt;
    for (int c = 0; c < nc; ++c) {
      const int row = space_.pressure_dof(c, 0);
      for (SparseMatrix::InnerIterator it(b, row); it; ++it) bt.emplace_back(c, it.col(), it.value());
    }
    b0.setFromTriplets(bt.begin(), bt.end());
    constraint_ = b0 * trial_;
    means_.resize(nc);
    for (int c = 0; c < nc; ++c) means_(c) = space_.pressure_means()(space_.pressure_dof(c, 0));
  } else {
    for (int j = 0; j < space_.n_free(); ++j) trip.emplace_back(free[j], j, 1.0);
    trial_.resize(space_.n_u(), space_.n_free());
    trial_.setFromTriplets(trip.begin(), trip.end());
    constraint_ = b * trial_;
    means_ = space_.pressure_means();
  }
  constraint_.prune(0.0);
  pin_ = scheme_.reduced ? 0 : space_.pressure_dof(0, 0);
}

const SparseMatrix& FlowSolver::reconstruction() const {
  if (space_.facet_enrichment()) {
    throw Error(ErrorCode::unsupported_degree, "the reconstruction needs bubble enrichment (k >= 2)");
  }
  return recon_;
}

SparseMatrix FlowSolver::convection(const Vector& w) const {
  if (scheme_.variant == SchemeVariant::upwind_dg) return assemble_c_dG_uw(ctx_, w).matrix();
  return assemble_c_vol(ctx_, w).matrix();
}

double FlowSolver::h1_norm(const Vector& v) const {
  const double s = v.dot(mass_.matrix() * v) + v.dot(a_.matrix() * v);
  return std::sqrt(std::max(0.0, s));
}

int FlowSolver::factorizations() const {
  int n = extra_factorizations_;
  if (step_ && step_->lu) n += step_->lu->numeric_factorizations();
  if (direct_) n += direct_->numeric_factorizations();
  if (leray_) n += leray_->lu->numeric_factorizations();
  return n;
}

std::unique_ptr<FlowSolver::System> FlowSolver::make_system(const SparseMatrix& k0) const {
  auto sys = std::make_unique<System>();
  sys->k0 = k0;
  sys->saddle = saddle_matrix(trial_, k0, constraint_, pin_);
  sys->lu = factory_();
  sys->lu->factorize(sys->saddle);
  return sys;
}

Vector FlowSolver::recover_pressure(const Vector& ku, const Vector& rhs, const Vector& p0) const {
  Vector p = Vector::Zero(space_.n_p());
  const int nc = space_.mesh().num_cells();
  for (int c = 0; c < nc; ++c) p(space_.pressure_dof(c, 0)) = p0(c);
  const int npl = space_.local_pressure_dofs();
  if (npl == 1) return p;
  const Vector r = rhs - ku - b_.matrix().transpose() * p;
  const int nll = 2 * space_.lagrange().ndof();
  const int nb = space_.enrichment().ndof();
  for (int c = 0; c < nc; ++c) {
    const auto dofs = space_.cell_velocity_dofs(c);
    Vector rb(nb);
    for (int j = 0; j < nb; ++j) rb(j) = r(dofs[nll + j]);
    const Vector pt = local_div_[c].transpose().fullPivLu().solve(rb);
    for (int i = 1; i < npl; ++i) p(space_.pressure_dof(c, i)) = pt(i - 1);
  }
  return p;
}

void FlowSolver::solve(System& sys, const Vector& rhs, const SparseMatrix* extra, Vector& u, Vector& p) {
  const int nv = system_velocity_dofs();
  const int np = system_pressure_dofs();
  Vector b = Vector::Zero(nv + np);
  b.head(nv) = trial_.transpose() * rhs;

  auto apply = [&](const Vector& y) {
    Vector r = sys.saddle * y;
    if (extra) r.head(nv) += trial_.transpose() * (*extra * (trial_ * y.head(nv)));
    return r;
  };
  // Iterative refinement against the true matrix. With a lagged
  // factorization this is a defect correction; the convecting field changes
  // little per step, so it contracts fast until the lag grows.
  Vector x;
  auto refine = [&](const LinearSolver& lu) {
    x = lu.solve(b);
    double prev = INFINITY;
    for (int it = 0; it < 8; ++it) {
      const Vector dx = lu.solve(b - apply(x));
      x += dx;
      ++defect_iterations_;
      const double d = dx.lpNorm<Eigen::Infinity>();
      // velocity and pressure separately: a large gradient force puts all
      // of its size into the pressure
      const double xu = x.head(nv).lpNorm<Eigen::Infinity>();
      const double xp = x.tail(np).lpNorm<Eigen::Infinity>();
      if (dx.head(nv).lpNorm<Eigen::Infinity>() <= 1e-10 * xu &&
          dx.tail(np).lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(xu, xp)) {
        return true;
      }
      if (d > 0.2 * prev) return false;
      prev = d;
    }
    return false;
  };

  if (extra == nullptr) {
    refine(*sys.lu);
  } else {
    if (!direct_) direct_ = factory_();
    auto refactor = [&] {
      const SparseMatrix k = sys.k0 + *extra;
      direct_->factorize(saddle_matrix(trial_, k, constraint_, pin_));
      sys.lagged = scheme_.frozen_factorization;
    };
    if (!sys.lagged) refactor();
    if (!refine(*direct_) && sys.lagged) {
      refactor();
      refine(*direct_);
    }
  }

  u = trial_ * x.head(nv);
  // shift the constant modes to zero mean
  Vector pc = x.segment(nv, np);
  const double shift = means_.dot(pc) / means_.sum();
  for (int i = 0; i < np; ++i) {
    if (means_(i) != 0.0) pc(i) -= shift;
  }
  if (scheme_.reduced) {
    Vector ku = sys.k0 * u;
    if (extra) ku += *extra * u;
    p = recover_pressure(ku, rhs, pc);
  } else {
    p = pc;
  }
}

FlowState FlowSolver::solve_stokes(const VectorFunction& f, double t) {
  auto sys = make_system(phys_.nu * a_.matrix());
  extra_factorizations_ += sys->lu->numeric_factorizations();
  const Vector rhs = f ? assemble_rhs(ctx_, f, t) : Vector(Vector::Zero(space_.n_u()));
  FlowState s;
  s.t = t;
  solve(*sys, rhs, nullptr, s.u, s.p);
  return s;
}

FlowState FlowSolver::set_initial(const VectorFunction& u0, InitialProjection mode, double t0) {
  FlowState s;
  s.t = t0;
  s.u = space_.interpolate(u0, t0);
  s.p = Vector::Zero(space_.n_p());
  if (mode == InitialProjection::leray) s.u = project(s.u);
  return s;
}

Vector FlowSolver::project(const Vector& u) {
  if (u.size() != space_.n_u()) throw Error(ErrorCode::invalid_argument, "vector does not match the space");
  // d_h is only semidefinite on V_ct + V_R; a tiny (u_R, v_R) term fixes the
  // split of the projected field without moving u^s noticeably.
  if (!leray_) {
    SparseMatrix k = mass_.matrix();
    k += 1e-8 * assemble_S(ctx_, Stabilization::S1).matrix();
    leray_ = make_system(k);
  }
  Vector x = u, p;
  space_.apply_constraints(x);
  const Vector rhs = leray_->k0 * x;
  solve(*leray_, rhs, nullptr, x, p);
  return x;
}

FlowSolver::System& FlowSolver::step_system(double dt) {
  if (!step_ || step_->dt != dt) {
    const double theta = scheme_.integrator == TimeIntegrator::crank_nicolson ? 0.5 : 1.0;
    SparseMatrix k0 = time_mass_ / dt;
    k0 += theta * viscous_;
    int previous = 0;
    if (step_) previous = step_->lu->numeric_factorizations();
    step_ = make_system(k0);
    step_->dt = dt;
    extra_factorizations_ += previous;
  }
  return *step_;
}

StepReport FlowSolver::step(FlowState& state, double dt, const VectorFunction& f) {
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  if (state.u.size() != space_.n_u()) throw Error(ErrorCode::invalid_argument, "state does not match the space");
  const bool cn = scheme_.integrator == TimeIntegrator::crank_nicolson;
  const double theta = cn ? 0.5 : 1.0;
  const Vector& un = state.u;
  System& sys = step_system(dt);

  Vector rhs = (time_mass_ * un) / dt;
  if (f) rhs += assemble_rhs(ctx_, f, state.t + theta * dt);
  if (cn) rhs -= 0.5 * (viscous_ * un);

  Vector w = un;
  if (cn && state.u_prev.size() == un.size()) w = 1.5 * un - 0.5 * state.u_prev;

  StepReport rep;
  Vector u, p;
  switch (scheme_.convection) {
    case ConvectionTreatment::none:
      solve(sys, rhs, nullptr, u, p);
      rep.picard_iterations = 1;
      break;
    case ConvectionTreatment::explicit_rhs: {
      rhs -= convection(w) * w;
      solve(sys, rhs, nullptr, u, p);
      rep.picard_iterations = 1;
      break;
    }
    case ConvectionTreatment::linearized:
    case ConvectionTreatment::picard_implicit: {
      const bool picard = scheme_.convection == ConvectionTreatment::picard_implicit;
      for (int it = 1;; ++it) {
        const SparseMatrix c = convection(w);
        Vector r = rhs;
        if (cn) r -= 0.5 * (c * un);
        const SparseMatrix ct = theta * c;
        solve(sys, r, &ct, u, p);
        rep.picard_iterations = it;
        const Vector w_new = cn ? Vector(0.5 * (un + u)) : u;
        rep.increment = h1_norm(w_new - w);
        w = w_new;
        if (!picard || rep.increment < scheme_.picard_tol) break;
        if (it >= scheme_.picard_max) {
          throw Error(ErrorCode::step_failure, "Picard did not converge in " + std::to_string(it) +
                                                   " iterations (increment " + std::to_string(rep.increment) + ")");
        }
      }
      break;
    }
  }
  state.u_prev = state.u;
  state.u = std::move(u);
  state.p = std::move(p);
  state.t += dt;
  ++state.step;
  return rep;
}

namespace {

constexpr char kMagic[8] = {'S', 'V', 'F', 'E', 'M', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const FESpace& space, const FlowState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<double>(out, state.t);
  put<std::int64_t>(out, space.n_ct());
  put<std::int64_t>(out, space.n_R());
  put<std::int64_t>(out, space.n_p());
  for (int i = 0; i < space.n_u(); ++i) put<double>(out, state.u(i));
  for (int i = 0; i < space.n_p(); ++i) put<double>(out, state.p(i));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path);
}

FlowState read_checkpoint(const std::string& path, const FESpace& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw Error(ErrorCode::io_error, "bad checkpoint magic");
  if (get<std::uint32_t>(in) != kVersion) throw Error(ErrorCode::io_error, "unsupported checkpoint version");
  FlowState s;
  s.t = get<double>(in);
  const auto nct = get<std::int64_t>(in);
  const auto nr = get<std::int64_t>(in);
  const auto np = get<std::int64_t>(in);
  if (nct != space.n_ct() || nr != space.n_R() || np != space.n_p()) {
    throw Error(ErrorCode::mesh_mismatch, "checkpoint sizes do not match the space");
  }
  s.u.resize(space.n_u());
  s.p.resize(space.n_p());
  for (int i = 0; i < space.n_u(); ++i) s.u(i) = get<double>(in);
  for (int i = 0; i < space.n_p(); ++i) s.p(i) = get<double>(in);
  if (!in) throw Error(ErrorCode::io_error, "truncated checkpoint " + path);
  return s;
}

}  // namespace svfem
