#include "smcf/flow_engine.hpp"

#include "parallel.hpp"
#include "smcf/errors.hpp"
#include "smcf/estimate_verifiers.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace smcf {

std::string_view to_string(FlowMode m) noexcept {
  switch (m) {
    case FlowMode::Entire: return "entire";
    case FlowMode::Neumann: return "neumann";
    case FlowMode::Dirichlet: return "dirichlet";
  }
  return "unknown";
}

std::string_view to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::Euler: return "euler";
    case Scheme::Heun: return "heun";
    case Scheme::CrankNicolson: return "cn";
  }
  return "unknown";
}

FlowMode flow_mode_from_string(std::string_view s) {
  if (s == "entire") return FlowMode::Entire;
  if (s == "neumann") return FlowMode::Neumann;
  if (s == "dirichlet") return FlowMode::Dirichlet;
  throw ConfigError("unknown flow mode '" + std::string(s) + "'");
}

Scheme scheme_from_string(std::string_view s) {
  if (s == "euler") return Scheme::Euler;
  if (s == "heun") return Scheme::Heun;
  if (s == "cn") return Scheme::CrankNicolson;
  throw ConfigError("unknown scheme '" + std::string(s) + "'");
}

void FlowConfig::validate() const {
  if (!(t_end > 0.0)) throw ConfigError("flow.t_end must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("flow.cfl_safety must lie in (0, 1]");
  if (!(snapshot_every > 0.0)) throw ConfigError("flow.snapshot_every must be positive");
  if (!(steady_state_tol > 0.0)) throw ConfigError("flow.steady_state_tol must be positive");
  if (fixed_dt && !(*fixed_dt > 0.0)) throw ConfigError("flow.dt must be positive");
  if (scheme == Scheme::CrankNicolson && !fixed_dt)
    throw ConfigError("flow.scheme 'cn' needs a fixed flow.dt");
  if (mode == FlowMode::Entire) {
    if (entire_radii.empty()) throw ConfigError("flow.entire_radii is required in entire mode");
    for (std::size_t i = 0; i < entire_radii.size(); ++i) {
      if (!(entire_radii[i] > 0.0)) throw ConfigError("flow.entire_radii must be positive");
      if (i > 0 && !(entire_radii[i] > entire_radii[i - 1]))
        throw ConfigError("flow.entire_radii must be strictly increasing");
    }
    if (!(entire_lambda > 0.0)) throw ConfigError("flow.entire_lambda must be positive");
  }
}

namespace {

bool updated(const Grid& g, std::size_t node, BoundaryKind b) {
  return b == BoundaryKind::Neumann || !g.is_boundary(node);
}

struct Sweep {
  double lambda_max = 0.0;
  std::size_t worst_node = 0;
  bool finite = true;
};

// Velocity g^ij D^2_ij u^A at updated nodes; zero elsewhere.
Sweep velocity(const Stencil& st, BoundaryKind bk, std::span<const double> u, std::span<double> v) {
  const Grid& g = st.grid();
  const int n = g.n();
  const int m = st.m();
  const int chunks = detail::chunk_count(g.size());
  std::vector<Sweep> part(chunks);
  detail::parallel_for(g.size(), [&](int c, std::size_t b, std::size_t e) {
    std::vector<double> du(n * m), d2u(n * n * m);
    Sweep s;
    for (std::size_t node = b; node < e; ++node) {
      double* out = v.data() + node * m;
      if (!updated(g, node, bk)) {
        std::fill(out, out + m, 0.0);
        continue;
      }
      st.jet(u, node, du, d2u);
      const InverseMetric im = inverse_metric(du, n, m);
      if (!(im.lambda_max <= s.lambda_max) || node == b) {
        if (!(im.lambda_max < s.lambda_max)) {
          s.lambda_max = im.lambda_max;
          s.worst_node = node;
        }
      }
      if (!std::isfinite(im.lambda_max)) s.finite = false;
      for (int a = 0; a < m; ++a) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) acc += im.g_inv[i * n + j] * d2u[(i * n + j) * m + a];
        out[a] = acc;
        if (!std::isfinite(acc)) s.finite = false;
      }
    }
    part[c] = s;
  });
  Sweep total = part[0];
  for (int c = 1; c < chunks; ++c) {
    if (part[c].lambda_max > total.lambda_max) {
      total.lambda_max = part[c].lambda_max;
      total.worst_node = part[c].worst_node;
    }
    total.finite = total.finite && part[c].finite;
  }
  return total;
}

void throw_if_not_spacelike(const Sweep& s, std::string_view where) {
  if (!s.finite) throw NumericalBlowup(std::string(where) + ": non-finite values in the state");
  if (!(s.lambda_max < 1.0 - kSpacelikeGuard)) {
    std::ostringstream os;
    os << where << ": spacelike condition violated at node " << s.worst_node
       << " (max eigenvalue of Du Du^T = " << s.lambda_max << ")";
    throw SpacelikeViolation(os.str(), s.lambda_max, static_cast<std::ptrdiff_t>(s.worst_node));
  }
}

Sweep scan_lambda(const Stencil& st, BoundaryKind bk, std::span<const double> u) {
  const Grid& g = st.grid();
  const int n = g.n();
  const int m = st.m();
  std::vector<double> du(n * m), d2u(n * n * m);
  Sweep s;
  bool first = true;
  for (std::size_t node = 0; node < g.size(); ++node) {
    for (int a = 0; a < m; ++a)
      if (!std::isfinite(u[node * m + a])) s.finite = false;
    if (!updated(g, node, bk)) continue;
    st.jet(u, node, du, d2u);
    const double lam = inverse_metric(du, n, m).lambda_max;
    if (!std::isfinite(lam)) s.finite = false;
    if (first || lam > s.lambda_max) {
      s.lambda_max = lam;
      s.worst_node = node;
      first = false;
    }
  }
  return s;
}

void apply_boundary(GraphState& s, const StepContext& ctx, double t) {
  const BoundaryKind bk = s.domain.boundary;
  if (bk == BoundaryKind::Neumann) return;
  const Grid g(s.domain);
  const int m = s.m;
  if (bk == BoundaryKind::Dirichlet) {
    if (!s.dirichlet_data) throw PreconditionError("dirichlet boundary without boundary data");
    for (std::size_t node = 0; node < g.size(); ++node)
      if (g.is_boundary(node))
        for (int a = 0; a < m; ++a) s.u[node * m + a] = (*s.dirichlet_data)[node * m + a];
    return;
  }
  if (!ctx.exact_boundary) throw PreconditionError("exact-tracking boundary without a boundary function");
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!g.is_boundary(node)) continue;
    const auto x = g.coords(node);
    ctx.exact_boundary(std::span<const double>(x.data(), g.n()), t, s.at(node));
  }
}

// L u = a^ij D^2_ij u with coefficients frozen from `coeff_state`, assembled
// over all nodes (rows of pinned nodes left empty).
Eigen::SparseMatrix<double> assemble_operator(const Stencil& st, BoundaryKind bk,
                                              std::span<const double> coeff_state) {
  const Grid& g = st.grid();
  const int n = g.n();
  const int m = st.m();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.size() * (1 + 2 * n + 2 * n * (n - 1)));
  std::vector<double> du(n * m), d2u(n * n * m);
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!updated(g, node, bk)) continue;
    st.jet(coeff_state, node, du, d2u);
    const InverseMetric im = inverse_metric(du, n, m);
    const auto k = g.multi_index(node);
    const auto row = static_cast<Eigen::Index>(node);
    for (int i = 0; i < n; ++i) {
      const double a = im.g_inv[i * n + i] / (g.h(i) * g.h(i));
      const auto s = static_cast<long>(g.stride(i));
      const int N = g.nodes(i);
      if (k[i] > 0 && k[i] < N - 1) {
        trip.emplace_back(row, row + s, a);
        trip.emplace_back(row, row - s, a);
      } else {
        trip.emplace_back(row, k[i] == 0 ? row + s : row - s, 2.0 * a);
      }
      trip.emplace_back(row, row, -2.0 * a);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (k[i] == 0 || k[i] == g.nodes(i) - 1 || k[j] == 0 || k[j] == g.nodes(j) - 1) continue;
        const double c = 2.0 * im.g_inv[i * n + j] / (4.0 * g.h(i) * g.h(j));
        const auto si = static_cast<long>(g.stride(i));
        const auto sj = static_cast<long>(g.stride(j));
        trip.emplace_back(row, row + si + sj, c);
        trip.emplace_back(row, row + si - sj, -c);
        trip.emplace_back(row, row - si + sj, -c);
        trip.emplace_back(row, row - si - sj, c);
      }
  }
  const auto N = static_cast<Eigen::Index>(g.size());
  Eigen::SparseMatrix<double> L(N, N);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

// The sparsity pattern depends only on the grid and boundary policy, so the
// symbolic analysis is done once per run.
struct ImplicitCache {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  bool tridiagonal = false;  ///< one-dimensional grids: Thomas algorithm
};

// M is diagonally dominant (I minus a scaled M-matrix), so no pivoting.
Eigen::MatrixXd tridiagonal_solve(const Eigen::SparseMatrix<double>& M, const Eigen::MatrixXd& rhs) {
  const auto N = M.rows();
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(N), di = Eigen::VectorXd::Zero(N),
                  up = Eigen::VectorXd::Zero(N);
  for (Eigen::Index c = 0; c < M.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, c); it; ++it) {
      if (it.row() == c) di(c) = it.value();
      else if (it.row() == c + 1) lo(c + 1) = it.value();
      else if (it.row() == c - 1) up(c - 1) = it.value();
      else throw PreconditionError("tridiagonal_solve: matrix is not tridiagonal");
    }
  Eigen::MatrixXd x = rhs;
  Eigen::VectorXd cp(N);
  cp(0) = up(0) / di(0);
  x.row(0) /= di(0);
  for (Eigen::Index i = 1; i < N; ++i) {
    const double denom = di(i) - lo(i) * cp(i - 1);
    if (!(std::abs(denom) > 0.0) || !std::isfinite(denom))
      throw NumericalBlowup("implicit step: singular tridiagonal system");
    cp(i) = up(i) / denom;
    x.row(i) = (x.row(i) - lo(i) * x.row(i - 1)) / denom;
  }
  for (Eigen::Index i = N - 2; i >= 0; --i) x.row(i) -= cp(i) * x.row(i + 1);
  return x;
}

// Solves (I - theta L) x = rhs where pinned rows are the identity.
std::vector<double> implicit_solve(const Eigen::SparseMatrix<double>& L, double theta,
                                   const Eigen::MatrixXd& rhs, ImplicitCache& cache) {
  const auto N = L.rows();
  Eigen::SparseMatrix<double> I(N, N);
  I.setIdentity();
  Eigen::SparseMatrix<double> M = I - theta * L;
  M.makeCompressed();
  Eigen::MatrixXd x;
  if (cache.tridiagonal) {
    x = tridiagonal_solve(M, rhs);
  } else {
    auto& lu = cache.lu;
    if (!cache.analyzed) {
      lu.analyzePattern(M);
      cache.analyzed = true;
    }
    lu.factorize(M);
    if (lu.info() != Eigen::Success) throw NumericalBlowup("implicit step: factorisation failed");
    x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NumericalBlowup("implicit step: solve failed");
  }
  const auto m = rhs.cols();
  std::vector<double> out(static_cast<std::size_t>(N * m));
  for (Eigen::Index node = 0; node < N; ++node)
    for (Eigen::Index a = 0; a < m; ++a) out[node * m + a] = x(node, a);
  return out;
}

Eigen::MatrixXd as_matrix(std::span<const double> u, Eigen::Index nodes, int m) {
  Eigen::MatrixXd M(nodes, m);
  for (Eigen::Index node = 0; node < nodes; ++node)
    for (int a = 0; a < m; ++a) M(node, a) = u[node * m + a];
  return M;
}

GraphState step_unchecked(const GraphState& state, double dt, Scheme scheme, const StepContext& ctx,
                          ImplicitCache& cache) {
  const Stencil st(state.domain, state.m);
  const BoundaryKind bk = state.domain.boundary;
  const std::size_t len = state.u.size();
  GraphState next = state;
  next.t = state.t + dt;

  if (scheme == Scheme::CrankNicolson) {
    const auto nodes = static_cast<Eigen::Index>(st.grid().size());
    const int m = state.m;
    // Predictor: backward Euler to the half step.
    GraphState half = state;
    apply_boundary(half, ctx, state.t + 0.5 * dt);
    {
      const auto L0 = assemble_operator(st, bk, state.u);
      Eigen::MatrixXd rhs = as_matrix(state.u, nodes, m);
      for (Eigen::Index node = 0; node < nodes; ++node)
        if (!updated(st.grid(), node, bk))
          for (int a = 0; a < m; ++a) rhs(node, a) = half.u[node * m + a];
      half.u = implicit_solve(L0, 0.5 * dt, rhs, cache);
    }
    throw_if_not_spacelike(scan_lambda(st, bk, half.u), "implicit predictor");
    // Corrector: Crank-Nicolson with coefficients from the half step.
    GraphState bc = state;
    apply_boundary(bc, ctx, state.t + dt);
    const auto L1 = assemble_operator(st, bk, half.u);
    Eigen::MatrixXd un = as_matrix(state.u, nodes, m);
    Eigen::MatrixXd rhs = un + 0.5 * dt * (L1 * un);
    for (Eigen::Index node = 0; node < nodes; ++node)
      if (!updated(st.grid(), node, bk))
        for (int a = 0; a < m; ++a) rhs(node, a) = bc.u[node * m + a];
    next.u = implicit_solve(L1, 0.5 * dt, rhs, cache);
  } else {
    std::vector<double> k1(len);
    throw_if_not_spacelike(velocity(st, bk, state.u, k1), "step");
    for (std::size_t i = 0; i < len; ++i) next.u[i] = state.u[i] + dt * k1[i];
    apply_boundary(next, ctx, next.t);
    if (scheme == Scheme::Heun) {
      std::vector<double> k2(len);
      throw_if_not_spacelike(velocity(st, bk, next.u, k2), "heun stage");
      for (std::size_t i = 0; i < len; ++i) next.u[i] = state.u[i] + 0.5 * dt * (k1[i] + k2[i]);
      apply_boundary(next, ctx, next.t);
    }
  }
  throw_if_not_spacelike(scan_lambda(st, bk, next.u), "step");
  return next;
}

struct Measure {
  double sup_v2 = 0.0;
  double sup_H2 = 0.0;
  double sup_II2 = 0.0;
  double max_disp = 0.0;
};

Measure measure(const Stencil& st, BoundaryKind bk, const GraphState& s, const GraphState& initial) {
  const Grid& g = st.grid();
  const int n = g.n();
  const int m = st.m();
  const int chunks = detail::chunk_count(g.size());
  std::vector<Measure> part(chunks);
  detail::parallel_for(g.size(), [&](int c, std::size_t b, std::size_t e) {
    std::vector<double> du(n * m), d2u(n * n * m), H(m);
    Measure r;
    for (std::size_t node = b; node < e; ++node) {
      double d2 = 0.0;
      for (int a = 0; a < m; ++a) {
        const double d = s.u[node * m + a] - initial.u[node * m + a];
        d2 += d * d;
      }
      r.max_disp = std::max(r.max_disp, std::sqrt(d2));
      if (!updated(g, node, bk)) continue;
      st.jet(s.u, node, du, d2u);
      const PointScalars ps = point_scalars(du, d2u, n, m, H);
      r.sup_v2 = std::max(r.sup_v2, ps.v2);
      r.sup_H2 = std::max(r.sup_H2, ps.H_norm2);
      r.sup_II2 = std::max(r.sup_II2, ps.II_norm2);
    }
    part[c] = r;
  });
  Measure total = part[0];
  for (int c = 1; c < chunks; ++c) {
    total.sup_v2 = std::max(total.sup_v2, part[c].sup_v2);
    total.sup_H2 = std::max(total.sup_H2, part[c].sup_H2);
    total.sup_II2 = std::max(total.sup_II2, part[c].sup_II2);
    total.max_disp = std::max(total.max_disp, part[c].max_disp);
  }
  return total;
}

void check_mode(FlowMode mode, BoundaryKind bk) {
  const bool ok = (mode == FlowMode::Dirichlet)
                      ? (bk == BoundaryKind::Dirichlet || bk == BoundaryKind::ExactTracking)
                      : bk == BoundaryKind::Neumann;
  if (!ok)
    throw ConfigError("flow mode '" + std::string(to_string(mode)) + "' cannot run on a " +
                      std::string(to_string(bk)) + " boundary");
}

}  // namespace

double cfl_dt(const GraphState& state, double safety) {
  state.validate();
  const Stencil st(state.domain, state.m);
  const Sweep s = scan_lambda(st, state.domain.boundary, state.u);
  throw_if_not_spacelike(s, "cfl_dt");
  const int n = state.domain.n();
  const double hmin = state.domain.h_min();
  const double g_inv_max = 1.0 / (1.0 - s.lambda_max);
  return safety * hmin * hmin / (2.0 * n * g_inv_max);
}

std::vector<double> mcf_velocity(const GraphState& state) {
  state.validate();
  const Stencil st(state.domain, state.m);
  std::vector<double> v(state.u.size());
  throw_if_not_spacelike(velocity(st, state.domain.boundary, state.u, v), "mcf_velocity");
  return v;
}

GraphState step(const GraphState& state, double dt, Scheme scheme, const StepContext& ctx) {
  state.validate();
  if (!(dt > 0.0)) throw PreconditionError("step: dt must be positive");
  if (scheme != Scheme::CrankNicolson) {
    const double limit = cfl_dt(state, 1.0);
    if (dt > limit * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "step: dt = " << dt << " exceeds the explicit stability limit " << limit;
      throw PreconditionError(os.str());
    }
  }
  ImplicitCache cache;
  cache.tridiagonal = state.domain.n() == 1;
  GraphState next = step_unchecked(state, dt, scheme, ctx, cache);
  next.provenance.step_count += 1;
  return next;
}

Trajectory run(const FlowConfig& config, const GraphState& initial, const FlowMonitors& monitors) {
  config.validate();
  initial.validate();
  if (config.mode == FlowMode::Entire)
    throw PreconditionError("run: entire mode is driven by entire_solve");
  const BoundaryKind bk = initial.domain.boundary;
  check_mode(config.mode, bk);

  GraphState state = initial;
  StepContext ctx{monitors.exact_boundary};
  if (bk == BoundaryKind::Dirichlet) {
    if (!state.dirichlet_data) state.dirichlet_data = state.u;
    const auto acausal = check_acausal(boundary_data(state));
    if (!acausal.pass) {
      std::ostringstream os;
      os << "run: Dirichlet data is not strictly acausal (delta = " << acausal.delta << ")";
      throw PreconditionError(os.str());
    }
    state = dirichlet_apply(state);
  } else if (bk == BoundaryKind::ExactTracking) {
    apply_boundary(state, ctx, state.t);
  }

  const Stencil st(state.domain, state.m);
  throw_if_not_spacelike(scan_lambda(st, bk, state.u), "run");

  std::vector<std::vector<double>> heights;
  for (const auto& b : monitors.barriers) heights.push_back(barrier_heights(b, state.domain));
  auto barrier_min = [&](const GraphState& s) -> std::optional<double> {
    if (monitors.quasi_spheres.empty() && monitors.barriers.empty()) return std::nullopt;
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& q : monitors.quasi_spheres) mn = std::min(mn, quasi_sphere_margin(q, s));
    for (std::size_t i = 0; i < monitors.barriers.size(); ++i)
      mn = std::min(mn, barrier_margin(monitors.barriers[i], s, heights[i]));
    return mn;
  };

  Trajectory traj;
  traj.mode = config.mode;
  traj.snapshots.push_back(state);
  const GraphState& start = traj.snapshots.front();
  const GraphState start_copy = start;
  const double t0 = state.t;
  const double every = config.snapshot_every;
  const double eps = 1e-12 * std::max(1.0, std::abs(config.t_end));
  ImplicitCache cache;
  cache.tridiagonal = state.domain.n() == 1;

  while (state.t < config.t_end - eps) {
    const double dt_cap = config.fixed_dt ? *config.fixed_dt : cfl_dt(state, config.cfl_safety);
    if (config.fixed_dt && config.scheme != Scheme::CrankNicolson) {
      const double limit = cfl_dt(state, 1.0);
      if (*config.fixed_dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "run: fixed dt " << *config.fixed_dt << " exceeds the explicit stability limit "
           << limit << " at t = " << state.t;
        throw PreconditionError(os.str());
      }
    }
    const double next_snap = every * (std::floor(state.t / every + 1e-9) + 1.0);
    double target = std::min(next_snap, config.t_end);
    double dt = dt_cap;
    bool lands = false;
    if (state.t + dt >= target - eps) {
      dt = target - state.t;
      lands = true;
    }

    GraphState next;
    try {
      next = step_unchecked(state, dt, config.scheme, ctx, cache);
    } catch (const NumericalBlowup&) {
      dt *= 0.5;
      lands = false;
      next = step_unchecked(state, dt, config.scheme, ctx, cache);
    }
    if (lands) next.t = target;
    next.provenance.step_count = state.provenance.step_count + 1;

    const Measure ms = measure(st, bk, next, start_copy);
    DiagnosticRecord rec;
    rec.step = next.provenance.step_count;
    rec.t = next.t;
    rec.dt = dt;
    rec.sup_v2 = ms.sup_v2;
    rec.sup_H2 = ms.sup_H2;
    rec.t_sup_II2 = (next.t - t0) * ms.sup_II2;
    rec.max_displacement = ms.max_disp;
    rec.min_barrier_margin = barrier_min(next);
    const bool steady = std::sqrt(ms.sup_H2) < config.steady_state_tol;
    const bool at_end = next.t >= config.t_end - eps;
    const bool snap = (lands && std::abs(next.t - next_snap) <= eps) || at_end || steady;
    if (snap && monitors.snapshot_residual) rec.expander_residual = monitors.snapshot_residual(next);
    traj.diagnostics.push_back(rec);
    state = std::move(next);
    if (snap) traj.snapshots.push_back(state);
    traj.final_sup_H = std::sqrt(ms.sup_H2);
    if (steady) {
      traj.steady_state_reached = true;
      break;
    }
  }
  if (traj.diagnostics.empty()) {
    const Measure ms = measure(st, bk, state, start_copy);
    traj.final_sup_H = std::sqrt(ms.sup_H2);
  }
  return traj;
}

EntireResult entire_solve(const FlowConfig& config, const GraphState& u0, const FlowMonitors& monitors) {
  config.validate();
  if (config.mode != FlowMode::Entire) throw PreconditionError("entire_solve needs flow mode 'entire'");
  u0.validate();
  const int n = u0.domain.n();
  const double h = u0.domain.h(0);

  EntireResult out;
  out.radii = config.entire_radii;
  FlowConfig sub = config;
  sub.mode = FlowMode::Neumann;

  std::vector<Trajectory> runs;
  for (std::size_t i = 0; i < config.entire_radii.size(); ++i) {
    const double R = config.entire_radii[i];
    const double L = std::ceil((2.0 * R + 3.0 * config.entire_lambda + 1.0) / h - 1e-9) * h;
    out.half_widths.push_back(L);
    const GraphState ext = annulus_reflection_extend(u0, {R, config.entire_lambda, L});
    FlowMonitors mon = monitors;
    if (i + 1 != config.entire_radii.size()) mon.snapshot_residual = nullptr;
    runs.push_back(run(sub, ext, mon));
  }

  auto compare = [&](const GraphState& a, const GraphState& b, double core) {
    const Grid ga(a.domain), gb(b.domain);
    double worst = 0.0;
    for (std::size_t node = 0; node < ga.size(); ++node) {
      const auto x = ga.coords(node);
      double r2 = 0.0;
      for (int k = 0; k < n; ++k) r2 += x[k] * x[k];
      if (r2 > core * core * (1.0 + 1e-12)) continue;
      const auto nb = gb.node_at(std::span<const double>(x.data(), n));
      if (!nb) throw DimensionError("entire_solve: truncation grids are not aligned");
      double d2 = 0.0;
      for (int c = 0; c < a.m; ++c) {
        const double d = a.u[node * a.m + c] - b.u[*nb * b.m + c];
        d2 += d * d;
      }
      worst = std::max(worst, std::sqrt(d2));
    }
    return worst;
  };

  for (std::size_t i = 0; i + 1 < runs.size(); ++i)
    out.discrepancies.push_back(
        compare(runs[i].final_state(), runs[i + 1].final_state(), 0.5 * config.entire_radii[i]));

  for (const auto& snap : runs.front().snapshots) {
    DiscrepancyRecord rec{snap.t, {}};
    std::vector<const GraphState*> at;
    for (const auto& r : runs) {
      const auto it = std::find_if(r.snapshots.begin(), r.snapshots.end(),
                                   [&](const GraphState& s) { return s.t == snap.t; });
      if (it == r.snapshots.end()) break;
      at.push_back(&*it);
    }
    if (at.size() != runs.size()) continue;
    for (std::size_t i = 0; i + 1 < at.size(); ++i)
      rec.values.push_back(compare(*at[i], *at[i + 1], 0.5 * config.entire_radii[i]));
    out.history.push_back(std::move(rec));
  }

  out.trajectory = std::move(runs.back());
  out.trajectory.mode = FlowMode::Entire;
  for (std::size_t i = 1; i < out.discrepancies.size(); ++i)
    if (!(out.discrepancies[i] < out.discrepancies[i - 1])) out.converged = false;
  if (!out.discrepancies.empty() &&
      std::all_of(out.discrepancies.begin(), out.discrepancies.end(), [](double d) { return d == 0.0; }))
    out.converged = true;
  return out;
}

}  // namespace smcf
