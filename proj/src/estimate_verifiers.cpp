#include "smcf/estimate_verifiers.hpp"

#include "parallel.hpp"
#include "smcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smcf {

namespace {

struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  double t = 0.0;
  std::int64_t node = -1;

  void offer(double m, double at, std::int64_t nd) {
    if (m < margin) {
      margin = m;
      t = at;
      node = nd;
    }
  }
};

VerdictReport finish(std::string name, const Worst& w, double tol) {
  VerdictReport r;
  r.name = std::move(name);
  r.worst_margin = std::isfinite(w.margin) ? w.margin : 0.0;
  r.worst_t = w.t;
  r.worst_node = w.node;
  r.tolerance = tol;
  r.pass = r.worst_margin >= -tol;
  return r;
}

void require_nonempty(const Trajectory& traj) {
  if (traj.snapshots.empty()) throw PreconditionError("trajectory has no snapshots");
}

std::int64_t argmax(const std::vector<double>& v) {
  return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
}

}  // namespace

NodeScalars node_scalars(const GraphState& state) {
  state.validate();
  const Stencil st(state.domain, state.m);
  const Grid& g = st.grid();
  const int n = g.n();
  const int m = state.m;
  NodeScalars out;
  out.v2.resize(g.size());
  out.H_norm2.resize(g.size());
  out.II_norm2.resize(g.size());
  detail::parallel_for(g.size(), [&](int, std::size_t b, std::size_t e) {
    std::vector<double> du(n * m), d2u(n * n * m), H(m);
    for (std::size_t node = b; node < e; ++node) {
      st.jet(state.u, node, du, d2u);
      const PointScalars ps = point_scalars(du, d2u, n, m, H);
      out.v2[node] = ps.v2;
      out.H_norm2[node] = ps.H_norm2;
      out.II_norm2[node] = ps.II_norm2;
    }
  });
  return out;
}

VerdictReport check_displacement(const Trajectory& traj) {
  require_nonempty(traj);
  const GraphState& u0 = traj.initial();
  const double tol = 4.0 * u0.domain.h_max();
  const int n = u0.domain.n();
  const int m = u0.m;
  Worst w;
  for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
    const GraphState& st = traj.snapshots[s];
    const double bound = std::sqrt(2.0 * n * std::max(0.0, st.t - u0.t));
    for (std::size_t node = 0; node < st.node_count(); ++node) {
      double d2 = 0.0;
      for (int a = 0; a < m; ++a) {
        const double d = st.u[node * m + a] - u0.u[node * m + a];
        d2 += d * d;
      }
      w.offer(bound - std::sqrt(d2), st.t, static_cast<std::int64_t>(node));
    }
  }
  return finish("displacement", w, tol);
}

VerdictReport check_H_decay(const Trajectory& traj) {
  require_nonempty(traj);
  const double tol = 0.05;
  const int n = traj.initial().domain.n();
  const double t0 = traj.initial().t;
  const auto h0 = node_scalars(traj.initial()).H_norm2;
  const double CH = *std::max_element(h0.begin(), h0.end());
  Worst w;
  for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
    const GraphState& st = traj.snapshots[s];
    const auto hs = node_scalars(st).H_norm2;
    const auto k = argmax(hs);
    const double sup = hs[k];
    if (CH <= 1e-24) {
      w.offer(-sup, st.t, k);
    } else {
      const double bound = 1.0 / (1.0 / CH + 2.0 * (st.t - t0) / n);
      w.offer(1.0 - sup / bound, st.t, k);
    }
  }
  return finish("H_decay", w, tol);
}

VerdictReport check_gradient_principle(const Trajectory& traj) {
  require_nonempty(traj);
  const double tol = 1e-6;
  const auto v0 = node_scalars(traj.initial()).v2;
  const double sup0 = *std::max_element(v0.begin(), v0.end());
  Worst w;
  for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
    const GraphState& st = traj.snapshots[s];
    const auto vs = node_scalars(st).v2;
    const auto k = argmax(vs);
    w.offer(sup0 - vs[k], st.t, k);
  }
  return finish("gradient", w, tol);
}

VerdictReport check_tame_curvature(const Trajectory& traj) {
  require_nonempty(traj);
  const GraphState& u0 = traj.initial();
  const double half_m = 0.5 * u0.m;
  const double tol = 0.10 * half_m;
  const double h = u0.domain.h_max();
  const double burn_in = 10.0 * h * h;
  Worst w;
  for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
    const GraphState& st = traj.snapshots[s];
    const double tau = st.t - u0.t;
    if (tau < burn_in) continue;
    const auto ii = node_scalars(st).II_norm2;
    const auto k = argmax(ii);
    w.offer(half_m - tau * ii[k], st.t, k);
  }
  return finish("tame", w, tol);
}

BoundaryData boundary_data(const GraphState& state) {
  state.validate();
  const Grid g(state.domain);
  const auto& src = state.dirichlet_data ? *state.dirichlet_data : state.u;
  BoundaryData b;
  b.n = g.n();
  b.m = state.m;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!g.is_boundary(node)) continue;
    const auto x = g.coords(node);
    b.x.insert(b.x.end(), x.begin(), x.begin() + g.n());
    for (int a = 0; a < state.m; ++a) b.phi.push_back(src[node * state.m + a]);
  }
  return b;
}

AcausalResult check_acausal(const BoundaryData& phi) {
  const std::size_t N = phi.size();
  if (N < 2) throw PreconditionError("check_acausal needs at least two boundary nodes");
  const int n = phi.n;
  const int m = phi.m;
  const int chunks = detail::chunk_count(N);
  std::vector<double> part(chunks, 0.0);
  detail::parallel_for(N, [&](int c, std::size_t b, std::size_t e) {
    double worst = 0.0;
    for (std::size_t i = b; i < e; ++i)
      for (std::size_t j = i + 1; j < N; ++j) {
        double dx = 0.0, dy = 0.0;
        for (int k = 0; k < n; ++k) {
          const double d = phi.x[i * n + k] - phi.x[j * n + k];
          dx += d * d;
        }
        for (int a = 0; a < m; ++a) {
          const double d = phi.phi[i * m + a] - phi.phi[j * m + a];
          dy += d * d;
        }
        if (dx > 0.0) worst = std::max(worst, std::sqrt(dy / dx));
      }
    part[c] = worst;
  });
  AcausalResult r;
  r.delta = 1.0 - *std::max_element(part.begin(), part.end());
  r.pass = r.delta > 0.0;
  return r;
}

VerdictReport check_dirichlet_boundary_H(const Trajectory& traj, double C) {
  require_nonempty(traj);
  if (traj.mode != FlowMode::Dirichlet)
    throw PreconditionError("check_dirichlet_boundary_H needs a dirichlet trajectory");
  const GraphState& u0 = traj.initial();
  const double tol = C * u0.domain.h_max();
  const Grid g(u0.domain);
  Worst w;
  for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
    const GraphState& st = traj.snapshots[s];
    const auto hs = node_scalars(st).H_norm2;
    for (std::size_t node = 0; node < g.size(); ++node)
      if (g.is_boundary(node)) w.offer(-hs[node], st.t, static_cast<std::int64_t>(node));
  }
  return finish("dirichlet_boundary_H", w, tol);
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"displacement", "H_decay", "gradient", "tame",
                                              "dirichlet_boundary_H"};
  return names;
}

VerdictReport run_check(const std::string& name, const Trajectory& traj) {
  if (name == "displacement") return check_displacement(traj);
  if (name == "H_decay") return check_H_decay(traj);
  if (name == "gradient") return check_gradient_principle(traj);
  if (name == "tame") return check_tame_curvature(traj);
  if (name == "dirichlet_boundary_H") return check_dirichlet_boundary_H(traj);
  throw ConfigError("unknown check '" + name + "'");
}

}  // namespace smcf
