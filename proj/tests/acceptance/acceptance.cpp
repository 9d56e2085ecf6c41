// Acceptance run: one PASS/FAIL line per criterion, with the measured numbers
// and the runtime against its limit. Exit status 1 if any criterion fails.

#include "smcf/cli_io.hpp"
#include "smcf/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

using namespace smcf;
namespace fs = std::filesystem;

namespace {

fs::path g_out;

struct Outcome {
  bool pass = false;
  std::vector<std::string> lines;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig config(const std::string& name, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(fs::path(SMCF_CONFIG_DIR) / (name + ".json"));
  Json doc = Json::parse(in);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

Trajectory flow(const RunConfig& c) { return run(c.flow, build_initial_state(c), build_monitors(c)); }

double sup_abs_du(const GraphState& s) {
  double worst = 0.0;
  const Grid g(s.domain);
  for (std::size_t node = 0; node < g.size(); ++node)
    worst = std::max(worst, derivatives(s, node).du.cwiseAbs().maxCoeff());
  return worst;
}

double sup_error(const GraphState& s, const std::function<double(double)>& exact) {
  const Grid g(s.domain);
  double e = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) e = std::max(e, std::abs(s.u[node] - exact(g.coord(node, 0))));
  return e;
}

double sup_diff(const GraphState& a, const GraphState& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) e = std::max(e, std::abs(a.u[i] - b.u[i]));
  return e;
}

// max over records after burn-in of (t - t0) sup ||II||^2 / (m/2)
double tame_ratio(const Trajectory& tr) {
  const GraphState& s0 = tr.initial();
  const Grid g(s0.domain);
  double h = 0.0;
  for (int i = 0; i < g.n(); ++i) h = std::max(h, g.h(i));
  double r = 0.0;
  for (const auto& d : tr.diagnostics)
    if (d.t - s0.t >= 10 * h * h) r = std::max(r, d.t_sup_II2 / (0.5 * s0.m));
  return r;
}

// The trajectories several criteria share, computed once.
struct Runs {
  std::map<std::string, Trajectory> traj;
  const Trajectory& get(const std::string& name) {
    if (!traj.count(name)) traj[name] = flow(config(name));
    return traj[name];
  }
};

Runs runs;

Outcome oracle_orders() {
  Outcome o{true, {}};
  const RunConfig c = config("oracle");
  for (const auto& row : oracle_study(c.oracle)) {
    std::string line = fmt("%s h=%.6g residual=%.3e", row.solution.c_str(), row.h, row.residual);
    if (row.order) {
      line += fmt(" order=%.3f", *row.order);
      o.pass = o.pass && std::abs(*row.order - 2.0) <= 0.2;
    }
    o.lines.push_back(line);
  }
  return o;
}

Outcome tracking() {
  Outcome o{false, {}};
  auto error = [](const GraphState& s) {
    return sup_error(s, [t = s.t](double x) { return grim_reaper(x, t); });
  };

  // Heun at h = 1/128 on [-5, 5]: project the wall time from the CFL step.
  const RunConfig heun = config("grim_reaper_tracking");
  const GraphState s0 = build_initial_state(heun);
  const double dt = cfl_dt(s0, heun.flow.cfl_safety);
  const double steps = std::ceil(heun.flow.t_end / dt);
  StepContext ctx{exact_solution(heun)};
  GraphState s = s0;
  const int probe = 200;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < probe; ++k) s = step(s, dt, Scheme::Heun, ctx);
  const double per_step = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / probe;
  const double projected = steps * per_step;
  o.lines.push_back(fmt("heun h=1/128: cfl dt=%.3e, %.3g steps, projected %.0f s (limit 60 s)", dt, steps, projected));
  if (projected < 60.0) {
    const Trajectory a = flow(heun);
    const Trajectory b = flow(config("grim_reaper_tracking", {"domain.resolution=[2560]"}));
    const double ea = error(a.final_state()), eb = error(b.final_state());
    o.pass = ea <= 1e-4 && ea / eb >= 3.0;
    o.lines.push_back(fmt("heun error h=1/128 %.3e, h=1/256 %.3e, ratio %.2f", ea, eb, ea / eb));
  } else {
    o.lines.push_back("heun run not attempted: outside the runtime limit");
  }

  // Crank-Nicolson at the same resolutions, for information.
  const double ea = error(flow(config("grim_reaper_tracking_cn")).final_state());
  const double eb = error(flow(config("grim_reaper_tracking_cn", {"domain.resolution=[2560]"})).final_state());
  o.lines.push_back(fmt("info: cn dt=1e-4 error h=1/128 %.3e, h=1/256 %.3e, ratio %.2f", ea, eb, ea / eb));
  return o;
}

Outcome expander_sharpness() {
  const Trajectory& tr = runs.get("expander_witness");
  const VerdictReport disp = check_displacement(tr);
  const VerdictReport hd = check_H_decay(tr);
  const double h = Grid(tr.initial().domain).h(0);
  const double tip_x = Grid(tr.initial().domain).coord(static_cast<std::size_t>(disp.worst_node), 0);
  Outcome o;
  o.pass = disp.pass && disp.worst_margin <= 4 * h && std::abs(tip_x) <= h && std::abs(hd.worst_margin) <= 0.05;
  o.lines.push_back(fmt("displacement worst margin %.4f (4h = %.4f) at x=%.4f t=%.3f", disp.worst_margin, 4 * h,
                        tip_x, disp.worst_t));
  o.lines.push_back(fmt("H decay relative margin %.4f (equality within 0.05)", hd.worst_margin));
  return o;
}

Outcome neumann_convergence() {
  const Trajectory& tr = runs.get("neumann_cosine");
  const double du = sup_abs_du(tr.final_state());
  const auto v2 = node_scalars(tr.initial()).v2;
  double prev = *std::max_element(v2.begin(), v2.end());
  double rise = -std::numeric_limits<double>::infinity();
  for (const auto& d : tr.diagnostics) {
    rise = std::max(rise, d.sup_v2 - prev);
    prev = d.sup_v2;
  }
  Outcome o;
  o.pass = du < 1e-4 && rise <= 1e-6;
  o.lines.push_back(fmt("t=%.3f steady=%d sup|Du|=%.3e", tr.final_state().t, int(tr.steady_state_reached), du));
  o.lines.push_back(fmt("largest step increase of max v^2: %.3e (allowed 1e-6)", rise));
  return o;
}

Outcome dirichlet_convergence() {
  const Trajectory& tr = runs.get("dirichlet_linear");
  const double err = sup_error(tr.final_state(), [](double x) { return 0.5 * x; });
  const AcausalResult good = check_acausal(BoundaryData{1, 1, {0.0, 1.0}, {0.0, 0.5}});
  const AcausalResult bad = check_acausal(BoundaryData{1, 1, {0.0, 1.0}, {0.0, 1.2}});
  const AcausalResult cfg = check_acausal(boundary_data(tr.initial()));
  Outcome o;
  o.pass = err <= 1e-5 && good.pass && std::abs(good.delta - 0.5) <= 1e-12 && !bad.pass &&
           std::abs(cfg.delta - 0.5) <= 1e-12;
  o.lines.push_back(fmt("t=%.3f steady=%d sup|u - x/2|=%.3e", tr.final_state().t, int(tr.steady_state_reached), err));
  o.lines.push_back(fmt("acausal (0, 0.5): delta=%.6f pass=%d; run boundary delta=%.6f", good.delta, int(good.pass),
                        cfg.delta));
  o.lines.push_back(fmt("acausal (0, 1.2): delta=%.6f pass=%d", bad.delta, int(bad.pass)));
  return o;
}

Outcome barrier_containment() {
  Outcome o{true, {}};
  {
    const RunConfig c = config("neumann_cosine");
    const Trajectory& tr = runs.get("neumann_cosine");
    const double h = Grid(tr.initial().domain).h(0);
    for (const auto& q : build_monitors(c).quasi_spheres) {
      const double m0 = quasi_sphere_margin(q, tr.initial());
      double drop = 0.0;
      for (const auto& s : tr.snapshots) drop = std::max(drop, m0 - quasi_sphere_margin(q, s));
      o.pass = o.pass && drop <= 4 * h * h + 1e-8;
      o.lines.push_back(fmt("quasi-sphere: initial margin %.6f, largest drop %.3e (allowed %.3e)", m0, drop,
                            4 * h * h + 1e-8));
    }
  }
  {
    const RunConfig c = config("dirichlet_linear");
    const Trajectory& tr = runs.get("dirichlet_linear");
    const double h = Grid(tr.initial().domain).h(0);
    for (const auto& b : build_monitors(c).barriers) {
      const auto heights = barrier_heights(b, tr.initial().domain);
      const double m0 = barrier_margin(b, tr.initial(), heights);
      double worst = m0;
      for (const auto& s : tr.snapshots) worst = std::min(worst, barrier_margin(b, s, heights));
      o.pass = o.pass && m0 >= 0.0 && worst >= -4 * h * h;
      o.lines.push_back(fmt("f_{K,Lambda} barrier: initial margin %.6f, minimum %.6f (allowed >= %.3e)", m0, worst,
                            -4 * h * h));
    }
  }
  return o;
}

Outcome tame() {
  Outcome o{true, {}};
  for (const char* name : {"neumann_cosine", "dirichlet_linear", "g2_dirichlet"}) {
    const double r = tame_ratio(runs.get(name));
    o.pass = o.pass && r <= 1.10;
    o.lines.push_back(fmt("%s: max t sup|II|^2 / (m/2) = %.4f (limit 1.10)", name, r));
  }
  const double r = tame_ratio(runs.get("expander_witness"));
  o.pass = o.pass && std::abs(r - 1.0) <= 0.10;
  o.lines.push_back(fmt("expander_witness: max t sup|II|^2 / (m/2) = %.4f (equality within 0.10)", r));
  return o;
}

Outcome renormalized() {
  const RunConfig c = config("cone_entire");
  const ExperimentOutcome e = run_renorm(c, g_out / "cone_entire");
  const Json& r = e.results;
  Outcome o;
  const bool reached = !r["below_threshold_at_s"].is_null() && r["below_threshold_at_s"].get<double>() <= 2.0;
  o.lines.push_back(fmt("expander residual: below %.0e at s=%s, final %.3e at s=%.3f", c.renorm.threshold,
                        reached ? fmt("%.3f", r["below_threshold_at_s"].get<double>()).c_str() : "never",
                        r["final_residual"].get<double>(), r["residual_series"].back()["s"].get<double>()));

  const Json& ent = r["entire"];
  const auto radii = ent["radii"].get<std::vector<double>>();
  const auto fin = ent["discrepancies"].get<std::vector<double>>();
  bool halves = true;
  for (std::size_t i = 1; i < fin.size(); ++i) halves = halves && fin[i] <= 0.5 * fin[i - 1];
  std::string line = "discrepancies at t_end:";
  for (double d : fin) line += fmt(" %.3e", d);
  o.lines.push_back(line + (halves ? " (halving)" : " (not halving)"));

  // For information: the latest shared time at which every pair still halves.
  const double window = radii.front() * radii.front() / (4.0 * c.n);
  for (const auto& rec : ent["history"]) {
    const double t = rec["t"].get<double>();
    const auto v = rec["values"].get<std::vector<double>>();
    bool ok = true;
    for (std::size_t i = 1; i < v.size(); ++i) ok = ok && v[i] <= 0.5 * v[i - 1];
    if (std::abs(t - std::floor(window)) < 1e-9 || std::abs(t - 2.0) < 1e-9) {
      std::string l = fmt("info: t=%.2f discrepancies", t);
      for (double d : v) l += fmt(" %.3e", d);
      o.lines.push_back(l + (ok ? " (halving)" : " (not halving)"));
    }
  }
  o.pass = reached && halves;
  return o;
}

GraphState graph33(int cells, double amp) {
  const auto d = DomainSpec::box({{0, 1}, {0, 1}, {0, 1}}, {cells, cells, cells}, BoundaryKind::Dirichlet);
  GraphState s = GraphState::zeros(d, 3);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    s.u[node * 3 + 0] = 0.2 * x[0] - 0.1 * x[2] + amp * x[0] * x[0] * x[1];
    s.u[node * 3 + 1] = 0.3 * x[1] + amp * std::sin(3 * x[0] * x[2]);
    s.u[node * 3 + 2] = -0.1 * x[0] + 0.15 * x[2] + amp * x[2] * x[2] * x[2];
  }
  return s;
}

Outcome g2_round_trip() {
  Outcome o{true, {}};

  // phi0 = -dx123 + dx1^(dy01 + dy23) + dx2^(dy02 - dy13) + dx3^(dy03 + dy12)
  const std::map<std::string, double> model{{"x1x2x3", -1}, {"x1y0y1", 1}, {"x1y2y3", 1}, {"x2y0y2", 1},
                                            {"x2y1y3", -1}, {"x3y0y3", 1}, {"x3y1y2", 1}};
  const auto d = DomainSpec::box({{0, 1}, {0, 1}, {0, 1}}, {4, 4, 4}, BoundaryKind::Dirichlet);
  const auto comps = phi_components(immersion_to_phi(GraphState::zeros(d, 3)));
  bool exact = comps.size() == 35;
  for (const auto& [k, v] : comps)
    for (double c : v) exact = exact && c == (model.count(k) ? model.at(k) : 0.0);
  o.pass = exact;
  o.lines.push_back(fmt("identity immersion reproduces phi0 exactly: %s", exact ? "yes" : "no"));

  const double affine = check_closed(immersion_to_phi(graph33(8, 0.0)));
  const double c8 = check_closed(immersion_to_phi(graph33(8, 0.05)));
  const double c16 = check_closed(immersion_to_phi(graph33(16, 0.05)));
  o.pass = o.pass && affine <= 1e-14 && c8 <= 1.0 / 64 && c16 <= 1.0 / 256;
  o.lines.push_back(fmt("closedness: affine %.2e; perturbed h=1/8 %.2e (h^2 %.2e), h=1/16 %.2e (h^2 %.2e)", affine,
                        c8, 1.0 / 64, c16, 1.0 / 256));

  const RunConfig c = config("g2_dirichlet");
  const Trajectory& tr = runs.get("g2_dirichlet");
  const double tor = torsion(tr.final_state()).sup_H_norm2;
  const double tol2 = c.flow.steady_state_tol * c.flow.steady_state_tol;
  o.pass = o.pass && tor <= tol2;
  o.lines.push_back(fmt("(3,3) dirichlet run: t=%.3f, terminal torsion %.3e (limit %.1e), closedness %.2e",
                        tr.final_state().t, tor, tol2, check_closed(immersion_to_phi(tr.final_state()))));
  return o;
}

Outcome determinism() {
  Outcome o{true, {}};
  const Trajectory a = flow(config("neumann_cosine"));
  const Trajectory& b = runs.get("neumann_cosine");
  bool same = a.snapshots.size() == b.snapshots.size() && a.diagnostics.size() == b.diagnostics.size();
  for (std::size_t k = 0; same && k < a.snapshots.size(); ++k)
    same = a.snapshots[k].t == b.snapshots[k].t && a.snapshots[k].u.size() == b.snapshots[k].u.size() &&
           std::memcmp(a.snapshots[k].u.data(), b.snapshots[k].u.data(), a.snapshots[k].u.size() * sizeof(double)) == 0;
  o.pass = same;
  o.lines.push_back(fmt("rerun of neumann_cosine bit-identical: %s", same ? "yes" : "no"));

  auto at = [](const char* scheme, double dt) {
    return flow(config("neumann_cosine", {std::string("flow.scheme=") + scheme, fmt("flow.dt=%.17g", dt),
                                          "flow.t_end=0.05", "flow.snapshot_every=0.05",
                                          "flow.steady_state_tol=1e-30"}))
        .final_state();
  };
  const double dts[3] = {1e-4, 5e-5, 2.5e-5};
  GraphState heun[3];
  double eh[3];
  for (int k = 0; k < 3; ++k) {
    heun[k] = at("heun", dts[k]);
    eh[k] = sup_diff(at("euler", dts[k]), heun[k]);
  }
  const double p1 = std::log2(eh[0] / eh[1]), p2 = std::log2(eh[1] / eh[2]);
  const double s1 = sup_diff(heun[0], heun[1]), s2 = sup_diff(heun[1], heun[2]);
  const double q = std::log2(s1 / s2);
  o.pass = o.pass && std::abs(p1 - 1.0) <= 0.3 && std::abs(p2 - 1.0) <= 0.3 && std::abs(q - 2.0) <= 0.3;
  o.lines.push_back(fmt("|euler - heun| at dt=1e-4, 5e-5, 2.5e-5: %.3e %.3e %.3e, slopes %.3f %.3f", eh[0], eh[1],
                        eh[2], p1, p2));
  o.lines.push_back(fmt("heun dt-halving differences %.3e %.3e, slope %.3f", s1, s2, q));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(g_out);

  struct Criterion {
    const char* name;
    Outcome (*fn)();
    double limit;  // seconds, 0 = none
  };
  const Criterion criteria[] = {
      {"oracle residual orders", oracle_orders, 30},
      {"grim reaper tracking (heun)", tracking, 60},
      {"expander sharpness witnesses", expander_sharpness, 60},
      {"neumann convergence", neumann_convergence, 60},
      {"dirichlet convergence", dirichlet_convergence, 60},
      {"barrier containment", barrier_containment, 120},
      {"tame estimates", tame, 60},
      {"renormalized convergence", renormalized, 300},
      {"g2 round trip", g2_round_trip, 120},
      {"determinism and consistency", determinism, 0},
  };

  int failed = 0;
  int id = 0;
  for (const auto& c : criteria) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.lines.push_back(std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit <= 0 || secs < c.limit;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] criterion %d: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", id, c.name, secs,
                c.limit > 0 ? fmt(", limit %.0f s", c.limit).c_str() : "");
    for (const auto& l : o.lines) std::printf("    %s\n", l.c_str());
    if (!in_time) std::printf("    over the runtime limit\n");
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", id - failed, id);
  return failed ? 1 : 0;
}
