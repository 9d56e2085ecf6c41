#include "smcf/cli_io.hpp"

#include "smcf/errors.hpp"
#include "smcf/solutions_barriers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace smcf {

namespace fs = std::filesystem;

namespace {

/// Reads one JSON object, tracking which keys were consumed so leftovers can
/// be reported as unknown.
class Obj {
 public:
  Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  void touch(const std::string& key) { used_.insert(key); }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required key '" + name(key) + "'");
    return j_.at(key);
  }

  template <class T>
  T req(const std::string& key) {
    return convert<T>(raw(key), key);
  }

  template <class T>
  T get(const std::string& key, T def) {
    used_.insert(key);
    if (!has(key)) return def;
    return convert<T>(j_.at(key), key);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return convert<T>(j_.at(key), key);
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError("unknown key '" + name(it.key()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  template <class T>
  T convert(const Json& v, const std::string& key) const {
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("key '" + name(key) + "' has the wrong type");
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const std::map<std::string, std::set<std::string>>& named_params() {
  static const std::map<std::string, std::set<std::string>> p{
      {"flat", {}},
      {"grim_reaper", {}},
      {"hyperbolic_expander", {"birth"}},
      {"cosine", {"amplitude", "wavenumber"}},
      {"linear", {"slope", "offset", "amplitude"}},
  };
  return p;
}

double param(const NamedInitial& ni, const std::string& key, double def) {
  const auto it = ni.params.find(key);
  if (it == ni.params.end()) return def;
  if (!it->second.is_number()) throw ConfigError("initial.params." + key + " must be a number");
  return it->second.get<double>();
}

std::vector<double> param_vector(const NamedInitial& ni, const std::string& key, std::size_t len) {
  const auto it = ni.params.find(key);
  if (it == ni.params.end()) return std::vector<double>(len, 0.0);
  std::vector<double> v;
  try {
    if (it->second.is_array() && !it->second.empty() && it->second[0].is_array()) {
      for (const auto& row : it->second)
        for (const auto& x : row) v.push_back(x.get<double>());
    } else {
      v = it->second.get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("initial.params." + key + " must hold numbers");
  }
  if (v.size() != len)
    throw ConfigError("initial.params." + key + " must hold " + std::to_string(len) + " numbers");
  return v;
}

void validate_named(const NamedInitial& ni, const RunConfig& cfg) {
  const auto it = named_params().find(ni.name);
  if (it == named_params().end()) throw ConfigError("unknown initial profile '" + ni.name + "'");
  for (const auto& [k, v] : ni.params)
    if (!it->second.count(k)) throw ConfigError("unknown key 'initial.params." + k + "'");
  if ((ni.name == "grim_reaper" || ni.name == "hyperbolic_expander") && cfg.m != 1)
    throw ConfigError("initial profile '" + ni.name + "' needs m = 1");
  if (ni.name == "hyperbolic_expander" && !(cfg.initial.t0 > param(ni, "birth", 0.0)))
    throw ConfigError("hyperbolic_expander needs initial.t0 after params.birth");
  if (ni.name == "linear") {
    param_vector(ni, "slope", static_cast<std::size_t>(cfg.n * cfg.m));
    param_vector(ni, "offset", static_cast<std::size_t>(cfg.m));
  }
  param(ni, "amplitude", 0.0);
  param(ni, "wavenumber", 1.0);
}

InitialSpec parse_initial(const Json& j) {
  InitialSpec spec;
  if (j.is_string()) {
    spec.data = NamedInitial{j.get<std::string>(), {}};
    return spec;
  }
  Obj o(j, "initial");
  const auto type = o.get<std::string>("type", "named");
  spec.t0 = o.get<double>("t0", 0.0);
  if (type == "named") {
    NamedInitial ni;
    ni.name = o.get<std::string>("name", "flat");
    if (o.has("params")) {
      const Json& p = o.raw("params");
      if (!p.is_object()) throw ConfigError("'initial.params' must be an object");
      for (auto it = p.begin(); it != p.end(); ++it) ni.params[it.key()] = it.value();
    } else {
      o.touch("params");
    }
    spec.data = std::move(ni);
  } else if (type == "inline") {
    spec.data = InlineInitial{o.req<std::vector<double>>("u")};
  } else if (type == "cone") {
    ConeInitial c;
    c.a = o.req<std::vector<double>>("a");
    c.B = o.get<std::vector<std::vector<double>>>("B", {});
    c.rho = o.get<double>("rho", 1.0);
    spec.data = std::move(c);
  } else {
    throw ConfigError("unknown initial type '" + type + "'");
  }
  o.done();
  return spec;
}

Json initial_to_json(const InitialSpec& s) {
  Json j;
  if (const auto* ni = std::get_if<NamedInitial>(&s.data)) {
    j["type"] = "named";
    j["name"] = ni->name;
    j["params"] = Json::object();
    for (const auto& [k, v] : ni->params) j["params"][k] = v;
  } else if (const auto* in = std::get_if<InlineInitial>(&s.data)) {
    j["type"] = "inline";
    j["u"] = in->u;
  } else {
    const auto& c = std::get<ConeInitial>(s.data);
    j["type"] = "cone";
    j["a"] = c.a;
    j["B"] = c.B;
    j["rho"] = c.rho;
  }
  j["t0"] = s.t0;
  return j;
}

FlowConfig parse_flow(const Json& j, const DomainSpec& d) {
  Obj o(j, "flow");
  FlowConfig f;
  FlowMode def = FlowMode::Neumann;
  if (d.kind == DomainKind::EntireTruncation) def = FlowMode::Entire;
  else if (d.boundary != BoundaryKind::Neumann) def = FlowMode::Dirichlet;
  f.mode = o.has("mode") ? flow_mode_from_string(o.req<std::string>("mode")) : (o.touch("mode"), def);
  f.scheme = scheme_from_string(o.get<std::string>("scheme", "heun"));
  f.cfl_safety = o.get<double>("cfl_safety", f.cfl_safety);
  f.t_end = o.get<double>("t_end", f.t_end);
  f.snapshot_every = o.get<double>("snapshot_every", f.snapshot_every);
  f.steady_state_tol = o.get<double>("steady_state_tol", f.steady_state_tol);
  f.entire_radii = o.get<std::vector<double>>("entire_radii", {});
  f.entire_lambda = o.get<double>("entire_lambda", f.entire_lambda);
  f.fixed_dt = o.opt<double>("dt");
  o.done();
  f.validate();
  return f;
}

Json flow_to_json(const FlowConfig& f) {
  Json j;
  j["mode"] = std::string(to_string(f.mode));
  j["scheme"] = std::string(to_string(f.scheme));
  j["cfl_safety"] = f.cfl_safety;
  j["t_end"] = f.t_end;
  j["snapshot_every"] = f.snapshot_every;
  j["steady_state_tol"] = f.steady_state_tol;
  j["entire_radii"] = f.entire_radii;
  j["entire_lambda"] = f.entire_lambda;
  j["dt"] = f.fixed_dt ? Json(*f.fixed_dt) : Json(nullptr);
  return j;
}

BarrierSpec parse_barrier(const Json& j, std::size_t idx) {
  const std::string path = "barriers[" + std::to_string(idx) + "]";
  Obj o(j, path);
  const auto type = o.req<std::string>("type");
  if (type == "quasi_sphere") {
    QuasiSphereSpec q;
    Obj c(o.raw("center"), path + ".center");
    q.center_x = c.req<std::vector<double>>("x");
    q.center_y = c.req<std::vector<double>>("y");
    c.done();
    q.R2 = o.req<double>("R2");
    o.done();
    return q;
  }
  if (type == "yang_li") {
    YangLiSpec y;
    y.xi = o.req<std::vector<double>>("xi");
    y.eta = o.req<std::vector<double>>("eta");
    y.K = o.req<double>("K");
    y.Lambda = o.get<double>("Lambda", 0.0);
    o.done();
    return y;
  }
  throw ConfigError("unknown barrier type '" + type + "' in " + path);
}

Json barrier_to_json(const BarrierSpec& b) {
  Json j;
  if (const auto* q = std::get_if<QuasiSphereSpec>(&b)) {
    j["type"] = "quasi_sphere";
    j["center"] = {{"x", q->center_x}, {"y", q->center_y}};
    j["R2"] = q->R2;
  } else {
    const auto& y = std::get<YangLiSpec>(b);
    j["type"] = "yang_li";
    j["xi"] = y.xi;
    j["eta"] = y.eta;
    j["K"] = y.K;
    j["Lambda"] = y.Lambda;
  }
  return j;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<std::string> applicable_checks(FlowMode mode) {
  std::vector<std::string> c{"displacement", "H_decay", "gradient", "tame"};
  if (mode == FlowMode::Dirichlet) c.push_back("dirichlet_boundary_H");
  return c;
}

struct FlowOutcome {
  Trajectory traj;
  std::optional<EntireResult> entire;
};

FlowOutcome integrate(const RunConfig& cfg, const GraphState& initial, const FlowMonitors& mon) {
  FlowOutcome out;
  if (cfg.flow.mode == FlowMode::Entire) {
    EntireResult er = entire_solve(cfg.flow, initial, mon);
    out.traj = er.trajectory;
    out.entire = std::move(er);
  } else {
    out.traj = run(cfg.flow, initial, mon);
  }
  return out;
}

Json entire_to_json(const EntireResult& er) {
  Json hist = Json::array();
  for (const auto& r : er.history) hist.push_back({{"t", r.t}, {"values", r.values}});
  return Json{{"radii", er.radii},
              {"half_widths", er.half_widths},
              {"discrepancies", er.discrepancies},
              {"history", hist},
              {"converged", er.converged}};
}

Json write_trajectory(const Trajectory& traj, const fs::path& out_dir) {
  fs::create_directories(out_dir / "snapshots");
  emit_csv(traj, out_dir / "diagnostics.csv");
  Json files;
  files["diagnostics"] = "diagnostics.csv";
  Json snaps = Json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/snap_%04zu.json", i);
    write_snapshot(traj.snapshots[i], out_dir / name);
    snaps.push_back(name);
  }
  files["snapshots"] = snaps;
  files["results"] = "results.json";
  return files;
}

Json run_summary(const Trajectory& traj) {
  const GraphState& fin = traj.final_state();
  Json j{{"steady_state_reached", traj.steady_state_reached},
         {"final_t", fin.t},
         {"steps", fin.provenance.step_count},
         {"final_sup_H", traj.final_sup_H},
         {"snapshots", traj.snapshots.size()}};
  // A Neumann run settles on a constant; record which one.
  if (traj.mode == FlowMode::Neumann) {
    std::vector<double> mean(fin.m, 0.0);
    const std::size_t N = fin.node_count();
    for (std::size_t node = 0; node < N; ++node)
      for (int a = 0; a < fin.m; ++a) mean[a] += fin.u[node * fin.m + a] / static_cast<double>(N);
    j["final_mean"] = mean;
  }
  return j;
}

GraphState initial_for(const RunConfig& cfg, const std::optional<fs::path>& resume) {
  if (!resume) return build_initial_state(cfg);
  GraphState s = read_snapshot(*resume);
  if (!(s.domain == cfg.domain) || s.m != cfg.m)
    throw ConfigError("snapshot '" + resume->string() + "' does not match the configured domain");
  return s;
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  Obj o(doc, "");
  RunConfig cfg;
  cfg.schema_version = o.get<int>("schema_version", 1);
  if (cfg.schema_version != 1)
    throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));
  {
    Obj s(o.raw("signature"), "signature");
    cfg.n = s.req<int>("n");
    cfg.m = s.req<int>("m");
    s.done();
    if (cfg.n < 1 || cfg.n > kMaxBaseDim) throw ConfigError("signature.n must be 1, 2 or 3");
    if (cfg.m < 1) throw ConfigError("signature.m must be positive");
  }
  cfg.domain = domain_from_json(o.raw("domain"));
  if (cfg.domain.n() != cfg.n)
    throw ConfigError("domain has " + std::to_string(cfg.domain.n()) + " axes but signature.n = " +
                      std::to_string(cfg.n));
  cfg.initial = o.has("initial") ? parse_initial(o.raw("initial")) : (o.touch("initial"), InitialSpec{});
  cfg.flow = parse_flow(o.has("flow") ? o.raw("flow") : (o.touch("flow"), Json::object()), cfg.domain);
  if (o.has("barriers")) {
    const Json& b = o.raw("barriers");
    if (!b.is_array()) throw ConfigError("'barriers' must be an array");
    for (std::size_t i = 0; i < b.size(); ++i) cfg.barriers.push_back(parse_barrier(b[i], i));
  } else {
    o.touch("barriers");
  }
  cfg.checks = o.get<std::vector<std::string>>("checks", {});
  for (const auto& c : cfg.checks)
    if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
      throw ConfigError("unknown check '" + c + "'");
  cfg.output_dir = o.get<std::string>("output_dir", cfg.output_dir);
  cfg.seed = o.get<std::uint64_t>("seed", 0);
  if (o.has("renorm")) {
    Obj r(o.raw("renorm"), "renorm");
    cfg.renorm.enabled = r.get<bool>("enabled", false);
    cfg.renorm.core_radius = r.opt<double>("core_radius");
    cfg.renorm.threshold = r.get<double>("threshold", cfg.renorm.threshold);
    r.done();
  } else {
    o.touch("renorm");
  }
  if (o.has("oracle")) {
    Obj r(o.raw("oracle"), "oracle");
    OracleSpec def;
    cfg.oracle.solutions = r.get<std::vector<std::string>>("solutions", def.solutions);
    cfg.oracle.h = r.get<std::vector<double>>("h", def.h);
    cfg.oracle.times = r.get<std::vector<double>>("times", def.times);
    cfg.oracle.order_target = r.get<double>("order_target", def.order_target);
    cfg.oracle.order_tolerance = r.get<double>("order_tolerance", def.order_tolerance);
    cfg.oracle.reaper_half_width = r.get<double>("reaper_half_width", def.reaper_half_width);
    r.done();
    for (const auto& s : cfg.oracle.solutions)
      if (s != "grim_reaper" && s != "hyperbolic_expander")
        throw ConfigError("unknown oracle solution '" + s + "'");
    if (cfg.oracle.h.size() < 2) throw ConfigError("oracle.h needs at least two spacings");
    if (!(cfg.oracle.reaper_half_width > 0.0)) throw ConfigError("oracle.reaper_half_width must be positive");
  } else {
    o.touch("oracle");
  }
  o.done();

  if (const auto* ni = std::get_if<NamedInitial>(&cfg.initial.data)) validate_named(*ni, cfg);
  if (const auto* c = std::get_if<ConeInitial>(&cfg.initial.data)) {
    if (static_cast<int>(c->a.size()) != cfg.m) throw ConfigError("initial.a must have m entries");
    if (!c->B.empty() && (static_cast<int>(c->B.size()) != cfg.n ||
                          std::any_of(c->B.begin(), c->B.end(),
                                      [&](const auto& r) { return static_cast<int>(r.size()) != cfg.m; })))
      throw ConfigError("initial.B must be n rows of m numbers");
  }
  if (cfg.flow.mode == FlowMode::Entire) {
    const double need = cfg.flow.entire_radii.back() + cfg.flow.entire_lambda;
    for (const auto& [lo, hi] : cfg.domain.bounds)
      if (lo > -need || hi < need)
        throw ConfigError("entire mode needs the domain to cover the ball of radius " + fmt17(need));
  } else {
    const BoundaryKind bk = cfg.domain.boundary;
    const bool ok = (cfg.flow.mode == FlowMode::Dirichlet) ? bk != BoundaryKind::Neumann
                                                            : bk == BoundaryKind::Neumann;
    if (!ok)
      throw ConfigError("flow mode '" + std::string(to_string(cfg.flow.mode)) +
                        "' does not match boundary '" + std::string(to_string(bk)) + "'");
  }
  for (const auto& b : cfg.barriers) {
    if (const auto* q = std::get_if<QuasiSphereSpec>(&b)) {
      if (static_cast<int>(q->center_x.size()) != cfg.n || static_cast<int>(q->center_y.size()) != cfg.m)
        throw ConfigError("quasi_sphere center must have n spatial and m vertical entries");
    } else {
      const auto& y = std::get<YangLiSpec>(b);
      if (static_cast<int>(y.xi.size()) != cfg.n || static_cast<int>(y.eta.size()) != cfg.m)
        throw ConfigError("yang_li barrier needs xi of length n and eta of length m");
      YangLiBarrier{y.xi, y.eta, y.K, y.Lambda, cfg.n}.validate();
    }
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config_text(text);
}

Json to_json(const RunConfig& cfg) {
  Json j;
  j["schema_version"] = cfg.schema_version;
  j["signature"] = {{"n", cfg.n}, {"m", cfg.m}};
  j["domain"] = domain_to_json(cfg.domain);
  j["initial"] = initial_to_json(cfg.initial);
  j["flow"] = flow_to_json(cfg.flow);
  j["barriers"] = Json::array();
  for (const auto& b : cfg.barriers) j["barriers"].push_back(barrier_to_json(b));
  j["checks"] = cfg.checks;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["renorm"] = {{"enabled", cfg.renorm.enabled},
                 {"core_radius", cfg.renorm.core_radius ? Json(*cfg.renorm.core_radius) : Json(nullptr)},
                 {"threshold", cfg.renorm.threshold}};
  j["oracle"] = {{"solutions", cfg.oracle.solutions},
                 {"h", cfg.oracle.h},
                 {"times", cfg.oracle.times},
                 {"order_target", cfg.oracle.order_target},
                 {"order_tolerance", cfg.oracle.order_tolerance},
                 {"reaper_half_width", cfg.oracle.reaper_half_width}};
  return j;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  if (!doc.is_object()) throw ConfigError("config document is not an object");
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    Json& next = (*node)[part];
    if (next.is_null()) next = Json::object();
    if (!next.is_object())
      throw ConfigError("override key '" + key + "': '" + part + "' is not an object");
    node = &next;
    start = dot + 1;
  }
}

std::string config_hash(const RunConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GraphState build_initial_state(const RunConfig& cfg) {
  GraphState s;
  const DomainSpec& d = cfg.domain;
  if (const auto* c = std::get_if<ConeInitial>(&cfg.initial.data)) {
    ConeProfile p;
    p.a = Eigen::Map<const Eigen::VectorXd>(c->a.data(), cfg.m);
    p.B = Eigen::MatrixXd::Zero(cfg.n, cfg.m);
    for (std::size_t i = 0; i < c->B.size(); ++i)
      for (int a = 0; a < cfg.m; ++a) p.B(i, a) = c->B[i][a];
    s = cone_initial_data(p, c->rho, d);
  } else if (const auto* in = std::get_if<InlineInitial>(&cfg.initial.data)) {
    s = GraphState::zeros(d, cfg.m);
    if (in->u.size() != s.u.size())
      throw DimensionError("initial.u has " + std::to_string(in->u.size()) + " values, expected " +
                           std::to_string(s.u.size()));
    s.u = in->u;
  } else {
    const auto& ni = std::get<NamedInitial>(cfg.initial.data);
    s = GraphState::zeros(d, cfg.m);
    const Grid g(d);
    const int n = cfg.n;
    const double t0 = cfg.initial.t0;
    const double amp = param(ni, "amplitude", ni.name == "cosine" ? 0.1 : 0.0);
    const double k = param(ni, "wavenumber", 1.0);
    const auto slope = ni.name == "linear" ? param_vector(ni, "slope", n * cfg.m) : std::vector<double>{};
    const auto offset = ni.name == "linear" ? param_vector(ni, "offset", cfg.m) : std::vector<double>{};
    const double birth = param(ni, "birth", 0.0);
    for (std::size_t node = 0; node < g.size(); ++node) {
      const auto x = g.coords(node);
      auto u = s.at(node);
      if (ni.name == "grim_reaper") {
        u[0] = grim_reaper(x[0], t0);
      } else if (ni.name == "hyperbolic_expander") {
        u[0] = hyperbolic_expander({x.data(), std::size_t(n)}, t0, n, birth);
      } else if (ni.name == "cosine") {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          v += std::cos(k * std::numbers::pi * (x[i] - d.bounds[i].first) /
                        (d.bounds[i].second - d.bounds[i].first));
        u[0] = amp * v;
      } else if (ni.name == "linear") {
        double bump = amp;
        for (int i = 0; i < n; ++i)
          bump *= std::sin(std::numbers::pi * (x[i] - d.bounds[i].first) /
                           (d.bounds[i].second - d.bounds[i].first));
        for (int a = 0; a < cfg.m; ++a) {
          double v = offset[a];
          for (int i = 0; i < n; ++i) v += slope[i * cfg.m + a] * x[i];
          u[a] = v + (a == 0 ? bump : 0.0);
        }
      }
    }
  }
  s.t = cfg.initial.t0;
  if (d.boundary == BoundaryKind::Dirichlet) s.dirichlet_data = s.u;
  s.provenance.config_hash = config_hash(cfg);
  s.provenance.step_count = 0;
  return s;
}

BoundaryFunction exact_solution(const RunConfig& cfg) {
  const auto* ni = std::get_if<NamedInitial>(&cfg.initial.data);
  if (!ni) throw ConfigError("exact tracking needs a named initial profile");
  const int n = cfg.n;
  const int m = cfg.m;
  if (ni->name == "grim_reaper")
    return [](std::span<const double> x, double t, std::span<double> out) { out[0] = grim_reaper(x[0], t); };
  if (ni->name == "hyperbolic_expander") {
    const double birth = param(*ni, "birth", 0.0);
    return [n, birth](std::span<const double> x, double t, std::span<double> out) {
      out[0] = hyperbolic_expander(x, t, n, birth);
    };
  }
  if (ni->name == "flat")
    return [m](std::span<const double>, double, std::span<double> out) {
      std::fill(out.begin(), out.begin() + m, 0.0);
    };
  if (ni->name == "linear" && param(*ni, "amplitude", 0.0) == 0.0) {
    const auto slope = param_vector(*ni, "slope", n * m);
    const auto offset = param_vector(*ni, "offset", m);
    return [n, m, slope, offset](std::span<const double> x, double, std::span<double> out) {
      for (int a = 0; a < m; ++a) {
        double v = offset[a];
        for (int i = 0; i < n; ++i) v += slope[i * m + a] * x[i];
        out[a] = v;
      }
    };
  }
  throw ConfigError("initial profile '" + ni->name + "' has no closed form to track");
}

FlowMonitors build_monitors(const RunConfig& cfg) {
  FlowMonitors mon;
  const Signature sig(cfg.n, cfg.m);
  for (const auto& b : cfg.barriers) {
    if (const auto* q = std::get_if<QuasiSphereSpec>(&b)) {
      mon.quasi_spheres.push_back(QuasiSphere{AmbientVector(q->center_x, q->center_y), q->R2, cfg.n});
    } else {
      const auto& y = std::get<YangLiSpec>(b);
      mon.barriers.push_back(YangLiBarrier{y.xi, y.eta, y.K, y.Lambda, cfg.n});
    }
  }
  if (cfg.domain.boundary == BoundaryKind::ExactTracking) mon.exact_boundary = exact_solution(cfg);
  if (cfg.renorm.enabled) {
    const auto core = cfg.renorm.core_radius;
    mon.snapshot_residual = [core](const GraphState& s) { return expander_residual(s, core); };
  }
  return mon;
}

std::string csv_string(const Trajectory& traj) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : traj.diagnostics) {
    out += std::to_string(r.step);
    for (double v : {r.t, r.dt, r.sup_v2, r.sup_H2, r.t_sup_II2, r.max_displacement}) {
      out += ',';
      out += fmt17(v);
    }
    out += ',';
    if (r.min_barrier_margin) out += fmt17(*r.min_barrier_margin);
    out += ',';
    if (r.expander_residual) out += fmt17(*r.expander_residual);
    out += '\n';
  }
  return out;
}

void emit_csv(const Trajectory& traj, const fs::path& path) { write_text(path, csv_string(traj)); }

Json domain_to_json(const DomainSpec& d) {
  Json b = Json::array();
  for (const auto& [lo, hi] : d.bounds) b.push_back({lo, hi});
  return Json{{"kind", std::string(to_string(d.kind))},
              {"bounds", b},
              {"resolution", d.resolution},
              {"boundary", std::string(to_string(d.boundary))}};
}

DomainSpec domain_from_json(const Json& j) {
  Obj o(j, "domain");
  DomainSpec d;
  const auto bounds = o.req<std::vector<std::vector<double>>>("bounds");
  for (const auto& b : bounds) {
    if (b.size() != 2) throw DimensionError("domain.bounds entries must be [lo, hi] pairs");
    d.bounds.emplace_back(b[0], b[1]);
  }
  d.resolution = o.req<std::vector<int>>("resolution");
  d.kind = o.has("kind") ? domain_kind_from_string(o.req<std::string>("kind"))
                         : (o.touch("kind"), d.bounds.size() == 1 ? DomainKind::Interval : DomainKind::Box);
  d.boundary = boundary_kind_from_string(o.get<std::string>("boundary", "neumann"));
  o.done();
  d.validate();
  return d;
}

Json snapshot_to_json(const GraphState& s) {
  Json j;
  j["schema"] = 1;
  j["n"] = s.domain.n();
  j["m"] = s.m;
  j["t"] = s.t;
  j["domain"] = domain_to_json(s.domain);
  j["u"] = s.u;
  if (s.dirichlet_data) j["dirichlet"] = *s.dirichlet_data;
  j["step_count"] = s.provenance.step_count;
  j["config_hash"] = s.provenance.config_hash;
  return j;
}

GraphState snapshot_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != 1)
    throw IoError("snapshot schema mismatch (expected schema 1)");
  GraphState s;
  try {
    s.domain = domain_from_json(j.at("domain"));
    s.m = j.at("m").get<int>();
    s.t = j.at("t").get<double>();
    s.u = j.at("u").get<std::vector<double>>();
    if (j.contains("dirichlet")) s.dirichlet_data = j.at("dirichlet").get<std::vector<double>>();
    s.provenance.step_count = j.value("step_count", std::int64_t{0});
    s.provenance.config_hash = j.value("config_hash", std::string{});
    if (j.at("n").get<int>() != s.domain.n()) throw DimensionError("snapshot n disagrees with its domain");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed snapshot: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("malformed snapshot: ") + e.what());
  }
  s.validate();
  if (s.dirichlet_data && s.dirichlet_data->size() != s.u.size())
    throw DimensionError("snapshot dirichlet array has the wrong length");
  return s;
}

void write_snapshot(const GraphState& s, const fs::path& path) { write_json(path, snapshot_to_json(s)); }

GraphState read_snapshot(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("snapshot '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return snapshot_from_json(j);
}

Json verdict_to_json(const VerdictReport& r) {
  return Json{{"name", r.name},
              {"pass", r.pass},
              {"worst_margin", r.worst_margin},
              {"worst_t", r.worst_t},
              {"worst_node", r.worst_node},
              {"tolerance", r.tolerance}};
}

ExperimentOutcome run_experiment(const RunConfig& cfg, const fs::path& out_dir, bool verify,
                                 const std::optional<fs::path>& resume) {
  const GraphState initial = initial_for(cfg, resume);
  const FlowOutcome fo = integrate(cfg, initial, build_monitors(cfg));
  const Trajectory& traj = fo.traj;

  ExperimentOutcome out;
  Json& res = out.results;
  res["command"] = verify ? "verify" : "run";
  res["config"] = to_json(cfg);
  res["config_hash"] = config_hash(cfg);
  if (resume) res["resumed_from"] = resume->string();
  res["run"] = run_summary(traj);
  if (fo.entire) res["entire"] = entire_to_json(*fo.entire);

  auto names = cfg.checks;
  if (verify && names.empty()) names = applicable_checks(cfg.flow.mode);
  Json verdicts = Json::array();
  for (const auto& name : names) {
    const VerdictReport r = run_check(name, traj);
    out.passed = out.passed && r.pass;
    verdicts.push_back(verdict_to_json(r));
  }
  res["verdicts"] = verdicts;
  if (verify && fo.entire && !fo.entire->converged) out.passed = false;
  res["files"] = write_trajectory(traj, out_dir);
  res["passed"] = out.passed;
  write_json(out_dir / "results.json", res);
  return out;
}

std::vector<OracleRow> oracle_study(const OracleSpec& spec) {
  std::vector<OracleRow> rows;
  for (const auto& sol : spec.solutions) {
    const bool reaper = sol == "grim_reaper";
    const double lo = reaper ? -spec.reaper_half_width : -1.0;
    const double hi = -lo;
    const std::vector<double> times = reaper ? std::vector<double>{0.0} : spec.times;
    std::size_t first = rows.size();
    for (double h : spec.h) {
      const int cells = static_cast<int>(std::lround((hi - lo) / h));
      const DomainSpec d = DomainSpec::interval(lo, hi, cells, BoundaryKind::Dirichlet);
      const Stencil st(d, 1);
      const Grid& g = st.grid();
      double worst = 0.0;
      std::vector<double> u(g.size()), du(1), d2u(1);
      for (double t : times) {
        for (std::size_t node = 0; node < g.size(); ++node) {
          const double x = g.coord(node, 0);
          u[node] = reaper ? grim_reaper(x, t) : hyperbolic_expander({&x, 1}, t, 1);
        }
        for (std::size_t node = 1; node + 1 < g.size(); ++node) {
          st.jet(u, node, du, d2u);
          const double rhs = inverse_metric(du, 1, 1).g_inv[0] * d2u[0];
          const double ut = reaper ? 1.0 : 1.0 / u[node];
          worst = std::max(worst, std::abs(ut - rhs));
        }
      }
      OracleRow row{sol, h, worst, std::nullopt};
      if (rows.size() > first) {
        const OracleRow& prev = rows.back();
        row.order = std::log(prev.residual / worst) / std::log(prev.h / h);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

ExperimentOutcome run_oracle(const RunConfig& cfg, const fs::path& out_dir) {
  const auto rows = oracle_study(cfg.oracle);
  ExperimentOutcome out;
  std::string csv = "solution,h,residual,order\n";
  Json table = Json::array();
  for (const auto& r : rows) {
    csv += r.solution + "," + fmt17(r.h) + "," + fmt17(r.residual) + "," + (r.order ? fmt17(*r.order) : "") + "\n";
    Json row{{"solution", r.solution}, {"h", r.h}, {"residual", r.residual}};
    row["order"] = r.order ? Json(*r.order) : Json(nullptr);
    if (r.order && std::abs(*r.order - cfg.oracle.order_target) > cfg.oracle.order_tolerance) out.passed = false;
    table.push_back(row);
  }
  fs::create_directories(out_dir);
  write_text(out_dir / "oracle.csv", csv);
  out.results["command"] = "oracle";
  out.results["config"] = to_json(cfg);
  out.results["rows"] = table;
  out.results["files"] = {{"oracle", "oracle.csv"}, {"results", "results.json"}};
  out.results["passed"] = out.passed;
  write_json(out_dir / "results.json", out.results);
  return out;
}

ExperimentOutcome run_renorm(const RunConfig& cfg, const fs::path& out_dir) {
  RunConfig c = cfg;
  c.renorm.enabled = false;
  const GraphState initial = build_initial_state(c);
  const FlowOutcome fo = integrate(c, initial, build_monitors(c));
  const Trajectory& traj = fo.traj;

  ExperimentOutcome out;
  std::string csv = "t,s,lambda,residual,weighted_residual,core_nodes\n";
  Json series = Json::array();
  double last = 0.0;
  std::optional<double> reached;
  for (const auto& snap : traj.snapshots) {
    if (snap.t < 0.0) continue;
    const ResidualReport rep = expander_residual_report(snap, cfg.renorm.core_radius);
    const double s = rescaled_time(snap.t);
    const double lam = rescale_factor(snap.t);
    csv += fmt17(snap.t) + "," + fmt17(s) + "," + fmt17(lam) + "," + fmt17(rep.sup_residual) + "," +
           fmt17(rep.sup_weighted) + "," + std::to_string(rep.core_nodes) + "\n";
    series.push_back({{"t", snap.t}, {"s", s}, {"residual", rep.sup_residual},
                      {"weighted_residual", rep.sup_weighted}, {"core_nodes", rep.core_nodes}});
    last = rep.sup_residual;
    if (!reached && last < cfg.renorm.threshold) reached = s;
  }
  out.passed = reached.has_value();
  Json& res = out.results;
  res["command"] = "renorm";
  res["config"] = to_json(cfg);
  res["config_hash"] = config_hash(cfg);
  res["run"] = run_summary(traj);
  if (fo.entire) res["entire"] = entire_to_json(*fo.entire);
  res["residual_series"] = series;
  res["final_residual"] = last;
  res["threshold"] = cfg.renorm.threshold;
  res["below_threshold_at_s"] = reached ? Json(*reached) : Json(nullptr);
  Json files = write_trajectory(traj, out_dir);
  write_text(out_dir / "renorm.csv", csv);
  files["renorm"] = "renorm.csv";
  res["files"] = files;
  res["passed"] = out.passed;
  write_json(out_dir / "results.json", res);
  return out;
}

Json g2_export(const G2Form& phi) {
  Json j;
  j["normalization"] = kG2Normalization;
  j["domain"] = domain_to_json(phi.domain);
  j["nodes"] = phi.vol.size();
  Json coeffs = Json::object();
  for (const auto& [k, v] : phi_components(phi)) coeffs[k] = v;
  j["coefficients"] = coeffs;
  return j;
}

ExperimentOutcome run_g2(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.n != 3 || cfg.m != 3) throw ConfigError("g2 needs signature n = 3, m = 3");
  if (cfg.flow.mode == FlowMode::Entire) throw ConfigError("g2 runs on Neumann or Dirichlet domains");
  const GraphState initial = build_initial_state(cfg);
  const G2Form phi_initial = immersion_to_phi(initial);
  const FlowOutcome fo = integrate(cfg, initial, build_monitors(cfg));
  const GraphState& fin = fo.traj.final_state();
  const G2Form phi_final = immersion_to_phi(fin);
  const TorsionField tor0 = torsion(initial);
  const TorsionField tor1 = torsion(fin);

  ExperimentOutcome out;
  const double tol2 = cfg.flow.steady_state_tol * cfg.flow.steady_state_tol;
  out.passed = tor1.sup_H_norm2 <= tol2;
  fs::create_directories(out_dir);
  write_json(out_dir / "phi_initial.json", g2_export(phi_initial));
  write_json(out_dir / "phi_final.json", g2_export(phi_final));
  Json& res = out.results;
  res["command"] = "g2";
  res["config"] = to_json(cfg);
  res["config_hash"] = config_hash(cfg);
  res["run"] = run_summary(fo.traj);
  res["closedness"] = {{"initial", check_closed(phi_initial)}, {"final", check_closed(phi_final)}};
  res["torsion"] = {{"initial_sup_H_norm2", tor0.sup_H_norm2},
                    {"final_sup_H_norm2", tor1.sup_H_norm2},
                    {"tolerance", tol2},
                    {"torsion_free", out.passed}};
  Json files = write_trajectory(fo.traj, out_dir);
  files["phi_initial"] = "phi_initial.json";
  files["phi_final"] = "phi_final.json";
  res["files"] = files;
  res["passed"] = out.passed;
  write_json(out_dir / "results.json", res);
  return out;
}

}  // namespace smcf
