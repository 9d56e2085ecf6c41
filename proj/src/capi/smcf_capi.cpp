#include "smcf.h"

#include "smcf/cli_io.hpp"
#include "smcf/errors.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <string>

struct smcf_config {
  smcf::Json doc;
  smcf::RunConfig cfg;
};

struct smcf_state {
  smcf::GraphState s;
};

struct smcf_trajectory {
  smcf::Trajectory traj;
};

struct smcf_report {
  smcf::VerdictReport r;
};

namespace {

thread_local std::string g_last_error;

smcf_status fail(smcf_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <class F>
smcf_status guarded(F&& f) noexcept {
  g_last_error.clear();
  try {
    f();
    return SMCF_OK;
  } catch (const smcf::ConfigError& e) {
    return fail(SMCF_ERR_CONFIG, e.what());
  } catch (const smcf::DimensionError& e) {
    return fail(SMCF_ERR_DIMENSION, e.what());
  } catch (const smcf::RangeError& e) {
    return fail(SMCF_ERR_RANGE, e.what());
  } catch (const smcf::PreconditionError& e) {
    return fail(SMCF_ERR_PRECONDITION, e.what());
  } catch (const smcf::SpacelikeViolation& e) {
    return fail(SMCF_ERR_SPACELIKE, e.what());
  } catch (const smcf::NumericalBlowup& e) {
    return fail(SMCF_ERR_BLOWUP, e.what());
  } catch (const smcf::IoError& e) {
    return fail(SMCF_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(SMCF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SMCF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SMCF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SMCF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SMCF_ERR_INTERNAL, "unknown error");
  }
}

#define SMCF_REQUIRE(cond) \
  do { \
    if (!(cond)) return fail(SMCF_ERR_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

smcf::AmbientVector ambient(const double* x, int n, int m) {
  if (n < 1 || m < 1) throw smcf::DimensionError("signature needs n >= 1 and m >= 1");
  return {std::vector<double>(x, x + n), std::vector<double>(x + n, x + n + m)};
}

}  // namespace

extern "C" {

const char* smcf_version(void) { return SMCF_VERSION_STRING; }

const char* smcf_last_error(void) { return g_last_error.c_str(); }

const char* smcf_status_name(smcf_status s) {
  switch (s) {
    case SMCF_OK: return "ok";
    case SMCF_ERR_CONFIG: return "config";
    case SMCF_ERR_DIMENSION: return "dimension";
    case SMCF_ERR_RANGE: return "range";
    case SMCF_ERR_PRECONDITION: return "precondition";
    case SMCF_ERR_SPACELIKE: return "spacelike";
    case SMCF_ERR_BLOWUP: return "blowup";
    case SMCF_ERR_IO: return "io";
    case SMCF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SMCF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void smcf_free_string(char* s) { std::free(s); }

smcf_status smcf_config_parse(const char* json_text, smcf_config** out) {
  SMCF_REQUIRE(json_text && out);
  *out = nullptr;
  return guarded([&] {
    smcf::Json doc;
    try {
      doc = smcf::Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw smcf::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    auto cfg = smcf::parse_config(doc);
    *out = new smcf_config{std::move(doc), std::move(cfg)};
  });
}

smcf_status smcf_config_load(const char* path, smcf_config** out) {
  SMCF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw smcf::ConfigError(std::string("cannot read config '") + path + "'");
    smcf::Json doc;
    try {
      doc = smcf::Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw smcf::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    auto cfg = smcf::parse_config(doc);
    *out = new smcf_config{std::move(doc), std::move(cfg)};
  });
}

smcf_status smcf_config_override(smcf_config* cfg, const char* assignment) {
  SMCF_REQUIRE(cfg && assignment);
  return guarded([&] {
    smcf::Json doc = cfg->doc;
    smcf::apply_override(doc, assignment);
    cfg->cfg = smcf::parse_config(doc);
    cfg->doc = std::move(doc);
  });
}

smcf_status smcf_config_to_json(const smcf_config* cfg, char** json_out) {
  SMCF_REQUIRE(cfg && json_out);
  return guarded([&] { *json_out = dup(smcf::to_json(cfg->cfg).dump(2)); });
}

smcf_status smcf_config_hash(const smcf_config* cfg, char** hash_out) {
  SMCF_REQUIRE(cfg && hash_out);
  return guarded([&] { *hash_out = dup(smcf::config_hash(cfg->cfg)); });
}

const char* smcf_config_output_dir(const smcf_config* cfg) {
  return cfg ? cfg->cfg.output_dir.c_str() : "";
}

void smcf_config_free(smcf_config* cfg) { delete cfg; }

smcf_status smcf_state_from_config(const smcf_config* cfg, smcf_state** out) {
  SMCF_REQUIRE(cfg && out);
  *out = nullptr;
  return guarded([&] { *out = new smcf_state{smcf::build_initial_state(cfg->cfg)}; });
}

smcf_status smcf_state_read(const char* path, smcf_state** out) {
  SMCF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new smcf_state{smcf::read_snapshot(path)}; });
}

smcf_status smcf_state_write(const smcf_state* s, const char* path) {
  SMCF_REQUIRE(s && path);
  return guarded([&] { smcf::write_snapshot(s->s, path); });
}

int smcf_state_n(const smcf_state* s) { return s ? s->s.domain.n() : 0; }
int smcf_state_m(const smcf_state* s) { return s ? s->s.m : 0; }
double smcf_state_t(const smcf_state* s) { return s ? s->s.t : 0.0; }
size_t smcf_state_size(const smcf_state* s) { return s ? s->s.u.size() : 0; }
const double* smcf_state_values(const smcf_state* s) { return s ? s->s.u.data() : nullptr; }
void smcf_state_free(smcf_state* s) { delete s; }

smcf_status smcf_run(const smcf_config* cfg, const smcf_state* initial, smcf_trajectory** out) {
  SMCF_REQUIRE(cfg && out);
  *out = nullptr;
  return guarded([&] {
    const smcf::GraphState init = initial ? initial->s : smcf::build_initial_state(cfg->cfg);
    const auto mon = smcf::build_monitors(cfg->cfg);
    smcf::Trajectory traj;
    if (cfg->cfg.flow.mode == smcf::FlowMode::Entire)
      traj = smcf::entire_solve(cfg->cfg.flow, init, mon).trajectory;
    else
      traj = smcf::run(cfg->cfg.flow, init, mon);
    *out = new smcf_trajectory{std::move(traj)};
  });
}

size_t smcf_trajectory_snapshot_count(const smcf_trajectory* tr) {
  return tr ? tr->traj.snapshots.size() : 0;
}

size_t smcf_trajectory_step_count(const smcf_trajectory* tr) {
  return tr ? tr->traj.diagnostics.size() : 0;
}

int smcf_trajectory_steady(const smcf_trajectory* tr) {
  return tr && tr->traj.steady_state_reached ? 1 : 0;
}

smcf_status smcf_trajectory_snapshot(const smcf_trajectory* tr, size_t index, smcf_state** out) {
  SMCF_REQUIRE(tr && out);
  *out = nullptr;
  if (index >= tr->traj.snapshots.size()) return fail(SMCF_ERR_RANGE, "snapshot index out of range");
  return guarded([&] { *out = new smcf_state{tr->traj.snapshots[index]}; });
}

smcf_status smcf_trajectory_write_csv(const smcf_trajectory* tr, const char* path) {
  SMCF_REQUIRE(tr && path);
  return guarded([&] { smcf::emit_csv(tr->traj, path); });
}

void smcf_trajectory_free(smcf_trajectory* tr) { delete tr; }

smcf_status smcf_verify(const smcf_trajectory* tr, const char* check, smcf_report** out) {
  SMCF_REQUIRE(tr && check && out);
  *out = nullptr;
  return guarded([&] { *out = new smcf_report{smcf::run_check(check, tr->traj)}; });
}

int smcf_report_pass(const smcf_report* r) { return r && r->r.pass ? 1 : 0; }
double smcf_report_worst_margin(const smcf_report* r) { return r ? r->r.worst_margin : 0.0; }
double smcf_report_worst_t(const smcf_report* r) { return r ? r->r.worst_t : 0.0; }
int64_t smcf_report_worst_node(const smcf_report* r) { return r ? r->r.worst_node : -1; }
double smcf_report_tolerance(const smcf_report* r) { return r ? r->r.tolerance : 0.0; }
void smcf_report_free(smcf_report* r) { delete r; }

smcf_status smcf_experiment(const smcf_config* cfg, const char* command, const char* out_dir,
                            const char* resume_snapshot, int* passed, char** results_json) {
  SMCF_REQUIRE(cfg && command && out_dir && passed);
  *passed = 0;
  if (results_json) *results_json = nullptr;
  return guarded([&] {
    const std::string cmd = command;
    const std::filesystem::path out = out_dir;
    std::optional<std::filesystem::path> resume;
    if (resume_snapshot) resume = resume_snapshot;
    smcf::ExperimentOutcome o;
    if (cmd == "run" || cmd == "verify")
      o = smcf::run_experiment(cfg->cfg, out, cmd == "verify", resume);
    else if (resume)
      throw std::invalid_argument("only run and verify can resume from a snapshot");
    else if (cmd == "oracle")
      o = smcf::run_oracle(cfg->cfg, out);
    else if (cmd == "renorm")
      o = smcf::run_renorm(cfg->cfg, out);
    else if (cmd == "g2")
      o = smcf::run_g2(cfg->cfg, out);
    else
      throw std::invalid_argument("unknown command '" + cmd + "'");
    *passed = o.passed ? 1 : 0;
    if (results_json) *results_json = dup(o.results.dump(2));
  });
}

smcf_status smcf_minkowski_ip(const double* x, const double* y, int n, int m, double* out) {
  SMCF_REQUIRE(x && y && out);
  return guarded([&] {
    *out = smcf::minkowski_ip(ambient(x, n, m), ambient(y, n, m), smcf::Signature(n, m));
  });
}

smcf_status smcf_causal_class(const double* x, int n, int m, smcf_causal* out) {
  SMCF_REQUIRE(x && out);
  return guarded([&] {
    switch (smcf::causal_class(ambient(x, n, m))) {
      case smcf::CausalClass::Spacelike: *out = SMCF_SPACELIKE; break;
      case smcf::CausalClass::Null: *out = SMCF_NULL; break;
      case smcf::CausalClass::Timelike: *out = SMCF_TIMELIKE; break;
    }
  });
}

}  // extern "C"
