#pragma once

// Run configuration, serialization of states and diagnostics, and the
// experiment drivers behind the command-line subcommands.

#include "smcf/estimate_verifiers.hpp"
#include "smcf/flow_engine.hpp"
#include "smcf/g2_bridge.hpp"
#include "smcf/renormalized_flow.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace smcf {

using Json = nlohmann::ordered_json;

/// A named closed-form or analytic initial profile.
///   flat                 u = 0
///   grim_reaper          u = log cosh x1 + t     (n = m = 1 or tracked per axis 0)
///   hyperbolic_expander  u = sqrt(|x|^2 + 2n(t - birth))   (m = 1); params: birth
///   cosine               u^0 = amplitude sum_i cos(k pi (x_i - lo_i)/(hi_i - lo_i));
///                        params: amplitude, wavenumber
///   linear               u = slope^T x + offset + amplitude prod_i sin(pi (x_i - lo_i)/(hi_i - lo_i)) e_0;
///                        params: slope (n x m), offset (m), amplitude
struct NamedInitial {
  std::string name = "flat";
  std::map<std::string, Json> params;

  friend bool operator==(const NamedInitial&, const NamedInitial&) = default;
};

struct InlineInitial {
  std::vector<double> u;
  friend bool operator==(const InlineInitial&, const InlineInitial&) = default;
};

struct ConeInitial {
  std::vector<double> a;               ///< m
  std::vector<std::vector<double>> B;  ///< n rows of m
  double rho = 1.0;
  friend bool operator==(const ConeInitial&, const ConeInitial&) = default;
};

struct InitialSpec {
  std::variant<NamedInitial, InlineInitial, ConeInitial> data;
  double t0 = 0.0;
  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct QuasiSphereSpec {
  std::vector<double> center_x;
  std::vector<double> center_y;
  double R2 = 0.0;
  friend bool operator==(const QuasiSphereSpec&, const QuasiSphereSpec&) = default;
};

struct YangLiSpec {
  std::vector<double> xi;
  std::vector<double> eta;
  double K = 1.0;
  double Lambda = 0.0;
  friend bool operator==(const YangLiSpec&, const YangLiSpec&) = default;
};

using BarrierSpec = std::variant<QuasiSphereSpec, YangLiSpec>;

struct RenormSpec {
  bool enabled = false;
  std::optional<double> core_radius;
  double threshold = 1e-3;
  friend bool operator==(const RenormSpec&, const RenormSpec&) = default;
};

struct OracleSpec {
  std::vector<std::string> solutions{"grim_reaper", "hyperbolic_expander"};
  std::vector<double> h{1.0 / 64, 1.0 / 128, 1.0 / 256};
  std::vector<double> times{0.1, 0.25, 0.5, 1.0};
  /// Grim Reaper data lives on [-w, w]; expander data on [-1, 1].
  double reaper_half_width = 4.0;
  double order_target = 2.0;
  double order_tolerance = 0.2;
  friend bool operator==(const OracleSpec&, const OracleSpec&) = default;
};

struct RunConfig {
  int schema_version = 1;
  int n = 1;
  int m = 1;
  DomainSpec domain;
  InitialSpec initial;
  FlowConfig flow;
  std::vector<BarrierSpec> barriers;
  std::vector<std::string> checks;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  RenormSpec renorm;
  OracleSpec oracle;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates a configuration document. Unknown keys, a wrong
/// schema version, and invalid signature, domain or flow settings raise
/// ConfigError (DimensionError for malformed domains).
RunConfig parse_config(const Json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical document with every default materialized.
Json to_json(const RunConfig& cfg);

/// Sets a dotted path ("flow.t_end=2", "domain.resolution=[64]") in a raw
/// config document. The value is read as JSON when it parses, as a string
/// otherwise. Throws ConfigError for a malformed assignment.
void apply_override(Json& doc, const std::string& assignment);

/// FNV-1a hash of the canonical document, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// The initial GraphState described by the configuration.
GraphState build_initial_state(const RunConfig& cfg);

/// Closed-form solution named by the initial spec, evaluated at (x, t).
/// Throws ConfigError for names without a time-dependent closed form.
BoundaryFunction exact_solution(const RunConfig& cfg);

FlowMonitors build_monitors(const RunConfig& cfg);

// --- serialization ---

inline constexpr const char* kCsvHeader =
    "step,t,dt,sup_v2,sup_H2,t_sup_II2,max_displacement,min_barrier_margin,expander_residual";

void emit_csv(const Trajectory& traj, const std::filesystem::path& path);
std::string csv_string(const Trajectory& traj);

Json domain_to_json(const DomainSpec& d);
DomainSpec domain_from_json(const Json& j);

Json snapshot_to_json(const GraphState& s);
/// Throws IoError on a schema mismatch and DimensionError when the array
/// length disagrees with the domain.
GraphState snapshot_from_json(const Json& j);
void write_snapshot(const GraphState& s, const std::filesystem::path& path);
GraphState read_snapshot(const std::filesystem::path& path);

Json verdict_to_json(const VerdictReport& r);

// --- drivers ---

struct ExperimentOutcome {
  bool passed = true;
  Json results;
};

/// `run` / `verify`: integrate the configured flow (continuing from a
/// snapshot when given), evaluate the configured checks (verify: every
/// check that applies to the mode when none are listed), and write
/// diagnostics.csv, snapshots/ and results.json under out_dir.
ExperimentOutcome run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                 bool verify, const std::optional<std::filesystem::path>& resume = {});

struct OracleRow {
  std::string solution;
  double h = 0.0;
  double residual = 0.0;
  std::optional<double> order;
};

/// Discrete PDE residual u_t - g^ij(D_h u) D^2_h u of sampled exact
/// solutions at interior nodes, sup over the configured times.
std::vector<OracleRow> oracle_study(const OracleSpec& spec);
ExperimentOutcome run_oracle(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Flow with the rescaled residual recorded at snapshots; writes renorm.csv.
/// Passes once some snapshot up to t_end has residual below the threshold.
ExperimentOutcome run_renorm(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Flow of a (3, 3) graph; exports phi before and after as JSON and reports
/// closedness and torsion.
ExperimentOutcome run_g2(const RunConfig& cfg, const std::filesystem::path& out_dir);

Json g2_export(const G2Form& phi);

}  // namespace smcf
