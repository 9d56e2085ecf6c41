// Command-line front end. Links the C interface only.

#include "smcf.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2 };

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::string resume;
};

int report_error(const char* stage, smcf_status s) {
  std::fprintf(stderr, "smcf: %s failed (%s): %s\n", stage, smcf_status_name(s), smcf_last_error());
  return s == SMCF_ERR_CONFIG || s == SMCF_ERR_DIMENSION ? kConfig : kFail;
}

int execute(const std::string& command, const Options& opt) {
  smcf_config* cfg = nullptr;
  smcf_status s = smcf_config_load(opt.config.c_str(), &cfg);
  if (s != SMCF_OK) {
    report_error("config", s);
    return kConfig;
  }
  for (const auto& o : opt.overrides) {
    s = smcf_config_override(cfg, o.c_str());
    if (s != SMCF_OK) {
      report_error("override", s);
      smcf_config_free(cfg);
      return kConfig;
    }
  }

  const std::string out = opt.out.empty() ? smcf_config_output_dir(cfg) : opt.out;

  int passed = 0;
  s = smcf_experiment(cfg, command.c_str(), out.c_str(),
                      opt.resume.empty() ? nullptr : opt.resume.c_str(), &passed, nullptr);
  smcf_config_free(cfg);
  if (s != SMCF_OK) return report_error(command.c_str(), s);
  std::printf("%s: %s (%s/results.json)\n", command.c_str(), passed ? "PASS" : "FAIL", out.c_str());
  return passed ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphical spacelike mean curvature flow in R^{n,m}"};
  app.set_version_flag("--version", std::string(smcf_version()));
  app.require_subcommand(1);

  Options opt;
  const char* about[][2] = {
      {"run", "integrate the configured flow and write diagnostics and snapshots"},
      {"verify", "run and evaluate the estimate checks"},
      {"oracle", "exact-solution residual and refinement study"},
      {"renorm", "flow with the rescaled self-expander residual"},
      {"g2", "flow a (3,3) graph and export the associated G2-structures"},
  };
  for (const auto& [name, text] : about) {
    CLI::App* sub = app.add_subcommand(name, text);
    sub->add_option("--config", opt.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (default: output_dir of the config)");
    sub->add_option("--override", opt.overrides, "dotted-path assignment key=value");
    if (std::string(name) == "run" || std::string(name) == "verify")
      sub->add_option("--resume", opt.resume, "continue from a snapshot file")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }
  return execute(app.get_subcommands().front()->get_name(), opt);
}
