// taperspec: seeded Monte Carlo experiments on tapered spectral statistics.
//
//   taperspec whittle --model 'ar1{theta=0.5}' --taper tukey --T 4096 --reps 200 --seed 7
//   taperspec run --config acceptance/06_whittle.conf --check

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taperspec/errors.hpp"
#include "taperspec/harness.hpp"

namespace {

using taperspec::ExperimentConfig;
using taperspec::ExperimentKind;

struct Common {
  std::string config;
  std::map<std::string, std::string> fields;  // [experiment] overrides
  std::map<std::string, std::string> options;  // [options] overrides
  std::vector<std::string> set, thresholds;
  bool check = false;
};

struct Command {
  CLI::App* app = nullptr;
  std::optional<ExperimentKind> kind;  // empty for `run`
  Common common;
};

void add_common(Command& cmd) {
  auto* app = cmd.app;
  auto& c = cmd.common;
  app->add_option("--config", c.config, "INI file; flags override its values");
  for (const char* name : {"model", "driver", "taper", "T", "reps", "seed", "out", "id"}) {
    const std::string flag = std::string("--") + name;
    app->add_option_function<std::string>(flag, [&c, name](const std::string& v) { c.fields[name] = v; });
  }
  app->add_flag_function("--serial", [&c](std::int64_t) { c.fields["serial"] = "true"; },
                         "Serial reference replication loop");
  app->add_flag("--check", c.check, "Evaluate thresholds; exit 2 when one fails");
  app->add_option("--set", c.set, "Kind-specific option key=value (repeatable)");
  app->add_option("--threshold", c.thresholds, "Check metric_min=value or metric_max=value (repeatable)");
}

void add_kind_option(Command& cmd, const std::string& flag, const std::string& key, const std::string& help) {
  auto& opts = cmd.common.options;
  cmd.app->add_option_function<std::string>("--" + flag, [&opts, key](const std::string& v) { opts[key] = v; },
                                            help);
}

std::pair<std::string, std::string> split_pair(const std::string& s, const char* what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw taperspec::ConfigError(std::string(what) + ": expected key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

ExperimentConfig resolve(const Command& cmd) {
  const auto& c = cmd.common;
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    cfg = taperspec::load_config(c.config);
    if (cmd.kind && cfg.kind != *cmd.kind)
      throw taperspec::ConfigError(c.config + ": kind '" + std::string(taperspec::kind_name(cfg.kind)) +
                                   "' does not match the subcommand");
  } else if (cmd.kind) {
    cfg.kind = *cmd.kind;
  } else {
    throw taperspec::ConfigError("run: --config is required");
  }
  for (const auto& [k, v] : c.fields) {
    try {
      taperspec::set_field(cfg, k, v);
    } catch (const taperspec::ConfigError& e) {
      throw taperspec::ConfigError("--" + k + ": " + e.what());
    }
  }
  for (const auto& [k, v] : c.options) cfg.options[k] = v;
  for (const auto& s : c.set) {
    const auto [k, v] = split_pair(s, "--set");
    cfg.options[k] = v;
  }
  for (const auto& s : c.thresholds) {
    const auto [k, v] = split_pair(s, "--threshold");
    try {
      cfg.thresholds[k] = std::stod(v);
    } catch (const std::exception&) {
      throw taperspec::ConfigError("--threshold " + k + ": not a number");
    }
  }
  cfg.check = cfg.check || c.check;
  taperspec::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tapered-data spectral inference experiments"};
  app.require_subcommand(1);
  std::vector<Command> cmds;
  cmds.reserve(10);

  auto add = [&](const char* name, std::optional<ExperimentKind> kind, const char* help) -> Command& {
    cmds.push_back(Command{app.add_subcommand(name, help), kind, {}});
    add_common(cmds.back());
    return cmds.back();
  };

  add("simulate", ExperimentKind::simulate, "Simulate series; CSV columns t, x");
  auto& pg = add("periodogram", ExperimentKind::periodogram, "Tapered periodogram; CSV columns lambda, value");
  add_kind_option(pg, "oversample", "oversample", "Grid oversampling factor (1, 2, 4, 8)");
  add_kind_option(pg, "shifted", "shifted", "true for the half-step shifted grid");

  auto& ef = add("estimate-functional", ExperimentKind::estimate_functional,
                 "Plug-in functional J = int I g: variance and normality against the limit");
  add_kind_option(ef, "g", "g", "Generating function: cos:u, ind:mu, one");
  add_kind_option(ef, "oversample", "oversample", "Grid oversampling factor");

  auto& wh = add("whittle", ExperimentKind::whittle, "Tapered Whittle estimation");
  add_kind_option(wh, "weight", "weight", "none | cauchy | band:c");
  add_kind_option(wh, "oversample", "oversample", "Grid oversampling factor");

  auto& gf = add("gof", ExperimentKind::gof, "Goodness-of-fit tests");
  add_kind_option(gf, "mode", "mode", "simple | composite");
  add_kind_option(gf, "basis", "basis", "cosine:m | ar-example[:m]");
  add_kind_option(gf, "alpha", "alpha", "Level");
  add_kind_option(gf, "alternative", "alternative", "Model spec generating data for the power estimate");
  add_kind_option(gf, "mixture-draws", "mixture_draws", "Monte Carlo draws for mixture p-values");

  auto& tr = add("trace-experiment", ExperimentKind::trace_experiment, "Toeplitz trace approximation; CSV T, S, M, Delta");
  add_kind_option(tr, "pair", "pair", "ar1xcos");
  add_kind_option(tr, "g", "g", "Second generating function");
  add_kind_option(tr, "exponents", "exponents", "Taper exponents a,b");

  auto& fj = add("fejer", ExperimentKind::fejer, "Fejer kernel normalization, concentration and smoothing error");
  add_kind_option(fj, "delta", "delta", "Tail cutoff");
  add_kind_option(fj, "g", "g", "Generating function for the smoothing error");
  add_kind_option(fj, "delta2-T", "delta2_T", "Length for the smoothing error");

  auto& rb = add("robustness", ExperimentKind::robustness, "Paired trend-contamination experiment");
  add_kind_option(rb, "trend", "trend", "zero | power:c,beta | power-unchecked:c,beta");
  add_kind_option(rb, "target", "target", "functional | whittle | both");
  add_kind_option(rb, "g", "g", "Generating function for the functional target");

  auto& qf = add("qf-distribution", ExperimentKind::qf_distribution, "Quadratic-form law against the trace cumulants");
  add_kind_option(qf, "g", "g", "Generating function");

  add("run", std::nullopt, "Run an experiment file (kind taken from the file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (const auto& cmd : cmds) {
    if (!cmd.app->parsed()) continue;
    try {
      const auto cfg = resolve(cmd);
      return taperspec::execute(cfg, std::cout, std::cerr);
    } catch (const taperspec::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    } catch (const taperspec::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
