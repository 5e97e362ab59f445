#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taperspec/stats.hpp"  // normality_diagnostics

namespace taperspec {

enum class ExperimentKind {
  simulate,
  periodogram,
  estimate_functional,
  whittle,
  gof,
  trace_experiment,
  fejer,
  robustness,
  qf_distribution,
};

/// CLI name, e.g. "estimate-functional".
std::string_view kind_name(ExperimentKind kind);
/// ConfigError for unknown names.
ExperimentKind parse_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::simulate;
  std::string id;  // defaults to the kind name
  std::string model = "ar1{theta=0.5}";
  std::string driver = "gaussian";
  std::vector<std::string> tapers{"tukey"};
  std::vector<std::size_t> T{1024};
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  std::string out;      // prefix for <out>.csv and <out>.json; empty writes JSON to stdout
  bool check = false;
  bool serial = false;  // use the serial reference replication loop
  std::map<std::string, std::string> options;  // kind-specific
  std::map<std::string, double> thresholds;    // [check] section

  std::string option(const std::string& key, const std::string& fallback) const;
  double option_double(const std::string& key, double fallback) const;
  std::size_t option_size(const std::string& key, std::size_t fallback) const;
};

/// Read an INI file with sections [experiment], [options] and [check]. Unknown sections,
/// keys, options and check names, and malformed values, raise ConfigError naming the file,
/// line and field.
ExperimentConfig load_config(const std::string& path);

/// Set one [experiment] field from text ("T" takes a comma list, so does "taper").
void set_field(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Schema check: R >= 1, every T >= 8, known options and check names for the kind,
/// parseable model, driver and tapers. ConfigError otherwise.
void validate(const ExperimentConfig& config);

/// Thresholds used by --check when the configuration has no [check] section.
std::map<std::string, double> default_thresholds(const ExperimentConfig& config);

/// Parse "64,128,256".
std::vector<std::size_t> parse_size_list(std::string_view text);

/// One CSV line, or one aggregate record in the JSON. `rep` is empty for aggregates and
/// deterministic rows.
struct ReportRow {
  std::string experiment;
  std::string taper;
  std::size_t T = 0;
  std::optional<std::size_t> rep;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, double>> se;  // Monte Carlo standard errors

  double metric(std::string_view name) const;
};

struct CheckOutcome {
  std::string name;
  std::string scope;  // which aggregate the check looked at
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;        // per replication (or per T for deterministic kinds)
  std::vector<ReportRow> aggregates;  // carry R in their metrics
  std::vector<CheckOutcome> checks;   // filled when config.check is set
  std::vector<std::string> notes;     // kind-specific remarks copied into the JSON

  bool passed() const;
};

/// Run the experiment. Deterministic in (config, seed) and independent of the thread count.
RunReport run(const ExperimentConfig& config);

/// RFC 4180: header row, CRLF line ends, floats with 17 significant digits.
void write_csv(const RunReport& report, std::ostream& out);
/// Aggregate JSON with stable key order and the resolved configuration embedded.
void write_json(const RunReport& report, std::ostream& out);

/// Run, write <out>.csv / <out>.json (or JSON to `out` when no prefix), print check lines to
/// `log`. Returns 0, or 2 when config.check is set and a threshold fails.
int execute(const ExperimentConfig& config, std::ostream& out, std::ostream& log);

}  // namespace taperspec
