#include "taperspec/harness.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "experiments.hpp"
#include "taperspec/errors.hpp"
#include "taperspec/functionals.hpp"
#include "taperspec/models.hpp"
#include "taperspec/taper.hpp"

namespace taperspec {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::periodogram, "periodogram"},
    {ExperimentKind::estimate_functional, "estimate-functional"},
    {ExperimentKind::whittle, "whittle"},
    {ExperimentKind::gof, "gof"},
    {ExperimentKind::trace_experiment, "trace-experiment"},
    {ExperimentKind::fejer, "fejer"},
    {ExperimentKind::robustness, "robustness"},
    {ExperimentKind::qf_distribution, "qf-distribution"},
};

const std::set<std::string> kExperimentKeys = {"kind",   "id",   "model", "driver", "taper",
                                               "T",      "reps", "seed",  "out",    "serial"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class N>
bool read_number(std::string_view s, N& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(std::string(text.substr(start, pos - start))));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Line of `key` inside `[section]`, for diagnostics; 0 when not found.
std::size_t locate(const std::string& path, const std::string& section, const std::string& key) {
  std::ifstream in(path);
  std::string line, current;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (current == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

[[noreturn]] void fail_at(const std::string& path, const std::string& section, const std::string& key,
                          const std::string& what) {
  const auto line = locate(path, section, key);
  std::ostringstream os;
  os << path << ":" << line << ": [" << section << "] " << key << ": " << what;
  throw ConfigError(os.str());
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

ojson number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ojson metrics_json(const std::vector<std::pair<std::string, double>>& m) {
  ojson o = ojson::object();
  for (const auto& [k, v] : m) o[k] = number(v);
  return o;
}

void apply_checks(RunReport& report) {
  for (const auto& [key, threshold] : report.config.thresholds) {
    const bool is_min = key.size() > 4 && key.compare(key.size() - 4, 4, "_min") == 0;
    const std::string metric = key.substr(0, key.size() - 4);
    bool seen = false;
    for (const auto& a : report.aggregates) {
      const auto it = std::find_if(a.metrics.begin(), a.metrics.end(),
                                   [&](const auto& p) { return p.first == metric; });
      if (it == a.metrics.end()) continue;
      seen = true;
      CheckOutcome c;
      c.name = key;
      c.scope = a.experiment + " taper=" + a.taper + " T=" + std::to_string(a.T);
      c.value = it->second;
      c.threshold = threshold;
      c.pass = std::isfinite(c.value) && (is_min ? c.value >= threshold : c.value <= threshold);
      report.checks.push_back(c);
    }
    if (!seen) report.checks.push_back({key, "no aggregate reports " + metric, NAN, threshold, false});
  }
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  for (const auto& [k, n] : kKindNames)
    if (k == kind) return n;
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

std::string ExperimentConfig::option(const std::string& key, const std::string& fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

double ExperimentConfig::option_double(const std::string& key, double fallback) const {
  const auto it = options.find(key);
  if (it == options.end()) return fallback;
  double v = 0.0;
  if (!read_number(it->second, v)) throw ConfigError(key + ": not a number: '" + it->second + "'");
  return v;
}

std::size_t ExperimentConfig::option_size(const std::string& key, std::size_t fallback) const {
  const auto it = options.find(key);
  if (it == options.end()) return fallback;
  std::size_t v = 0;
  if (!read_number(it->second, v))
    throw ConfigError(key + ": not a nonnegative integer: '" + it->second + "'");
  return v;
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (const auto& item : split(text, ',')) {
    std::size_t v = 0;
    if (item.empty() || !read_number(item, v)) throw ConfigError("not an integer list: '" + std::string(text) + "'");
    out.push_back(v);
  }
  return out;
}

void set_field(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const auto value = trim(raw);
  if (key == "kind") {
    c.kind = parse_kind(value);
  } else if (key == "id") {
    c.id = value;
  } else if (key == "model") {
    c.model = value;
  } else if (key == "driver") {
    c.driver = value;
  } else if (key == "taper") {
    c.tapers = split(value, ',');
  } else if (key == "T") {
    c.T = parse_size_list(value);
  } else if (key == "reps") {
    if (!read_number(value, c.reps)) throw ConfigError("reps: not an integer: '" + value + "'");
  } else if (key == "seed") {
    if (!read_number(value, c.seed)) throw ConfigError("seed: not an unsigned integer: '" + value + "'");
  } else if (key == "out") {
    c.out = value;
  } else if (key == "serial") {
    if (value != "true" && value != "false") throw ConfigError("serial: expected true|false");
    c.serial = value == "true";
  } else {
    throw ConfigError("unknown field '" + key + "'");
  }
}

ExperimentConfig load_config(const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.filename() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig c;
  bool has_kind = false;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) fail_at(path, "", section, "key outside a section");
    if (section != "experiment" && section != "options" && section != "check")
      fail_at(path, section, "", "unknown section (expected experiment, options, check)");
    for (const auto& [key, node] : body) {
      const auto value = node.get_value<std::string>();
      try {
        if (section == "experiment") {
          if (!kExperimentKeys.count(key)) throw ConfigError("unknown field");
          set_field(c, key, value);
          has_kind = has_kind || key == "kind";
        } else if (section == "options") {
          c.options[key] = trim(value);
        } else {
          double v = 0.0;
          if (!read_number(trim(value), v)) throw ConfigError("threshold is not a number");
          c.thresholds[key] = v;
        }
      } catch (const ConfigError& e) {
        fail_at(path, section, key, e.what());
      }
    }
  }
  if (!has_kind) throw ConfigError(path + ":0: [experiment] kind: missing");
  try {
    validate(c);
  } catch (const ConfigError& e) {
    // re-anchor the message on the offending field when it names one
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    const std::string field = msg.substr(0, colon);
    for (const char* section : {"experiment", "options", "check"})
      if (locate(path, section, field)) fail_at(path, section, field, msg.substr(colon + 2));
    throw ConfigError(path + ":0: " + msg);
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.reps < 1) throw ConfigError("reps: must be at least 1");
  if (c.T.empty()) throw ConfigError("T: empty ladder");
  for (auto t : c.T)
    if (t < 8) throw ConfigError("T: every length must be at least 8 (got " + std::to_string(t) + ")");
  if (c.tapers.empty()) throw ConfigError("taper: empty list");
  for (const auto& name : c.tapers) {
    try {
      (void)Taper::from_name(name);
    } catch (const Error& e) {
      throw ConfigError(std::string("taper: ") + e.what());
    }
  }
  try {
    (void)parse_model_spec(c.model);
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  try {
    (void)NoiseDriver::from_name(c.driver);
  } catch (const Error& e) {
    throw ConfigError(std::string("driver: ") + e.what());
  }
  const auto& schema = detail::schema_for(c.kind);
  for (const auto& [key, value] : c.options)
    if (std::find(schema.options.begin(), schema.options.end(), key) == schema.options.end())
      throw ConfigError(key + ": unknown option for " + std::string(kind_name(c.kind)));
  for (const char* key : {"alpha", "delta"}) (void)c.option_double(key, 0.0);
  for (const char* key : {"oversample", "mixture_draws", "delta2_T"}) (void)c.option_size(key, 0);
  for (const auto& [key, value] : c.thresholds) {
    const bool suffix = key.size() > 4 && (key.ends_with("_min") || key.ends_with("_max"));
    const auto metric = suffix ? key.substr(0, key.size() - 4) : key;
    if (!suffix || std::find(schema.check_metrics.begin(), schema.check_metrics.end(), metric) ==
                       schema.check_metrics.end())
      throw ConfigError(key + ": unknown check for " + std::string(kind_name(c.kind)));
  }
}

std::map<std::string, double> default_thresholds(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::estimate_functional:
      return {{"ratio_error_max", 0.10}, {"ks_pvalue_min", 0.01}};
    case ExperimentKind::whittle:
      return {{"var_ratio_min", 0.85}, {"var_ratio_max", 1.15}};
    case ExperimentKind::gof: {
      const double alpha = c.option_double("alpha", 0.05);
      return {{"size_min", alpha - 0.02}, {"size_max", alpha + 0.02}};
    }
    case ExperimentKind::trace_experiment:
      return {{"final_delta_max", 0.01}, {"min_delta_min", 1e-12}};
    case ExperimentKind::fejer:
      return {{"normalization_error_max", 1e-6}, {"tail_decreasing_min", 1.0}, {"sqrtT_delta2_max", 0.05}};
    case ExperimentKind::robustness:
      return {{"gap_nonincreasing_min", 1.0}, {"variance_ratio_min", 0.85}, {"variance_ratio_max", 1.15}};
    case ExperimentKind::qf_distribution:
      return {{"cumulant_z_max", 3.0}, {"ks_distance_max", 0.02}};
    case ExperimentKind::simulate:
    case ExperimentKind::periodogram:
      break;
  }
  return {};
}

double ReportRow::metric(std::string_view name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw ConfigError("row has no metric '" + std::string(name) + "'");
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.pass; });
}

RunReport run(const ExperimentConfig& config) {
  validate(config);
  RunReport report;
  report.config = config;
  if (report.config.id.empty()) report.config.id = std::string(kind_name(config.kind));
  if (report.config.check && report.config.thresholds.empty())
    report.config.thresholds = default_thresholds(report.config);
  const auto& c = report.config;
  switch (c.kind) {
    case ExperimentKind::simulate: detail::run_simulate(c, report); break;
    case ExperimentKind::periodogram: detail::run_periodogram(c, report); break;
    case ExperimentKind::estimate_functional: detail::run_estimate_functional(c, report); break;
    case ExperimentKind::whittle: detail::run_whittle(c, report); break;
    case ExperimentKind::gof: detail::run_gof(c, report); break;
    case ExperimentKind::trace_experiment: detail::run_trace_experiment(c, report); break;
    case ExperimentKind::fejer: detail::run_fejer(c, report); break;
    case ExperimentKind::robustness: detail::run_robustness(c, report); break;
    case ExperimentKind::qf_distribution: detail::run_qf_distribution(c, report); break;
  }
  if (c.check) apply_checks(report);
  return report;
}

void write_csv(const RunReport& report, std::ostream& out) {
  std::vector<std::string> names;
  for (const auto& r : report.rows)
    for (const auto& [k, v] : r.metrics)
      if (std::find(names.begin(), names.end(), k) == names.end()) names.push_back(k);
  out << "experiment,taper,T,rep,seed";
  for (const auto& n : names) out << ',' << csv_field(n);
  out << "\r\n";
  for (const auto& r : report.rows) {
    out << csv_field(r.experiment) << ',' << csv_field(r.taper) << ',' << r.T << ',';
    if (r.rep) out << *r.rep;
    out << ',' << report.config.seed;
    for (const auto& n : names) {
      out << ',';
      for (const auto& [k, v] : r.metrics)
        if (k == n) {
          out << fmt17(v);
          break;
        }
    }
    out << "\r\n";
  }
}

void write_json(const RunReport& report, std::ostream& out) {
  const auto& c = report.config;
  ojson cfg;
  cfg["kind"] = kind_name(c.kind);
  cfg["id"] = c.id;
  cfg["model"] = parse_model_spec(c.model).spec();
  cfg["driver"] = c.driver;
  cfg["taper"] = c.tapers;
  cfg["T"] = c.T;
  cfg["reps"] = c.reps;
  cfg["seed"] = c.seed;
  cfg["options"] = ojson::object();
  for (const auto& [k, v] : c.options) cfg["options"][k] = v;
  cfg["check"] = ojson::object();
  for (const auto& [k, v] : c.thresholds) cfg["check"][k] = v;

  ojson j;
  j["experiment"] = c.id;
  j["seed"] = c.seed;
  j["config"] = cfg;
  j["aggregates"] = ojson::array();
  for (const auto& a : report.aggregates) {
    ojson row;
    row["experiment"] = a.experiment;
    row["taper"] = a.taper;
    row["T"] = a.T;
    row["R"] = c.reps;
    row["metrics"] = metrics_json(a.metrics);
    row["se"] = metrics_json(a.se);
    j["aggregates"].push_back(row);
  }
  if (c.kind == ExperimentKind::whittle) {
    j["replications"] = ojson::array();
    for (const auto& r : report.rows) {
      ojson row;
      row["taper"] = r.taper;
      row["T"] = r.T;
      row["rep"] = r.rep.value_or(0);
      row["fit"] = metrics_json(r.metrics);
      j["replications"].push_back(row);
    }
  }
  if (!report.notes.empty()) j["notes"] = report.notes;
  if (c.check) {
    j["checks"] = ojson::array();
    for (const auto& k : report.checks)
      j["checks"].push_back(ojson{{"name", k.name},
                                  {"scope", k.scope},
                                  {"value", number(k.value)},
                                  {"threshold", k.threshold},
                                  {"pass", k.pass}});
    j["passed"] = report.passed();
  }
  out << j.dump(2) << "\n";
}

int execute(const ExperimentConfig& config, std::ostream& out, std::ostream& log) {
  const auto report = run(config);
  if (config.out.empty()) {
    write_json(report, out);
  } else {
    std::ofstream csv(config.out + ".csv", std::ios::binary);
    std::ofstream json(config.out + ".json", std::ios::binary);
    if (!csv || !json) throw ConfigError("out: cannot write to '" + config.out + "'");
    write_csv(report, csv);
    write_json(report, json);
  }
  for (const auto& k : report.checks)
    log << (k.pass ? "pass " : "FAIL ") << k.name << " [" << k.scope << "] value " << fmt17(k.value)
        << " threshold " << fmt17(k.threshold) << "\n";
  return config.check && !report.passed() ? 2 : 0;
}

}  // namespace taperspec
