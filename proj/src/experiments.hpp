#pragma once

// Internal: one runner per experiment kind. Each fills rows and aggregates; the checks are
// applied afterwards by the harness from the [check] thresholds.

#include <string>
#include <vector>

#include "taperspec/harness.hpp"

namespace taperspec::detail {

struct KindSchema {
  ExperimentKind kind;
  std::vector<std::string> options;
  std::vector<std::string> check_metrics;  // thresholds are <metric>_min / <metric>_max
};

const std::vector<KindSchema>& kind_schemas();
const KindSchema& schema_for(ExperimentKind kind);

void run_simulate(const ExperimentConfig& c, RunReport& out);
void run_periodogram(const ExperimentConfig& c, RunReport& out);
void run_estimate_functional(const ExperimentConfig& c, RunReport& out);
void run_whittle(const ExperimentConfig& c, RunReport& out);
void run_gof(const ExperimentConfig& c, RunReport& out);
void run_trace_experiment(const ExperimentConfig& c, RunReport& out);
void run_fejer(const ExperimentConfig& c, RunReport& out);
void run_robustness(const ExperimentConfig& c, RunReport& out);
void run_qf_distribution(const ExperimentConfig& c, RunReport& out);

}  // namespace taperspec::detail
