#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpool/allocator.hpp"
#include "dpool/metrics.hpp"
#include "dpool/poolcfg.hpp"
#include "dpool/workload.hpp"

namespace dpool {

struct Condition {
    Policy policy = Policy::C1;
    ServerMode mode = ServerMode::Separate;

    friend bool operator==(const Condition&, const Condition&) = default;
};

[[nodiscard]] std::vector<Condition> all_conditions();  // C1_S, C1_M, C2_S, C2_M, C3_S, C3_M
[[nodiscard]] std::optional<Condition> parse_condition(std::string_view label);

enum class ExperimentKind { FixedCost, Saturation };

[[nodiscard]] std::string to_string(ExperimentKind k);
[[nodiscard]] std::optional<ExperimentKind> parse_experiment_kind(std::string_view s);

struct ExperimentConfig {
    std::vector<Condition> conditions = all_conditions();
    int runs = 11;
    std::uint64_t base_seed = 1;
    ExperimentKind kind = ExperimentKind::FixedCost;
    int request_count = 50;      // FixedCost workload size
    int saturation_start = 100;  // Saturation upper bound on the prefix length
    bool optimize_saturation = false;
    SolverKind solver = SolverKind::Exact;
    SolveLimits limits;
    double confidence = 0.95;
    std::string output_dir = "results";

    ObjectiveWeights weights;
    UnitCosts costs;
    NodeCatalog catalog;
    std::map<Policy, PolicyLayout> layouts;  // overrides of default_layout
    WorkloadSpec workload;                   // count and seed are set per run
};

/// Raised for malformed configuration documents; the message starts with
/// "<source>:<line>:<column>:" when the position is known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// YAML document; every key is optional and unknown keys are rejected.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Deployment of one condition with the config's catalog and layouts.
[[nodiscard]] Deployment build_condition(const ExperimentConfig& config, const Condition& c);

struct RunRecord {
    Condition condition;
    int run = 0;
    std::uint64_t seed = 0;
    std::string status;  // optimal, feasible, saturated, unsaturated, uncertain, budget, infeasible, invalid
    bool ok = false;     // counted in the summary
    bool failed = false; // surfaces in the exit status
    int requests = 0;    // workload size, or n* for saturation
    UtilizationReport utilization;
    std::int64_t penalty = 0;
    std::int64_t weighted_usage = 0;
    std::int64_t cost = 0;
    double seconds = 0.0;  // reported to callers only, never written to artifacts
};

struct Estimate {
    double mean = 0.0;
    double ci = 0.0;
};

struct ConditionSummary {
    Condition condition;
    int runs = 0;  // runs counted
    int failed = 0;
    Estimate requests, cores, memory, gpu, fpga, cost;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::FixedCost;
    std::uint64_t base_seed = 0;
    double confidence = 0.95;
    std::vector<RunRecord> runs;  // condition-major, then run index
    std::vector<ConditionSummary> summary;
    int failed_runs = 0;
};

using RunObserver = std::function<void(const RunRecord&)>;

/// Every condition x run, seed = base_seed + run index for all conditions.
/// Each solution is checked with validate(); a failing one is recorded as
/// "invalid".
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& config, const RunObserver& observer = {});

/// Summary rows from run records, in the order conditions first appear.
[[nodiscard]] std::vector<ConditionSummary> summarize_runs(const std::vector<RunRecord>& runs, double confidence);

void write_runs_csv(std::ostream& out, const ExperimentReport& report);
void write_summary_json(std::ostream& out, const ExperimentReport& report);
/// Tab-separated grouped-bar data: condition, then mean and ci columns.
void write_utilization_plot(std::ostream& out, const ExperimentReport& report);
void write_cost_plot(std::ostream& out, const ExperimentReport& report);

/// runs.csv, summary.json, utilization-by-condition.tsv and
/// cost-by-condition.tsv under `dir` (created if missing).
void emit_artifacts(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace dpool
