#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpool/allocator.hpp"
#include "dpool/workload.hpp"

namespace dpool {

struct ResourceUse {
    std::int64_t used = 0;
    std::int64_t installed = 0;
    double ratio = 0.0;  // used / installed, 0 when nothing is installed
};

struct UtilizationReport {
    ResourceUse cores, memory, gpu, fpga;
};

/// Demand of the placed requests over the capacity of every node in the
/// deployment, active or not, pooled or standalone.
[[nodiscard]] UtilizationReport utilization(const Solution& solution, const Problem& problem);
/// Same figures straight from a request list assumed fully placed.
[[nodiscard]] UtilizationReport utilization(const std::vector<Request>& placed, const Deployment& deployment);

/// Unit-priced full capacity of the active nodes.
[[nodiscard]] std::int64_t total_cost(const Solution& solution, const Deployment& deployment,
                                      const UnitCosts& costs = {});

enum class SolverKind { Exact, Greedy };

struct SaturationResult {
    int n_star = 0;
    std::optional<Solution> solution;  // for the first n_star requests
    UtilizationReport utilization;
    bool optimal = false;    // solution proven lexicographically optimal
    bool uncertain = false;  // some prefix hit the budget and was counted infeasible
    int probes = 0;          // prefix lengths tested
};

/// Largest prefix of the seeded workload (spec.count requests) that the
/// deployment accommodates, by binary search over prefix length. With
/// `optimize`, the returned solution is re-solved to optimality.
[[nodiscard]] SaturationResult saturation_capacity(const Deployment& deployment, const WorkloadSpec& spec,
                                                   SolverKind solver, const SolveLimits& limits,
                                                   const ObjectiveWeights& weights = {}, bool optimize = false);

struct StatSummary {
    double mean = 0.0;
    double ci_half_width = 0.0;
    int runs = 0;
};

/// Mean with a two-sided Student's t confidence half-width (df = n - 1).
/// Supported confidence levels: 0, 0.90, 0.95, 0.99. Throws
/// std::domain_error for fewer than two values, std::invalid_argument for an
/// unsupported level.
[[nodiscard]] StatSummary summarize(const std::vector<double>& values, double confidence = 0.95);

/// Two-sided critical value t_{(1+c)/2, df}; df above 120 uses the normal limit.
[[nodiscard]] double t_critical(int df, double confidence = 0.95);

}  // namespace dpool
