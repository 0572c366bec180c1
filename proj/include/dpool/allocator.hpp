#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpool/model.hpp"
#include "dpool/poolcfg.hpp"

namespace dpool {

/// Resources one request draws: a host (cores plus local memory), optional
/// remote memory slices, and at most one accelerator provider. The provider
/// is either the host itself (integrated accelerator) or one GPU/FPGA node.
struct Placement {
    int request_id = 0;
    int host = 0;
    int local_mem = 0;
    std::map<int, int> remote_mem;  // memory node id -> GB
    std::optional<int> accel_node;
    int accel_units = 0;

    friend bool operator==(const Placement&, const Placement&) = default;
};

/// Lexicographic objective: penalty first, then weighted active capacity.
struct Objective {
    std::int64_t total_penalty = 0;
    std::int64_t weighted_usage = 0;

    friend auto operator<=>(const Objective&, const Objective&) = default;
};

struct Solution {
    std::vector<Placement> placements;  // one per request, in request order
    std::vector<int> active_nodes;      // ascending node ids
    Objective objective;

    friend bool operator==(const Solution&, const Solution&) = default;
};

struct SolveLimits {
    double time_budget = 600.0;              // seconds
    std::int64_t node_budget = 200'000'000;  // search nodes across all phases
    bool optimality_required = true;         // false: stop at the first feasible solution
};

enum class SolveStatus { Optimal, Feasible, Infeasible, BudgetExceeded };

struct SolveStats {
    std::int64_t search_nodes = 0;
    std::int64_t configurations = 0;  // active-set candidates examined
    double seconds = 0.0;
};

/// Result of a solve. `solution` is set for Optimal and Feasible, and for
/// BudgetExceeded when an incumbent exists.
struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    std::optional<Solution> solution;
    SolveStats stats;
};

[[nodiscard]] std::string_view to_string(SolveStatus s);

/// Raised by build_problem when a request can never be placed.
class InfeasibleByConstruction : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Allocation scope: a pool, or a single standalone server.
struct Group {
    std::optional<int> pool;
    PoolClass placement_class = PoolClass::Uniform;
    std::vector<int> hosts;   // indexes into Problem::hosts()
    std::vector<int> accels;  // indexes into Problem::accels()
    std::vector<int> mems;    // indexes into Problem::mems()
    int mem_total = 0;
};

struct HostSlot {
    int node = 0;
    int group = 0;
    int cores = 0;
    int local_mem = 0;
    AccelType integrated = AccelType::None;
    int integrated_units = 0;
    std::int64_t weight = 0;
    int sym = 0;  // hosts sharing `sym` are interchangeable
};

struct AccelSlot {
    int node = 0;
    int group = 0;
    AccelType type = AccelType::Gpu;
    int units = 0;
    std::int64_t weight = 0;
    int sym = 0;
};

struct MemSlot {
    int node = 0;
    int group = 0;
    int capacity = 0;
    std::int64_t weight = 0;
};

/// Immutable allocation instance: deployment, requests, and weights, plus
/// the derived slot tables the solvers work on.
class Problem {
public:
    Problem(Deployment deployment, std::vector<Request> requests, ObjectiveWeights weights);

    [[nodiscard]] const Deployment& deployment() const { return deployment_; }
    [[nodiscard]] const std::vector<Request>& requests() const { return requests_; }
    [[nodiscard]] const ObjectiveWeights& weights() const { return weights_; }

    [[nodiscard]] const std::vector<Group>& groups() const { return groups_; }
    [[nodiscard]] const std::vector<HostSlot>& hosts() const { return hosts_; }
    [[nodiscard]] const std::vector<AccelSlot>& accels() const { return accels_; }
    [[nodiscard]] const std::vector<MemSlot>& mems() const { return mems_; }
    [[nodiscard]] int sym_classes() const { return sym_classes_; }

    /// Penalty of hosting request index `r` in group `g`.
    [[nodiscard]] int penalty(int r, int g) const { return penalty_[static_cast<std::size_t>(r * group_count() + g)]; }
    [[nodiscard]] int group_count() const { return static_cast<int>(groups_.size()); }
    /// Group of the host-capable node `node_id`, or -1.
    [[nodiscard]] int group_of_host(int node_id) const;
    /// Request index of `request_id`, or -1.
    [[nodiscard]] int request_index(int request_id) const;

    /// Minimum weight of memory nodes in `g` covering `residual` GB, or -1 if
    /// the group cannot supply that much.
    [[nodiscard]] std::int64_t memory_cost(int g, int residual) const;
    /// Memory slot indexes realizing memory_cost (ascending).
    [[nodiscard]] std::vector<int> memory_cover(int g, int residual) const;

private:
    Deployment deployment_;
    std::vector<Request> requests_;
    ObjectiveWeights weights_;
    std::vector<Group> groups_;
    std::vector<HostSlot> hosts_;
    std::vector<AccelSlot> accels_;
    std::vector<MemSlot> mems_;
    std::vector<int> penalty_;
    std::vector<int> host_group_by_node_;
    std::map<int, int> request_index_;
    int sym_classes_ = 0;
    // Per group: best[s] = min weight of a memory-node subset with capacity
    // at least s; best_set[s] indexes the reaching subset in sets.
    std::vector<std::vector<std::int64_t>> mem_best_;
    std::vector<std::vector<std::uint32_t>> mem_best_set_;
    std::vector<std::vector<std::uint64_t>> mem_sets_;
};

/// Throws InfeasibleByConstruction if a request needs more cores than any
/// host offers, std::invalid_argument for invalid or duplicate requests.
[[nodiscard]] Problem build_problem(const Deployment& deployment, std::vector<Request> requests,
                                    const ObjectiveWeights& weights = {});

/// Lexicographically optimal allocation: minimum total penalty, then minimum
/// weighted capacity of active nodes at that penalty.
[[nodiscard]] SolveResult solve_exact(const Problem& problem, const SolveLimits& limits = {});

/// Best-fit-decreasing heuristic. Status is Feasible or Infeasible, never
/// Optimal.
[[nodiscard]] SolveResult solve_greedy(const Problem& problem);

struct Violation {
    std::string code;  // e.g. "same-pool", "local-threshold", "capacity-cores"
    std::string detail;
};

/// Every violated constraint of `solution` against `problem`; empty when the
/// solution is valid.
[[nodiscard]] std::vector<Violation> validate(const Solution& solution, const Problem& problem);

/// Active node set and objective implied by a set of placements.
[[nodiscard]] std::vector<int> derive_active_nodes(const std::vector<Placement>& placements);
[[nodiscard]] Objective evaluate_objective(const std::vector<Placement>& placements, const Problem& problem);

/// The lexicographic model as two CPLEX-LP documents. Phase 1 minimizes the
/// total penalty; phase 2 minimizes weighted active capacity subject to
/// `penalty <= penalty_cap` (non-binding when no cap is given).
struct LpExport {
    std::string phase1;
    std::string phase2;
};
[[nodiscard]] LpExport export_lp(const Problem& problem, std::optional<std::int64_t> penalty_cap = std::nullopt);

/// Text form:
///   objective <penalty> <weighted>
///   active <id> <id> ...
///   placement <request> host <id> local <gb> remote <id>:<gb>,...|- accel <id>|- <units>
void write_solution(std::ostream& out, const Solution& s);
[[nodiscard]] std::string solution_to_string(const Solution& s);
[[nodiscard]] Solution read_solution(std::istream& in);

}  // namespace dpool
