#pragma once

// Internal machinery shared by the exact and greedy solvers.

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "dpool/allocator.hpp"

namespace dpool::detail {

constexpr int kNoAccel = -1;
constexpr int kIntegrated = -2;

/// Host slot and accelerator choice per request index. `accel` holds an
/// accelerator slot index, kIntegrated (host's own accelerator), or kNoAccel.
struct Assignment {
    std::vector<int> host;
    std::vector<int> accel;
};

/// Nodes a packing may use. Within each symmetry class the available
/// members always form a prefix in slot order.
struct Availability {
    std::vector<char> host;
    std::vector<char> accel;
    std::vector<int> mem_cap;  // per group, GB of usable memory nodes
};

[[nodiscard]] Availability full_availability(const Problem& p);

class Budget {
public:
    Budget(double seconds, std::int64_t nodes);

    /// Counts one search node; false once either limit is reached.
    bool spend();
    [[nodiscard]] bool exhausted() const { return exhausted_; }
    [[nodiscard]] std::int64_t nodes_used() const { return used_; }
    [[nodiscard]] double elapsed() const;

private:
    std::chrono::steady_clock::time_point start_;
    double seconds_;
    std::int64_t nodes_;
    std::int64_t used_ = 0;
    bool exhausted_ = false;
};

enum class Outcome { Feasible, Infeasible, Unknown };

struct PackResult {
    Outcome outcome = Outcome::Infeasible;
    Assignment assignment;
};

/// Per-request figures the searches read in their inner loops.
struct RequestInfo {
    int cores = 0;
    int memory = 0;
    int threshold = 0;
    int accel_type = 0;  // 0 none, 1 GPU, 2 FPGA
    int units = 0;
    int min_penalty = 0;  // over groups that could ever host it
    bool placeable = false;
};

/// Mutable occupancy of hosts, accelerators, and pool memory for one
/// partial assignment.
class PackState {
public:
    PackState(const Problem& p, const Availability& av);

    [[nodiscard]] const RequestInfo& info(int r) const { return info_[static_cast<std::size_t>(r)]; }
    [[nodiscard]] bool all_placeable() const;
    [[nodiscard]] int remaining_min_penalty() const { return rem_min_penalty_; }
    [[nodiscard]] int penalty_sum() const { return penalty_sum_; }
    [[nodiscard]] int assigned_count() const { return assigned_; }
    [[nodiscard]] long remaining_cores() const { return rem_cores_; }
    [[nodiscard]] long remaining_memory() const { return rem_mem_; }
    [[nodiscard]] long remaining_units(int type) const { return rem_units_[type]; }
    [[nodiscard]] int free_local(int h) const;
    [[nodiscard]] int free_remote(int g) const;
    [[nodiscard]] int free_integrated(int h) const;
    [[nodiscard]] int free_units(int a) const;
    [[nodiscard]] bool is_assigned(int r) const { return host_of_[static_cast<std::size_t>(r)] >= 0; }

    /// Host-level feasibility of placing r on h (cores, threshold, pool
    /// memory, penalty cap), ignoring the accelerator choice. With
    /// `symmetry`, an empty host is refused while an interchangeable
    /// earlier host is still empty.
    [[nodiscard]] bool host_fits(int r, int h, int penalty_cap, bool symmetry = true) const;
    /// Accelerator options for r hosted on h, appended to `out`.
    void accel_options(int r, int h, std::vector<int>& out) const;
    [[nodiscard]] bool has_accel_option(int r, int h) const;

    /// Weight newly activated by placing (r, h, a).
    [[nodiscard]] std::int64_t activation_cost(int r, int h, int a) const;
    [[nodiscard]] int free_cores(int h) const;
    /// Memory h could still hand out: its free local memory plus the free
    /// remote memory of its group.
    [[nodiscard]] int free_memory(int h) const;
    [[nodiscard]] bool host_active(int h) const { return count_[static_cast<std::size_t>(h)] > 0; }
    [[nodiscard]] bool accel_active(int a) const { return accel_used_[static_cast<std::size_t>(a)] > 0; }

    void apply(int r, int h, int a);
    void undo(int r);

    /// Aggregate necessary conditions on the unassigned requests.
    [[nodiscard]] bool aggregate_ok(int penalty_cap) const;

    [[nodiscard]] Assignment assignment() const { return Assignment{host_of_, accel_of_}; }

private:
    const Problem& p_;
    const Availability& av_;
    std::vector<RequestInfo> info_;
    std::vector<int> prev_host_sym_;
    std::vector<int> prev_accel_sym_;

    std::vector<int> cores_used_, thr_used_, mem_used_, count_, int_used_;
    std::vector<int> accel_used_;
    std::vector<int> group_res_;
    std::vector<int> host_of_, accel_of_;
    int penalty_sum_ = 0;
    int assigned_ = 0;

    long rem_cores_ = 0, rem_mem_ = 0, rem_thr_ = 0;
    long rem_units_[3] = {0, 0, 0};
    int rem_big_cores_ = 0;
    int rem_big_units_[3] = {0, 0, 0};
    int rem_min_penalty_ = 0;

    [[nodiscard]] int overflow(int h, int extra) const;
};

/// Depth-first search for any assignment within `av` whose total penalty is
/// at most `penalty_cap`. Branches on the most constrained request. Gives up
/// with Unknown after `node_limit` nodes or when `budget` runs out. Variant 0
/// tries hosts by (penalty, already active, leftover cores); other variants
/// by penalty, then a seed-dependent mix of leftover cores and memory.
[[nodiscard]] PackResult pack(const Problem& p, const Availability& av, int penalty_cap, Budget& budget,
                              std::int64_t node_limit = INT64_MAX, std::uint64_t variant = 0);

/// Best-fit decreasing within `av`: each request, in descending weighted
/// demand, goes to the option minimizing (penalty, newly activated weight,
/// leftover cores, node id).
[[nodiscard]] std::optional<Assignment> greedy_pack(const Problem& p, const Availability& av, int penalty_cap);

/// Randomized best fit for one fixed node set: request order perturbed by
/// `seed`, hosts scored by a seed-dependent mix of leftover cores and
/// leftover memory.
[[nodiscard]] std::optional<Assignment> random_greedy_pack(const Problem& p, const Availability& av,
                                                           int penalty_cap, std::uint64_t seed);

/// Local search over complete assignments that may exceed capacities,
/// minimizing weighted excess with relocations and swaps until it reaches
/// zero. Finds packings only; nullopt proves nothing.
[[nodiscard]] std::optional<Assignment> repair_pack(const Problem& p, const Availability& av, Budget& budget,
                                                    std::uint64_t seed, std::int64_t steps);

/// Turns host/accelerator choices into placements: thresholds first, then
/// the rest of each host's local memory, then the cheapest memory-node cover
/// per pool filled in request order.
[[nodiscard]] Solution realize(const Problem& p, const Assignment& a);

}  // namespace dpool::detail
