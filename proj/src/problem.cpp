#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

#include "dpool/allocator.hpp"

namespace dpool {

namespace {

constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

AccelType integrated_type(const ResourceVector& cap) {
    if (cap.gpu > 0) return AccelType::Gpu;
    if (cap.fpga > 0) return AccelType::Fpga;
    return AccelType::None;
}

}  // namespace

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::BudgetExceeded: return "budget-exceeded";
    }
    return "?";
}

Problem::Problem(Deployment deployment, std::vector<Request> requests, ObjectiveWeights weights)
    : deployment_(std::move(deployment)), requests_(std::move(requests)), weights_(weights) {
    check_deployment(deployment_);
    if (weights_.cpu <= 0 || weights_.memory <= 0 || weights_.accel <= 0)
        throw std::invalid_argument("objective weights must be positive");

    for (std::size_t i = 0; i < requests_.size(); ++i) {
        const Request& r = requests_[i];
        if (!is_valid(r)) throw std::invalid_argument("request " + std::to_string(r.id) + " violates demand invariants");
        if (!request_index_.emplace(r.id, static_cast<int>(i)).second)
            throw std::invalid_argument("duplicate request id " + std::to_string(r.id));
    }

    // Pools first (group index == pool id), then one group per standalone server.
    for (const Pool& p : deployment_.pools) groups_.push_back(Group{p.id, p.pool_class, {}, {}, {}, 0});
    std::vector<int> standalone = deployment_.standalone_servers;
    std::sort(standalone.begin(), standalone.end());
    std::map<int, int> standalone_group;
    for (int id : standalone) {
        standalone_group[id] = static_cast<int>(groups_.size());
        groups_.push_back(Group{std::nullopt, deployment_.standalone_class(id), {}, {}, {}, 0});
    }

    // Interchangeable nodes share a symmetry class: same scope, role, capacity.
    // Kind is ignored, so a server matching a CPU node's capacity joins it.
    // Standalone servers are interchangeable across their singleton groups.
    std::map<std::tuple<int, int, int, int, int, int, int>, int> sym_ids;
    auto sym_of = [&](int scope, const Node& n, PoolClass cls) {
        const auto key = std::make_tuple(scope, static_cast<int>(is_host_capable(n.kind)), n.capacity.cores, n.capacity.memory,
                                         n.capacity.gpu, n.capacity.fpga, static_cast<int>(cls));
        const auto [it, inserted] = sym_ids.emplace(key, static_cast<int>(sym_ids.size()));
        return it->second;
    };

    host_group_by_node_.assign(deployment_.nodes.size(), -1);
    for (const Node& n : deployment_.nodes) {
        int g;
        if (n.pool) {
            g = *n.pool;
        } else {
            const auto it = standalone_group.find(n.id);
            if (it == standalone_group.end()) continue;
            g = it->second;
        }
        Group& group = groups_[static_cast<std::size_t>(g)];
        const std::int64_t w = weighted_capacity(n, weights_);
        if (is_host_capable(n.kind)) {
            const int scope = n.pool ? g : -1;
            HostSlot h{n.id, g, n.capacity.cores, n.capacity.memory, integrated_type(n.capacity),
                       n.capacity.gpu + n.capacity.fpga, w, sym_of(scope, n, group.placement_class)};
            host_group_by_node_[static_cast<std::size_t>(n.id)] = g;
            group.hosts.push_back(static_cast<int>(hosts_.size()));
            hosts_.push_back(h);
        } else if (n.kind == NodeKind::Memory) {
            group.mems.push_back(static_cast<int>(mems_.size()));
            group.mem_total += n.capacity.memory;
            mems_.push_back(MemSlot{n.id, g, n.capacity.memory, w});
        } else {
            const AccelType t = n.kind == NodeKind::Gpu ? AccelType::Gpu : AccelType::Fpga;
            const int units = t == AccelType::Gpu ? n.capacity.gpu : n.capacity.fpga;
            group.accels.push_back(static_cast<int>(accels_.size()));
            accels_.push_back(AccelSlot{n.id, g, t, units, w, sym_of(g, n, group.placement_class)});
        }
    }
    sym_classes_ = static_cast<int>(sym_ids.size());

    int max_cores = 0;
    for (const HostSlot& h : hosts_) max_cores = std::max(max_cores, h.cores);
    for (const Request& r : requests_)
        if (r.demand.cores > max_cores)
            throw InfeasibleByConstruction("request " + std::to_string(r.id) + " needs " + std::to_string(r.demand.cores) +
                                           " cores; no host offers more than " + std::to_string(max_cores));

    penalty_.resize(requests_.size() * groups_.size());
    for (std::size_t r = 0; r < requests_.size(); ++r)
        for (std::size_t g = 0; g < groups_.size(); ++g)
            penalty_[r * groups_.size() + g] = dpool::penalty(requests_[r].workload_class, groups_[g].placement_class);

    // 0/1 knapsack per group: exact[c] = cheapest subset with capacity exactly
    // c, then a suffix minimum turns it into "at least c".
    for (const Group& g : groups_) {
        if (g.mems.size() > 64) throw std::invalid_argument("more than 64 memory nodes in one pool");
        const auto total = static_cast<std::size_t>(g.mem_total);
        std::vector<std::int64_t> exact(total + 1, kUnreachable);
        std::vector<std::uint64_t> exact_set(total + 1, 0);
        exact[0] = 0;
        for (std::size_t k = 0; k < g.mems.size(); ++k) {
            const MemSlot& m = mems_[static_cast<std::size_t>(g.mems[k])];
            const auto cap = static_cast<std::size_t>(m.capacity);
            for (std::size_t c = total; c >= cap && c > 0; --c) {
                if (exact[c - cap] == kUnreachable) continue;
                const std::int64_t w = exact[c - cap] + m.weight;
                if (w < exact[c]) {
                    exact[c] = w;
                    exact_set[c] = exact_set[c - cap] | (std::uint64_t{1} << k);
                }
            }
        }
        std::vector<std::int64_t> best(total + 1, kUnreachable);
        std::vector<std::uint32_t> best_set(total + 1, 0);
        std::vector<std::uint64_t> sets;
        std::int64_t running = kUnreachable;
        std::uint64_t running_set = 0;
        for (std::size_t c = total + 1; c-- > 0;) {
            if (exact[c] <= running) {
                running = exact[c];
                running_set = exact_set[c];
            }
            best[c] = running;
            const auto it = std::find(sets.begin(), sets.end(), running_set);
            best_set[c] = static_cast<std::uint32_t>(it - sets.begin());
            if (it == sets.end()) sets.push_back(running_set);
        }
        mem_best_.push_back(std::move(best));
        mem_best_set_.push_back(std::move(best_set));
        mem_sets_.push_back(std::move(sets));
    }
}

int Problem::group_of_host(int node_id) const {
    if (node_id < 0 || node_id >= static_cast<int>(host_group_by_node_.size())) return -1;
    return host_group_by_node_[static_cast<std::size_t>(node_id)];
}

int Problem::request_index(int request_id) const {
    const auto it = request_index_.find(request_id);
    return it == request_index_.end() ? -1 : it->second;
}

std::int64_t Problem::memory_cost(int g, int residual) const {
    const auto& best = mem_best_[static_cast<std::size_t>(g)];
    if (residual <= 0) return 0;
    if (residual >= static_cast<int>(best.size())) return -1;
    return best[static_cast<std::size_t>(residual)];
}

std::vector<int> Problem::memory_cover(int g, int residual) const {
    std::vector<int> out;
    if (residual <= 0) return out;
    const auto& group = groups_[static_cast<std::size_t>(g)];
    const auto& idx = mem_best_set_[static_cast<std::size_t>(g)];
    if (residual >= static_cast<int>(idx.size())) return out;
    const std::uint64_t set = mem_sets_[static_cast<std::size_t>(g)][idx[static_cast<std::size_t>(residual)]];
    for (std::size_t k = 0; k < group.mems.size(); ++k)
        if (set & (std::uint64_t{1} << k)) out.push_back(group.mems[k]);
    return out;
}

Problem build_problem(const Deployment& deployment, std::vector<Request> requests, const ObjectiveWeights& weights) {
    return Problem(deployment, std::move(requests), weights);
}

}  // namespace dpool
