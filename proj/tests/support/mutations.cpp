#include "mutations.hpp"

#include <algorithm>

namespace mutations {

using namespace dpool;

namespace {

std::vector<int> nodes_where(const Deployment& d, auto pred) {
    std::vector<int> out;
    for (const Node& n : d.nodes)
        if (pred(n)) out.push_back(n.id);
    return out;
}

}  // namespace

std::vector<Mutation> all(const Solution& valid, const Problem& problem) {
    const Deployment& d = problem.deployment();
    const auto& reqs = problem.requests();
    std::vector<Mutation> out;
    auto emit = [&](std::string name, std::string category, std::string code, Solution s) {
        out.push_back({std::move(name), std::move(category), std::move(code), std::move(s)});
    };

    std::vector<ResourceVector> used(d.nodes.size());
    for (const Placement& pl : valid.placements) {
        const Request& r = reqs[static_cast<std::size_t>(problem.request_index(pl.request_id))];
        used[static_cast<std::size_t>(pl.host)].cores += r.demand.cores;
    }

    const auto memory_nodes = nodes_where(d, [](const Node& n) { return n.kind == NodeKind::Memory; });
    const auto hosts = nodes_where(d, [](const Node& n) { return is_host_capable(n.kind); });

    for (std::size_t i = 0; i < valid.placements.size(); ++i) {
        const Placement& pl = valid.placements[i];
        const Request& r = reqs[static_cast<std::size_t>(problem.request_index(pl.request_id))];
        const Node& host = d.node(pl.host);
        const std::string tag = " r" + std::to_string(pl.request_id);

        // Pool membership: one GB from a memory node outside the host's pool.
        for (int m : memory_nodes) {
            if (host.pool && d.node(m).pool == host.pool) continue;
            Solution s = valid;
            Placement& q = s.placements[i];
            if (q.local_mem > r.local_threshold) {
                --q.local_mem;
            } else if (!q.remote_mem.empty()) {
                auto it = q.remote_mem.begin();
                if (--it->second == 0) q.remote_mem.erase(it);
            } else {
                continue;
            }
            ++q.remote_mem[m];
            emit("foreign memory" + tag, "pool", "same-pool", std::move(s));
            break;
        }
        // Pool membership: the accelerator node of another pool.
        if (pl.accel_node && *pl.accel_node != pl.host) {
            for (const Node& a : d.nodes) {
                if (is_host_capable(a.kind) || a.pool == host.pool) continue;
                if ((r.demand.gpu > 0 ? a.capacity.gpu : a.capacity.fpga) == 0) continue;
                Solution s = valid;
                s.placements[i].accel_node = a.id;
                emit("foreign accelerator" + tag, "pool", "same-pool", std::move(s));
                break;
            }
        }

        // Local threshold.
        if (r.local_threshold > 0) {
            Solution s = valid;
            Placement& q = s.placements[i];
            const int shift = q.local_mem - r.local_threshold + 1;
            q.local_mem -= shift;
            if (!q.remote_mem.empty())
                q.remote_mem.begin()->second += shift;
            emit("threshold" + tag, "threshold", "local-threshold", std::move(s));
        }
        {
            Solution s = valid;
            ++s.placements[i].local_mem;
            emit("memory sum" + tag, "threshold", "memory-sum", std::move(s));
        }

        // Capacity: move the request onto a host whose cores it overflows.
        for (int h : hosts) {
            if (h == pl.host) continue;
            const Node& other = d.node(h);
            if (used[static_cast<std::size_t>(h)].cores + r.demand.cores <= other.capacity.cores) continue;
            if (other.pool != host.pool) continue;
            Solution s = valid;
            s.placements[i].host = h;
            emit("core overflow" + tag, "capacity", "capacity-cores", std::move(s));
            break;
        }
        if (!pl.remote_mem.empty()) {
            Solution s = valid;
            auto it = s.placements[i].remote_mem.begin();
            const int cap = d.node(it->first).capacity.memory;
            it->second += cap;
            s.placements[i].local_mem -= std::min(cap, s.placements[i].local_mem);
            emit("memory overflow" + tag, "capacity", "capacity-memory", std::move(s));
        }
        {
            Solution s = valid;
            s.placements[i].local_mem += host.capacity.memory;
            emit("local overflow" + tag, "capacity", "capacity-memory", std::move(s));
        }
        if (pl.accel_node) {
            Solution s = valid;
            s.placements[i].accel_units += 32;
            emit("accelerator overflow" + tag, "capacity", r.demand.gpu > 0 ? "capacity-gpu" : "capacity-fpga",
                 std::move(s));
            s = valid;
            s.placements[i].accel_node.reset();
            s.placements[i].accel_units = 0;
            emit("accelerator dropped" + tag, "accel", "accel-missing", std::move(s));
            s = valid;
            s.placements[i].accel_units -= 1;
            emit("accelerator units" + tag, "accel", "accel-units", std::move(s));
            for (const Node& a : d.nodes) {
                if (a.id == pl.host || is_host_capable(a.kind) || a.pool != host.pool) continue;
                if ((r.demand.gpu > 0 ? a.capacity.gpu : a.capacity.fpga) > 0) continue;
                if (a.capacity.gpu + a.capacity.fpga == 0) continue;
                s = valid;
                s.placements[i].accel_node = a.id;
                emit("accelerator type" + tag, "accel", "accel-type", std::move(s));
                break;
            }
        } else if (host.pool) {
            for (const Node& a : d.nodes) {
                if (is_host_capable(a.kind) || a.pool != host.pool || a.capacity.gpu == 0) continue;
                Solution s = valid;
                s.placements[i].accel_node = a.id;
                s.placements[i].accel_units = 1;
                emit("accelerator unexpected" + tag, "accel", "accel-unexpected", std::move(s));
                break;
            }
        }

        // Host must be host-capable.
        if (!memory_nodes.empty()) {
            Solution s = valid;
            s.placements[i].host = memory_nodes.front();
            emit("memory node as host" + tag, "host", "host-capable", std::move(s));
        }
    }

    // Active set.
    for (std::size_t k = 0; k < valid.active_nodes.size(); ++k) {
        Solution s = valid;
        s.active_nodes.erase(s.active_nodes.begin() + static_cast<std::ptrdiff_t>(k));
        emit("active node dropped", "activity", "active-set", std::move(s));
    }
    for (const Node& n : d.nodes) {
        if (std::binary_search(valid.active_nodes.begin(), valid.active_nodes.end(), n.id)) continue;
        Solution s = valid;
        s.active_nodes.insert(std::upper_bound(s.active_nodes.begin(), s.active_nodes.end(), n.id), n.id);
        emit("idle node activated", "activity", "active-set", std::move(s));
        break;
    }

    // Objective value.
    for (int delta : {-1, 1}) {
        Solution s = valid;
        s.objective.total_penalty += delta;
        emit("penalty off by " + std::to_string(delta), "objective", "objective-penalty", s);
        s = valid;
        s.objective.weighted_usage += delta;
        emit("usage off by " + std::to_string(delta), "objective", "objective-weighted", std::move(s));
    }

    // Placement count.
    if (!valid.placements.empty()) {
        Solution s = valid;
        s.placements.pop_back();
        emit("placement dropped", "count", "placement-count", std::move(s));
        s = valid;
        s.placements.push_back(s.placements.front());
        emit("placement duplicated", "count", "placement-count", std::move(s));
    }
    return out;
}

}  // namespace mutations
