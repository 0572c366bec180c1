#include <algorithm>
#include <map>
#include <set>

#include "dpool/allocator.hpp"

namespace dpool {

namespace {

bool valid_node(const Problem& p, int id) {
    return id >= 0 && id < static_cast<int>(p.deployment().nodes.size());
}

std::string req_tag(int id) { return "request " + std::to_string(id); }

}  // namespace

std::vector<int> derive_active_nodes(const std::vector<Placement>& placements) {
    std::set<int> active;
    for (const Placement& pl : placements) {
        active.insert(pl.host);
        for (const auto& [node, gb] : pl.remote_mem)
            if (gb > 0) active.insert(node);
        if (pl.accel_node && pl.accel_units > 0) active.insert(*pl.accel_node);
    }
    return {active.begin(), active.end()};
}

Objective evaluate_objective(const std::vector<Placement>& placements, const Problem& problem) {
    Objective o;
    for (const Placement& pl : placements) {
        const int r = problem.request_index(pl.request_id);
        const int g = problem.group_of_host(pl.host);
        if (r >= 0 && g >= 0) o.total_penalty += problem.penalty(r, g);
    }
    for (int id : derive_active_nodes(placements))
        if (valid_node(problem, id)) o.weighted_usage += weighted_capacity(problem.deployment().node(id), problem.weights());
    return o;
}

std::vector<Violation> validate(const Solution& solution, const Problem& problem) {
    std::vector<Violation> out;
    auto report = [&](std::string code, std::string detail) { out.push_back({std::move(code), std::move(detail)}); };

    const auto& reqs = problem.requests();
    const auto& dep = problem.deployment();
    if (solution.placements.size() != reqs.size()) {
        report("placement-count", std::to_string(solution.placements.size()) + " placements for " +
                                      std::to_string(reqs.size()) + " requests");
    }

    std::map<int, ResourceVector> load;
    std::set<int> seen;
    for (std::size_t i = 0; i < solution.placements.size(); ++i) {
        const Placement& pl = solution.placements[i];
        const int r = problem.request_index(pl.request_id);
        const std::string tag = req_tag(pl.request_id);
        if (r < 0 || !seen.insert(pl.request_id).second) {
            report("placement-count", tag + " is unknown or placed twice");
            continue;
        }
        const Request& req = reqs[static_cast<std::size_t>(r)];

        if (!valid_node(problem, pl.host) || !is_host_capable(dep.node(pl.host).kind)) {
            report("host-capable", tag + " hosted on node " + std::to_string(pl.host));
            continue;
        }
        const Node& host = dep.node(pl.host);
        load[pl.host].cores += req.demand.cores;
        load[pl.host].memory += pl.local_mem;

        if (pl.local_mem < req.local_threshold || pl.local_mem < 0)
            report("local-threshold", tag + " takes " + std::to_string(pl.local_mem) + " GB locally, threshold " +
                                          std::to_string(req.local_threshold));

        long remote_total = 0;
        for (const auto& [node, gb] : pl.remote_mem) {
            remote_total += gb;
            if (!valid_node(problem, node) || dep.node(node).kind != NodeKind::Memory || gb < 0) {
                report("memory-sum", tag + " draws " + std::to_string(gb) + " GB from non-memory node " +
                                         std::to_string(node));
                continue;
            }
            if (!host.pool || dep.node(node).pool != host.pool)
                report("same-pool", tag + " draws memory from node " + std::to_string(node) + " outside its pool");
            load[node].memory += gb;
        }
        if (pl.local_mem + remote_total != req.demand.memory)
            report("memory-sum", tag + " receives " + std::to_string(pl.local_mem + remote_total) + " GB of " +
                                     std::to_string(req.demand.memory));

        const AccelType need = req.accel_type();
        if (need == AccelType::None) {
            if (pl.accel_node) report("accel-unexpected", tag + " has an accelerator it did not ask for");
        } else if (!pl.accel_node) {
            report("accel-missing", tag + " needs " + std::string(to_string(need)) + " units");
        } else {
            const int a = *pl.accel_node;
            if (pl.accel_units != req.accel_units())
                report("accel-units", tag + " receives " + std::to_string(pl.accel_units) + " units of " +
                                          std::to_string(req.accel_units()));
            if (!valid_node(problem, a)) {
                report("accel-type", tag + " uses unknown node " + std::to_string(a));
            } else {
                const Node& an = dep.node(a);
                const int provided = need == AccelType::Gpu ? an.capacity.gpu : an.capacity.fpga;
                const bool external = a != pl.host;
                if (provided == 0 || (external && is_host_capable(an.kind)))
                    report("accel-type", tag + " uses node " + std::to_string(a) + " without " +
                                             std::string(to_string(need)));
                if (external && (!host.pool || an.pool != host.pool))
                    report("same-pool", tag + " uses accelerator node " + std::to_string(a) + " outside its pool");
                if (need == AccelType::Gpu)
                    load[a].gpu += pl.accel_units;
                else
                    load[a].fpga += pl.accel_units;
            }
        }
    }

    for (const auto& [id, used] : load) {
        const ResourceVector& cap = dep.node(id).capacity;
        const std::string tag = "node " + std::to_string(id);
        if (used.cores > cap.cores) report("capacity-cores", tag + " cores " + std::to_string(used.cores));
        if (used.memory > cap.memory) report("capacity-memory", tag + " memory " + std::to_string(used.memory));
        if (used.gpu > cap.gpu) report("capacity-gpu", tag + " gpu " + std::to_string(used.gpu));
        if (used.fpga > cap.fpga) report("capacity-fpga", tag + " fpga " + std::to_string(used.fpga));
    }

    if (solution.active_nodes != derive_active_nodes(solution.placements))
        report("active-set", "active nodes differ from the nodes supplying resources");
    const Objective o = evaluate_objective(solution.placements, problem);
    if (o.total_penalty != solution.objective.total_penalty)
        report("objective-penalty", "stated " + std::to_string(solution.objective.total_penalty) + ", recomputed " +
                                        std::to_string(o.total_penalty));
    if (o.weighted_usage != solution.objective.weighted_usage)
        report("objective-weighted", "stated " + std::to_string(solution.objective.weighted_usage) + ", recomputed " +
                                         std::to_string(o.weighted_usage));
    return out;
}

}  // namespace dpool
