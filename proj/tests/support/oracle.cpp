#include "oracle.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <queue>

namespace oracle {

using namespace dpool;

namespace {

// Edmonds-Karp on an adjacency matrix; graphs here have a dozen vertices.
long max_flow(std::vector<std::vector<long>> cap, int s, int t) {
    const auto n = cap.size();
    long total = 0;
    while (true) {
        std::vector<int> parent(n, -1);
        parent[static_cast<std::size_t>(s)] = s;
        std::queue<int> q;
        q.push(s);
        while (!q.empty() && parent[static_cast<std::size_t>(t)] < 0) {
            const int u = q.front();
            q.pop();
            for (std::size_t v = 0; v < n; ++v)
                if (parent[v] < 0 && cap[static_cast<std::size_t>(u)][v] > 0) {
                    parent[v] = u;
                    q.push(static_cast<int>(v));
                }
        }
        if (parent[static_cast<std::size_t>(t)] < 0) return total;
        long push = LONG_MAX;
        for (int v = t; v != s; v = parent[static_cast<std::size_t>(v)])
            push = std::min(push, cap[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])][static_cast<std::size_t>(v)]);
        for (int v = t; v != s; v = parent[static_cast<std::size_t>(v)]) {
            const auto u = static_cast<std::size_t>(parent[static_cast<std::size_t>(v)]);
            cap[u][static_cast<std::size_t>(v)] -= push;
            cap[static_cast<std::size_t>(v)][u] += push;
        }
        total += push;
    }
}

struct Choice {
    int host;
    int provider;  // node id, or -1
};

class Enumerator {
public:
    Enumerator(const Deployment& d, const std::vector<Request>& reqs, const ObjectiveWeights& w)
        : d_(d), reqs_(reqs), w_(w), used_(d.nodes.size()) {
        for (const Node& n : d.nodes)
            if (n.kind == NodeKind::Memory) mems_.push_back(n.id);
        choice_.resize(reqs.size());
    }

    std::optional<Objective> run() {
        recurse(0);
        return best_;
    }

private:
    const Deployment& d_;
    const std::vector<Request>& reqs_;
    const ObjectiveWeights& w_;
    std::vector<ResourceVector> used_;
    std::vector<int> mems_;
    std::vector<Choice> choice_;
    std::optional<Objective> best_;

    PoolClass class_of_host(const Node& h) const {
        return h.pool ? d_.pool(*h.pool).pool_class : d_.standalone_class(h.id);
    }

    void recurse(std::size_t i) {
        if (i == reqs_.size()) {
            evaluate();
            return;
        }
        const Request& r = reqs_[i];
        for (const Node& h : d_.nodes) {
            if (!is_host_capable(h.kind)) continue;
            if (used_[static_cast<std::size_t>(h.id)].cores + r.demand.cores > h.capacity.cores) continue;
            std::vector<int> providers;
            if (r.accel_type() == AccelType::None) {
                providers.push_back(-1);
            } else {
                for (const Node& a : d_.nodes) {
                    const int units = r.accel_type() == AccelType::Gpu ? a.capacity.gpu : a.capacity.fpga;
                    if (units == 0) continue;
                    const bool own = a.id == h.id;
                    const bool pooled = !is_host_capable(a.kind) && h.pool && a.pool == h.pool;
                    if (own || pooled) providers.push_back(a.id);
                }
            }
            for (int p : providers) {
                auto& hu = used_[static_cast<std::size_t>(h.id)];
                hu.cores += r.demand.cores;
                if (p >= 0) {
                    auto& pu = used_[static_cast<std::size_t>(p)];
                    pu.gpu += r.demand.gpu;
                    pu.fpga += r.demand.fpga;
                    const Node& pn = d_.node(p);
                    if (pu.gpu > pn.capacity.gpu || pu.fpga > pn.capacity.fpga) {
                        pu.gpu -= r.demand.gpu;
                        pu.fpga -= r.demand.fpga;
                        hu.cores -= r.demand.cores;
                        continue;
                    }
                }
                choice_[i] = {h.id, p};
                recurse(i + 1);
                if (p >= 0) {
                    auto& pu = used_[static_cast<std::size_t>(p)];
                    pu.gpu -= r.demand.gpu;
                    pu.fpga -= r.demand.fpga;
                }
                hu.cores -= r.demand.cores;
            }
        }
    }

    // Can the flexible memory (demand minus threshold) be routed to host
    // local memory and the chosen memory nodes of the host's pool?
    bool memory_routes(unsigned subset) const {
        const std::size_t R = reqs_.size(), N = d_.nodes.size();
        const int src = 0, sink = 1;
        auto rnode = [](std::size_t i) { return static_cast<int>(2 + i); };
        auto nnode = [R](int id) { return static_cast<int>(2 + R + static_cast<std::size_t>(id)); };
        std::vector<std::vector<long>> cap(2 + R + N, std::vector<long>(2 + R + N, 0));
        std::vector<long> threshold_sum(N, 0);
        long need = 0;
        for (std::size_t i = 0; i < R; ++i) threshold_sum[static_cast<std::size_t>(choice_[i].host)] += reqs_[i].local_threshold;
        for (std::size_t i = 0; i < R; ++i) {
            const Request& r = reqs_[i];
            const Node& h = d_.node(choice_[i].host);
            const long flexible = r.demand.memory - r.local_threshold;
            need += flexible;
            cap[static_cast<std::size_t>(src)][static_cast<std::size_t>(rnode(i))] = flexible;
            cap[static_cast<std::size_t>(rnode(i))][static_cast<std::size_t>(nnode(h.id))] = LONG_MAX / 4;
            for (std::size_t k = 0; k < mems_.size(); ++k) {
                if (!(subset & (1u << k))) continue;
                const Node& m = d_.node(mems_[k]);
                if (h.pool && m.pool == h.pool)
                    cap[static_cast<std::size_t>(rnode(i))][static_cast<std::size_t>(nnode(m.id))] = LONG_MAX / 4;
            }
        }
        for (const Node& n : d_.nodes) {
            long room = 0;
            if (is_host_capable(n.kind)) {
                room = n.capacity.memory - threshold_sum[static_cast<std::size_t>(n.id)];
                if (room < 0) return false;
            } else if (n.kind == NodeKind::Memory) {
                room = n.capacity.memory;
            }
            cap[static_cast<std::size_t>(nnode(n.id))][static_cast<std::size_t>(sink)] = room;
        }
        return max_flow(std::move(cap), src, sink) == need;
    }

    void evaluate() {
        Objective o;
        std::vector<bool> active(d_.nodes.size(), false);
        for (std::size_t i = 0; i < reqs_.size(); ++i) {
            const Node& h = d_.node(choice_[i].host);
            o.total_penalty += penalty(reqs_[i].workload_class, class_of_host(h));
            active[static_cast<std::size_t>(h.id)] = true;
            if (choice_[i].provider >= 0) active[static_cast<std::size_t>(choice_[i].provider)] = true;
        }
        for (const Node& n : d_.nodes)
            if (active[static_cast<std::size_t>(n.id)]) o.weighted_usage += weighted_capacity(n, w_);
        if (best_ && o.total_penalty > best_->total_penalty) return;

        std::optional<std::int64_t> mem_cost;
        for (unsigned subset = 0; subset < (1u << mems_.size()); ++subset) {
            std::int64_t cost = 0;
            for (std::size_t k = 0; k < mems_.size(); ++k)
                if (subset & (1u << k)) cost += weighted_capacity(d_.node(mems_[k]), w_);
            if (mem_cost && cost >= *mem_cost) continue;
            if (memory_routes(subset)) mem_cost = cost;
        }
        if (!mem_cost) return;
        o.weighted_usage += *mem_cost;
        if (!best_ || o < *best_) best_ = o;
    }
};

NodeKind random_server(std::mt19937_64& rng) {
    static constexpr NodeKind kinds[] = {NodeKind::S1, NodeKind::S2, NodeKind::S3, NodeKind::S4, NodeKind::S5};
    return kinds[rng() % 5];
}

}  // namespace

std::optional<Objective> brute_force(const Deployment& d, const std::vector<Request>& requests,
                                     const ObjectiveWeights& w) {
    return Enumerator(d, requests, w).run();
}

Deployment random_deployment(std::mt19937_64& rng, int max_nodes) {
    const NodeCatalog cat;
    static constexpr PoolClass classes[] = {PoolClass::General, PoolClass::ComputeOptimized,
                                            PoolClass::MemoryOptimized, PoolClass::AcceleratorAssisted};
    static constexpr int mem_sizes[] = {16, 32, 64, 96, 160};
    while (true) {
        Deployment d;
        d.policy = rng() % 2 ? Policy::C1 : Policy::C2;
        d.server_mode = rng() % 2 ? ServerMode::Separate : ServerMode::Mixed;
        const int pools = 1 + static_cast<int>(rng() % 2);
        auto add = [&](NodeKind kind, ResourceVector cap, std::optional<int> pool) {
            const int id = static_cast<int>(d.nodes.size());
            d.nodes.push_back(Node{id, kind, cap, pool});
            if (pool) d.pools[static_cast<std::size_t>(*pool)].nodes.push_back(id);
            return id;
        };
        for (int p = 0; p < pools; ++p) {
            const PoolClass cls = d.policy == Policy::C1 ? PoolClass::Uniform : classes[rng() % 4];
            d.pools.push_back(Pool{p, cls, {}});
            const int hosts = 1 + static_cast<int>(rng() % 2);
            for (int h = 0; h < hosts; ++h) {
                const NodeKind k = d.server_mode == ServerMode::Mixed && rng() % 2 ? random_server(rng) : NodeKind::Cpu;
                add(k, cat.capacity(k), p);
            }
            const int mems = static_cast<int>(rng() % 3);
            for (int m = 0; m < mems; ++m) add(NodeKind::Memory, {0, mem_sizes[rng() % 5], 0, 0}, p);
            if (rng() % 2) add(NodeKind::Gpu, cat.gpu, p);
            if (rng() % 3 == 0) add(NodeKind::Fpga, cat.fpga, p);
        }
        if (d.server_mode == ServerMode::Separate) {
            const int servers = static_cast<int>(rng() % 3);
            for (int s = 0; s < servers; ++s) {
                const NodeKind k = random_server(rng);
                d.standalone_servers.push_back(add(k, cat.capacity(k), std::nullopt));
            }
        }
        if (static_cast<int>(d.nodes.size()) <= max_nodes) return d;
    }
}

std::vector<Request> random_requests(std::mt19937_64& rng, int max_requests) {
    std::uniform_real_distribution<double> ratio(1.0, 6.0), frac(0.0, 0.5);
    const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_requests));
    std::vector<Request> out;
    for (int i = 0; i < n; ++i) {
        Request r;
        r.id = i;
        r.demand.cores = 1 + static_cast<int>(rng() % 12);
        r.demand.memory = std::clamp(static_cast<int>(std::lround(r.demand.cores * ratio(rng))), r.demand.cores,
                                     12 * r.demand.cores);
        if (rng() % 100 < 35) {
            const int units = 1 + static_cast<int>(rng() % 32);
            (rng() % 2 ? r.demand.gpu : r.demand.fpga) = units;
        }
        r.local_threshold = static_cast<int>(std::floor(frac(rng) * r.demand.memory));
        r.workload_class = classify(static_cast<double>(r.demand.memory) / r.demand.cores, r.accel_units() > 0);
        out.push_back(r);
    }
    return out;
}

}  // namespace oracle
