#include "dpool/poolcfg.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dpool {

PoolClass Deployment::standalone_class(int node_id) const {
    if (policy == Policy::C1) return PoolClass::Uniform;
    return server_pool_class(node(node_id).capacity);
}

PolicyLayout default_layout(Policy policy) {
    using P = PoolClass;
    switch (policy) {
        case Policy::C1:
            return PolicyLayout(4, PoolLayout{P::Uniform, 4, {160, 160}, 2, 1});
        case Policy::C2:
            return {
                {P::General, 4, {128, 128}, 0, 0},
                {P::ComputeOptimized, 4, {}, 0, 0},
                {P::MemoryOptimized, 4, {384, 384}, 0, 0},
                {P::AcceleratorAssisted, 4, {128, 128}, 8, 4},
            };
        case Policy::C3:
            return {
                {P::General, 5, {197, 197}, 0, 0},
                {P::ComputeOptimized, 4, {}, 0, 0},
                {P::MemoryOptimized, 3, {283, 283}, 0, 0},
                {P::AcceleratorAssisted, 4, {160, 160}, 8, 4},
            };
    }
    throw DeploymentError("unknown policy");
}

namespace {

constexpr NodeKind kServerKinds[] = {NodeKind::S1, NodeKind::S2, NodeKind::S3, NodeKind::S4, NodeKind::S5};

}  // namespace

Deployment build_deployment(Policy policy, ServerMode mode, const NodeCatalog& catalog,
                            const std::optional<PolicyLayout>& layout_override) {
    const PolicyLayout layout = layout_override ? *layout_override : default_layout(policy);
    if (layout.empty()) throw DeploymentError("layout has no pools");

    int cpu = 0, gpu = 0, fpga = 0, memory = 0;
    for (const auto& p : layout) {
        if (p.cpu_nodes < 0 || p.gpu_nodes < 0 || p.fpga_nodes < 0)
            throw DeploymentError("negative node count in layout");
        cpu += p.cpu_nodes;
        gpu += p.gpu_nodes;
        fpga += p.fpga_nodes;
        for (int m : p.memory_nodes) {
            if (m <= 0) throw DeploymentError("memory node size must be positive");
            memory += m;
        }
    }
    auto mismatch = [](const char* what, int got, int want) {
        return DeploymentError(std::string("inventory mismatch: layout uses ") + std::to_string(got) + " " + what +
                               ", catalog has " + std::to_string(want));
    };
    if (cpu != catalog.cpu_count) throw mismatch("CPU nodes", cpu, catalog.cpu_count);
    if (gpu != catalog.gpu_count) throw mismatch("GPU nodes", gpu, catalog.gpu_count);
    if (fpga != catalog.fpga_count) throw mismatch("FPGA nodes", fpga, catalog.fpga_count);
    if (memory != catalog.memory_total) throw mismatch("GB of memory-node capacity", memory, catalog.memory_total);

    Deployment d;
    d.policy = policy;
    d.server_mode = mode;
    for (std::size_t i = 0; i < layout.size(); ++i)
        d.pools.push_back(Pool{static_cast<int>(i), layout[i].pool_class, {}});

    auto add = [&](NodeKind kind, const ResourceVector& cap, std::optional<int> pool) {
        const int id = static_cast<int>(d.nodes.size());
        d.nodes.push_back(Node{id, kind, cap, pool});
        if (pool) d.pools[static_cast<std::size_t>(*pool)].nodes.push_back(id);
        return id;
    };

    for (std::size_t p = 0; p < layout.size(); ++p)
        for (int i = 0; i < layout[p].cpu_nodes; ++i) add(NodeKind::Cpu, catalog.cpu, static_cast<int>(p));
    for (std::size_t p = 0; p < layout.size(); ++p)
        for (int i = 0; i < layout[p].gpu_nodes; ++i) add(NodeKind::Gpu, catalog.gpu, static_cast<int>(p));
    for (std::size_t p = 0; p < layout.size(); ++p)
        for (int i = 0; i < layout[p].fpga_nodes; ++i) add(NodeKind::Fpga, catalog.fpga, static_cast<int>(p));

    // Servers in fixed type order; in mixed mode uniform layouts deal them
    // round-robin, function-specific layouts match them to their pool class.
    const bool uniform = std::all_of(layout.begin(), layout.end(),
                                     [](const PoolLayout& p) { return p.pool_class == PoolClass::Uniform; });
    int dealt = 0;
    for (NodeKind kind : kServerKinds) {
        const ResourceVector& cap = catalog.capacity(kind);
        for (int i = 0; i < catalog.count(kind); ++i) {
            std::optional<int> pool;
            if (mode == ServerMode::Mixed) {
                if (uniform) {
                    pool = dealt++ % static_cast<int>(layout.size());
                } else {
                    const PoolClass want = server_pool_class(cap);
                    const auto it = std::find_if(layout.begin(), layout.end(),
                                                 [&](const PoolLayout& p) { return p.pool_class == want; });
                    if (it == layout.end())
                        throw DeploymentError("no " + std::string(to_string(want)) + " pool for server " +
                                              std::string(to_string(kind)));
                    pool = static_cast<int>(it - layout.begin());
                }
            }
            const int id = add(kind, cap, pool);
            if (!pool) d.standalone_servers.push_back(id);
        }
    }

    for (std::size_t p = 0; p < layout.size(); ++p)
        for (int m : layout[p].memory_nodes) add(NodeKind::Memory, ResourceVector{0, m, 0, 0}, static_cast<int>(p));

    for (auto& pool : d.pools) std::sort(pool.nodes.begin(), pool.nodes.end());
    check_deployment(d);
    return d;
}

void check_deployment(const Deployment& d) {
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
        const Node& n = d.nodes[i];
        if (n.id != static_cast<int>(i)) throw DeploymentError("node ids must be dense and ordered");
        if (!n.capacity.non_negative()) throw DeploymentError("node " + std::to_string(n.id) + " has negative capacity");
        if (n.pool && (*n.pool < 0 || *n.pool >= static_cast<int>(d.pools.size())))
            throw DeploymentError("node " + std::to_string(n.id) + " references unknown pool");
    }
    std::vector<int> owner(d.nodes.size(), -1);
    for (std::size_t p = 0; p < d.pools.size(); ++p) {
        const Pool& pool = d.pools[p];
        if (pool.id != static_cast<int>(p)) throw DeploymentError("pool ids must be dense and ordered");
        if (d.policy != Policy::C1 && pool.pool_class == PoolClass::Uniform)
            throw DeploymentError("uniform pools appear only under C1");
        bool has_host = false;
        for (int id : pool.nodes) {
            if (id < 0 || id >= static_cast<int>(d.nodes.size()))
                throw DeploymentError("pool " + std::to_string(p) + " references unknown node");
            if (owner[static_cast<std::size_t>(id)] != -1)
                throw DeploymentError("node " + std::to_string(id) + " belongs to more than one pool");
            owner[static_cast<std::size_t>(id)] = static_cast<int>(p);
            if (d.node(id).pool != pool.id)
                throw DeploymentError("node " + std::to_string(id) + " pool field disagrees with pool list");
            has_host = has_host || is_host_capable(d.node(id).kind);
        }
        if (!has_host) throw DeploymentError("pool " + std::to_string(p) + " has no host-capable node");
    }
    for (const Node& n : d.nodes)
        if (n.pool && owner[static_cast<std::size_t>(n.id)] != *n.pool)
            throw DeploymentError("node " + std::to_string(n.id) + " missing from its pool list");

    std::vector<bool> standalone(d.nodes.size(), false);
    for (int id : d.standalone_servers) {
        if (id < 0 || id >= static_cast<int>(d.nodes.size()))
            throw DeploymentError("unknown standalone server");
        if (!is_server(d.node(id).kind)) throw DeploymentError("standalone node " + std::to_string(id) + " is not a server");
        if (d.node(id).pool) throw DeploymentError("standalone server " + std::to_string(id) + " is also pooled");
        if (standalone[static_cast<std::size_t>(id)]) throw DeploymentError("duplicate standalone server");
        standalone[static_cast<std::size_t>(id)] = true;
    }
    if (d.server_mode == ServerMode::Mixed && !d.standalone_servers.empty())
        throw DeploymentError("mixed mode has no standalone servers");
    for (const Node& n : d.nodes)
        if (!n.pool && !standalone[static_cast<std::size_t>(n.id)])
            throw DeploymentError("node " + std::to_string(n.id) + " is neither pooled nor a standalone server");
}

double per_core_memory(const Pool& pool, const Deployment& deployment) {
    long memory = 0, cores = 0;
    for (int id : pool.nodes) {
        const Node& n = deployment.node(id);
        if (is_host_capable(n.kind) || n.kind == NodeKind::Memory) memory += n.capacity.memory;
        if (is_host_capable(n.kind)) cores += n.capacity.cores;
    }
    if (cores == 0) throw std::domain_error("pool " + std::to_string(pool.id) + " has no cores");
    return static_cast<double>(memory) / static_cast<double>(cores);
}

ResourceVector installed_capacity(const Deployment& d) {
    ResourceVector total;
    for (const Node& n : d.nodes) total += n.capacity;
    return total;
}

std::string to_string(Policy p) {
    switch (p) {
        case Policy::C1: return "C1";
        case Policy::C2: return "C2";
        case Policy::C3: return "C3";
    }
    return "?";
}

std::string to_string(ServerMode m) { return m == ServerMode::Separate ? "separate" : "mixed"; }

std::optional<Policy> parse_policy(std::string_view s) {
    if (s == "C1" || s == "c1") return Policy::C1;
    if (s == "C2" || s == "c2") return Policy::C2;
    if (s == "C3" || s == "c3") return Policy::C3;
    return std::nullopt;
}

std::optional<ServerMode> parse_server_mode(std::string_view s) {
    if (s == "separate" || s == "S" || s == "s") return ServerMode::Separate;
    if (s == "mixed" || s == "M" || s == "m") return ServerMode::Mixed;
    return std::nullopt;
}

std::string condition_label(Policy p, ServerMode m) {
    return to_string(p) + (m == ServerMode::Separate ? "_S" : "_M");
}

void write_deployment(std::ostream& out, const Deployment& d) {
    out << "policy " << to_string(d.policy) << '\n';
    out << "mode " << to_string(d.server_mode) << '\n';
    for (const Pool& p : d.pools) out << "pool " << p.id << ' ' << to_string(p.pool_class) << '\n';
    for (const Node& n : d.nodes) {
        out << "node " << n.id << ' ' << to_string(n.kind) << ' ' << n.capacity.cores << ' ' << n.capacity.memory << ' '
            << n.capacity.gpu << ' ' << n.capacity.fpga << ' ';
        if (n.pool)
            out << "pool " << *n.pool;
        else
            out << "standalone";
        out << '\n';
    }
}

std::string deployment_to_string(const Deployment& d) {
    std::ostringstream os;
    write_deployment(os, d);
    return os.str();
}

Deployment read_deployment(std::istream& in) {
    Deployment d;
    bool have_policy = false, have_mode = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto fail = [&](const std::string& why) {
            return std::runtime_error("deployment line " + std::to_string(line_no) + ": " + why);
        };
        std::istringstream f(line);
        std::string key;
        f >> key;
        if (key == "policy") {
            std::string v;
            f >> v;
            const auto p = parse_policy(v);
            if (!p) throw fail("unknown policy '" + v + "'");
            d.policy = *p;
            have_policy = true;
        } else if (key == "mode") {
            std::string v;
            f >> v;
            const auto m = parse_server_mode(v);
            if (!m) throw fail("unknown mode '" + v + "'");
            d.server_mode = *m;
            have_mode = true;
        } else if (key == "pool") {
            int id = 0;
            std::string cls;
            if (!(f >> id >> cls)) throw fail("expected 'pool <id> <class>'");
            const auto c = parse_pool_class(cls);
            if (!c) throw fail("unknown pool class '" + cls + "'");
            if (id != static_cast<int>(d.pools.size())) throw fail("pool ids must be listed densely in order");
            d.pools.push_back(Pool{id, *c, {}});
        } else if (key == "node") {
            Node n;
            std::string kind, where;
            if (!(f >> n.id >> kind >> n.capacity.cores >> n.capacity.memory >> n.capacity.gpu >> n.capacity.fpga >> where))
                throw fail("expected 'node <id> <kind> <cores> <memory> <gpu> <fpga> <placement>'");
            const auto k = parse_node_kind(kind);
            if (!k) throw fail("unknown node kind '" + kind + "'");
            n.kind = *k;
            if (where == "pool") {
                int pid = 0;
                if (!(f >> pid)) throw fail("expected pool id");
                if (pid < 0 || pid >= static_cast<int>(d.pools.size())) throw fail("node references undeclared pool");
                n.pool = pid;
                d.pools[static_cast<std::size_t>(pid)].nodes.push_back(n.id);
            } else if (where == "standalone") {
                d.standalone_servers.push_back(n.id);
            } else {
                throw fail("expected 'pool <id>' or 'standalone'");
            }
            if (n.id != static_cast<int>(d.nodes.size())) throw fail("node ids must be listed densely in order");
            d.nodes.push_back(n);
        } else {
            throw fail("unknown record '" + key + "'");
        }
    }
    if (!have_policy || !have_mode) throw std::runtime_error("deployment: missing policy or mode record");
    try {
        check_deployment(d);
    } catch (const DeploymentError& e) {
        throw std::runtime_error(std::string("deployment: ") + e.what());
    }
    return d;
}

}  // namespace dpool
