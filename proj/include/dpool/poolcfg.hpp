#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpool/model.hpp"

namespace dpool {

enum class Policy { C1, C2, C3 };
enum class ServerMode { Separate, Mixed };

struct Pool {
    int id = 0;
    PoolClass pool_class = PoolClass::Uniform;
    std::vector<int> nodes;  // node ids, ascending

    friend bool operator==(const Pool&, const Pool&) = default;
};

/// Thrown when an inventory or pool layout is inconsistent.
class DeploymentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The whole inventory partitioned into pools, plus standalone servers in
/// separate mode. Node ids are dense indexes into `nodes`.
struct Deployment {
    Policy policy = Policy::C1;
    ServerMode server_mode = ServerMode::Separate;
    std::vector<Node> nodes;
    std::vector<Pool> pools;
    std::vector<int> standalone_servers;

    [[nodiscard]] const Node& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] const Pool& pool(int id) const { return pools.at(static_cast<std::size_t>(id)); }

    /// Class a request is matched against when hosted on this standalone
    /// server. Uniform under C1, derived from the server's shape otherwise.
    [[nodiscard]] PoolClass standalone_class(int node_id) const;

    friend bool operator==(const Deployment&, const Deployment&) = default;
};

/// Shape of one pool under a configuration policy.
struct PoolLayout {
    PoolClass pool_class = PoolClass::Uniform;
    int cpu_nodes = 0;
    std::vector<int> memory_nodes;  // GB per memory node
    int gpu_nodes = 0;
    int fpga_nodes = 0;
};

using PolicyLayout = std::vector<PoolLayout>;

[[nodiscard]] PolicyLayout default_layout(Policy policy);

/// Builds the deployment for one condition. Ids: CPU nodes first in pool
/// order, then GPU, FPGA, servers (S1..S5), then memory nodes in pool order.
/// Throws DeploymentError if the layout does not consume exactly the
/// catalog's inventory.
[[nodiscard]] Deployment build_deployment(Policy policy, ServerMode mode, const NodeCatalog& catalog = {},
                                          const std::optional<PolicyLayout>& layout = std::nullopt);

/// Structural checks shared by built and hand-made deployments: dense ids,
/// consistent pool membership, at least one host per pool, standalone
/// servers only in separate mode. Throws DeploymentError.
void check_deployment(const Deployment& d);

/// (local GB of host-capable nodes + memory-node GB) / cores, over the pool.
/// Throws std::domain_error when the pool has no cores.
[[nodiscard]] double per_core_memory(const Pool& pool, const Deployment& deployment);

/// Total installed capacity across all nodes (pooled and standalone).
[[nodiscard]] ResourceVector installed_capacity(const Deployment& d);

[[nodiscard]] std::string to_string(Policy p);
[[nodiscard]] std::string to_string(ServerMode m);
[[nodiscard]] std::optional<Policy> parse_policy(std::string_view s);
[[nodiscard]] std::optional<ServerMode> parse_server_mode(std::string_view s);

/// "C1_S", "C2_M", ...
[[nodiscard]] std::string condition_label(Policy p, ServerMode m);

/// Text form:
///   policy C2
///   mode separate
///   pool <id> <class>
///   node <id> <kind> <cores> <memory> <gpu> <fpga> (pool <id> | standalone)
void write_deployment(std::ostream& out, const Deployment& d);
[[nodiscard]] std::string deployment_to_string(const Deployment& d);
/// Throws std::runtime_error with a line number on malformed input, then
/// runs check_deployment.
[[nodiscard]] Deployment read_deployment(std::istream& in);

}  // namespace dpool
