#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dpool {

/// Quantities of the four pooled resource types. Used both for node
/// capacities and for request demands.
struct ResourceVector {
    int cores = 0;
    int memory = 0;  // GB
    int gpu = 0;     // accelerator units
    int fpga = 0;    // accelerator units

    friend bool operator==(const ResourceVector&, const ResourceVector&) = default;

    ResourceVector& operator+=(const ResourceVector& o) {
        cores += o.cores;
        memory += o.memory;
        gpu += o.gpu;
        fpga += o.fpga;
        return *this;
    }
    friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }

    [[nodiscard]] bool non_negative() const { return cores >= 0 && memory >= 0 && gpu >= 0 && fpga >= 0; }
};

enum class WorkloadClass { ComputeIntensive, GeneralPurpose, MemoryIntensive, AcceleratorAssisted };

enum class AccelType { None, Gpu, Fpga };

struct Request {
    int id = 0;
    ResourceVector demand;
    int local_threshold = 0;  // GB that must come from the host's local memory
    WorkloadClass workload_class = WorkloadClass::GeneralPurpose;

    [[nodiscard]] AccelType accel_type() const {
        if (demand.gpu > 0) return AccelType::Gpu;
        if (demand.fpga > 0) return AccelType::Fpga;
        return AccelType::None;
    }
    [[nodiscard]] int accel_units() const { return demand.gpu + demand.fpga; }

    friend bool operator==(const Request&, const Request&) = default;
};

/// Checks every structural invariant of a request: core and memory bounds,
/// threshold bound, single accelerator type, and class consistency.
[[nodiscard]] bool is_valid(const Request& r);

enum class NodeKind { Cpu, Memory, Gpu, Fpga, S1, S2, S3, S4, S5 };

[[nodiscard]] constexpr bool is_server(NodeKind k) {
    return k == NodeKind::S1 || k == NodeKind::S2 || k == NodeKind::S3 || k == NodeKind::S4 ||
           k == NodeKind::S5;
}
[[nodiscard]] constexpr bool is_host_capable(NodeKind k) { return k == NodeKind::Cpu || is_server(k); }

struct Node {
    int id = 0;
    NodeKind kind = NodeKind::Cpu;
    ResourceVector capacity;
    std::optional<int> pool;  // empty only for standalone servers

    friend bool operator==(const Node&, const Node&) = default;
};

enum class PoolClass { Uniform, General, ComputeOptimized, MemoryOptimized, AcceleratorAssisted };

struct ObjectiveWeights {
    std::int64_t cpu = 100;   // per core
    std::int64_t accel = 10;  // per GPU or FPGA unit
    std::int64_t memory = 1;  // per GB
};

/// Normalized unit prices, relative to one GB of memory.
struct UnitCosts {
    std::int64_t cpu_core = 100;
    std::int64_t memory_gb = 1;
    std::int64_t gpu_unit = 300;
    std::int64_t fpga_unit = 100;
};

/// Maps a per-core memory ratio to a workload class. Intervals are half-open:
/// [1,3) compute, [3,6) general, [6,12] memory. Throws std::domain_error for
/// ratios outside [1,12].
[[nodiscard]] WorkloadClass classify(double memory_per_core, bool has_accelerator);

/// Mismatch penalty of placing a request of `request_class` in a pool of
/// `placement_class`: 0 for a match, 1 for general<->compute/memory, 2
/// otherwise. Uniform pools never penalize.
[[nodiscard]] int penalty(WorkloadClass request_class, PoolClass placement_class);

[[nodiscard]] std::int64_t weighted_capacity(const ResourceVector& capacity, const ObjectiveWeights& w);
[[nodiscard]] std::int64_t weighted_capacity(const Node& node, const ObjectiveWeights& w);

[[nodiscard]] std::int64_t unit_cost(const ResourceVector& capacity, const UnitCosts& c);

/// Pool class a standalone server is matched against under function-specific
/// policies, from its per-core local memory and integrated accelerators.
[[nodiscard]] PoolClass server_pool_class(const ResourceVector& capacity);

/// Node capacities and quantities of the reference inventory. Memory nodes are
/// described only by their total; individual sizes come from the pool layout.
struct NodeCatalog {
    ResourceVector cpu{32, 64, 0, 0};
    ResourceVector gpu{0, 0, 32, 0};
    ResourceVector fpga{0, 0, 0, 32};
    ResourceVector s1{32, 128, 0, 0};
    ResourceVector s2{32, 64, 0, 0};
    ResourceVector s3{32, 256, 0, 0};
    ResourceVector s4{32, 128, 32, 0};
    ResourceVector s5{32, 128, 0, 32};
    int cpu_count = 16;
    int gpu_count = 8;
    int fpga_count = 4;
    int s1_count = 4;
    int s2_count = 3;
    int s3_count = 2;
    int s4_count = 2;
    int s5_count = 1;
    int memory_total = 1280;

    [[nodiscard]] const ResourceVector& capacity(NodeKind kind) const;
    [[nodiscard]] int count(NodeKind kind) const;
};

[[nodiscard]] std::string_view to_string(WorkloadClass c);
[[nodiscard]] std::string_view to_string(AccelType t);
[[nodiscard]] std::string_view to_string(NodeKind k);
[[nodiscard]] std::string_view to_string(PoolClass c);

// Inverse of to_string; nullopt for unknown names.
[[nodiscard]] std::optional<WorkloadClass> parse_workload_class(std::string_view s);
[[nodiscard]] std::optional<AccelType> parse_accel_type(std::string_view s);
[[nodiscard]] std::optional<NodeKind> parse_node_kind(std::string_view s);
[[nodiscard]] std::optional<PoolClass> parse_pool_class(std::string_view s);

}  // namespace dpool
