#include "dpool/model.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

namespace dpool {

bool is_valid(const Request& r) {
    const auto& d = r.demand;
    if (!d.non_negative()) return false;
    if (d.cores < 1 || d.cores > 32) return false;
    if (d.memory < d.cores || d.memory > 12 * d.cores) return false;
    if (r.local_threshold < 0 || r.local_threshold > d.memory / 2) return false;
    if (d.gpu > 0 && d.fpga > 0) return false;
    const int accel = d.gpu + d.fpga;
    if (accel > 32) return false;
    return (accel > 0) == (r.workload_class == WorkloadClass::AcceleratorAssisted);
}

WorkloadClass classify(double memory_per_core, bool has_accelerator) {
    if (!(memory_per_core >= 1.0 && memory_per_core <= 12.0)) {
        throw std::domain_error("memory per core " + std::to_string(memory_per_core) +
                                " outside [1, 12]");
    }
    if (has_accelerator) return WorkloadClass::AcceleratorAssisted;
    if (memory_per_core < 3.0) return WorkloadClass::ComputeIntensive;
    if (memory_per_core < 6.0) return WorkloadClass::GeneralPurpose;
    return WorkloadClass::MemoryIntensive;
}

int penalty(WorkloadClass request_class, PoolClass placement_class) {
    using W = WorkloadClass;
    using P = PoolClass;
    if (placement_class == P::Uniform) return 0;
    switch (request_class) {
        case W::ComputeIntensive:
            if (placement_class == P::ComputeOptimized) return 0;
            return placement_class == P::General ? 1 : 2;
        case W::MemoryIntensive:
            if (placement_class == P::MemoryOptimized) return 0;
            return placement_class == P::General ? 1 : 2;
        case W::GeneralPurpose:
            if (placement_class == P::General) return 0;
            if (placement_class == P::ComputeOptimized || placement_class == P::MemoryOptimized) return 1;
            return 2;
        case W::AcceleratorAssisted:
            return placement_class == P::AcceleratorAssisted ? 0 : 2;
    }
    return 2;
}

std::int64_t weighted_capacity(const ResourceVector& c, const ObjectiveWeights& w) {
    return w.cpu * c.cores + w.memory * c.memory + w.accel * (c.gpu + c.fpga);
}

std::int64_t weighted_capacity(const Node& node, const ObjectiveWeights& w) {
    return weighted_capacity(node.capacity, w);
}

std::int64_t unit_cost(const ResourceVector& c, const UnitCosts& u) {
    return u.cpu_core * c.cores + u.memory_gb * c.memory + u.gpu_unit * c.gpu + u.fpga_unit * c.fpga;
}

PoolClass server_pool_class(const ResourceVector& capacity) {
    if (capacity.gpu > 0 || capacity.fpga > 0) return PoolClass::AcceleratorAssisted;
    if (capacity.cores <= 0) return PoolClass::General;
    const double per_core = static_cast<double>(capacity.memory) / capacity.cores;
    if (per_core < 3.0) return PoolClass::ComputeOptimized;
    if (per_core < 6.0) return PoolClass::General;
    return PoolClass::MemoryOptimized;
}

const ResourceVector& NodeCatalog::capacity(NodeKind kind) const {
    switch (kind) {
        case NodeKind::Cpu: return cpu;
        case NodeKind::Gpu: return gpu;
        case NodeKind::Fpga: return fpga;
        case NodeKind::S1: return s1;
        case NodeKind::S2: return s2;
        case NodeKind::S3: return s3;
        case NodeKind::S4: return s4;
        case NodeKind::S5: return s5;
        case NodeKind::Memory: break;
    }
    throw std::invalid_argument("memory node capacity is set by the pool layout");
}

int NodeCatalog::count(NodeKind kind) const {
    switch (kind) {
        case NodeKind::Cpu: return cpu_count;
        case NodeKind::Gpu: return gpu_count;
        case NodeKind::Fpga: return fpga_count;
        case NodeKind::S1: return s1_count;
        case NodeKind::S2: return s2_count;
        case NodeKind::S3: return s3_count;
        case NodeKind::S4: return s4_count;
        case NodeKind::S5: return s5_count;
        case NodeKind::Memory: break;
    }
    throw std::invalid_argument("memory nodes are counted by the pool layout");
}

namespace {

constexpr std::array<std::pair<WorkloadClass, std::string_view>, 4> kWorkloadNames{{
    {WorkloadClass::ComputeIntensive, "compute"},
    {WorkloadClass::GeneralPurpose, "general"},
    {WorkloadClass::MemoryIntensive, "memory"},
    {WorkloadClass::AcceleratorAssisted, "accelerator"},
}};

constexpr std::array<std::pair<AccelType, std::string_view>, 3> kAccelNames{{
    {AccelType::None, "none"},
    {AccelType::Gpu, "gpu"},
    {AccelType::Fpga, "fpga"},
}};

constexpr std::array<std::pair<NodeKind, std::string_view>, 9> kKindNames{{
    {NodeKind::Cpu, "cpu"},
    {NodeKind::Memory, "memory"},
    {NodeKind::Gpu, "gpu"},
    {NodeKind::Fpga, "fpga"},
    {NodeKind::S1, "s1"},
    {NodeKind::S2, "s2"},
    {NodeKind::S3, "s3"},
    {NodeKind::S4, "s4"},
    {NodeKind::S5, "s5"},
}};

constexpr std::array<std::pair<PoolClass, std::string_view>, 5> kPoolNames{{
    {PoolClass::Uniform, "uniform"},
    {PoolClass::General, "general"},
    {PoolClass::ComputeOptimized, "compute-optimized"},
    {PoolClass::MemoryOptimized, "memory-optimized"},
    {PoolClass::AcceleratorAssisted, "accelerator-assisted"},
}};

template <typename Table, typename E>
std::string_view name_of(const Table& table, E value) {
    for (const auto& [v, name] : table)
        if (v == value) return name;
    return "?";
}

template <typename Table>
auto value_of(const Table& table, std::string_view name) -> std::optional<typename Table::value_type::first_type> {
    for (const auto& [v, n] : table)
        if (n == name) return v;
    return std::nullopt;
}

}  // namespace

std::string_view to_string(WorkloadClass c) { return name_of(kWorkloadNames, c); }
std::string_view to_string(AccelType t) { return name_of(kAccelNames, t); }
std::string_view to_string(NodeKind k) { return name_of(kKindNames, k); }
std::string_view to_string(PoolClass c) { return name_of(kPoolNames, c); }

std::optional<WorkloadClass> parse_workload_class(std::string_view s) { return value_of(kWorkloadNames, s); }
std::optional<AccelType> parse_accel_type(std::string_view s) { return value_of(kAccelNames, s); }
std::optional<NodeKind> parse_node_kind(std::string_view s) { return value_of(kKindNames, s); }
std::optional<PoolClass> parse_pool_class(std::string_view s) { return value_of(kPoolNames, s); }

}  // namespace dpool
