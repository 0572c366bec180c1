#include <stdexcept>

#include "doctest.h"
#include "dpool/model.hpp"

using namespace dpool;

TEST_SUITE("model") {

TEST_CASE("classify uses half-open class intervals") {
    CHECK(classify(2.0, false) == WorkloadClass::ComputeIntensive);
    CHECK(classify(4.5, true) == WorkloadClass::AcceleratorAssisted);
    CHECK(classify(3.0, false) == WorkloadClass::GeneralPurpose);
    CHECK(classify(1.0, false) == WorkloadClass::ComputeIntensive);
    CHECK(classify(5.999, false) == WorkloadClass::GeneralPurpose);
    CHECK(classify(6.0, false) == WorkloadClass::MemoryIntensive);
    CHECK(classify(12.0, false) == WorkloadClass::MemoryIntensive);
    CHECK_THROWS_AS((void)classify(0.99, false), std::domain_error);
    CHECK_THROWS_AS((void)classify(12.01, true), std::domain_error);
}

TEST_CASE("classify covers the whole domain") {
    for (int step = 0; step <= 1100; ++step) {
        const double ratio = 1.0 + step * 0.01;
        const WorkloadClass plain = classify(ratio, false);
        CHECK(plain != WorkloadClass::AcceleratorAssisted);
        CHECK(classify(ratio, true) == WorkloadClass::AcceleratorAssisted);
    }
}

TEST_CASE("penalty matrix") {
    using W = WorkloadClass;
    using P = PoolClass;
    CHECK(penalty(W::GeneralPurpose, P::ComputeOptimized) == 1);
    CHECK(penalty(W::GeneralPurpose, P::MemoryOptimized) == 1);
    CHECK(penalty(W::ComputeIntensive, P::General) == 1);
    CHECK(penalty(W::MemoryIntensive, P::General) == 1);
    CHECK(penalty(W::MemoryIntensive, P::MemoryOptimized) == 0);
    CHECK(penalty(W::MemoryIntensive, P::AcceleratorAssisted) == 2);
    CHECK(penalty(W::ComputeIntensive, P::MemoryOptimized) == 2);
    CHECK(penalty(W::AcceleratorAssisted, P::AcceleratorAssisted) == 0);
    CHECK(penalty(W::AcceleratorAssisted, P::General) == 2);
    for (W w : {W::ComputeIntensive, W::GeneralPurpose, W::MemoryIntensive, W::AcceleratorAssisted}) {
        CHECK(penalty(w, P::Uniform) == 0);
        for (P p : {P::General, P::ComputeOptimized, P::MemoryOptimized, P::AcceleratorAssisted}) {
            CHECK(penalty(w, p) >= 0);
            CHECK(penalty(w, p) <= 2);
        }
    }
}

TEST_CASE("weighted capacity and unit cost") {
    const NodeCatalog cat;
    const ObjectiveWeights w;
    CHECK(weighted_capacity(cat.cpu, w) == 3264);
    CHECK(weighted_capacity(cat.gpu, w) == 320);
    CHECK(weighted_capacity(ResourceVector{}, w) == 0);
    const ResourceVector s4 = cat.s4;
    CHECK(weighted_capacity(s4 + s4, w) == 2 * weighted_capacity(s4, w));
    CHECK(unit_cost(cat.s2, UnitCosts{}) == 3264);
    CHECK(unit_cost(cat.gpu, UnitCosts{}) == 9600);
    CHECK(unit_cost(cat.fpga, UnitCosts{}) == 3200);
}

TEST_CASE("catalog matches the reference inventory") {
    const NodeCatalog cat;
    CHECK(cat.cpu == ResourceVector{32, 64, 0, 0});
    CHECK(cat.s4 == ResourceVector{32, 128, 32, 0});
    CHECK(cat.s5 == ResourceVector{32, 128, 0, 32});
    CHECK(cat.count(NodeKind::Cpu) == 16);
    CHECK(cat.count(NodeKind::Gpu) == 8);
    CHECK(cat.count(NodeKind::Fpga) == 4);
    CHECK(cat.count(NodeKind::S1) + cat.count(NodeKind::S2) + cat.count(NodeKind::S3) + cat.count(NodeKind::S4) +
              cat.count(NodeKind::S5) ==
          12);
    CHECK(cat.memory_total == 1280);
}

TEST_CASE("standalone servers map to pool classes by shape") {
    const NodeCatalog cat;
    CHECK(server_pool_class(cat.s1) == PoolClass::General);
    CHECK(server_pool_class(cat.s2) == PoolClass::ComputeOptimized);
    CHECK(server_pool_class(cat.s3) == PoolClass::MemoryOptimized);
    CHECK(server_pool_class(cat.s4) == PoolClass::AcceleratorAssisted);
    CHECK(server_pool_class(cat.s5) == PoolClass::AcceleratorAssisted);
}

TEST_CASE("request invariants") {
    Request r{0, {8, 16, 0, 0}, 8, WorkloadClass::ComputeIntensive};
    CHECK(is_valid(r));
    r.local_threshold = 9;
    CHECK_FALSE(is_valid(r));
    r.local_threshold = 0;
    r.demand.memory = 7;
    CHECK_FALSE(is_valid(r));
    r.demand = {8, 32, 4, 4};
    r.workload_class = WorkloadClass::AcceleratorAssisted;
    CHECK_FALSE(is_valid(r));
    r.demand = {8, 32, 4, 0};
    CHECK(is_valid(r));
    r.workload_class = WorkloadClass::GeneralPurpose;
    CHECK_FALSE(is_valid(r));
    r = Request{0, {33, 66, 0, 0}, 0, WorkloadClass::ComputeIntensive};
    CHECK_FALSE(is_valid(r));
}

TEST_CASE("names round-trip") {
    for (NodeKind k : {NodeKind::Cpu, NodeKind::Memory, NodeKind::Gpu, NodeKind::Fpga, NodeKind::S1, NodeKind::S5})
        CHECK(parse_node_kind(to_string(k)) == k);
    for (PoolClass c : {PoolClass::Uniform, PoolClass::General, PoolClass::AcceleratorAssisted})
        CHECK(parse_pool_class(to_string(c)) == c);
    CHECK_FALSE(parse_pool_class("bogus").has_value());
}

}
