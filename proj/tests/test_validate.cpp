#include <algorithm>
#include <set>

#include "doctest.h"
#include "dpool/allocator.hpp"
#include "dpool/workload.hpp"
#include "mutations.hpp"

using namespace dpool;

namespace {

bool has_code(const std::vector<Violation>& v, const std::string& code) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

Request make(int id, int cores, int memory, int threshold) {
    return Request{id, {cores, memory, 0, 0}, threshold,
                   classify(static_cast<double>(memory) / cores, false)};
}

}  // namespace

TEST_SUITE("validate") {

TEST_CASE("hand-built violations") {
    const Deployment d = build_deployment(Policy::C1, ServerMode::Separate);
    const Problem p = build_problem(d, {make(0, 8, 80, 10)});
    // Node 0 is a CPU node of pool 0; memory nodes follow the servers.
    int own = -1, foreign = -1;
    for (const Node& n : d.nodes)
        if (n.kind == NodeKind::Memory) (n.pool == 0 ? own : foreign) = n.id;
    REQUIRE(own >= 0);
    REQUIRE(foreign >= 0);

    Placement pl{0, 0, 64, {{own, 16}}, std::nullopt, 0};
    Solution s{{pl}, derive_active_nodes({pl}), {}};
    s.objective = evaluate_objective(s.placements, p);
    CHECK(validate(s, p).empty());

    Solution cross = s;
    cross.placements[0].remote_mem = {{foreign, 16}};
    cross.active_nodes = derive_active_nodes(cross.placements);
    cross.objective = evaluate_objective(cross.placements, p);
    const auto v1 = validate(cross, p);
    REQUIRE(v1.size() == 1);
    CHECK(v1[0].code == "same-pool");

    Solution low = s;
    low.placements[0].local_mem = 9;
    low.placements[0].remote_mem = {{own, 71}};
    const auto v2 = validate(low, p);
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].code == "local-threshold");

    Solution many = low;
    many.objective.total_penalty = 5;
    many.active_nodes.push_back(99);
    CHECK(validate(many, p).size() == 3);
}

TEST_CASE("every single-constraint corruption is reported") {
    std::set<std::string> categories;
    for (Policy pol : {Policy::C1, Policy::C2, Policy::C3})
        for (ServerMode m : {ServerMode::Separate, ServerMode::Mixed}) {
            WorkloadSpec spec;
            spec.count = 14;
            spec.seed = 21;
            const Problem p = build_problem(build_deployment(pol, m), generate_workload(spec));
            const SolveResult r = solve_exact(p);
            REQUIRE(r.solution);
            REQUIRE(validate(*r.solution, p).empty());
            for (const mutations::Mutation& mut : mutations::all(*r.solution, p)) {
                CAPTURE(condition_label(pol, m));
                CAPTURE(mut.name);
                CHECK(has_code(validate(mut.solution, p), mut.expected_code));
                categories.insert(mut.category);
            }
        }
    CHECK(categories == std::set<std::string>{"pool", "threshold", "capacity", "activity", "objective", "accel",
                                              "host", "count"});
}

}
