#include <sstream>

#include "doctest.h"
#include "dpool/allocator.hpp"
#include "dpool/workload.hpp"
#include "oracle.hpp"
#include "search.hpp"

using namespace dpool;

namespace {

Request make(int id, int cores, int memory, int threshold, int gpu = 0, int fpga = 0) {
    Request r;
    r.id = id;
    r.demand = {cores, memory, gpu, fpga};
    r.local_threshold = threshold;
    r.workload_class = classify(static_cast<double>(memory) / cores, gpu + fpga > 0);
    return r;
}

std::vector<Request> seeded(int count, std::uint64_t seed) {
    WorkloadSpec spec;
    spec.count = count;
    spec.seed = seed;
    return generate_workload(spec);
}

}  // namespace

TEST_SUITE("allocator") {

TEST_CASE("problem construction") {
    const Deployment d = build_deployment(Policy::C1, ServerMode::Separate);
    CHECK(build_problem(d, {}).requests().empty());
    CHECK_THROWS_AS((void)build_problem(d, {make(0, 33, 66, 0)}), std::invalid_argument);
    Request bad = make(0, 4, 8, 0);
    bad.local_threshold = 5;
    CHECK_THROWS_AS((void)build_problem(d, {bad}), std::invalid_argument);
    CHECK_THROWS_AS((void)build_problem(d, {make(1, 4, 8, 0), make(1, 4, 8, 0)}), std::invalid_argument);
    Deployment empty;
    CHECK_THROWS_AS((void)build_problem(empty, {make(0, 1, 1, 0)}), InfeasibleByConstruction);
}

TEST_CASE("empty instance") {
    const Problem p = build_problem(build_deployment(Policy::C2, ServerMode::Mixed), {});
    const SolveResult r = solve_exact(p);
    CHECK(r.status == SolveStatus::Optimal);
    REQUIRE(r.solution);
    CHECK(r.solution->objective == Objective{0, 0});
    CHECK(r.solution->placements.empty());
    const SolveResult g = solve_greedy(p);
    REQUIRE(g.solution);
    CHECK(g.solution->objective == Objective{0, 0});
}

TEST_CASE("a single small request activates one CPU node") {
    const Deployment d = build_deployment(Policy::C1, ServerMode::Separate);
    const std::vector<Request> reqs{make(0, 8, 16, 8)};
    const SolveResult r = solve_exact(build_problem(d, reqs));
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.solution->objective == Objective{0, 3264});
    CHECK(oracle::brute_force(d, reqs, {}) == r.solution->objective);
}

TEST_CASE("a full CPU node request is feasible") {
    const Problem p = build_problem(build_deployment(Policy::C1, ServerMode::Separate), {make(0, 32, 64, 0)});
    const SolveResult r = solve_exact(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(validate(*r.solution, p).empty());
}

TEST_CASE("two large memory-intensive requests go to the memory-optimized pool") {
    const Deployment d = build_deployment(Policy::C2, ServerMode::Separate);
    const std::vector<Request> reqs{make(0, 32, 300, 0), make(1, 32, 300, 0)};
    const Problem p = build_problem(d, reqs);
    const SolveResult r = solve_exact(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.solution->objective.total_penalty == 0);
    CHECK(oracle::brute_force(d, reqs, {}) == r.solution->objective);
    int cpu = 0, mem = 0;
    for (int id : r.solution->active_nodes) {
        const Node& n = d.node(id);
        REQUIRE(n.pool);
        CHECK(d.pool(*n.pool).pool_class == PoolClass::MemoryOptimized);
        cpu += n.kind == NodeKind::Cpu;
        mem += n.kind == NodeKind::Memory;
    }
    // 600 GB against 2 x 64 GB local: 472 GB remote needs both 384 GB nodes.
    CHECK(cpu == 2);
    CHECK(mem == 2);
    CHECK(r.solution->objective.weighted_usage == 2 * 3264 + 2 * 384);
}

TEST_CASE("standalone servers serve requests entirely from their own resources") {
    Deployment d;
    d.policy = Policy::C2;
    d.server_mode = ServerMode::Separate;
    const NodeCatalog cat;
    d.nodes.push_back(Node{0, NodeKind::S4, cat.s4, std::nullopt});
    d.standalone_servers = {0};
    const Problem p = build_problem(d, {make(0, 16, 64, 10, 20), make(1, 8, 40, 0)});
    const SolveResult r = solve_exact(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(validate(*r.solution, p).empty());
    CHECK(r.solution->placements[0].accel_node == 0);
    CHECK(r.solution->placements[0].remote_mem.empty());
    // 104 GB fits in 128 GB of local memory; 33 cores do not fit in 32.
    const Problem over = build_problem(d, {make(0, 16, 64, 10, 20), make(1, 17, 40, 0)});
    CHECK(solve_exact(over).status == SolveStatus::Infeasible);
}

TEST_CASE("exact solver matches exhaustive enumeration") {
    std::mt19937_64 rng(2024);
    int feasible = 0;
    for (int t = 0; t < 400; ++t) {
        const Deployment d = oracle::random_deployment(rng, 8);
        const auto reqs = oracle::random_requests(rng, 4);
        const Problem p = build_problem(d, reqs);
        const SolveResult r = solve_exact(p);
        const auto want = oracle::brute_force(d, reqs, {});
        CAPTURE(t);
        REQUIRE(r.status != SolveStatus::BudgetExceeded);
        CHECK(r.solution.has_value() == want.has_value());
        if (!want || !r.solution) continue;
        ++feasible;
        CHECK(r.solution->objective == *want);
        CHECK(validate(*r.solution, p).empty());
        for (const Placement& pl : r.solution->placements)
            CHECK(std::binary_search(r.solution->active_nodes.begin(), r.solution->active_nodes.end(), pl.host));
    }
    CHECK(feasible > 200);
}

TEST_CASE("greedy is valid and never beats the exact optimum") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 300; ++t) {
        const Deployment d = oracle::random_deployment(rng, 8);
        const Problem p = build_problem(d, oracle::random_requests(rng, 4));
        const SolveResult g = solve_greedy(p);
        CHECK(g.status != SolveStatus::Optimal);
        if (!g.solution) continue;
        CHECK(validate(*g.solution, p).empty());
        const SolveResult e = solve_exact(p);
        REQUIRE(e.solution);
        CHECK(e.solution->objective <= g.solution->objective);
    }
}

TEST_CASE("feasibility mode agrees with the oracle on feasibility") {
    std::mt19937_64 rng(31);
    SolveLimits any;
    any.optimality_required = false;
    for (int t = 0; t < 300; ++t) {
        const Deployment d = oracle::random_deployment(rng, 8);
        const auto reqs = oracle::random_requests(rng, 4);
        const Problem p = build_problem(d, reqs);
        const SolveResult r = solve_exact(p, any);
        CAPTURE(t);
        CHECK(r.solution.has_value() == oracle::brute_force(d, reqs, {}).has_value());
        if (r.solution) CHECK(validate(*r.solution, p).empty());
    }
}

TEST_CASE("repair search finds packings the oracle says exist") {
    std::mt19937_64 rng(47);
    int found = 0, feasible = 0;
    for (int t = 0; t < 300; ++t) {
        const Deployment d = oracle::random_deployment(rng, 8);
        const auto reqs = oracle::random_requests(rng, 4);
        const Problem p = build_problem(d, reqs);
        const bool exists = oracle::brute_force(d, reqs, {}).has_value();
        detail::Budget budget(10.0, 1'000'000);
        const auto a = detail::repair_pack(p, detail::full_availability(p), budget, 1, 20'000);
        CAPTURE(t);
        if (a) {
            CHECK(exists);
            CHECK(validate(detail::realize(p, *a), p).empty());
            ++found;
        }
        feasible += exists;
    }
    CHECK(found == feasible);
}

TEST_CASE("prefixes of feasible request lists are feasible") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 150; ++t) {
        const Deployment d = oracle::random_deployment(rng, 10);
        auto reqs = oracle::random_requests(rng, 6);
        if (!solve_exact(build_problem(d, reqs)).solution) continue;
        while (!reqs.empty()) {
            reqs.pop_back();
            CHECK(solve_exact(build_problem(d, reqs)).solution.has_value());
        }
    }
}

TEST_CASE("scaling the weights scales the optimum") {
    std::mt19937_64 rng(9);
    const ObjectiveWeights tripled{300, 30, 3};
    for (int t = 0; t < 100; ++t) {
        const Deployment d = oracle::random_deployment(rng, 8);
        const auto reqs = oracle::random_requests(rng, 4);
        const SolveResult a = solve_exact(build_problem(d, reqs));
        const SolveResult b = solve_exact(build_problem(d, reqs, tripled));
        REQUIRE(a.solution.has_value() == b.solution.has_value());
        if (!a.solution) continue;
        CHECK(b.solution->objective.total_penalty == a.solution->objective.total_penalty);
        CHECK(b.solution->objective.weighted_usage == 3 * a.solution->objective.weighted_usage);
    }
}

TEST_CASE("seeded workloads on every condition") {
    for (Policy pol : {Policy::C1, Policy::C2, Policy::C3})
        for (ServerMode m : {ServerMode::Separate, ServerMode::Mixed}) {
            const Problem p = build_problem(build_deployment(pol, m), seeded(12, 3));
            const SolveResult r = solve_exact(p);
            CAPTURE(condition_label(pol, m));
            REQUIRE(r.status == SolveStatus::Optimal);
            CHECK(validate(*r.solution, p).empty());
            const SolveResult g = solve_greedy(p);
            REQUIRE(g.solution);
            CHECK(r.solution->objective <= g.solution->objective);
        }
}

TEST_CASE("budgets") {
    const Problem p = build_problem(build_deployment(Policy::C2, ServerMode::Separate), seeded(40, 4));
    CHECK_THROWS_AS((void)solve_exact(p, {0.0, 10, true}), std::invalid_argument);
    const SolveResult r = solve_exact(p, {600.0, 50, true});
    CHECK(r.status == SolveStatus::BudgetExceeded);
    if (r.solution) CHECK(validate(*r.solution, p).empty());
    const SolveResult f = solve_exact(p, {600.0, 1'000'000, false});
    CHECK(f.status == SolveStatus::Feasible);
    REQUIRE(f.solution);
    CHECK(validate(*f.solution, p).empty());
}

TEST_CASE("accelerator demands that cannot share providers are infeasible without search") {
    // Ten 32-unit GPU providers; 17-unit demands cannot pair up.
    const Deployment d = build_deployment(Policy::C1, ServerMode::Mixed);
    std::vector<Request> reqs;
    for (int i = 0; i < 10; ++i) reqs.push_back(make(i, 1, 4, 0, 17));
    const SolveResult fits = solve_exact(build_problem(d, reqs), {600.0, 1'000'000, false});
    CHECK(fits.status == SolveStatus::Feasible);
    reqs.push_back(make(10, 1, 4, 0, 17));
    const SolveResult r = solve_exact(build_problem(d, reqs), {600.0, 10, true});
    CHECK(r.status == SolveStatus::Infeasible);
    CHECK_FALSE(r.solution);
}

TEST_CASE("solution text round-trips") {
    const Problem p = build_problem(build_deployment(Policy::C1, ServerMode::Mixed), seeded(15, 6));
    const SolveResult r = solve_exact(p);
    REQUIRE(r.solution);
    std::istringstream in(solution_to_string(*r.solution));
    CHECK(read_solution(in) == *r.solution);
    std::istringstream bad("objective 0 10\nplacement 0 host 3 local x remote - accel - 0\n");
    try {
        (void)read_solution(bad);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

}
