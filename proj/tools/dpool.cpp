// Command-line front end: experiment runs, workload generation, single
// solves, LP export and solution validation.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dpool/experiment.hpp"

using namespace dpool;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> count;
    std::string policy, mode, solver, out, experiment, workload, solution;
    std::optional<double> time_budget;
    std::optional<std::int64_t> penalty_cap;
};

ExperimentConfig base_config(const Options& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (!o.solver.empty()) {
        if (o.solver == "exact")
            c.solver = SolverKind::Exact;
        else if (o.solver == "greedy")
            c.solver = SolverKind::Greedy;
        else
            throw UsageError("--solver must be exact or greedy");
    }
    if (o.time_budget) {
        if (*o.time_budget <= 0) throw UsageError("--time-budget must be positive");
        c.limits.time_budget = *o.time_budget;
    }
    return c;
}

Policy policy_arg(const std::string& s) {
    const auto p = parse_policy(s);
    if (!p) throw UsageError("unknown policy '" + s + "' (expected C1, C2 or C3)");
    return *p;
}

ServerMode mode_arg(const std::string& s) {
    const auto m = parse_server_mode(s);
    if (!m) throw UsageError("unknown server mode '" + s + "' (expected separate or mixed)");
    return *m;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<Request> workload_of(const ExperimentConfig& c, const Options& o) {
    if (!o.workload.empty()) {
        std::istringstream in(read_file(o.workload));
        return read_workload(in);
    }
    WorkloadSpec spec = c.workload;
    spec.count = o.count.value_or(c.request_count);
    spec.seed = o.seed.value_or(c.base_seed);
    if (spec.count < 0) throw UsageError("--count must not be negative");
    return generate_workload(spec);
}

Problem instance_of(const Options& o, ExperimentConfig& c) {
    const Condition cond{policy_arg(o.policy.empty() ? "C1" : o.policy), mode_arg(o.mode.empty() ? "separate" : o.mode)};
    return build_problem(build_condition(c, cond), workload_of(c, o), c.weights);
}

void print_utilization(std::ostream& out, const UtilizationReport& u) {
    out << "utilization cores " << u.cores.used << '/' << u.cores.installed << " memory " << u.memory.used << '/'
        << u.memory.installed << " gpu " << u.gpu.used << '/' << u.gpu.installed << " fpga " << u.fpga.used << '/'
        << u.fpga.installed << '\n';
}

int cmd_run(const Options& o) {
    ExperimentConfig c = base_config(o);
    if (o.seed) c.base_seed = *o.seed;
    if (o.runs) {
        if (*o.runs < 1) throw UsageError("--runs must be at least 1");
        c.runs = *o.runs;
    }
    if (!o.experiment.empty()) {
        const auto k = parse_experiment_kind(o.experiment);
        if (!k) throw UsageError("--experiment must be fixed-cost or saturation");
        c.kind = *k;
    }
    if (o.count) {
        if (*o.count < 0) throw UsageError("--count must not be negative");
        (c.kind == ExperimentKind::FixedCost ? c.request_count : c.saturation_start) = *o.count;
    }
    if (!o.policy.empty() || !o.mode.empty()) {
        std::vector<Condition> kept;
        const auto p = o.policy.empty() ? std::nullopt : std::optional<Policy>(policy_arg(o.policy));
        const auto m = o.mode.empty() ? std::nullopt : std::optional<ServerMode>(mode_arg(o.mode));
        for (const Condition& cond : c.conditions)
            if ((!p || cond.policy == *p) && (!m || cond.mode == *m)) kept.push_back(cond);
        if (kept.empty()) throw UsageError("no configured condition matches --policy/--mode");
        c.conditions = kept;
    }
    if (const char* env = std::getenv("DPOOL_OUTPUT_DIR"); env && *env) c.output_dir = env;
    if (!o.out.empty()) c.output_dir = o.out;

    const ExperimentReport report = run_experiment(c, [](const RunRecord& r) {
        std::fprintf(stderr, "%s run %d seed %llu: %s, %d requests, cost %lld (%.1f s)\n",
                     condition_label(r.condition.policy, r.condition.mode).c_str(), r.run,
                     static_cast<unsigned long long>(r.seed), r.status.c_str(), r.requests,
                     static_cast<long long>(r.cost), r.seconds);
    });
    emit_artifacts(report, c.output_dir);

    std::printf("%-6s %5s %10s %18s %18s %20s\n", "cond", "runs", "requests", "cpu util", "memory util", "cost");
    for (const ConditionSummary& s : report.summary)
        std::printf("%-6s %5d %10.1f %10.4f ± %.4f %10.4f ± %.4f %12.0f ± %.0f\n",
                    condition_label(s.condition.policy, s.condition.mode).c_str(), s.runs, s.requests.mean,
                    s.cores.mean, s.cores.ci, s.memory.mean, s.memory.ci, s.cost.mean, s.cost.ci);
    std::printf("artifacts written to %s\n", c.output_dir.c_str());
    if (report.failed_runs > 0) {
        std::fprintf(stderr, "%d run(s) failed\n", report.failed_runs);
        return kInfeasible;
    }
    return kOk;
}

int cmd_generate(const Options& o) {
    const ExperimentConfig c = base_config(o);
    const std::vector<Request> reqs = workload_of(c, o);
    if (o.out.empty()) {
        write_workload(std::cout, reqs);
    } else {
        std::ofstream out(o.out);
        if (!out) throw UsageError("cannot write " + o.out);
        write_workload(out, reqs);
    }
    return kOk;
}

int cmd_solve(const Options& o) {
    ExperimentConfig c = base_config(o);
    const Problem p = instance_of(o, c);
    const SolveResult r = c.solver == SolverKind::Exact ? solve_exact(p, c.limits) : solve_greedy(p);
    std::cout << "status " << to_string(r.status) << " (" << r.stats.search_nodes << " nodes, "
              << r.stats.configurations << " configurations, " << r.stats.seconds << " s)\n";
    if (!r.solution) return kInfeasible;
    std::cout << "objective " << r.solution->objective.total_penalty << ' ' << r.solution->objective.weighted_usage
              << "\ncost " << total_cost(*r.solution, p.deployment(), c.costs) << '\n';
    print_utilization(std::cout, utilization(*r.solution, p));
    if (!o.out.empty()) {
        std::ofstream out(o.out);
        if (!out) throw UsageError("cannot write " + o.out);
        write_solution(out, *r.solution);
    }
    return r.status == SolveStatus::Infeasible ? kInfeasible : kOk;
}

int cmd_export_lp(const Options& o) {
    ExperimentConfig c = base_config(o);
    const Problem p = instance_of(o, c);
    const LpExport lp = export_lp(p, o.penalty_cap);
    const std::string prefix = o.out.empty() ? "model" : o.out;
    for (const auto& [suffix, text] : {std::pair{".phase1.lp", &lp.phase1}, std::pair{".phase2.lp", &lp.phase2}}) {
        std::ofstream out(prefix + suffix);
        if (!out) throw UsageError("cannot write " + prefix + suffix);
        out << *text;
        std::cout << "wrote " << prefix << suffix << '\n';
    }
    return kOk;
}

int cmd_validate(const Options& o) {
    ExperimentConfig c = base_config(o);
    const Problem p = instance_of(o, c);
    std::istringstream in(read_file(o.solution));
    const Solution s = read_solution(in);
    const std::vector<Violation> v = validate(s, p);
    for (const Violation& x : v) std::cout << x.code << ": " << x.detail << '\n';
    if (!v.empty()) return kInfeasible;
    std::cout << "valid, objective " << s.objective.total_penalty << ' ' << s.objective.weighted_usage << '\n';
    return kOk;
}

void instance_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--policy", o.policy, "C1, C2 or C3 (default C1)");
    cmd->add_option("--mode", o.mode, "separate or mixed (default separate)");
    cmd->add_option("--seed", o.seed, "workload seed (default: base_seed)");
    cmd->add_option("--count", o.count, "number of requests (default: experiment request count)");
    cmd->add_option("--workload", o.workload, "read requests from a workload file instead of generating them");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resource allocation in disaggregated data centers: experiments and tools"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "run an experiment and write runs.csv, summary.json and plot data");
    run->add_option("--seed", o.seed, "base seed");
    run->add_option("--runs", o.runs, "runs per condition");
    run->add_option("--policy", o.policy, "only conditions with this policy");
    run->add_option("--mode", o.mode, "only conditions with this server mode");
    run->add_option("--experiment", o.experiment, "fixed-cost or saturation");
    run->add_option("--count", o.count, "requests per run (fixed-cost) or prefix upper bound (saturation)");
    run->add_option("--out", o.out, "output directory (overrides DPOOL_OUTPUT_DIR and the config)");

    auto* gen = app.add_subcommand("generate", "print a seeded workload");
    gen->add_option("--seed", o.seed, "workload seed");
    gen->add_option("--count", o.count, "number of requests");
    gen->add_option("--out", o.out, "output file (default stdout)");

    auto* solve = app.add_subcommand("solve", "solve one instance");
    instance_flags(solve, o);
    solve->add_option("--out", o.out, "write the solution to this file");

    auto* lp = app.add_subcommand("export-lp", "write the instance as two-phase CPLEX LP files");
    instance_flags(lp, o);
    lp->add_option("--out", o.out, "file prefix (default: model)");
    lp->add_option("--penalty-cap", o.penalty_cap, "phase 2 bound on total penalty");

    auto* val = app.add_subcommand("validate", "check a solution file against an instance");
    instance_flags(val, o);
    val->add_option("--solution", o.solution, "solution file")->required();

    for (CLI::App* cmd : {run, gen, solve, lp, val}) {
        cmd->add_option("--config", o.config, "YAML experiment configuration");
        if (cmd != gen) {
            cmd->add_option("--solver", o.solver, "exact or greedy");
            cmd->add_option("--time-budget", o.time_budget, "seconds per exact solve");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) return cmd_run(o);
        if (*gen) return cmd_generate(o);
        if (*solve) return cmd_solve(o);
        if (*lp) return cmd_export_lp(o);
        if (*val) return cmd_validate(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const InfeasibleByConstruction& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
