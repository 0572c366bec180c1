#include "dpool/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dpool {

std::vector<Condition> all_conditions() {
    std::vector<Condition> out;
    for (Policy p : {Policy::C1, Policy::C2, Policy::C3})
        for (ServerMode m : {ServerMode::Separate, ServerMode::Mixed}) out.push_back({p, m});
    return out;
}

std::optional<Condition> parse_condition(std::string_view label) {
    const auto sep = label.find('_');
    if (sep == std::string_view::npos) return std::nullopt;
    const auto p = parse_policy(label.substr(0, sep));
    const auto m = parse_server_mode(label.substr(sep + 1));
    if (!p || !m) return std::nullopt;
    return Condition{*p, *m};
}

std::string to_string(ExperimentKind k) { return k == ExperimentKind::FixedCost ? "fixed-cost" : "saturation"; }

std::optional<ExperimentKind> parse_experiment_kind(std::string_view s) {
    if (s == "fixed-cost") return ExperimentKind::FixedCost;
    if (s == "saturation") return ExperimentKind::Saturation;
    return std::nullopt;
}

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        const YAML::Mark m = at.Mark();
        if (m.line >= 0)
            throw ConfigError(source_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": " +
                              msg);
        throw ConfigError(source_ + ": " + msg);
    }

    void expect_map(const YAML::Node& n, const std::string& what, std::initializer_list<const char*> keys) const {
        if (!n.IsMap()) fail(n, "'" + what + "' must be a mapping");
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
        }
    }

    template <typename T>
    T get(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, "'" + what + "' must be a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(n, "'" + what + "' has an invalid value '" + n.Scalar() + "'");
        }
    }

    template <typename T>
    void maybe(const YAML::Node& parent, const char* key, T& into, const std::string& what) const {
        if (const YAML::Node n = parent[key]) into = get<T>(n, what + "." + key);
    }

private:
    std::string source_;
};

void read_trunc(const Reader& r, const YAML::Node& n, const std::string& what, TruncNormalParams& p) {
    r.expect_map(n, what, {"mu", "sigma", "lo", "hi"});
    r.maybe(n, "mu", p.mu, what);
    r.maybe(n, "sigma", p.sigma, what);
    r.maybe(n, "lo", p.lo, what);
    r.maybe(n, "hi", p.hi, what);
    try {
        check_params(p);
    } catch (const std::invalid_argument& e) {
        r.fail(n, what + ": " + e.what());
    }
}

void read_catalog(const Reader& r, const YAML::Node& n, NodeCatalog& cat) {
    r.expect_map(n, "catalog", {"cpu", "gpu", "fpga", "s1", "s2", "s3", "s4", "s5", "memory_total"});
    struct Entry {
        const char* name;
        ResourceVector* cap;
        int* count;
    };
    const Entry entries[] = {{"cpu", &cat.cpu, &cat.cpu_count}, {"gpu", &cat.gpu, &cat.gpu_count},
                             {"fpga", &cat.fpga, &cat.fpga_count}, {"s1", &cat.s1, &cat.s1_count},
                             {"s2", &cat.s2, &cat.s2_count},     {"s3", &cat.s3, &cat.s3_count},
                             {"s4", &cat.s4, &cat.s4_count},     {"s5", &cat.s5, &cat.s5_count}};
    for (const Entry& e : entries) {
        const YAML::Node node = n[e.name];
        if (!node) continue;
        const std::string what = std::string("catalog.") + e.name;
        r.expect_map(node, what, {"cores", "memory", "gpu", "fpga", "count"});
        r.maybe(node, "cores", e.cap->cores, what);
        r.maybe(node, "memory", e.cap->memory, what);
        r.maybe(node, "gpu", e.cap->gpu, what);
        r.maybe(node, "fpga", e.cap->fpga, what);
        r.maybe(node, "count", *e.count, what);
        if (!e.cap->non_negative() || *e.count < 0) r.fail(node, what + " must not be negative");
    }
    r.maybe(n, "memory_total", cat.memory_total, "catalog");
}

PolicyLayout read_layout(const Reader& r, const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence() || n.size() == 0) r.fail(n, "'" + what + "' must be a non-empty list of pools");
    PolicyLayout out;
    for (const YAML::Node& pool : n) {
        r.expect_map(pool, what, {"class", "cpu", "memory", "gpu", "fpga"});
        PoolLayout p;
        if (const YAML::Node c = pool["class"]) {
            const auto cls = parse_pool_class(r.get<std::string>(c, what + ".class"));
            if (!cls) r.fail(c, "unknown pool class '" + c.Scalar() + "'");
            p.pool_class = *cls;
        }
        r.maybe(pool, "cpu", p.cpu_nodes, what);
        r.maybe(pool, "gpu", p.gpu_nodes, what);
        r.maybe(pool, "fpga", p.fpga_nodes, what);
        if (const YAML::Node m = pool["memory"]) {
            if (!m.IsSequence()) r.fail(m, what + ".memory must be a list of node sizes in GB");
            for (const YAML::Node& size : m) p.memory_nodes.push_back(r.get<int>(size, what + ".memory"));
        }
        out.push_back(std::move(p));
    }
    return out;
}

ExperimentConfig read_config(const Reader& r, const YAML::Node& root) {
    ExperimentConfig c;
    if (!root || root.IsNull()) return c;
    r.expect_map(root, "configuration", {"runs", "base_seed", "conditions", "experiment", "solver", "confidence",
                                         "output_dir", "weights", "costs", "catalog", "layouts", "workload"});

    r.maybe(root, "runs", c.runs, "runs");
    if (c.runs < 1) r.fail(root["runs"], "runs must be at least 1");
    r.maybe(root, "base_seed", c.base_seed, "base_seed");
    r.maybe(root, "output_dir", c.output_dir, "output_dir");
    if (const YAML::Node n = root["confidence"]) {
        c.confidence = r.get<double>(n, "confidence");
        try {
            if (c.confidence != 0.0) (void)t_critical(1, c.confidence);
        } catch (const std::invalid_argument& e) {
            r.fail(n, e.what());
        }
    }

    if (const YAML::Node n = root["conditions"]) {
        if (!n.IsSequence() || n.size() == 0) r.fail(n, "'conditions' must be a non-empty list such as [C1_S, C2_M]");
        c.conditions.clear();
        for (const YAML::Node& item : n) {
            const auto cond = parse_condition(r.get<std::string>(item, "conditions"));
            if (!cond) r.fail(item, "unknown condition '" + item.Scalar() + "'");
            c.conditions.push_back(*cond);
        }
    }

    if (const YAML::Node n = root["experiment"]) {
        r.expect_map(n, "experiment", {"kind", "requests", "start", "optimize"});
        if (const YAML::Node k = n["kind"]) {
            const auto kind = parse_experiment_kind(r.get<std::string>(k, "experiment.kind"));
            if (!kind) r.fail(k, "experiment.kind must be fixed-cost or saturation");
            c.kind = *kind;
        }
        r.maybe(n, "requests", c.request_count, "experiment");
        r.maybe(n, "start", c.saturation_start, "experiment");
        r.maybe(n, "optimize", c.optimize_saturation, "experiment");
        if (c.request_count < 0 || c.saturation_start < 0) r.fail(n, "request counts must not be negative");
    }

    if (const YAML::Node n = root["solver"]) {
        r.expect_map(n, "solver", {"kind", "time_budget", "node_budget"});
        if (const YAML::Node k = n["kind"]) {
            const auto kind = r.get<std::string>(k, "solver.kind");
            if (kind == "exact")
                c.solver = SolverKind::Exact;
            else if (kind == "greedy")
                c.solver = SolverKind::Greedy;
            else
                r.fail(k, "solver.kind must be exact or greedy");
        }
        r.maybe(n, "time_budget", c.limits.time_budget, "solver");
        r.maybe(n, "node_budget", c.limits.node_budget, "solver");
        if (c.limits.time_budget <= 0 || c.limits.node_budget <= 0) r.fail(n, "solver budgets must be positive");
    }

    if (const YAML::Node n = root["weights"]) {
        r.expect_map(n, "weights", {"cpu", "accel", "memory"});
        r.maybe(n, "cpu", c.weights.cpu, "weights");
        r.maybe(n, "accel", c.weights.accel, "weights");
        r.maybe(n, "memory", c.weights.memory, "weights");
        if (c.weights.cpu < 0 || c.weights.accel < 0 || c.weights.memory < 0) r.fail(n, "weights must not be negative");
    }
    if (const YAML::Node n = root["costs"]) {
        r.expect_map(n, "costs", {"cpu_core", "memory_gb", "gpu_unit", "fpga_unit"});
        r.maybe(n, "cpu_core", c.costs.cpu_core, "costs");
        r.maybe(n, "memory_gb", c.costs.memory_gb, "costs");
        r.maybe(n, "gpu_unit", c.costs.gpu_unit, "costs");
        r.maybe(n, "fpga_unit", c.costs.fpga_unit, "costs");
    }
    if (const YAML::Node n = root["catalog"]) read_catalog(r, n, c.catalog);
    if (const YAML::Node n = root["layouts"]) {
        r.expect_map(n, "layouts", {"C1", "C2", "C3"});
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            c.layouts[*parse_policy(key)] = read_layout(r, kv.second, "layouts." + key);
        }
    }

    if (const YAML::Node n = root["workload"]) {
        r.expect_map(n, "workload", {"cores", "memory_ratio", "accel_ratio", "accel_fraction", "gpu_fraction",
                                     "threshold_max"});
        if (const YAML::Node d = n["cores"]) read_trunc(r, d, "workload.cores", c.workload.cores_dist);
        if (const YAML::Node d = n["memory_ratio"]) read_trunc(r, d, "workload.memory_ratio", c.workload.mem_ratio_dist);
        if (const YAML::Node d = n["accel_ratio"]) read_trunc(r, d, "workload.accel_ratio", c.workload.accel_ratio_dist);
        r.maybe(n, "accel_fraction", c.workload.accel_fraction, "workload");
        r.maybe(n, "gpu_fraction", c.workload.gpu_fraction_of_accel, "workload");
        r.maybe(n, "threshold_max", c.workload.threshold_fraction_max, "workload");
        try {
            check_spec(c.workload);
        } catch (const std::invalid_argument& e) {
            r.fail(n, std::string("workload: ") + e.what());
        }
    }

    for (const Condition& cond : c.conditions) {
        try {
            (void)build_condition(c, cond);
        } catch (const DeploymentError& e) {
            r.fail(root, condition_label(cond.policy, cond.mode) + ": " + e.what());
        }
    }
    return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    const Reader reader(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": " + e.msg);
    }
    return read_config(reader, root);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

Deployment build_condition(const ExperimentConfig& config, const Condition& c) {
    const auto it = config.layouts.find(c.policy);
    return build_deployment(c.policy, c.mode, config.catalog,
                            it == config.layouts.end() ? std::nullopt : std::optional<PolicyLayout>(it->second));
}

namespace {

void fill_from_solution(RunRecord& rec, const Solution& s, const Problem& problem, const UnitCosts& costs) {
    rec.penalty = s.objective.total_penalty;
    rec.weighted_usage = s.objective.weighted_usage;
    rec.cost = total_cost(s, problem.deployment(), costs);
}

void run_fixed_cost(const ExperimentConfig& config, const Deployment& d, RunRecord& rec) {
    WorkloadSpec spec = config.workload;
    spec.count = config.request_count;
    spec.seed = rec.seed;
    rec.requests = spec.count;
    std::optional<Problem> problem;
    try {
        problem.emplace(build_problem(d, generate_workload(spec), config.weights));
    } catch (const InfeasibleByConstruction&) {
        rec.status = "infeasible";
        rec.failed = true;
        return;
    }
    const SolveResult r =
        config.solver == SolverKind::Exact ? solve_exact(*problem, config.limits) : solve_greedy(*problem);
    switch (r.status) {
        case SolveStatus::Optimal: rec.status = "optimal"; break;
        case SolveStatus::Feasible: rec.status = "feasible"; break;
        case SolveStatus::Infeasible: rec.status = "infeasible"; break;
        case SolveStatus::BudgetExceeded: rec.status = r.solution ? "feasible" : "budget"; break;
    }
    rec.failed = !r.solution;
    if (!r.solution) return;
    if (!validate(*r.solution, *problem).empty()) {
        rec.status = "invalid";
        rec.failed = true;
        return;
    }
    rec.ok = true;
    rec.utilization = utilization(*r.solution, *problem);
    fill_from_solution(rec, *r.solution, *problem, config.costs);
}

void run_saturation(const ExperimentConfig& config, const Deployment& d, RunRecord& rec) {
    WorkloadSpec spec = config.workload;
    spec.count = config.saturation_start;
    spec.seed = rec.seed;
    const SaturationResult s =
        saturation_capacity(d, spec, config.solver, config.limits, config.weights, config.optimize_saturation);
    rec.requests = s.n_star;
    // n* equal to the bound means the bound itself fit; capacity was not reached.
    rec.status = s.uncertain ? "uncertain" : s.n_star == spec.count ? "unsaturated" : "saturated";
    rec.utilization = s.utilization;
    if (s.n_star == 0) {
        rec.status = "infeasible";
        rec.failed = true;
        rec.ok = true;
        return;
    }
    spec.count = s.n_star;
    const Problem problem = build_problem(d, generate_workload(spec), config.weights);
    if (!s.solution || !validate(*s.solution, problem).empty()) {
        rec.status = "invalid";
        rec.failed = true;
        return;
    }
    rec.ok = true;
    fill_from_solution(rec, *s.solution, problem, config.costs);
}

Estimate estimate(const std::vector<double>& values, double confidence) {
    if (values.empty()) return {};
    if (values.size() == 1) return {values.front(), 0.0};
    const StatSummary s = summarize(values, confidence);
    return {s.mean, s.ci_half_width};
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const RunObserver& observer) {
    ExperimentReport report;
    report.kind = config.kind;
    report.base_seed = config.base_seed;
    report.confidence = config.confidence;
    for (const Condition& c : config.conditions) {
        const Deployment d = build_condition(config, c);
        for (int run = 0; run < config.runs; ++run) {
            RunRecord rec;
            rec.condition = c;
            rec.run = run;
            rec.seed = config.base_seed + static_cast<std::uint64_t>(run);
            const auto start = std::chrono::steady_clock::now();
            if (config.kind == ExperimentKind::FixedCost)
                run_fixed_cost(config, d, rec);
            else
                run_saturation(config, d, rec);
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (rec.failed) ++report.failed_runs;
            if (observer) observer(rec);
            report.runs.push_back(std::move(rec));
        }
    }
    report.summary = summarize_runs(report.runs, config.confidence);
    return report;
}

std::vector<ConditionSummary> summarize_runs(const std::vector<RunRecord>& runs, double confidence) {
    std::vector<ConditionSummary> out;
    std::vector<std::vector<const RunRecord*>> groups;
    for (const RunRecord& r : runs) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.condition == r.condition; });
        if (it == out.end()) {
            out.push_back(ConditionSummary{r.condition, 0, 0, {}, {}, {}, {}, {}, {}});
            groups.emplace_back();
            it = out.end() - 1;
        }
        const auto idx = static_cast<std::size_t>(it - out.begin());
        if (r.failed) ++it->failed;
        if (r.ok) groups[idx].push_back(&r);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto column = [&](auto field) {
            std::vector<double> v;
            for (const RunRecord* r : groups[i]) v.push_back(field(*r));
            return estimate(v, confidence);
        };
        ConditionSummary& s = out[i];
        s.runs = static_cast<int>(groups[i].size());
        s.requests = column([](const RunRecord& r) { return static_cast<double>(r.requests); });
        s.cores = column([](const RunRecord& r) { return r.utilization.cores.ratio; });
        s.memory = column([](const RunRecord& r) { return r.utilization.memory.ratio; });
        s.gpu = column([](const RunRecord& r) { return r.utilization.gpu.ratio; });
        s.fpga = column([](const RunRecord& r) { return r.utilization.fpga.ratio; });
        s.cost = column([](const RunRecord& r) { return static_cast<double>(r.cost); });
    }
    return out;
}

namespace {

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string label(const Condition& c) { return condition_label(c.policy, c.mode); }

}  // namespace

void write_runs_csv(std::ostream& out, const ExperimentReport& report) {
    out << "experiment,condition,policy,mode,run,seed,status,requests";
    for (const char* t : {"cores", "memory", "gpu", "fpga"}) out << ',' << t << "_used," << t << "_installed," << t << "_util";
    out << ",penalty,weighted_usage,cost\n";
    for (const RunRecord& r : report.runs) {
        out << to_string(report.kind) << ',' << label(r.condition) << ',' << to_string(r.condition.policy) << ','
            << to_string(r.condition.mode) << ',' << r.run << ',' << r.seed << ',' << r.status << ',' << r.requests;
        const UtilizationReport& u = r.utilization;
        for (const ResourceUse* use : {&u.cores, &u.memory, &u.gpu, &u.fpga})
            out << ',' << use->used << ',' << use->installed << ',' << fixed(use->ratio);
        out << ',' << r.penalty << ',' << r.weighted_usage << ',' << r.cost << '\n';
    }
}

void write_summary_json(std::ostream& out, const ExperimentReport& report) {
    using nlohmann::ordered_json;
    auto est = [](const Estimate& e) { return ordered_json{{"mean", e.mean}, {"ci_half_width", e.ci}}; };
    ordered_json doc;
    doc["experiment"] = to_string(report.kind);
    doc["base_seed"] = report.base_seed;
    doc["confidence"] = report.confidence;
    doc["failed_runs"] = report.failed_runs;
    ordered_json conditions = ordered_json::array();
    for (const ConditionSummary& s : report.summary) {
        ordered_json c;
        c["condition"] = label(s.condition);
        c["runs"] = s.runs;
        c["failed"] = s.failed;
        c["requests"] = est(s.requests);
        c["utilization"] = {{"cores", est(s.cores)}, {"memory", est(s.memory)}, {"gpu", est(s.gpu)}, {"fpga", est(s.fpga)}};
        c["cost"] = est(s.cost);
        conditions.push_back(std::move(c));
    }
    doc["conditions"] = std::move(conditions);
    out << doc.dump(2) << '\n';
}

void write_utilization_plot(std::ostream& out, const ExperimentReport& report) {
    out << "condition";
    for (const char* t : {"cores", "memory", "gpu", "fpga"}) out << '\t' << t << "_mean\t" << t << "_ci";
    out << '\n';
    for (const ConditionSummary& s : report.summary) {
        out << label(s.condition);
        for (const Estimate* e : {&s.cores, &s.memory, &s.gpu, &s.fpga}) out << '\t' << fixed(e->mean) << '\t' << fixed(e->ci);
        out << '\n';
    }
}

void write_cost_plot(std::ostream& out, const ExperimentReport& report) {
    out << "condition\tcost_mean\tcost_ci\n";
    for (const ConditionSummary& s : report.summary)
        out << label(s.condition) << '\t' << fixed(s.cost.mean) << '\t' << fixed(s.cost.ci) << '\n';
}

void emit_artifacts(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, void (*fn)(std::ostream&, const ExperimentReport&)) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        fn(out, report);
    };
    write("runs.csv", write_runs_csv);
    write("summary.json", write_summary_json);
    write("utilization-by-condition.tsv", write_utilization_plot);
    write("cost-by-condition.tsv", write_cost_plot);
}

}  // namespace dpool
