#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dpool/experiment.hpp"

using namespace dpool;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dpool_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DPOOL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string csv_of(const ExperimentReport& r) {
    std::ostringstream s;
    write_runs_csv(s, r);
    return s.str();
}

int lines(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("defaults describe the reference experiment") {
    const ExperimentConfig c = parse_config("");
    CHECK(c.runs == 11);
    CHECK(c.kind == ExperimentKind::FixedCost);
    CHECK(c.request_count == 50);
    CHECK(c.saturation_start == 100);
    CHECK(c.conditions == all_conditions());
    CHECK(c.weights.cpu == 100);
    CHECK(c.costs.gpu_unit == 300);
}

TEST_CASE("condition labels") {
    std::vector<std::string> labels;
    for (const Condition& c : all_conditions()) labels.push_back(condition_label(c.policy, c.mode));
    CHECK(labels == std::vector<std::string>{"C1_S", "C1_M", "C2_S", "C2_M", "C3_S", "C3_M"});
    CHECK(parse_condition("C3_M") == Condition{Policy::C3, ServerMode::Mixed});
    CHECK_FALSE(parse_condition("C4_S").has_value());
}

TEST_CASE("config documents") {
    const ExperimentConfig c = parse_config(R"(
runs: 3
base_seed: 77
conditions: [C2_M, C1_S]
experiment: {kind: saturation, start: 60}
solver: {kind: greedy, time_budget: 5}
confidence: 0.99
weights: {cpu: 50}
catalog:
  cpu: {cores: 32, memory: 64, count: 16}
workload:
  accel_fraction: 0.5
  cores: {mu: 4, sigma: 2, lo: 1, hi: 16}
)");
    CHECK(c.runs == 3);
    CHECK(c.base_seed == 77);
    CHECK(c.conditions == std::vector<Condition>{{Policy::C2, ServerMode::Mixed}, {Policy::C1, ServerMode::Separate}});
    CHECK(c.kind == ExperimentKind::Saturation);
    CHECK(c.saturation_start == 60);
    CHECK(c.solver == SolverKind::Greedy);
    CHECK(c.limits.time_budget == 5.0);
    CHECK(c.confidence == 0.99);
    CHECK(c.weights.cpu == 50);
    CHECK(c.weights.memory == 1);
    CHECK(c.workload.accel_fraction == 0.5);
    CHECK(c.workload.cores_dist.hi == 16.0);
}

TEST_CASE("shipped configs load") {
    const fs::path dir = fs::path(DPOOL_SOURCE_DIR) / "configs";
    const ExperimentConfig fixed = load_config(dir / "fixed_cost.yaml");
    CHECK(fixed.kind == ExperimentKind::FixedCost);
    CHECK(fixed.request_count == 50);
    CHECK(fixed.runs == 11);
    const ExperimentConfig sat = load_config(dir / "saturation.yaml");
    CHECK(sat.kind == ExperimentKind::Saturation);
    CHECK(sat.saturation_start == 200);
    CHECK(sat.limits.time_budget == 30.0);

    const ExperimentConfig half = load_config(dir / "half_scale.yaml");
    CHECK(half.request_count == 25);
    for (const Condition& c : all_conditions()) {
        const Deployment d = build_condition(half, c);
        int cores = 0, memory = 0, servers = 0;
        for (const Node& n : d.nodes) {
            if (n.kind == NodeKind::Memory) memory += n.capacity.memory;
            else cores += n.capacity.cores;
            if (n.kind != NodeKind::Cpu && n.kind != NodeKind::Memory && n.kind != NodeKind::Gpu &&
                n.kind != NodeKind::Fpga)
                ++servers;
        }
        CHECK(cores == 448);
        CHECK(memory == 640);
        CHECK(servers == 6);
    }
}

TEST_CASE("layout overrides") {
    const ExperimentConfig c = parse_config(R"(
catalog: {memory_total: 640}
layouts:
  C1:
    - {class: uniform, cpu: 4, memory: [80, 80], gpu: 2, fpga: 1}
    - {class: uniform, cpu: 4, memory: [80, 80], gpu: 2, fpga: 1}
    - {class: uniform, cpu: 4, memory: [80, 80], gpu: 2, fpga: 1}
    - {class: uniform, cpu: 4, memory: [80, 80], gpu: 2, fpga: 1}
conditions: [C1_S]
)");
    const Deployment d = build_condition(c, c.conditions.front());
    int memory = 0;
    for (const Node& n : d.nodes)
        if (n.kind == NodeKind::Memory) memory += n.capacity.memory;
    CHECK(memory == 640);
}

TEST_CASE("config errors carry a location") {
    auto message = [](const std::string& text) {
        try {
            (void)parse_config(text, "cfg.yaml");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("runs: 0\n").rfind("cfg.yaml:1:", 0) == 0);
    CHECK(message("runs: 2\nbogus: 1\n").rfind("cfg.yaml:2:1:", 0) == 0);
    CHECK(message("runs: [1\n").rfind("cfg.yaml:", 0) == 0);
    CHECK(message("solver: {kind: quantum}\n").find("exact or greedy") != std::string::npos);
    CHECK(message("conditions: [C1_X]\n").rfind("cfg.yaml:1:", 0) == 0);
    CHECK(message("confidence: 0.8\n").find("confidence") != std::string::npos);
    CHECK(message("catalog: {memory_total: 1000}\n").find("inventory mismatch") != std::string::npos);
    CHECK(message("workload: {cores: {sigma: -1}}\n").rfind("cfg.yaml:1:", 0) == 0);
    CHECK_THROWS_AS((void)load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("an empty workload gives zero cost rows") {
    ExperimentConfig c;
    c.runs = 1;
    c.conditions = {{Policy::C1, ServerMode::Separate}};
    c.request_count = 0;
    const ExperimentReport r = run_experiment(c);
    REQUIRE(r.runs.size() == 1);
    CHECK(r.runs[0].cost == 0);
    CHECK(r.runs[0].status == "optimal");
    CHECK(r.failed_runs == 0);
    CHECK(lines(csv_of(r)) == 2);
}

TEST_CASE("runs are deterministic and seeded per run index") {
    ExperimentConfig c;
    c.runs = 3;
    c.request_count = 12;
    c.conditions = {{Policy::C2, ServerMode::Separate}, {Policy::C3, ServerMode::Mixed}};
    const ExperimentReport a = run_experiment(c);
    const ExperimentReport b = run_experiment(c);
    CHECK(csv_of(a) == csv_of(b));
    CHECK(lines(csv_of(a)) == 7);
    for (const RunRecord& r : a.runs) {
        CHECK(r.seed == c.base_seed + static_cast<std::uint64_t>(r.run));
        CHECK(r.status == "optimal");
    }
    c.base_seed = 500;
    CHECK(csv_of(run_experiment(c)) != csv_of(a));
}

TEST_CASE("artifacts and plot data") {
    ExperimentConfig c;
    c.runs = 2;
    c.request_count = 10;
    c.solver = SolverKind::Greedy;
    const ExperimentReport r = run_experiment(c);
    const fs::path dir = scratch("artifacts");
    emit_artifacts(r, dir);
    for (const char* f : {"runs.csv", "summary.json", "utilization-by-condition.tsv", "cost-by-condition.tsv"})
        CHECK(fs::exists(dir / f));
    const std::string util = slurp(dir / "utilization-by-condition.tsv");
    std::vector<std::string> labels;
    std::istringstream in(util);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("condition\tcores_mean\tcores_ci", 0) == 0);
    while (std::getline(in, line)) labels.push_back(line.substr(0, line.find('\t')));
    CHECK(labels == std::vector<std::string>{"C1_S", "C1_M", "C2_S", "C2_M", "C3_S", "C3_M"});
    CHECK(lines(slurp(dir / "cost-by-condition.tsv")) == 7);
    CHECK(slurp(dir / "summary.json").find("\"condition\": \"C3_M\"") != std::string::npos);
    emit_artifacts(r, dir / "again");
    for (const char* f : {"runs.csv", "summary.json", "utilization-by-condition.tsv", "cost-by-condition.tsv"})
        CHECK(slurp(dir / f) == slurp(dir / "again" / f));
}

TEST_CASE("summaries skip failed runs") {
    ExperimentConfig c;
    c.runs = 2;
    c.request_count = 400;
    c.solver = SolverKind::Greedy;
    c.conditions = {{Policy::C1, ServerMode::Separate}};
    const ExperimentReport r = run_experiment(c);
    CHECK(r.failed_runs == 2);
    REQUIRE(r.summary.size() == 1);
    CHECK(r.summary[0].runs == 0);
    CHECK(r.summary[0].failed == 2);
}

TEST_CASE("saturation runs") {
    ExperimentConfig c;
    c.runs = 2;
    c.kind = ExperimentKind::Saturation;
    c.saturation_start = 100;
    c.solver = SolverKind::Greedy;
    c.conditions = {{Policy::C1, ServerMode::Mixed}};
    const ExperimentReport r = run_experiment(c);
    for (const RunRecord& rec : r.runs) {
        CHECK(rec.status == "saturated");
        CHECK(rec.requests > 0);
        CHECK(rec.requests < 100);
        CHECK(rec.utilization.cores.ratio > 0.0);
    }
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("cli");
    CHECK(run_cli("") == 1);
    CHECK(run_cli("bogus") == 1);
    CHECK(run_cli("run --config /nonexistent.yaml") == 1);
    CHECK(run_cli("run --policy C9") == 1);
    CHECK(run_cli("run --runs 1 --policy C2 --mode separate --count 6 --out " + (dir / "a").string()) == 0);
    CHECK(fs::exists(dir / "a" / "runs.csv"));
    CHECK(run_cli("run --runs 1 --policy C1 --mode mixed --solver greedy --count 400 --out " + (dir / "b").string()) ==
          2);
    CHECK(run_cli("generate --count 5 --seed 3 --out " + (dir / "w.txt").string()) == 0);
    CHECK(run_cli("solve --policy C3 --mode mixed --workload " + (dir / "w.txt").string() + " --out " +
                  (dir / "s.txt").string()) == 0);
    CHECK(run_cli("validate --policy C3 --mode mixed --workload " + (dir / "w.txt").string() + " --solution " +
                  (dir / "s.txt").string()) == 0);
    std::string text = slurp(dir / "s.txt");
    text.insert(text.find('\n'), "1");
    std::ofstream(dir / "bad.txt") << text;
    CHECK(run_cli("validate --policy C3 --mode mixed --workload " + (dir / "w.txt").string() + " --solution " +
                  (dir / "bad.txt").string()) == 2);
    CHECK(run_cli("export-lp --policy C1 --count 3 --penalty-cap 0 --out " + (dir / "m").string()) == 0);
    CHECK(fs::exists(dir / "m.phase1.lp"));
    CHECK(fs::exists(dir / "m.phase2.lp"));

    const std::string env = "DPOOL_OUTPUT_DIR=" + (dir / "env").string() + " ";
    CHECK(std::system((env + DPOOL_CLI_PATH + " run --runs 1 --policy C1 --mode separate --count 3 >/dev/null 2>&1")
                          .c_str()) == 0);
    CHECK(fs::exists(dir / "env" / "runs.csv"));
}

TEST_CASE("identical invocations write identical runs.csv") {
    const fs::path dir = scratch("repeat");
    const std::string args = " run --runs 2 --policy C3 --count 8 --out ";
    REQUIRE(run_cli(args + (dir / "one").string()) == 0);
    REQUIRE(run_cli(args + (dir / "two").string()) == 0);
    CHECK(slurp(dir / "one" / "runs.csv") == slurp(dir / "two" / "runs.csv"));
}

}
