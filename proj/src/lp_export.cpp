#include <algorithm>
#include <map>
#include <sstream>

#include "dpool/allocator.hpp"

namespace dpool {

namespace {

struct Term {
    std::int64_t coef;
    std::string var;
};

// Writes `name: terms op rhs`, wrapping long rows; LP readers cap line length.
void row(std::ostream& out, const std::string& name, const std::vector<Term>& terms, const char* op = nullptr,
         std::int64_t rhs = 0) {
    out << ' ' << name << ':';
    std::size_t on_line = 0;
    for (const Term& t : terms) {
        if (on_line == 8) {
            out << "\n   ";
            on_line = 0;
        }
        out << (t.coef < 0 ? " - " : " + ");
        const std::int64_t mag = t.coef < 0 ? -t.coef : t.coef;
        if (mag != 1) out << mag << ' ';
        out << t.var;
        ++on_line;
    }
    if (terms.empty()) out << " 0";
    if (op) out << ' ' << op << ' ' << rhs;
    out << '\n';
}

std::string hv(std::size_t i, int j) { return "r" + std::to_string(i) + "_h" + std::to_string(j); }
std::string mv(std::size_t i, int j) { return "r" + std::to_string(i) + "_m" + std::to_string(j); }
std::string av(std::size_t i, int j) { return "r" + std::to_string(i) + "_a" + std::to_string(j); }
std::string act(int j) { return "act_" + std::to_string(j); }

int units_of(const Node& n, AccelType t) { return t == AccelType::Gpu ? n.capacity.gpu : n.capacity.fpga; }

struct Model {
    std::vector<std::string> binaries;
    std::vector<std::string> integers;
    std::vector<Term> penalty;
    std::ostringstream rows;
};

Model build(const Problem& p) {
    Model m;
    const Deployment& d = p.deployment();
    const auto& reqs = p.requests();

    std::vector<int> hosts, mems, accel_nodes;
    for (const Node& n : d.nodes) {
        const bool placed = n.pool || std::find(d.standalone_servers.begin(), d.standalone_servers.end(), n.id) !=
                                          d.standalone_servers.end();
        if (!placed) continue;
        if (is_host_capable(n.kind))
            hosts.push_back(n.id);
        else if (n.kind == NodeKind::Memory)
            mems.push_back(n.id);
        else
            accel_nodes.push_back(n.id);
    }
    auto same_pool_hosts = [&](const Node& n, std::size_t i) {
        std::vector<Term> t;
        for (int h : hosts)
            if (d.node(h).pool && d.node(h).pool == n.pool) t.push_back({1, hv(i, h)});
        return t;
    };

    std::map<int, std::vector<Term>> cores_load, mem_load, accel_load;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        const Request& r = reqs[i];
        const std::string ri = "r" + std::to_string(i);
        const AccelType need = r.accel_type();
        const int units = r.accel_units();

        std::vector<Term> assign, memsum, accel_pick;
        for (int h : hosts) {
            const Node& n = d.node(h);
            assign.push_back({1, hv(i, h)});
            memsum.push_back({1, mv(i, h)});
            m.binaries.push_back(hv(i, h));
            m.integers.push_back(mv(i, h));
            const std::int64_t pen = p.penalty(static_cast<int>(i), p.group_of_host(h));
            if (pen != 0) m.penalty.push_back({pen, hv(i, h)});
            cores_load[h].push_back({r.demand.cores, hv(i, h)});
            mem_load[h].push_back({1, mv(i, h)});
            row(m.rows, ri + "_lo" + std::to_string(h), {{1, mv(i, h)}, {-r.local_threshold, hv(i, h)}}, ">=", 0);
            row(m.rows, ri + "_up" + std::to_string(h), {{1, mv(i, h)}, {-r.demand.memory, hv(i, h)}}, "<=", 0);
            if (need != AccelType::None && units_of(n, need) > 0) {
                accel_pick.push_back({1, av(i, h)});
                m.binaries.push_back(av(i, h));
                accel_load[h].push_back({units, av(i, h)});
                row(m.rows, ri + "_ai" + std::to_string(h), {{1, av(i, h)}, {-1, hv(i, h)}}, "<=", 0);
            }
        }
        for (int k : mems) {
            const Node& n = d.node(k);
            memsum.push_back({1, mv(i, k)});
            m.integers.push_back(mv(i, k));
            mem_load[k].push_back({1, mv(i, k)});
            std::vector<Term> link{{1, mv(i, k)}};
            for (Term t : same_pool_hosts(n, i)) link.push_back({-r.demand.memory, t.var});
            row(m.rows, ri + "_rm" + std::to_string(k), link, "<=", 0);
        }
        if (need != AccelType::None) {
            for (int k : accel_nodes) {
                const Node& n = d.node(k);
                if (units_of(n, need) == 0) continue;
                accel_pick.push_back({1, av(i, k)});
                m.binaries.push_back(av(i, k));
                accel_load[k].push_back({units, av(i, k)});
                std::vector<Term> link{{1, av(i, k)}};
                for (Term t : same_pool_hosts(n, i)) link.push_back({-1, t.var});
                row(m.rows, ri + "_ra" + std::to_string(k), link, "<=", 0);
            }
            row(m.rows, ri + "_accel", accel_pick, "=", 1);
        }
        row(m.rows, ri + "_assign", assign, "=", 1);
        row(m.rows, ri + "_memsum", memsum, "=", r.demand.memory);
    }

    auto cap_row = [&](const std::string& tag, int j, std::vector<Term> terms, int capacity) {
        if (terms.empty()) return;
        terms.push_back({-capacity, act(j)});
        row(m.rows, tag + std::to_string(j), terms, "<=", 0);
    };
    for (const Node& n : d.nodes) {
        cap_row("cap_c", n.id, cores_load[n.id], n.capacity.cores);
        cap_row("cap_m", n.id, mem_load[n.id], n.capacity.memory);
        cap_row("cap_a", n.id, accel_load[n.id], n.capacity.gpu + n.capacity.fpga);
    }
    return m;
}

std::string document(const Problem& p, const Model& m, const char* title, const std::vector<Term>& objective,
                     const std::string& extra_rows) {
    std::ostringstream out;
    out << "\\ " << title << " over " << p.requests().size() << " requests, " << p.deployment().nodes.size()
        << " nodes\nMinimize\n";
    row(out, "obj", objective);
    out << "Subject To\n" << m.rows.str() << extra_rows;
    out << "Bounds\n";
    for (const std::string& v : m.integers) out << " 0 <= " << v << " <= " << 1'000'000 << '\n';
    out << "Binary\n";
    for (const std::string& v : m.binaries) out << ' ' << v << '\n';
    for (const Node& n : p.deployment().nodes) out << ' ' << act(n.id) << '\n';
    out << "General\n";
    for (const std::string& v : m.integers) out << ' ' << v << '\n';
    out << "End\n";
    return out.str();
}

}  // namespace

LpExport export_lp(const Problem& problem, std::optional<std::int64_t> penalty_cap) {
    const Model m = build(problem);
    std::int64_t cap = 0;
    if (penalty_cap) {
        cap = *penalty_cap;
    } else {
        for (std::size_t i = 0; i < problem.requests().size(); ++i) {
            int worst = 0;
            for (int g = 0; g < problem.group_count(); ++g) worst = std::max(worst, problem.penalty(static_cast<int>(i), g));
            cap += worst;
        }
    }

    std::vector<Term> usage;
    for (const Node& n : problem.deployment().nodes)
        usage.push_back({weighted_capacity(n, problem.weights()), act(n.id)});

    std::ostringstream cap_row;
    if (!m.penalty.empty()) row(cap_row, "pen_cap", m.penalty, "<=", cap);

    LpExport out;
    out.phase1 = document(problem, m, "phase 1: total penalty", m.penalty, "");
    out.phase2 = document(problem, m, "phase 2: weighted active capacity", usage, cap_row.str());
    return out;
}

}  // namespace dpool
