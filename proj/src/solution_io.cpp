#include <istream>
#include <ostream>
#include <sstream>

#include "dpool/allocator.hpp"

namespace dpool {

void write_solution(std::ostream& out, const Solution& s) {
    out << "objective " << s.objective.total_penalty << ' ' << s.objective.weighted_usage << '\n';
    out << "active";
    for (int id : s.active_nodes) out << ' ' << id;
    out << '\n';
    for (const Placement& pl : s.placements) {
        out << "placement " << pl.request_id << " host " << pl.host << " local " << pl.local_mem << " remote ";
        if (pl.remote_mem.empty()) {
            out << '-';
        } else {
            bool first = true;
            for (const auto& [node, gb] : pl.remote_mem) {
                out << (first ? "" : ",") << node << ':' << gb;
                first = false;
            }
        }
        out << " accel ";
        if (pl.accel_node)
            out << *pl.accel_node << ' ' << pl.accel_units;
        else
            out << "- 0";
        out << '\n';
    }
}

std::string solution_to_string(const Solution& s) {
    std::ostringstream out;
    write_solution(out, s);
    return out.str();
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("solution line " + std::to_string(line) + ": " + msg);
}

int to_int(const std::string& text, int line) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        fail(line, "expected an integer, got '" + text + "'");
    }
    if (used != text.size()) fail(line, "expected an integer, got '" + text + "'");
    return v;
}

void expect(std::istream& in, const char* word, int line) {
    std::string w;
    if (!(in >> w) || w != word) fail(line, std::string("expected '") + word + "'");
}

}  // namespace

Solution read_solution(std::istream& in) {
    Solution s;
    bool have_objective = false;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        std::istringstream ls(text);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        std::string tok;
        if (head == "objective") {
            std::string a, b;
            if (!(ls >> a >> b)) fail(line, "objective needs two values");
            s.objective.total_penalty = to_int(a, line);
            s.objective.weighted_usage = std::stoll(b);
            have_objective = true;
        } else if (head == "active") {
            while (ls >> tok) s.active_nodes.push_back(to_int(tok, line));
        } else if (head == "placement") {
            Placement pl;
            if (!(ls >> tok)) fail(line, "missing request id");
            pl.request_id = to_int(tok, line);
            expect(ls, "host", line);
            if (!(ls >> tok)) fail(line, "missing host");
            pl.host = to_int(tok, line);
            expect(ls, "local", line);
            if (!(ls >> tok)) fail(line, "missing local memory");
            pl.local_mem = to_int(tok, line);
            expect(ls, "remote", line);
            if (!(ls >> tok)) fail(line, "missing remote list");
            if (tok != "-") {
                std::istringstream items(tok);
                std::string item;
                while (std::getline(items, item, ',')) {
                    const auto colon = item.find(':');
                    if (colon == std::string::npos) fail(line, "remote entry '" + item + "' is not node:gb");
                    pl.remote_mem[to_int(item.substr(0, colon), line)] += to_int(item.substr(colon + 1), line);
                }
            }
            expect(ls, "accel", line);
            std::string node, units;
            if (!(ls >> node >> units)) fail(line, "accel needs a node (or -) and a unit count");
            if (node != "-") pl.accel_node = to_int(node, line);
            pl.accel_units = to_int(units, line);
            if (ls >> tok) fail(line, "trailing text '" + tok + "'");
            s.placements.push_back(std::move(pl));
        } else {
            fail(line, "unknown record '" + head + "'");
        }
    }
    if (!have_objective) fail(line, "missing objective record");
    return s;
}

}  // namespace dpool
