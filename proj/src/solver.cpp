#include <algorithm>
#include <climits>
#include <functional>
#include <map>
#include <numeric>
#include <tuple>

#include "dpool/allocator.hpp"
#include "search.hpp"

namespace dpool {

using namespace detail;

namespace {

constexpr int kNoPenaltyCap = INT_MAX / 4;

// A symmetry class of interchangeable nodes. Choosing `count` of them means
// making the first `count` members (in slot order) available.
struct Unit {
    enum Kind { Host, Accel, Mem } kind = Host;
    std::vector<int> members;
    std::int64_t weight = 0;
    int group = -1;  // -1 for standalone servers, which span singleton groups
    long cores = 0, memory = 0, gpu = 0, fpga = 0;
};

struct Supply {
    long cores = 0, memory = 0, gpu = 0, fpga = 0;
};

long round_up(long value, long step) { return step <= 1 ? value : (value + step - 1) / step * step; }

class ConfigSearch {
public:
    ConfigSearch(const Problem& p, int penalty_cap, Budget& budget) : p_(p), cap_(penalty_cap), budget_(budget) {
        build_units();
        for (const Request& r : p.requests()) {
            demand_.cores += r.demand.cores;
            demand_.memory += r.demand.memory;
            demand_.gpu += r.demand.gpu;
            demand_.fpga += r.demand.fpga;
        }
        suffix_.assign(units_.size() + 1, Supply{});
        suffix_weight_.assign(units_.size() + 1, 0);
        for (std::size_t i = units_.size(); i-- > 0;) {
            const Unit& u = units_[i];
            const auto n = static_cast<long>(u.members.size());
            suffix_[i] = suffix_[i + 1];
            suffix_weight_[i] = suffix_weight_[i + 1] + n * u.weight;
            suffix_[i].cores += n * u.cores;
            suffix_[i].memory += n * u.memory;
            suffix_[i].gpu += n * u.gpu;
            suffix_[i].fpga += n * u.fpga;
        }
        counts_.assign(units_.size(), 0);
        group_hosts_.assign(static_cast<std::size_t>(p.group_count()), 0);
    }

    // Cheapest configuration admitting a packing with penalty <= cap, if it
    // costs less than `incumbent`. Sets `unknown` when the budget runs out.
    std::optional<Assignment> run(std::int64_t incumbent, std::int64_t& configs, bool& unknown) {
        std::int64_t lo = rest_bound(Supply{});
        std::int64_t width = 2048;
        while (lo < incumbent) {
            const std::int64_t hi = std::min(incumbent, lo + width);
            collect(lo, hi, 0);
            if (aborted_) break;
            if (overflow_ && hi - lo > 1) {
                width = std::max<std::int64_t>(1, (hi - lo) / 4);
                continue;
            }
            std::optional<Assignment> hit;
            if (!overflow_) {
                std::stable_sort(found_.begin(), found_.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
                hit = settle(found_, configs);
            } else {
                hit = settle_level(lo, configs);
            }
            if (hit || aborted_) {
                unknown = aborted_;
                return hit;
            }
            if (found_.size() < 2000) width *= 2;
            lo = hi;
        }
        unknown = aborted_;
        return std::nullopt;
    }

private:
    const Problem& p_;
    int cap_;
    Budget& budget_;
    std::vector<Unit> units_;
    std::vector<Supply> suffix_;
    Supply demand_;
    long core_step_ = 1, gpu_step_ = 1, fpga_step_ = 1;
    std::vector<std::pair<int, int>> twin_pools_;   // pools with identical contents
    std::vector<std::vector<int>> pool_units_;       // unit indexes per pool, in signature order
    std::vector<int> counts_;
    std::vector<int> group_hosts_;
    std::vector<std::int64_t> suffix_weight_;  // cost of choosing every member from here on
    std::vector<std::pair<std::int64_t, std::vector<int>>> found_;
    std::int64_t lo_ = 0, hi_ = 0, skip_ = 0, calls_ = 0;
    bool overflow_ = false;
    bool aborted_ = false;

    static constexpr std::size_t kMaxConfigs = 200'000;

    void build_units() {
        const auto& hosts = p_.hosts();
        const auto& accels = p_.accels();
        std::map<int, int> host_unit, accel_unit;
        for (std::size_t h = 0; h < hosts.size(); ++h) {
            const HostSlot& H = hosts[h];
            auto [it, fresh] = host_unit.emplace(H.sym, static_cast<int>(units_.size()));
            if (fresh) {
                Unit u;
                u.kind = Unit::Host;
                u.weight = H.weight;
                u.group = p_.groups()[static_cast<std::size_t>(H.group)].pool ? H.group : -1;
                u.cores = H.cores;
                u.memory = H.local_mem;
                u.gpu = H.integrated == AccelType::Gpu ? H.integrated_units : 0;
                u.fpga = H.integrated == AccelType::Fpga ? H.integrated_units : 0;
                units_.push_back(u);
            }
            units_[static_cast<std::size_t>(it->second)].members.push_back(static_cast<int>(h));
        }
        for (std::size_t a = 0; a < accels.size(); ++a) {
            const AccelSlot& A = accels[a];
            auto [it, fresh] = accel_unit.emplace(A.sym, static_cast<int>(units_.size()));
            if (fresh) {
                Unit u;
                u.kind = Unit::Accel;
                u.weight = A.weight;
                u.group = A.group;
                u.gpu = A.type == AccelType::Gpu ? A.units : 0;
                u.fpga = A.type == AccelType::Fpga ? A.units : 0;
                units_.push_back(u);
            }
            units_[static_cast<std::size_t>(it->second)].members.push_back(static_cast<int>(a));
        }
        std::map<std::pair<int, int>, int> mem_unit;
        for (std::size_t m = 0; m < p_.mems().size(); ++m) {
            const MemSlot& M = p_.mems()[m];
            auto [it, fresh] = mem_unit.emplace(std::make_pair(M.group, M.capacity), static_cast<int>(units_.size()));
            if (fresh) {
                Unit u;
                u.kind = Unit::Mem;
                u.weight = M.weight;
                u.group = M.group;
                u.memory = M.capacity;
                units_.push_back(u);
            }
            units_[static_cast<std::size_t>(it->second)].members.push_back(static_cast<int>(m));
        }

        long c = 0, g = 0, f = 0;
        for (const HostSlot& H : hosts) {
            c = std::gcd(c, static_cast<long>(H.cores));
            if (H.integrated == AccelType::Gpu) g = std::gcd(g, static_cast<long>(H.integrated_units));
            if (H.integrated == AccelType::Fpga) f = std::gcd(f, static_cast<long>(H.integrated_units));
        }
        for (const AccelSlot& A : accels) {
            if (A.type == AccelType::Gpu) g = std::gcd(g, static_cast<long>(A.units));
            if (A.type == AccelType::Fpga) f = std::gcd(f, static_cast<long>(A.units));
        }
        gpu_step_ = std::max(1L, g);
        fpga_step_ = std::max(1L, f);
        core_step_ = std::max(1L, c);

        // Pools with identical contents and class are interchangeable; only
        // configurations whose count vectors are lexicographically
        // non-increasing across such pools are enumerated.
        const int pools = static_cast<int>(p_.deployment().pools.size());
        pool_units_.assign(static_cast<std::size_t>(pools), {});
        using Sig = std::tuple<int, std::int64_t, long, long, long, long, std::size_t>;
        std::vector<std::vector<Sig>> sigs(static_cast<std::size_t>(pools));
        for (std::size_t i = 0; i < units_.size(); ++i) {
            const Unit& u = units_[i];
            if (u.group < 0 || u.group >= pools) continue;
            pool_units_[static_cast<std::size_t>(u.group)].push_back(static_cast<int>(i));
        }
        for (int q = 0; q < pools; ++q) {
            auto& idx = pool_units_[static_cast<std::size_t>(q)];
            auto sig_of = [&](int i) {
                const Unit& u = units_[static_cast<std::size_t>(i)];
                return Sig{static_cast<int>(u.kind), u.weight, u.cores, u.memory, u.gpu, u.fpga, u.members.size()};
            };
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return sig_of(a) < sig_of(b); });
            for (int i : idx) sigs[static_cast<std::size_t>(q)].push_back(sig_of(i));
        }
        for (int a = 0; a < pools; ++a)
            for (int b = a + 1; b < pools; ++b) {
                if (p_.groups()[static_cast<std::size_t>(a)].placement_class !=
                    p_.groups()[static_cast<std::size_t>(b)].placement_class)
                    continue;
                if (sigs[static_cast<std::size_t>(a)] != sigs[static_cast<std::size_t>(b)]) continue;
                twin_pools_.emplace_back(a, b);
                break;  // chain a -> next twin only
            }
    }

    std::int64_t rest_bound(const Supply& s) const {
        const auto& w = p_.weights();
        return w.cpu * round_up(std::max(0L, demand_.cores - s.cores), core_step_) +
               w.memory * std::max(0L, demand_.memory - s.memory) +
               w.accel * (round_up(std::max(0L, demand_.gpu - s.gpu), gpu_step_) +
                          round_up(std::max(0L, demand_.fpga - s.fpga), fpga_step_));
    }

    bool canonical() const {
        for (const auto& [a, b] : twin_pools_) {
            const auto& ua = pool_units_[static_cast<std::size_t>(a)];
            const auto& ub = pool_units_[static_cast<std::size_t>(b)];
            for (std::size_t k = 0; k < ua.size(); ++k) {
                const int ca = counts_[static_cast<std::size_t>(ua[k])];
                const int cb = counts_[static_cast<std::size_t>(ub[k])];
                if (ca != cb) {
                    if (ca < cb) return false;
                    break;
                }
            }
        }
        return true;
    }

    void enumerate(std::size_t i, std::int64_t cost, Supply s) {
        if (overflow_ || aborted_) return;
        if ((++calls_ & 4095) == 0 && !budget_.spend()) {
            aborted_ = true;
            return;
        }
        if (cost + rest_bound(s) >= hi_ || cost + suffix_weight_[i] < lo_) return;
        const Supply& rest = suffix_[i];
        if (s.cores + rest.cores < demand_.cores || s.memory + rest.memory < demand_.memory ||
            s.gpu + rest.gpu < demand_.gpu || s.fpga + rest.fpga < demand_.fpga)
            return;
        if (i == units_.size()) {
            if (!canonical()) return;
            if (skip_ > 0) {
                --skip_;
                return;
            }
            if (found_.size() >= kMaxConfigs) {
                overflow_ = true;
                return;
            }
            found_.emplace_back(cost, counts_);
            return;
        }
        const Unit& u = units_[i];
        int max_count = static_cast<int>(u.members.size());
        if (u.kind != Unit::Host && group_hosts_[static_cast<std::size_t>(u.group)] == 0) max_count = 0;
        for (int c = 0; c <= max_count; ++c) {
            const std::int64_t next = cost + c * u.weight;
            if (next >= hi_) break;
            counts_[i] = c;
            if (u.kind == Unit::Host && u.group >= 0) group_hosts_[static_cast<std::size_t>(u.group)] += c;
            Supply t = s;
            t.cores += c * u.cores;
            t.memory += c * u.memory;
            t.gpu += c * u.gpu;
            t.fpga += c * u.fpga;
            enumerate(i + 1, next, t);
            if (u.kind == Unit::Host && u.group >= 0) group_hosts_[static_cast<std::size_t>(u.group)] -= c;
        }
        counts_[i] = 0;
    }

    using Config = std::pair<std::int64_t, std::vector<int>>;

    void collect(std::int64_t lo, std::int64_t hi, std::int64_t skip) {
        found_.clear();
        lo_ = lo;
        hi_ = hi;
        skip_ = skip;
        overflow_ = false;
        enumerate(0, 0, Supply{});
    }

    // One attempt at a configuration: greedy tries, then a node-limited
    // search. Unknown when the limit cut the search short.
    Outcome attempt(const std::vector<int>& counts, int round, std::int64_t limit, Assignment& out) {
        if (!budget_.spend()) {
            aborted_ = true;
            return Outcome::Unknown;
        }
        const Availability av = availability(counts);
        std::optional<Assignment> hit;
        if (round == 0) hit = greedy_pack(p_, av, cap_);
        const std::uint64_t tries = round == 0 ? 4 : 16;
        for (std::uint64_t k = 0; !hit && k < tries; ++k)
            hit = random_greedy_pack(p_, av, cap_, static_cast<std::uint64_t>(round) * 1000 + k);
        if (hit) {
            out = std::move(*hit);
            return Outcome::Feasible;
        }
        PackResult r = pack(p_, av, cap_, budget_, limit);
        if (r.outcome == Outcome::Unknown && budget_.exhausted()) aborted_ = true;
        if (r.outcome == Outcome::Feasible) out = std::move(r.assignment);
        return r.outcome;
    }

    // Configurations sorted by cost. Those that resist a small search are
    // retried with growing node limits; a feasible one is accepted once every
    // cheaper configuration has been refuted.
    std::optional<Assignment> settle(const std::vector<Config>& cfgs, std::int64_t& configs,
                                     int first_round = 0) {
        std::vector<std::size_t> open(cfgs.size());
        std::iota(open.begin(), open.end(), std::size_t{0});
        std::optional<std::pair<std::size_t, Assignment>> best;
        std::int64_t limit = std::int64_t{256} << (2 * first_round);
        for (int round = first_round; !open.empty(); ++round, limit *= 4) {
            std::vector<std::size_t> retry;
            for (std::size_t idx : open) {
                if (best && cfgs[idx].first >= cfgs[best->first].first) break;
                if (round == 0) ++configs;
                Assignment a;
                const Outcome o = attempt(cfgs[idx].second, round, limit, a);
                if (aborted_) return std::nullopt;
                if (o == Outcome::Unknown) retry.push_back(idx);
                if (o == Outcome::Feasible) {
                    best.emplace(idx, std::move(a));
                    break;
                }
            }
            if (best) {
                const std::int64_t bound = cfgs[best->first].first;
                std::erase_if(retry, [&](std::size_t i) { return cfgs[i].first >= bound; });
            }
            open = std::move(retry);
        }
        if (best) return std::move(best->second);
        return std::nullopt;
    }

    // A single cost level with more configurations than fit in memory. Any
    // feasible one is optimal, so batches get a first pass in enumeration
    // order and only the unresolved ones are kept for deeper searches.
    std::optional<Assignment> settle_level(std::int64_t cost, std::int64_t& configs) {
        std::vector<Config> hard;
        std::int64_t skip = 0;
        while (true) {
            for (const Config& c : found_) {
                ++configs;
                Assignment a;
                const Outcome o = attempt(c.second, 0, 256, a);
                if (aborted_) return std::nullopt;
                if (o == Outcome::Feasible) return a;
                if (o == Outcome::Unknown) {
                    if (hard.size() >= kMaxConfigs) {
                        aborted_ = true;
                        return std::nullopt;
                    }
                    hard.push_back(c);
                }
            }
            if (!overflow_) break;
            skip += static_cast<std::int64_t>(found_.size());
            collect(cost, cost + 1, skip);
            if (aborted_) return std::nullopt;
        }
        return settle(hard, configs, 1);
    }

    Availability availability(const std::vector<int>& counts) const {
        Availability av;
        av.host.assign(p_.hosts().size(), 0);
        av.accel.assign(p_.accels().size(), 0);
        av.mem_cap.assign(static_cast<std::size_t>(p_.group_count()), 0);
        for (std::size_t i = 0; i < units_.size(); ++i) {
            const Unit& u = units_[i];
            for (int k = 0; k < counts[i]; ++k) {
                const int m = u.members[static_cast<std::size_t>(k)];
                switch (u.kind) {
                    case Unit::Host: av.host[static_cast<std::size_t>(m)] = 1; break;
                    case Unit::Accel: av.accel[static_cast<std::size_t>(m)] = 1; break;
                    case Unit::Mem: av.mem_cap[static_cast<std::size_t>(u.group)] += static_cast<int>(u.memory); break;
                }
            }
        }
        return av;
    }
};

// Exact bin packing of `items` (sorted descending) into `room`. Gives up
// after `nodes` steps and then reports a fit.
bool bins_fit(const std::vector<int>& items, std::size_t i, std::vector<int>& room, std::int64_t& nodes) {
    if (i == items.size() || --nodes < 0) return true;
    for (std::size_t b = 0; b < room.size(); ++b) {
        if (room[b] < items[i]) continue;
        bool seen = false;
        for (std::size_t c = 0; c < b && !seen; ++c) seen = room[c] == room[b];
        if (seen) continue;
        room[b] -= items[i];
        const bool ok = bins_fit(items, i + 1, room, nodes);
        room[b] += items[i];
        if (ok) return true;
    }
    return false;
}

// Accelerator demand of each type packed into every provider of that type,
// nodes and integrated server units alike, ignoring pools and hosts. No fit
// here means no placement at all.
bool accelerators_fit(const Problem& p) {
    for (AccelType t : {AccelType::Gpu, AccelType::Fpga}) {
        std::vector<int> items, room;
        for (const Request& r : p.requests())
            if (r.accel_type() == t) items.push_back(r.accel_units());
        for (const AccelSlot& a : p.accels())
            if (a.type == t) room.push_back(a.units);
        for (const HostSlot& h : p.hosts())
            if (h.integrated == t) room.push_back(h.integrated_units);
        std::sort(items.begin(), items.end(), std::greater<>());
        std::int64_t nodes = 200'000;
        if (!bins_fit(items, 0, room, nodes)) return false;
    }
    return true;
}

// Any packing of the full node set: DFS rounds under different host orders
// with doubling node limits, each followed by seeded random-greedy restarts
// and a local-search repair run.
PackResult find_any(const Problem& problem, const Availability& full, Budget& budget) {
    std::int64_t limit = 20'000;
    for (std::uint64_t round = 0;; ++round) {
        for (std::uint64_t variant = 0; variant < 4; ++variant) {
            PackResult r = pack(problem, full, kNoPenaltyCap, budget, limit, variant == 0 ? 0 : round * 4 + variant);
            if (r.outcome != Outcome::Unknown || budget.exhausted()) return r;
        }
        for (std::uint64_t k = 0; k < 16; ++k)
            if (auto g = random_greedy_pack(problem, full, kNoPenaltyCap, round * 16 + k + 1))
                return {Outcome::Feasible, std::move(*g)};
        if (auto g = repair_pack(problem, full, budget, round + 1, limit))
            return {Outcome::Feasible, std::move(*g)};
        limit *= 2;
    }
}

SolveResult finish(SolveResult r, const Budget& budget, std::int64_t configs) {
    r.stats.search_nodes = budget.nodes_used();
    r.stats.configurations = configs;
    r.stats.seconds = budget.elapsed();
    return r;
}

}  // namespace

SolveResult solve_exact(const Problem& problem, const SolveLimits& limits) {
    if (limits.time_budget <= 0 || limits.node_budget <= 0) throw std::invalid_argument("solve budgets must be positive");
    Budget budget(limits.time_budget, limits.node_budget);
    std::int64_t configs = 0;
    SolveResult out;
    if (problem.requests().empty()) {
        out.status = SolveStatus::Optimal;
        out.solution = Solution{};
        return finish(out, budget, configs);
    }

    if (!accelerators_fit(problem)) return finish(out, budget, configs);

    const Availability full = full_availability(problem);
    std::optional<Solution> incumbent;
    auto offer = [&](const Assignment& a) {
        Solution s = realize(problem, a);
        if (!incumbent || s.objective < incumbent->objective) incumbent = std::move(s);
    };

    if (auto g = greedy_pack(problem, full, kNoPenaltyCap)) {
        offer(*g);
    } else {
        PackResult r = find_any(problem, full, budget);
        if (r.outcome == Outcome::Infeasible) return finish(out, budget, configs);
        if (r.outcome == Outcome::Unknown) {
            out.status = SolveStatus::BudgetExceeded;
            return finish(out, budget, configs);
        }
        offer(r.assignment);
    }
    if (!limits.optimality_required) {
        out.status = SolveStatus::Feasible;
        out.solution = incumbent;
        return finish(out, budget, configs);
    }

    // Phase 1: smallest penalty cap that admits any packing.
    const PackState root(problem, full);
    int cap = root.remaining_min_penalty();
    while (cap < incumbent->objective.total_penalty) {
        if (auto g = greedy_pack(problem, full, cap)) {
            offer(*g);
            break;
        }
        PackResult r = pack(problem, full, cap, budget);
        if (r.outcome == Outcome::Feasible) {
            offer(r.assignment);
            break;
        }
        if (r.outcome == Outcome::Unknown) {
            out.status = SolveStatus::BudgetExceeded;
            out.solution = incumbent;
            return finish(out, budget, configs);
        }
        ++cap;
    }
    cap = static_cast<int>(incumbent->objective.total_penalty);

    // Phase 2: cheapest active set at that penalty.
    ConfigSearch search(problem, cap, budget);
    bool unknown = false;
    if (auto a = search.run(incumbent->objective.weighted_usage, configs, unknown)) offer(*a);
    out.status = unknown ? SolveStatus::BudgetExceeded : SolveStatus::Optimal;
    out.solution = incumbent;
    return finish(out, budget, configs);
}

SolveResult solve_greedy(const Problem& problem) {
    Budget budget(1.0, 1);
    SolveResult out;
    if (auto g = greedy_pack(problem, full_availability(problem), kNoPenaltyCap)) {
        out.status = SolveStatus::Feasible;
        out.solution = realize(problem, *g);
    }
    return finish(out, budget, 0);
}

}  // namespace dpool
