// Weighted-violation local search for a feasible packing. Every request is
// always assigned; capacities may be exceeded and the search drives the
// weighted excess to zero with relocations and swaps.

#include <algorithm>
#include <climits>
#include <random>

#include "search.hpp"

namespace dpool::detail {

namespace {

int type_of(AccelType t) { return t == AccelType::Gpu ? 1 : t == AccelType::Fpga ? 2 : 0; }

struct Option {
    int host;
    int accel;  // slot, kIntegrated or kNoAccel
};

class Repair {
public:
    Repair(const Problem& p, const Availability& av, std::uint64_t seed) : p_(p), av_(av), rng_(seed) {
        const auto& hosts = p.hosts();
        const auto& accels = p.accels();
        const auto n = p.requests().size();
        cores_.resize(n);
        mem_.resize(n);
        thr_.resize(n);
        units_.resize(n);
        options_.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            const Request& req = p.requests()[r];
            cores_[r] = req.demand.cores;
            mem_[r] = req.demand.memory;
            thr_[r] = req.local_threshold;
            units_[r] = req.accel_units();
            const int type = type_of(req.accel_type());
            for (std::size_t h = 0; h < hosts.size(); ++h) {
                const HostSlot& H = hosts[h];
                if (!av.host[h] || H.cores < cores_[r] || H.local_mem < thr_[r]) continue;
                if (mem_[r] > H.local_mem + av.mem_cap[static_cast<std::size_t>(H.group)]) continue;
                const int hi = static_cast<int>(h);
                if (type == 0) {
                    options_[r].push_back({hi, kNoAccel});
                    continue;
                }
                if (type_of(H.integrated) == type && H.integrated_units >= units_[r])
                    options_[r].push_back({hi, kIntegrated});
                for (int a : p.groups()[static_cast<std::size_t>(H.group)].accels) {
                    const AccelSlot& A = accels[static_cast<std::size_t>(a)];
                    if (av.accel[static_cast<std::size_t>(a)] && type_of(A.type) == type && A.units >= units_[r])
                        options_[r].push_back({hi, a});
                }
            }
        }
        host_cores_.assign(hosts.size(), 0);
        host_thr_.assign(hosts.size(), 0);
        host_mem_.assign(hosts.size(), 0);
        host_int_.assign(hosts.size(), 0);
        accel_load_.assign(accels.size(), 0);
        group_remote_.assign(p.groups().size(), 0);
        w_host_.assign(hosts.size(), 1);
        w_group_.assign(p.groups().size(), 1);
        w_accel_.assign(accels.size(), 1);
        host_of_.assign(n, -1);
        accel_of_.assign(n, kNoAccel);
        tabu_.assign(n * hosts.size(), 0);
    }

    std::optional<Assignment> run(Budget& budget, std::int64_t steps) {
        const auto n = p_.requests().size();
        for (std::size_t r = 0; r < n; ++r)
            if (options_[r].empty()) return std::nullopt;
        initial();
        for (std::int64_t step = 0; step < steps; ++step) {
            if (violation_ == 0) return Assignment{host_of_, accel_of_};
            if (!budget.spend()) return std::nullopt;
            iteration_ = step;
            improve();
        }
        if (violation_ == 0) return Assignment{host_of_, accel_of_};
        return std::nullopt;
    }

private:
    const Problem& p_;
    const Availability& av_;
    std::mt19937_64 rng_;
    std::vector<int> cores_, mem_, thr_, units_;
    std::vector<std::vector<Option>> options_;

    std::vector<int> host_cores_, host_thr_, host_mem_, host_int_, accel_load_;
    std::vector<long> group_remote_;
    std::vector<long> w_host_, w_group_, w_accel_;
    std::vector<int> host_of_, accel_of_;
    std::vector<std::int64_t> tabu_;  // per (request, host): step until which returning is barred
    std::int64_t iteration_ = 0;
    long violation_ = 0;  // unweighted total excess

    // Excess of one host, one group, one accelerator.
    long host_excess(int h) const {
        const HostSlot& H = p_.hosts()[static_cast<std::size_t>(h)];
        const auto hs = static_cast<std::size_t>(h);
        return std::max(0, host_cores_[hs] - H.cores) + std::max(0, host_thr_[hs] - H.local_mem) +
               std::max(0, host_int_[hs] - H.integrated_units);
    }
    long group_excess(int g) const {
        return std::max(0L, group_remote_[static_cast<std::size_t>(g)] - av_.mem_cap[static_cast<std::size_t>(g)]);
    }
    long accel_excess(int a) const {
        return std::max(0, accel_load_[static_cast<std::size_t>(a)] - p_.accels()[static_cast<std::size_t>(a)].units);
    }
    int overflow(int h) const {
        const auto hs = static_cast<std::size_t>(h);
        return std::max(0, host_mem_[hs] - p_.hosts()[hs].local_mem);
    }

    // Hosts, groups and accelerators a move touches, without repeats.
    struct Touched {
        int hosts[2], groups[2], accels[4];
        int nh = 0, ng = 0, na = 0;

        void host(int h, int g) {
            if (std::find(hosts, hosts + nh, h) == hosts + nh) hosts[nh++] = h;
            if (std::find(groups, groups + ng, g) == groups + ng) groups[ng++] = g;
        }
        void accel(int a) {
            if (a >= 0 && std::find(accels, accels + na, a) == accels + na) accels[na++] = a;
        }
    };

    // Weighted and plain excess over the touched constraints.
    std::pair<long, long> excess(const Touched& t) const {
        long weighted = 0, plain = 0;
        for (int i = 0; i < t.nh; ++i) {
            const long e = host_excess(t.hosts[i]);
            weighted += e * w_host_[static_cast<std::size_t>(t.hosts[i])];
            plain += e;
        }
        for (int i = 0; i < t.ng; ++i) {
            const long e = group_excess(t.groups[i]);
            weighted += e * w_group_[static_cast<std::size_t>(t.groups[i])];
            plain += e;
        }
        for (int i = 0; i < t.na; ++i) {
            const long e = accel_excess(t.accels[i]);
            weighted += e * w_accel_[static_cast<std::size_t>(t.accels[i])];
            plain += e;
        }
        return {weighted, plain};
    }

    void place(int r, int h, int a, int sign) {
        const auto rs = static_cast<std::size_t>(r);
        const auto hs = static_cast<std::size_t>(h);
        const int g = p_.hosts()[hs].group;
        const int before = overflow(h);
        host_cores_[hs] += sign * cores_[rs];
        host_thr_[hs] += sign * thr_[rs];
        host_mem_[hs] += sign * mem_[rs];
        group_remote_[static_cast<std::size_t>(g)] += overflow(h) - before;
        if (a == kIntegrated) host_int_[hs] += sign * units_[rs];
        if (a >= 0) accel_load_[static_cast<std::size_t>(a)] += sign * units_[rs];
        if (sign > 0) {
            host_of_[rs] = h;
            accel_of_[rs] = a;
        }
    }

    void touch(Touched& t, int h, int a) const {
        t.host(h, p_.hosts()[static_cast<std::size_t>(h)].group);
        t.accel(a);
    }

    void initial() {
        std::vector<int> order(p_.requests().size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            return cores_[static_cast<std::size_t>(x)] * 10 + mem_[static_cast<std::size_t>(x)] >
                   cores_[static_cast<std::size_t>(y)] * 10 + mem_[static_cast<std::size_t>(y)];
        });
        for (int r : order) {
            long best = LONG_MAX;
            std::vector<Option> ties;
            for (const Option& o : options_[static_cast<std::size_t>(r)]) {
                Touched t;
                touch(t, o.host, o.accel);
                const long before = excess(t).first;
                place(r, o.host, o.accel, +1);
                const long delta = excess(t).first - before;
                place(r, o.host, o.accel, -1);
                if (delta < best) {
                    best = delta;
                    ties.clear();
                }
                if (delta == best) ties.push_back(o);
            }
            const Option o = ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng_)];
            place(r, o.host, o.accel, +1);
        }
        recount();
    }

    void recount() {
        violation_ = 0;
        for (std::size_t h = 0; h < host_cores_.size(); ++h) violation_ += host_excess(static_cast<int>(h));
        for (std::size_t g = 0; g < group_remote_.size(); ++g) violation_ += group_excess(static_cast<int>(g));
        for (std::size_t a = 0; a < accel_load_.size(); ++a) violation_ += accel_excess(static_cast<int>(a));
    }

    bool in_violation(int r) const {
        const auto rs = static_cast<std::size_t>(r);
        const int h = host_of_[rs];
        if (host_excess(h) > 0 || group_excess(p_.hosts()[static_cast<std::size_t>(h)].group) > 0) return true;
        return accel_of_[rs] >= 0 && accel_excess(accel_of_[rs]) > 0;
    }

    // Weighted change from relocating r to (h, a).
    std::pair<long, long> relocate_delta(int r, int h, int a) {
        const auto rs = static_cast<std::size_t>(r);
        const int h0 = host_of_[rs], a0 = accel_of_[rs];
        Touched t;
        touch(t, h0, a0);
        touch(t, h, a);
        const auto before = excess(t);
        place(r, h0, a0, -1);
        place(r, h, a, +1);
        const auto after = excess(t);
        place(r, h, a, -1);
        place(r, h0, a0, +1);
        return {after.first - before.first, after.second - before.second};
    }

    // Weighted change from exchanging hosts of r and s; both keep an
    // accelerator option valid on the other's host or the swap is refused.
    bool swap_options(int r, int s, Option& for_r, Option& for_s) const {
        const auto rs = static_cast<std::size_t>(r), ss = static_cast<std::size_t>(s);
        auto pick = [&](int req, int host, int prefer, Option& out) {
            bool found = false;
            for (const Option& o : options_[static_cast<std::size_t>(req)]) {
                if (o.host != host) continue;
                if (!found || o.accel == prefer) out = o;
                found = true;
            }
            return found;
        };
        return pick(r, host_of_[ss], accel_of_[ss], for_r) && pick(s, host_of_[rs], accel_of_[rs], for_s);
    }

    std::pair<long, long> swap_delta(int r, int s, const Option& for_r, const Option& for_s) {
        const auto rs = static_cast<std::size_t>(r), ss = static_cast<std::size_t>(s);
        const int hr = host_of_[rs], ar = accel_of_[rs], hs = host_of_[ss], as = accel_of_[ss];
        Touched t;
        touch(t, hr, ar);
        touch(t, hs, as);
        t.accel(for_r.accel);
        t.accel(for_s.accel);
        const auto before = excess(t);
        place(r, hr, ar, -1);
        place(s, hs, as, -1);
        place(r, for_r.host, for_r.accel, +1);
        place(s, for_s.host, for_s.accel, +1);
        const auto after = excess(t);
        place(r, for_r.host, for_r.accel, -1);
        place(s, for_s.host, for_s.accel, -1);
        place(r, hr, ar, +1);
        place(s, hs, as, +1);
        return {after.first - before.first, after.second - before.second};
    }

    bool is_tabu(int r, int h) const {
        return tabu_[static_cast<std::size_t>(r) * p_.hosts().size() + static_cast<std::size_t>(h)] > iteration_;
    }
    void mark_tabu(int r, int h) {
        const std::int64_t tenure = 5 + static_cast<std::int64_t>(rng_() % 10);
        tabu_[static_cast<std::size_t>(r) * p_.hosts().size() + static_cast<std::size_t>(h)] = iteration_ + tenure;
    }

    void improve() {
        const auto n = static_cast<int>(p_.requests().size());
        std::vector<int> hot;
        for (int r = 0; r < n; ++r)
            if (in_violation(r)) hot.push_back(r);
        const int r = hot[std::uniform_int_distribution<std::size_t>(0, hot.size() - 1)(rng_)];
        const auto rs = static_cast<std::size_t>(r);

        long best = LONG_MAX, best_plain = 0;
        int best_kind = -1, best_s = -1;
        Option best_o{}, best_os{};
        int ties = 0;
        auto consider = [&](long d, long plain, int kind, int s, const Option& o, const Option& os, bool tabu) {
            // Tabu moves pass only if they clear every violation.
            if (tabu && violation_ + plain > 0) return;
            if (d < best) {
                best = d;
                ties = 0;
            } else if (d > best) {
                return;
            }
            ++ties;
            if (std::uniform_int_distribution<int>(1, ties)(rng_) != 1) return;
            best_plain = plain;
            best_kind = kind;
            best_s = s;
            best_o = o;
            best_os = os;
        };
        for (const Option& o : options_[rs]) {
            if (o.host == host_of_[rs] && o.accel == accel_of_[rs]) continue;
            const auto [d, plain] = relocate_delta(r, o.host, o.accel);
            consider(d, plain, 0, -1, o, o, is_tabu(r, o.host));
        }
        for (int s = 0; s < n; ++s) {
            const auto ss = static_cast<std::size_t>(s);
            if (s == r || host_of_[ss] == host_of_[rs]) continue;
            Option for_r, for_s;
            if (!swap_options(r, s, for_r, for_s)) continue;
            const auto [d, plain] = swap_delta(r, s, for_r, for_s);
            consider(d, plain, 1, s, for_r, for_s, is_tabu(r, for_r.host) || is_tabu(s, for_s.host));
        }
        (void)best_plain;
        if (best_kind < 0) return;
        if (best >= 0) breakout();
        const int h0 = host_of_[rs];
        if (best_kind == 0) {
            place(r, h0, accel_of_[rs], -1);
            place(r, best_o.host, best_o.accel, +1);
            mark_tabu(r, h0);
        } else {
            const auto ss = static_cast<std::size_t>(best_s);
            const int hs = host_of_[ss];
            place(r, h0, accel_of_[rs], -1);
            place(best_s, hs, accel_of_[ss], -1);
            place(r, best_o.host, best_o.accel, +1);
            place(best_s, best_os.host, best_os.accel, +1);
            mark_tabu(r, h0);
            mark_tabu(best_s, hs);
        }
        recount();
    }

    // Local minimum: raise the weight of every violated constraint.
    void breakout() {
        for (std::size_t h = 0; h < host_cores_.size(); ++h)
            if (host_excess(static_cast<int>(h)) > 0) ++w_host_[h];
        for (std::size_t g = 0; g < group_remote_.size(); ++g)
            if (group_excess(static_cast<int>(g)) > 0) ++w_group_[g];
        for (std::size_t a = 0; a < accel_load_.size(); ++a)
            if (accel_excess(static_cast<int>(a)) > 0) ++w_accel_[a];
    }
};

}  // namespace

std::optional<Assignment> repair_pack(const Problem& p, const Availability& av, Budget& budget, std::uint64_t seed,
                                      std::int64_t steps) {
    Repair repair(p, av, seed);
    return repair.run(budget, steps);
}

}  // namespace dpool::detail
