#include "search.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

namespace dpool::detail {

namespace {

// Items above this size cannot share a 32-wide host or accelerator.
constexpr int kBigItem = 16;

int type_index(AccelType t) { return t == AccelType::Gpu ? 1 : t == AccelType::Fpga ? 2 : 0; }

std::vector<int> demand_order(const Problem& p) {
    const auto& reqs = p.requests();
    const auto& w = p.weights();
    std::vector<int> order(reqs.size());
    std::iota(order.begin(), order.end(), 0);
    auto weight = [&](int r) {
        const auto& d = reqs[static_cast<std::size_t>(r)].demand;
        return w.cpu * d.cores + w.memory * d.memory + w.accel * (d.gpu + d.fpga);
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weight(a) > weight(b); });
    return order;
}

}  // namespace

Availability full_availability(const Problem& p) {
    Availability av;
    av.host.assign(p.hosts().size(), 1);
    av.accel.assign(p.accels().size(), 1);
    for (const Group& g : p.groups()) av.mem_cap.push_back(g.mem_total);
    return av;
}

Budget::Budget(double seconds, std::int64_t nodes)
    : start_(std::chrono::steady_clock::now()), seconds_(seconds), nodes_(nodes) {}

double Budget::elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool Budget::spend() {
    if (exhausted_) return false;
    ++used_;
    if (used_ >= nodes_ || ((used_ & 1023) == 0 && elapsed() > seconds_)) exhausted_ = true;
    return !exhausted_;
}

PackState::PackState(const Problem& p, const Availability& av) : p_(p), av_(av) {
    const auto& hosts = p.hosts();
    const auto& accels = p.accels();
    const auto n = p.requests().size();

    prev_host_sym_.assign(hosts.size(), -1);
    std::vector<int> last(static_cast<std::size_t>(p.sym_classes()), -1);
    for (std::size_t h = 0; h < hosts.size(); ++h) {
        auto& l = last[static_cast<std::size_t>(hosts[h].sym)];
        prev_host_sym_[h] = l;
        l = static_cast<int>(h);
    }
    std::fill(last.begin(), last.end(), -1);
    prev_accel_sym_.assign(accels.size(), -1);
    for (std::size_t a = 0; a < accels.size(); ++a) {
        auto& l = last[static_cast<std::size_t>(accels[a].sym)];
        prev_accel_sym_[a] = l;
        l = static_cast<int>(a);
    }

    cores_used_.assign(hosts.size(), 0);
    thr_used_.assign(hosts.size(), 0);
    mem_used_.assign(hosts.size(), 0);
    count_.assign(hosts.size(), 0);
    int_used_.assign(hosts.size(), 0);
    accel_used_.assign(accels.size(), 0);
    group_res_.assign(p.groups().size(), 0);
    host_of_.assign(n, -1);
    accel_of_.assign(n, kNoAccel);

    info_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Request& req = p.requests()[r];
        RequestInfo& I = info_[r];
        I.cores = req.demand.cores;
        I.memory = req.demand.memory;
        I.threshold = req.local_threshold;
        I.accel_type = type_index(req.accel_type());
        I.units = req.accel_units();
        I.min_penalty = INT_MAX;
        for (int g = 0; g < p.group_count(); ++g) {
            const Group& group = p.groups()[static_cast<std::size_t>(g)];
            bool ok = false;
            for (int h : group.hosts) {
                const HostSlot& H = hosts[static_cast<std::size_t>(h)];
                if (!av.host[static_cast<std::size_t>(h)] || H.cores < I.cores || H.local_mem < I.threshold) continue;
                if (I.memory > H.local_mem + av.mem_cap[static_cast<std::size_t>(g)]) continue;
                if (I.accel_type != 0) {
                    bool provider = type_index(H.integrated) == I.accel_type && H.integrated_units >= I.units;
                    for (int a : group.accels) {
                        const AccelSlot& A = accels[static_cast<std::size_t>(a)];
                        provider = provider || (av.accel[static_cast<std::size_t>(a)] &&
                                                type_index(A.type) == I.accel_type && A.units >= I.units);
                    }
                    if (!provider) continue;
                }
                ok = true;
                break;
            }
            if (ok) {
                I.placeable = true;
                I.min_penalty = std::min(I.min_penalty, p.penalty(static_cast<int>(r), g));
            }
        }
        if (!I.placeable) I.min_penalty = 0;
        rem_cores_ += I.cores;
        rem_mem_ += I.memory;
        rem_thr_ += I.threshold;
        rem_units_[I.accel_type] += I.units;
        rem_big_cores_ += I.cores > kBigItem;
        rem_big_units_[I.accel_type] += I.units > kBigItem;
        rem_min_penalty_ += I.min_penalty;
    }
}

bool PackState::all_placeable() const {
    return std::all_of(info_.begin(), info_.end(), [](const RequestInfo& i) { return i.placeable; });
}

int PackState::overflow(int h, int extra) const {
    const auto hs = static_cast<std::size_t>(h);
    return std::max(0, mem_used_[hs] + extra - p_.hosts()[hs].local_mem);
}

int PackState::free_cores(int h) const {
    const auto hs = static_cast<std::size_t>(h);
    return p_.hosts()[hs].cores - cores_used_[hs];
}

int PackState::free_local(int h) const {
    const auto hs = static_cast<std::size_t>(h);
    return std::max(0, p_.hosts()[hs].local_mem - mem_used_[hs]);
}

int PackState::free_remote(int g) const {
    const auto gs = static_cast<std::size_t>(g);
    return av_.mem_cap[gs] - group_res_[gs];
}

int PackState::free_integrated(int h) const {
    const auto hs = static_cast<std::size_t>(h);
    return p_.hosts()[hs].integrated_units - int_used_[hs];
}

int PackState::free_units(int a) const {
    const auto as = static_cast<std::size_t>(a);
    return av_.accel[as] ? p_.accels()[as].units - accel_used_[as] : 0;
}

int PackState::free_memory(int h) const {
    const auto hs = static_cast<std::size_t>(h);
    const auto g = static_cast<std::size_t>(p_.hosts()[hs].group);
    return std::max(0, p_.hosts()[hs].local_mem - mem_used_[hs]) + av_.mem_cap[g] - group_res_[g];
}

bool PackState::host_fits(int r, int h, int penalty_cap, bool symmetry) const {
    const auto hs = static_cast<std::size_t>(h);
    if (!av_.host[hs]) return false;
    if (symmetry && count_[hs] == 0) {
        const int prev = prev_host_sym_[hs];
        if (prev >= 0 && av_.host[static_cast<std::size_t>(prev)] && count_[static_cast<std::size_t>(prev)] == 0)
            return false;
    }
    const HostSlot& H = p_.hosts()[hs];
    const auto rs = static_cast<std::size_t>(r);
    const RequestInfo& I = info_[rs];
    if (cores_used_[hs] + I.cores > H.cores) return false;
    if (thr_used_[hs] + I.threshold > H.local_mem) return false;
    const auto g = static_cast<std::size_t>(H.group);
    if (penalty_sum_ + p_.penalty(r, H.group) + rem_min_penalty_ - I.min_penalty > penalty_cap) return false;
    if (group_res_[g] - overflow(h, 0) + overflow(h, I.memory) > av_.mem_cap[g]) return false;
    if (I.accel_type != 0 && !has_accel_option(r, h)) return false;
    return true;
}

void PackState::accel_options(int r, int h, std::vector<int>& out) const {
    const RequestInfo& I = info_[static_cast<std::size_t>(r)];
    if (I.accel_type == 0) {
        out.push_back(kNoAccel);
        return;
    }
    const auto hs = static_cast<std::size_t>(h);
    const HostSlot& H = p_.hosts()[hs];
    if (type_index(H.integrated) == I.accel_type && int_used_[hs] + I.units <= H.integrated_units)
        out.push_back(kIntegrated);
    for (int a : p_.groups()[static_cast<std::size_t>(H.group)].accels) {
        const auto as = static_cast<std::size_t>(a);
        const AccelSlot& A = p_.accels()[as];
        if (!av_.accel[as] || type_index(A.type) != I.accel_type || accel_used_[as] + I.units > A.units) continue;
        if (accel_used_[as] == 0) {
            const int prev = prev_accel_sym_[as];
            if (prev >= 0 && av_.accel[static_cast<std::size_t>(prev)] &&
                accel_used_[static_cast<std::size_t>(prev)] == 0)
                continue;
        }
        out.push_back(a);
    }
}

bool PackState::has_accel_option(int r, int h) const {
    const RequestInfo& I = info_[static_cast<std::size_t>(r)];
    if (I.accel_type == 0) return true;
    const auto hs = static_cast<std::size_t>(h);
    const HostSlot& H = p_.hosts()[hs];
    if (type_index(H.integrated) == I.accel_type && int_used_[hs] + I.units <= H.integrated_units) return true;
    for (int a : p_.groups()[static_cast<std::size_t>(H.group)].accels) {
        const auto as = static_cast<std::size_t>(a);
        const AccelSlot& A = p_.accels()[as];
        if (av_.accel[as] && type_index(A.type) == I.accel_type && accel_used_[as] + I.units <= A.units) return true;
    }
    return false;
}

std::int64_t PackState::activation_cost(int r, int h, int a) const {
    const auto hs = static_cast<std::size_t>(h);
    const HostSlot& H = p_.hosts()[hs];
    std::int64_t cost = count_[hs] == 0 ? H.weight : 0;
    if (a >= 0 && accel_used_[static_cast<std::size_t>(a)] == 0) cost += p_.accels()[static_cast<std::size_t>(a)].weight;
    const int res = group_res_[static_cast<std::size_t>(H.group)];
    const int next = res - overflow(h, 0) + overflow(h, info_[static_cast<std::size_t>(r)].memory);
    cost += p_.memory_cost(H.group, next) - p_.memory_cost(H.group, res);
    return cost;
}

void PackState::apply(int r, int h, int a) {
    const auto hs = static_cast<std::size_t>(h);
    const auto rs = static_cast<std::size_t>(r);
    const RequestInfo& I = info_[rs];
    const int g = p_.hosts()[hs].group;
    group_res_[static_cast<std::size_t>(g)] += overflow(h, I.memory) - overflow(h, 0);
    cores_used_[hs] += I.cores;
    thr_used_[hs] += I.threshold;
    mem_used_[hs] += I.memory;
    ++count_[hs];
    if (a == kIntegrated) int_used_[hs] += I.units;
    if (a >= 0) accel_used_[static_cast<std::size_t>(a)] += I.units;
    host_of_[rs] = h;
    accel_of_[rs] = a;
    penalty_sum_ += p_.penalty(r, g);
    ++assigned_;
    rem_cores_ -= I.cores;
    rem_mem_ -= I.memory;
    rem_thr_ -= I.threshold;
    rem_units_[I.accel_type] -= I.units;
    rem_big_cores_ -= I.cores > kBigItem;
    rem_big_units_[I.accel_type] -= I.units > kBigItem;
    rem_min_penalty_ -= I.min_penalty;
}

void PackState::undo(int r) {
    const auto rs = static_cast<std::size_t>(r);
    const int h = host_of_[rs];
    const int a = accel_of_[rs];
    const auto hs = static_cast<std::size_t>(h);
    const RequestInfo& I = info_[rs];
    const int g = p_.hosts()[hs].group;
    cores_used_[hs] -= I.cores;
    thr_used_[hs] -= I.threshold;
    mem_used_[hs] -= I.memory;
    group_res_[static_cast<std::size_t>(g)] -= overflow(h, I.memory) - overflow(h, 0);
    --count_[hs];
    if (a == kIntegrated) int_used_[hs] -= I.units;
    if (a >= 0) accel_used_[static_cast<std::size_t>(a)] -= I.units;
    host_of_[rs] = -1;
    accel_of_[rs] = kNoAccel;
    penalty_sum_ -= p_.penalty(r, g);
    --assigned_;
    rem_cores_ += I.cores;
    rem_mem_ += I.memory;
    rem_thr_ += I.threshold;
    rem_units_[I.accel_type] += I.units;
    rem_big_cores_ += I.cores > kBigItem;
    rem_big_units_[I.accel_type] += I.units > kBigItem;
    rem_min_penalty_ += I.min_penalty;
}

bool PackState::aggregate_ok(int penalty_cap) const {
    if (penalty_sum_ + rem_min_penalty_ > penalty_cap) return false;
    long free_cores = 0, free_local = 0, free_thr = 0, free_units[3] = {0, 0, 0};
    int big_cores = 0, big_units[3] = {0, 0, 0};
    const auto& hosts = p_.hosts();
    for (std::size_t h = 0; h < hosts.size(); ++h) {
        if (!av_.host[h]) continue;
        const int fc = hosts[h].cores - cores_used_[h];
        free_cores += fc;
        big_cores += fc / (kBigItem + 1);
        free_local += std::max(0, hosts[h].local_mem - mem_used_[h]);
        free_thr += hosts[h].local_mem - thr_used_[h];
        if (hosts[h].integrated != AccelType::None) {
            const int fu = hosts[h].integrated_units - int_used_[h];
            free_units[type_index(hosts[h].integrated)] += fu;
            big_units[type_index(hosts[h].integrated)] += fu / (kBigItem + 1);
        }
    }
    if (free_cores < rem_cores_ || big_cores < rem_big_cores_ || free_thr < rem_thr_) return false;
    long free_remote = 0;
    for (std::size_t g = 0; g < group_res_.size(); ++g) free_remote += std::max(0, av_.mem_cap[g] - group_res_[g]);
    if (free_local + free_remote < rem_mem_) return false;
    const auto& accels = p_.accels();
    for (std::size_t a = 0; a < accels.size(); ++a) {
        if (!av_.accel[a]) continue;
        const int fu = accels[a].units - accel_used_[a];
        free_units[type_index(accels[a].type)] += fu;
        big_units[type_index(accels[a].type)] += fu / (kBigItem + 1);
    }
    for (int t = 1; t <= 2; ++t)
        if (free_units[t] < rem_units_[t] || big_units[t] < rem_big_units_[t]) return false;
    return true;
}

namespace {

struct Candidate {
    int penalty;
    int new_host;
    int new_accel;
    int leftover;
    int host;
    int accel;
    double fit = 0.0;  // variant score, lower first
};

// Dinic max-flow on small dense graphs, rebuilt per search node.
class MaxFlow {
public:
    void reset(int nodes) {
        adj_.assign(static_cast<std::size_t>(nodes), {});
        edges_.clear();
    }
    void add(int u, int v, long cap) {
        adj_[static_cast<std::size_t>(u)].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({v, cap});
        adj_[static_cast<std::size_t>(v)].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({u, 0});
    }
    long run(int s, int t, long need) {
        long flow = 0;
        while (flow < need && bfs(s, t)) {
            it_.assign(adj_.size(), 0);
            while (long f = push(s, t, need - flow)) flow += f;
        }
        return flow;
    }

private:
    struct Edge {
        int to;
        long cap;
    };
    std::vector<std::vector<int>> adj_;
    std::vector<Edge> edges_;
    std::vector<int> level_, it_, queue_;

    bool bfs(int s, int t) {
        level_.assign(adj_.size(), -1);
        queue_.clear();
        queue_.push_back(s);
        level_[static_cast<std::size_t>(s)] = 0;
        for (std::size_t q = 0; q < queue_.size(); ++q) {
            const int u = queue_[q];
            for (int e : adj_[static_cast<std::size_t>(u)]) {
                const Edge& E = edges_[static_cast<std::size_t>(e)];
                if (E.cap > 0 && level_[static_cast<std::size_t>(E.to)] < 0) {
                    level_[static_cast<std::size_t>(E.to)] = level_[static_cast<std::size_t>(u)] + 1;
                    queue_.push_back(E.to);
                }
            }
        }
        return level_[static_cast<std::size_t>(t)] >= 0;
    }
    long push(int u, int t, long limit) {
        if (u == t) return limit;
        auto& i = it_[static_cast<std::size_t>(u)];
        const auto& out = adj_[static_cast<std::size_t>(u)];
        for (; i < static_cast<int>(out.size()); ++i) {
            Edge& E = edges_[static_cast<std::size_t>(out[static_cast<std::size_t>(i)])];
            if (E.cap <= 0 || level_[static_cast<std::size_t>(E.to)] != level_[static_cast<std::size_t>(u)] + 1) continue;
            if (long f = push(E.to, t, std::min(limit, E.cap))) {
                E.cap -= f;
                edges_[static_cast<std::size_t>(out[static_cast<std::size_t>(i)] ^ 1)].cap += f;
                return f;
            }
        }
        return 0;
    }
};

class Packer {
public:
    Packer(const Problem& p, const Availability& av, int cap, Budget& budget, std::int64_t limit,
           std::uint64_t variant)
        : p_(p), av_(av), state_(p, av), cap_(cap), budget_(budget), limit_(limit), order_(demand_order(p)),
          variant_(variant) {
        if (variant_ > 0) {
            std::mt19937_64 rng(variant_);
            mix_ = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        }
    }

    PackResult run() {
        PackResult out;
        if (!state_.all_placeable()) return out;
        if (dfs()) {
            out.outcome = Outcome::Feasible;
            out.assignment = state_.assignment();
        } else {
            out.outcome = unknown_ ? Outcome::Unknown : Outcome::Infeasible;
        }
        return out;
    }

private:
    const Problem& p_;
    const Availability& av_;
    PackState state_;
    int cap_;
    Budget& budget_;
    std::int64_t limit_;
    std::vector<int> order_;
    std::uint64_t variant_;
    double mix_ = 0.0;  // weight of leftover cores against leftover memory
    bool unknown_ = false;
    std::vector<int> accel_scratch_;
    MaxFlow flow_;

    // Fractional relaxations: each remaining request's cores, memory, and
    // accelerator units must route to hosts (and their groups) it still fits.
    bool flows_ok(const std::vector<int>& open, const std::vector<char>& fits, const std::vector<int>& todo) {
        const int H = static_cast<int>(p_.hosts().size());
        const int G = p_.group_count();
        const int R = static_cast<int>(todo.size());
        const int src = 0, sink = 1, r0 = 2, h0 = r0 + R, g0 = h0 + H, total = g0 + G;

        flow_.reset(total);
        for (int k = 0; k < R; ++k) {
            flow_.add(src, r0 + k, state_.info(todo[static_cast<std::size_t>(k)]).cores);
            for (int h : open)
                if (fits[static_cast<std::size_t>(k * H + h)]) flow_.add(r0 + k, h0 + h, LONG_MAX / 4);
        }
        for (int h : open) flow_.add(h0 + h, sink, state_.free_cores(h));
        if (flow_.run(src, sink, state_.remaining_cores()) < state_.remaining_cores()) return false;

        flow_.reset(total);
        std::vector<char> group_open(static_cast<std::size_t>(G), 0);
        for (int k = 0; k < R; ++k) {
            flow_.add(src, r0 + k, state_.info(todo[static_cast<std::size_t>(k)]).memory);
            for (int h : open)
                if (fits[static_cast<std::size_t>(k * H + h)]) flow_.add(r0 + k, h0 + h, LONG_MAX / 4);
        }
        for (int h : open) {
            const int g = p_.hosts()[static_cast<std::size_t>(h)].group;
            flow_.add(h0 + h, sink, state_.free_local(h));
            flow_.add(h0 + h, g0 + g, LONG_MAX / 4);
            group_open[static_cast<std::size_t>(g)] = 1;
        }
        for (int g = 0; g < G; ++g)
            if (group_open[static_cast<std::size_t>(g)]) flow_.add(g0 + g, sink, state_.free_remote(g));
        if (flow_.run(src, sink, state_.remaining_memory()) < state_.remaining_memory()) return false;

        for (int t = 1; t <= 2; ++t) {
            const long need = state_.remaining_units(t);
            if (need == 0) continue;
            flow_.reset(total);
            for (int k = 0; k < R; ++k) {
                const RequestInfo& I = state_.info(todo[static_cast<std::size_t>(k)]);
                if (I.accel_type != t) continue;
                flow_.add(src, r0 + k, I.units);
                for (int h : open)
                    if (fits[static_cast<std::size_t>(k * H + h)]) flow_.add(r0 + k, h0 + h, LONG_MAX / 4);
            }
            std::fill(group_open.begin(), group_open.end(), 0);
            for (int h : open) {
                const HostSlot& hs = p_.hosts()[static_cast<std::size_t>(h)];
                if (type_index(hs.integrated) == t) flow_.add(h0 + h, sink, state_.free_integrated(h));
                flow_.add(h0 + h, g0 + hs.group, LONG_MAX / 4);
                group_open[static_cast<std::size_t>(hs.group)] = 1;
            }
            for (int g = 0; g < G; ++g) {
                if (!group_open[static_cast<std::size_t>(g)]) continue;
                long units = 0;
                for (int a : p_.groups()[static_cast<std::size_t>(g)].accels)
                    if (type_index(p_.accels()[static_cast<std::size_t>(a)].type) == t) units += state_.free_units(a);
                if (units > 0) flow_.add(g0 + g, sink, units);
            }
            if (flow_.run(src, sink, need) < need) return false;
        }
        return true;
    }

    bool dfs() {
        const int n = static_cast<int>(order_.size());
        if (state_.assigned_count() == n) return true;
        if (--limit_ < 0 || !budget_.spend()) {
            unknown_ = true;
            return false;
        }
        if (!state_.aggregate_ok(cap_)) return false;

        // First-fail: the unassigned request with the fewest feasible hosts.
        const int H = static_cast<int>(p_.hosts().size());
        std::vector<int> todo;
        for (int r : order_)
            if (!state_.is_assigned(r)) todo.push_back(r);
        std::vector<char> fits(todo.size() * static_cast<std::size_t>(H), 0);
        std::vector<char> is_open(static_cast<std::size_t>(H), 0);
        int best_k = -1, best_count = INT_MAX;
        for (std::size_t k = 0; k < todo.size(); ++k) {
            int count = 0;
            for (int h = 0; h < H; ++h)
                if (state_.host_fits(todo[k], h, cap_, false)) {
                    fits[k * static_cast<std::size_t>(H) + static_cast<std::size_t>(h)] = 1;
                    is_open[static_cast<std::size_t>(h)] = 1;
                    ++count;
                }
            if (count == 0) return false;
            if (count < best_count) {
                best_count = count;
                best_k = static_cast<int>(k);
            }
        }
        std::vector<int> open;
        for (int h = 0; h < H; ++h)
            if (is_open[static_cast<std::size_t>(h)]) open.push_back(h);
        if (!flows_ok(open, fits, todo)) return false;

        const int best_r = todo[static_cast<std::size_t>(best_k)];
        std::vector<Candidate> cands;
        for (int h = 0; h < H; ++h) {
            if (!fits[static_cast<std::size_t>(best_k * H + h)] || !state_.host_fits(best_r, h, cap_)) continue;
            accel_scratch_.clear();
            state_.accel_options(best_r, h, accel_scratch_);
            const HostSlot& hs = p_.hosts()[static_cast<std::size_t>(h)];
            const RequestInfo& I = state_.info(best_r);
            double fit = 0.0;
            if (variant_ > 0) {
                const double mem_scale = hs.local_mem + av_.mem_cap[static_cast<std::size_t>(hs.group)];
                fit = mix_ * (state_.free_cores(h) - I.cores) / std::max(1, hs.cores) +
                      (1.0 - mix_) * (state_.free_memory(h) - I.memory) / std::max(1.0, mem_scale);
            }
            for (int a : accel_scratch_)
                cands.push_back(Candidate{p_.penalty(best_r, hs.group), state_.host_active(h) ? 0 : 1,
                                          (a >= 0 && !state_.accel_active(a)) ? 1 : 0,
                                          state_.free_cores(h) - I.cores, h, a, fit});
        }
        if (variant_ == 0) {
            std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
                return std::tie(x.penalty, x.new_host, x.new_accel, x.leftover, x.host, x.accel) <
                       std::tie(y.penalty, y.new_host, y.new_accel, y.leftover, y.host, y.accel);
            });
        } else {
            std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
                return std::tie(x.penalty, x.fit, x.host, x.accel) < std::tie(y.penalty, y.fit, y.host, y.accel);
            });
        }
        for (const Candidate& c : cands) {
            state_.apply(best_r, c.host, c.accel);
            if (dfs()) return true;
            state_.undo(best_r);
            if (unknown_) return false;
        }
        return false;
    }
};

}  // namespace

PackResult pack(const Problem& p, const Availability& av, int penalty_cap, Budget& budget,
                std::int64_t node_limit, std::uint64_t variant) {
    Packer packer(p, av, penalty_cap, budget, node_limit, variant);
    return packer.run();
}

std::optional<Assignment> greedy_pack(const Problem& p, const Availability& av, int penalty_cap) {
    PackState state(p, av);
    if (!state.all_placeable()) return std::nullopt;
    std::vector<int> options;
    const int host_count = static_cast<int>(p.hosts().size());
    for (int r : demand_order(p)) {
        bool found = false;
        std::tuple<int, std::int64_t, int, int, int> best{};
        int best_h = -1, best_a = kNoAccel;
        for (int h = 0; h < host_count; ++h) {
            if (!state.host_fits(r, h, penalty_cap)) continue;
            options.clear();
            state.accel_options(r, h, options);
            const HostSlot& H = p.hosts()[static_cast<std::size_t>(h)];
            for (int a : options) {
                const int accel_node = a >= 0 ? p.accels()[static_cast<std::size_t>(a)].node : H.node;
                const auto key = std::make_tuple(p.penalty(r, H.group), state.activation_cost(r, h, a),
                                                 state.free_cores(h) - state.info(r).cores, H.node, accel_node);
                if (!found || key < best) {
                    found = true;
                    best = key;
                    best_h = h;
                    best_a = a;
                }
            }
        }
        if (!found) return std::nullopt;
        state.apply(r, best_h, best_a);
    }
    return state.assignment();
}

std::optional<Assignment> random_greedy_pack(const Problem& p, const Availability& av, int penalty_cap,
                                             std::uint64_t seed) {
    PackState state(p, av);
    if (!state.all_placeable()) return std::nullopt;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double mix = unit(rng);
    const double noise = 0.5 * unit(rng);

    const auto& reqs = p.requests();
    const auto& w = p.weights();
    std::vector<std::pair<double, int>> keyed;
    for (std::size_t r = 0; r < reqs.size(); ++r) {
        const auto& d = reqs[r].demand;
        const double size = static_cast<double>(w.cpu * d.cores + w.memory * d.memory + w.accel * (d.gpu + d.fpga));
        keyed.emplace_back(-size * (1.0 + noise * (2.0 * unit(rng) - 1.0)), static_cast<int>(r));
    }
    std::sort(keyed.begin(), keyed.end());

    std::vector<int> options;
    const int host_count = static_cast<int>(p.hosts().size());
    for (const auto& [key, r] : keyed) {
        const RequestInfo& I = state.info(r);
        double best = 0.0;
        int best_h = -1, best_a = kNoAccel;
        for (int h = 0; h < host_count; ++h) {
            if (!state.host_fits(r, h, penalty_cap)) continue;
            options.clear();
            state.accel_options(r, h, options);
            const HostSlot& H = p.hosts()[static_cast<std::size_t>(h)];
            const double mem_scale = H.local_mem + av.mem_cap[static_cast<std::size_t>(H.group)];
            const double score = p.penalty(r, H.group) * 4.0 +
                                 mix * (state.free_cores(h) - I.cores) / std::max(1, H.cores) +
                                 (1.0 - mix) * (state.free_memory(h) - I.memory) / std::max(1.0, mem_scale);
            for (int a : options) {
                if (best_h < 0 || score < best) {
                    best = score;
                    best_h = h;
                    best_a = a;
                }
            }
        }
        if (best_h < 0) return std::nullopt;
        state.apply(r, best_h, best_a);
    }
    return state.assignment();
}

Solution realize(const Problem& p, const Assignment& asg) {
    const auto& reqs = p.requests();
    const auto n = reqs.size();
    Solution s;
    s.placements.resize(n);

    std::vector<std::vector<int>> on_host(p.hosts().size());
    for (std::size_t r = 0; r < n; ++r) on_host[static_cast<std::size_t>(asg.host[r])].push_back(static_cast<int>(r));

    std::vector<int> remote_need(n, 0);
    for (std::size_t h = 0; h < p.hosts().size(); ++h) {
        const auto& rs = on_host[h];
        int spare = p.hosts()[h].local_mem;
        for (int r : rs) spare -= reqs[static_cast<std::size_t>(r)].local_threshold;
        for (int r : rs) {
            const Request& req = reqs[static_cast<std::size_t>(r)];
            const int extra = std::min(spare, req.demand.memory - req.local_threshold);
            spare -= extra;
            Placement& pl = s.placements[static_cast<std::size_t>(r)];
            pl.request_id = req.id;
            pl.host = p.hosts()[h].node;
            pl.local_mem = req.local_threshold + extra;
            remote_need[static_cast<std::size_t>(r)] = req.demand.memory - pl.local_mem;
        }
    }

    for (int g = 0; g < p.group_count(); ++g) {
        int residual = 0;
        std::vector<int> members;
        for (std::size_t r = 0; r < n; ++r)
            if (p.hosts()[static_cast<std::size_t>(asg.host[r])].group == g && remote_need[r] > 0) {
                members.push_back(static_cast<int>(r));
                residual += remote_need[r];
            }
        if (residual == 0) continue;
        const std::vector<int> cover = p.memory_cover(g, residual);
        std::size_t k = 0;
        int left_in_node = cover.empty() ? 0 : p.mems()[static_cast<std::size_t>(cover[0])].capacity;
        for (int r : members) {
            int need = remote_need[static_cast<std::size_t>(r)];
            Placement& pl = s.placements[static_cast<std::size_t>(r)];
            while (need > 0 && k < cover.size()) {
                const int take = std::min(need, left_in_node);
                if (take > 0) pl.remote_mem[p.mems()[static_cast<std::size_t>(cover[k])].node] += take;
                need -= take;
                left_in_node -= take;
                if (left_in_node == 0 && ++k < cover.size())
                    left_in_node = p.mems()[static_cast<std::size_t>(cover[k])].capacity;
            }
        }
    }

    for (std::size_t r = 0; r < n; ++r) {
        Placement& pl = s.placements[r];
        const int a = asg.accel[r];
        if (a == kIntegrated) {
            pl.accel_node = pl.host;
        } else if (a >= 0) {
            pl.accel_node = p.accels()[static_cast<std::size_t>(a)].node;
        }
        if (pl.accel_node) pl.accel_units = reqs[r].accel_units();
    }
    s.active_nodes = derive_active_nodes(s.placements);
    s.objective = evaluate_objective(s.placements, p);
    return s;
}

}  // namespace dpool::detail
