#include "dpool/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dpool {

double RandomStream::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::normal() {
    for (;;) {
        const double u = 2.0 * uniform01() - 1.0;
        const double v = 2.0 * uniform01() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Standardized interval [a, b] with a >= 0 (right of the mode).
double sample_right_tail(double a, double b, RandomStream& rng) {
    const double width = b - a;
    if (width * a < 1.0) {
        // Uniform proposal; density ratio peaks at z = a.
        for (;;) {
            const double z = a + width * rng.uniform01();
            if (rng.uniform01() <= std::exp(0.5 * (a * a - z * z))) return z;
        }
    }
    // Exponential proposal with rate a truncated to [a, b]; accepted with
    // probability exp(-(z - a)^2 / 2).
    const double mass = -std::expm1(-a * width);
    for (;;) {
        const double z = a - std::log1p(-rng.uniform01() * mass) / a;
        if (z > b) continue;
        const double d = z - a;
        if (rng.uniform01() <= std::exp(-0.5 * d * d)) return z;
    }
}

}  // namespace

void check_params(const TruncNormalParams& p) {
    if (!(p.sigma > 0.0)) throw std::invalid_argument("truncated normal: sigma must be positive");
    if (!(p.hi > p.lo)) throw std::invalid_argument("truncated normal: hi must exceed lo");
    if (!std::isfinite(p.mu) || !std::isfinite(p.lo) || !std::isfinite(p.hi))
        throw std::invalid_argument("truncated normal: parameters must be finite");
}

void check_spec(const WorkloadSpec& spec) {
    if (spec.count < 0) throw std::invalid_argument("workload count must be non-negative");
    check_params(spec.cores_dist);
    check_params(spec.mem_ratio_dist);
    check_params(spec.accel_ratio_dist);
    auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!in_unit(spec.accel_fraction) || !in_unit(spec.gpu_fraction_of_accel) ||
        !in_unit(spec.threshold_fraction_max) || spec.threshold_fraction_max > 0.5)
        throw std::invalid_argument("workload fractions must lie in [0, 1] (threshold in [0, 0.5])");
    if (spec.cores_dist.lo < 1.0 || spec.cores_dist.hi > 32.0)
        throw std::invalid_argument("cores distribution must stay within [1, 32]");
    if (spec.mem_ratio_dist.lo < 1.0 || spec.mem_ratio_dist.hi > 12.0)
        throw std::invalid_argument("memory ratio distribution must stay within [1, 12]");
    if (spec.accel_ratio_dist.lo <= 0.0)
        throw std::invalid_argument("accelerator ratio distribution must be positive");
}

double sample_trunc_normal(const TruncNormalParams& p, RandomStream& rng) {
    const double a = (p.lo - p.mu) / p.sigma;
    const double b = (p.hi - p.mu) / p.sigma;
    const double mass = std_normal_cdf(b) - std_normal_cdf(a);
    double z;
    if (mass >= 0.05) {
        do {
            z = rng.normal();
        } while (z < a || z > b);
    } else if (a >= 0.0) {
        z = sample_right_tail(a, b, rng);
    } else if (b <= 0.0) {
        z = -sample_right_tail(-b, -a, rng);
    } else {
        // Narrow interval straddling the mode.
        for (;;) {
            z = a + (b - a) * rng.uniform01();
            if (rng.uniform01() <= std::exp(-0.5 * z * z)) break;
        }
    }
    return std::clamp(p.mu + p.sigma * z, p.lo, p.hi);
}

Request generate_request(int id, const WorkloadSpec& spec, RandomStream& rng) {
    Request r;
    r.id = id;
    const double cores_raw = sample_trunc_normal(spec.cores_dist, rng);
    const int cores = std::clamp(static_cast<int>(std::lround(cores_raw)), 1, 32);
    const double mem_ratio = sample_trunc_normal(spec.mem_ratio_dist, rng);
    const int memory = std::clamp(static_cast<int>(std::lround(cores * mem_ratio)), cores, 12 * cores);
    r.demand.cores = cores;
    r.demand.memory = memory;

    const bool has_accel = rng.uniform01() < spec.accel_fraction;
    if (has_accel) {
        const bool gpu = rng.uniform01() < spec.gpu_fraction_of_accel;
        const double accel_ratio = sample_trunc_normal(spec.accel_ratio_dist, rng);
        const int units = std::clamp(static_cast<int>(std::lround(cores * accel_ratio)), 1, 32);
        (gpu ? r.demand.gpu : r.demand.fpga) = units;
    }
    const double u = spec.threshold_fraction_max * rng.uniform01();
    r.local_threshold = std::min(static_cast<int>(std::floor(u * memory)), memory / 2);
    r.workload_class = classify(static_cast<double>(memory) / cores, has_accel);
    return r;
}

std::vector<Request> generate_workload(const WorkloadSpec& spec) {
    check_spec(spec);
    RandomStream rng(spec.seed);
    std::vector<Request> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i) out.push_back(generate_request(i, spec, rng));
    return out;
}

void write_workload(std::ostream& out, const std::vector<Request>& requests) {
    out << "# id cores memory_gb accel_type accel_units local_threshold_gb class\n";
    for (const auto& r : requests) {
        out << r.id << ' ' << r.demand.cores << ' ' << r.demand.memory << ' ' << to_string(r.accel_type()) << ' '
            << r.accel_units() << ' ' << r.local_threshold << ' ' << to_string(r.workload_class) << '\n';
    }
}

std::string workload_to_string(const std::vector<Request>& requests) {
    std::ostringstream os;
    write_workload(os, requests);
    return os.str();
}

std::vector<Request> read_workload(std::istream& in) {
    std::vector<Request> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        Request r;
        std::string accel, cls;
        int units = 0;
        auto fail = [&](const std::string& why) {
            return std::runtime_error("workload line " + std::to_string(line_no) + ": " + why);
        };
        if (!(fields >> r.id >> r.demand.cores >> r.demand.memory >> accel >> units >> r.local_threshold >> cls))
            throw fail("expected 7 fields");
        std::string extra;
        if (fields >> extra) throw fail("trailing field '" + extra + "'");
        const auto type = parse_accel_type(accel);
        if (!type) throw fail("unknown accelerator type '" + accel + "'");
        const auto wc = parse_workload_class(cls);
        if (!wc) throw fail("unknown class '" + cls + "'");
        if (*type == AccelType::Gpu) r.demand.gpu = units;
        if (*type == AccelType::Fpga) r.demand.fpga = units;
        if (*type == AccelType::None && units != 0) throw fail("accelerator units without a type");
        r.workload_class = *wc;
        if (!is_valid(r)) throw fail("request violates demand invariants");
        out.push_back(r);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i].id == out[j].id) throw std::runtime_error("workload: duplicate request id " + std::to_string(out[i].id));
    return out;
}

}  // namespace dpool
