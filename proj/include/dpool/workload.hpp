#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dpool/model.hpp"

namespace dpool {

/// Seedable random stream with a fully specified algorithm so that workloads
/// can be regenerated bit-for-bit in other languages:
///   - engine: MT19937-64 seeded with the 64-bit seed (std::mt19937_64);
///   - uniform01: top 53 bits of one engine output times 2^-53, in [0, 1);
///   - normal: Marsaglia polar method on pairs u = 2*uniform01()-1, the first
///     variate of each accepted pair is returned and the second discarded.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    double uniform01();
    double normal();

private:
    std::mt19937_64 engine_;
};

/// Parameters of N(mu, sigma^2) truncated to [lo, hi].
struct TruncNormalParams {
    double mu = 0.0;
    double sigma = 1.0;
    double lo = 0.0;
    double hi = 1.0;
};

struct WorkloadSpec {
    int count = 0;
    std::uint64_t seed = 0;
    TruncNormalParams cores_dist{2.0, 6.0, 1.0, 32.0};
    TruncNormalParams mem_ratio_dist{2.0, 4.0, 1.0, 12.0};
    TruncNormalParams accel_ratio_dist{0.0, 3.0, 1.0, 8.0};
    double accel_fraction = 0.25;
    double gpu_fraction_of_accel = 2.0 / 3.0;
    double threshold_fraction_max = 0.5;  // local threshold ~ U(0, max) x memory
};

/// Throws std::invalid_argument if sigma <= 0, hi <= lo, or any parameter is
/// not finite.
void check_params(const TruncNormalParams& p);
void check_spec(const WorkloadSpec& spec);

/// Draws from N(mu, sigma^2) conditioned on [lo, hi]. Plain rejection from the
/// parent normal when the interval holds at least 5% of the mass; otherwise
/// exponential or uniform proposals on the standardized interval.
double sample_trunc_normal(const TruncNormalParams& params, RandomStream& rng);

/// One request. Draw order per request: cores, memory ratio, accelerator
/// coin, [accelerator type coin, accelerator ratio], threshold fraction.
Request generate_request(int id, const WorkloadSpec& spec, RandomStream& rng);

/// `spec.count` requests from a single stream seeded with `spec.seed`; a
/// shorter workload with the same seed is a prefix of a longer one.
std::vector<Request> generate_workload(const WorkloadSpec& spec);

/// Line-oriented text: '#' comments, then one record per line:
///   id cores memory accel_type accel_units local_threshold class
void write_workload(std::ostream& out, const std::vector<Request>& requests);
std::string workload_to_string(const std::vector<Request>& requests);

/// Throws std::runtime_error naming the offending line on malformed input or
/// on records that violate request invariants.
std::vector<Request> read_workload(std::istream& in);

}  // namespace dpool
