#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace heip::bench {

struct BenchReport {
    std::string op;
    std::size_t n = 0;
    std::size_t reps = 0;
    double mean_ms = 0;
    double median_ms = 0;
    double stddev_ms = 0;
};

// Known operation names: enc, dec, lerp, cubic, dct.
bool is_known_op(const std::string& op);

// Runs the requested operations single-threadedly at each ring degree;
// reps must be at least 5.
std::vector<BenchReport> run(const std::vector<std::string>& ops, const std::vector<std::size_t>& n_list,
                             std::size_t reps, std::uint64_t seed);

std::string to_csv(const std::vector<BenchReport>& reports); // with header row

} // namespace heip::bench
