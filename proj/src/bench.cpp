#include "heip/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "heip/image.hpp"
#include "heip/rng.hpp"

namespace heip::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

BenchReport summarize(const std::string& op, std::size_t n, std::vector<double> samples) {
    BenchReport r;
    r.op = op;
    r.n = n;
    r.reps = samples.size();
    r.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / double(samples.size());
    std::sort(samples.begin(), samples.end());
    const std::size_t mid = samples.size() / 2;
    r.median_ms = samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
    double var = 0;
    for (double s : samples) var += (s - r.mean_ms) * (s - r.mean_ms);
    r.stddev_ms = std::sqrt(var / double(samples.size()));
    return r;
}

} // namespace

bool is_known_op(const std::string& op) {
    return op == "enc" || op == "dec" || op == "lerp" || op == "cubic" || op == "dct";
}

std::vector<BenchReport> run(const std::vector<std::string>& ops,
                             const std::vector<std::size_t>& n_list, std::size_t reps,
                             std::uint64_t seed) {
    if (reps < 5) throw std::invalid_argument("bench needs at least 5 repetitions");
    for (const auto& op : ops) {
        if (!is_known_op(op)) throw std::invalid_argument("unknown bench op: " + op);
    }
    std::vector<BenchReport> out;
    for (std::size_t n : n_list) {
        auto params = fv::EncryptionParams::create(n, 1009);
        Prng prng(seed ^ n);
        auto [sk, pk] = fv::keygen(params, prng);
        fv::Encryptor encryptor(params, pk);
        fv::Decryptor decryptor(params, sk);
        fv::Evaluator evaluator(params);
        enc::FractionalEncoder encoder(params.rt, 2, 10, 16);

        auto fresh = [&](double v) { return encryptor.encrypt(encoder.encode(v), prng); };
        auto ct_a = fresh(123.0);
        auto ct_b = fresh(45.0);
        std::vector<fv::Ciphertext> block;
        block.reserve(64);
        for (int i = 0; i < 64; ++i) block.push_back(fresh(double((i * 37) % 256)));

        for (const auto& op : ops) {
            std::vector<double> samples;
            samples.reserve(reps);
            for (std::size_t rep = 0; rep < reps + 1; ++rep) {
                auto t0 = Clock::now();
                if (op == "enc") {
                    auto ct = fresh(37.5);
                } else if (op == "dec") {
                    auto m = decryptor.decrypt(ct_a);
                } else if (op == "lerp") {
                    auto ct = img::lerp_h(evaluator, encoder, ct_a, ct_b, 0.37);
                } else if (op == "cubic") {
                    auto ct = img::cubic_h(evaluator, encoder, ct_a, ct_b, ct_a, ct_b, 0.37);
                } else if (op == "dct") {
                    auto coeffs = img::dct8_h(evaluator, encoder, block);
                }
                auto t1 = Clock::now();
                if (rep > 0) samples.push_back(elapsed_ms(t0, t1)); // first rep is warmup
            }
            out.push_back(summarize(op, n, std::move(samples)));
        }
    }
    return out;
}

std::string to_csv(const std::vector<BenchReport>& reports) {
    std::ostringstream os;
    os << "op,n,reps,mean_ms,median_ms,stddev_ms\n";
    for (const auto& r : reports) {
        os << r.op << ',' << r.n << ',' << r.reps << ',' << r.mean_ms << ',' << r.median_ms << ','
           << r.stddev_ms << '\n';
    }
    return os.str();
}

} // namespace heip::bench
