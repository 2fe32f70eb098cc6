#pragma once

#include <cstdint>
#include <random>

namespace heip {

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that streams are
// reproducible across standard-library versions; std::*_distribution is
// implementation-defined and would break the fixed-seed determinism the
// CLI promises.
class Prng {
public:
    explicit Prng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    static Prng from_entropy() {
        std::random_device rd;
        std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        return Prng(s);
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    bool next_bit() { return (next_u64() >> 63) != 0; }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound) by rejection.
    std::uint64_t bounded(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Derives an independent deterministic stream; used to give every image
    // cell its own sampler so results do not depend on the thread count.
    Prng fork(std::uint64_t stream) const {
        std::uint64_t h = state_[0] ^ (state_[1] + 0x9e3779b97f4a7c15ULL);
        h ^= stream + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return Prng(h ^ (state_[2] + (stream * 0xd1342543de82ef95ULL)));
    }

private:
    std::uint64_t state_[4];
};

} // namespace heip
