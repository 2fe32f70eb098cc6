#include "heip/ntt.hpp"

#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>

namespace heip::ring {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 add_mod(u64 a, u64 b, u64 p) {
    u64 s = a + b; // p < 2^61, no wrap
    return s >= p ? s - p : s;
}

inline u64 sub_mod(u64 a, u64 b, u64 p) { return a >= b ? a - b : a + p - b; }

inline u64 mul_mod(u64 a, u64 b, u64 p) { return static_cast<u64>(u128(a) * b % p); }

inline u64 pow_mod(u64 base, u64 exp, u64 p) {
    u64 r = 1;
    base %= p;
    while (exp) {
        if (exp & 1) r = mul_mod(r, base, p);
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    return r;
}

inline u64 shoup(u64 w, u64 p) { return static_cast<u64>((u128(w) << 64) / p); }

// Shoup multiplication by a constant w with precomputed w_s = floor(w*2^64/p).
inline u64 mul_mod_shoup(u64 a, u64 w, u64 w_s, u64 p) {
    u64 q = static_cast<u64>((u128(a) * w_s) >> 64);
    u64 r = a * w - q * p;
    return r >= p ? r - p : r;
}

constexpr std::size_t kProgression = std::size_t(1) << 21; // 2n divides this for all supported n

std::vector<u64>& pool_storage() {
    static std::vector<u64> pool;
    return pool;
}

std::mutex& pool_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

std::span<const u64> prime_pool(std::size_t count) {
    std::lock_guard<std::mutex> lock(pool_mutex());
    auto& pool = pool_storage();
    if (pool.size() < count) {
        u64 k = pool.empty() ? ((u64(1) << 61) / kProgression)
                             : ((pool.back() - 1) / kProgression);
        mpz_class cand;
        while (pool.size() < count) {
            --k;
            if (k == 0) throw std::runtime_error("prime pool exhausted");
            u64 c = k * kProgression + 1;
            cand = c;
            if (mpz_probab_prime_p(cand.get_mpz_t(), 40) > 0) pool.push_back(c);
        }
    }
    return {pool.data(), count};
}

NttTables::NttTables(std::size_t n, u64 prime) : n_(n), p_(prime) {
    if (n < 2 || (n & (n - 1)) != 0 || 2 * n > kProgression) {
        throw std::invalid_argument("unsupported NTT size");
    }
    // psi: primitive 2n-th root of unity. Since n is a power of two, any c
    // with c^n == -1 has order exactly 2n.
    u64 psi = 0;
    for (u64 g = 2;; ++g) {
        u64 c = pow_mod(g, (p_ - 1) / (2 * n), p_);
        if (pow_mod(c, n, p_) == p_ - 1) {
            psi = c;
            break;
        }
    }
    const std::size_t log_n = static_cast<std::size_t>(__builtin_ctzll(n));
    auto bitrev = [log_n](std::size_t v) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log_n; ++b) r |= ((v >> b) & 1) << (log_n - 1 - b);
        return r;
    };
    roots_.resize(n);
    roots_shoup_.resize(n);
    iroots_.resize(n);
    iroots_shoup_.resize(n);
    const u64 psi_inv = pow_mod(psi, p_ - 2, p_);
    for (std::size_t j = 1; j < n; ++j) {
        u64 e = static_cast<u64>(bitrev(j));
        roots_[j] = pow_mod(psi, e, p_);
        iroots_[j] = pow_mod(psi_inv, e, p_);
        roots_shoup_[j] = shoup(roots_[j], p_);
        iroots_shoup_[j] = shoup(iroots_[j], p_);
    }
    n_inv_ = pow_mod(static_cast<u64>(n), p_ - 2, p_);
    n_inv_shoup_ = shoup(n_inv_, p_);
}

void NttTables::forward(u64* a) const {
    const u64 p = p_;
    std::size_t t = n_;
    for (std::size_t m = 1; m < n_; m <<= 1) {
        t >>= 1;
        for (std::size_t i = 0; i < m; ++i) {
            const u64 w = roots_[m + i], ws = roots_shoup_[m + i];
            u64* lo = a + 2 * i * t;
            u64* hi = lo + t;
            for (std::size_t j = 0; j < t; ++j) {
                u64 u = lo[j];
                u64 v = mul_mod_shoup(hi[j], w, ws, p);
                lo[j] = add_mod(u, v, p);
                hi[j] = sub_mod(u, v, p);
            }
        }
    }
}

void NttTables::inverse(u64* a) const {
    const u64 p = p_;
    std::size_t t = 1;
    for (std::size_t m = n_; m > 1; m >>= 1) {
        const std::size_t h = m >> 1;
        std::size_t j1 = 0;
        for (std::size_t i = 0; i < h; ++i) {
            const u64 w = iroots_[h + i], ws = iroots_shoup_[h + i];
            u64* lo = a + j1;
            u64* hi = lo + t;
            for (std::size_t j = 0; j < t; ++j) {
                u64 u = lo[j], v = hi[j];
                lo[j] = add_mod(u, v, p);
                hi[j] = mul_mod_shoup(sub_mod(u, v, p), w, ws, p);
            }
            j1 += 2 * t;
        }
        t <<= 1;
    }
    for (std::size_t i = 0; i < n_; ++i) a[i] = mul_mod_shoup(a[i], n_inv_, n_inv_shoup_, p);
}

const NttTables& NttTables::get(std::size_t n, u64 prime) {
    static std::map<std::pair<std::size_t, u64>, std::unique_ptr<NttTables>> cache;
    static std::shared_mutex mtx;
    const auto key = std::make_pair(n, prime);
    {
        std::shared_lock lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return *it->second;
    }
    std::unique_lock lock(mtx);
    auto& slot = cache[key];
    if (!slot) slot = std::make_unique<NttTables>(n, prime);
    return *slot;
}

// --- ConvEngine --------------------------------------------------------------

ConvEngine::ConvEngine(std::size_t n, const BigInt& abs_bound) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("degree must be a power of two");
    BigInt need = 2 * abs_bound + 1;
    BigInt prod = 1;
    std::size_t count = 0;
    while (prod <= need) {
        auto primes = prime_pool(count + 1);
        prod *= BigInt(primes[count]);
        ++count;
    }
    auto primes = prime_pool(count);
    primes_.assign(primes.begin(), primes.end());
    crt_product_ = prod;
    crt_basis_.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
        BigInt mj = crt_product_ / primes_[j];
        u64 mj_mod = mpz_fdiv_ui(mj.get_mpz_t(), primes_[j]);
        u64 inv = pow_mod(mj_mod, primes_[j] - 2, primes_[j]);
        crt_basis_[j] = mj * BigInt(inv); // reduced mod P at use
    }
}

ConvEngine::Prepared ConvEngine::prepare(const RingPoly& poly) const {
    const auto& ctx = *poly.context();
    if (ctx.degree() != n_) throw std::invalid_argument("degree mismatch in convolution");
    const std::size_t stride = ctx.stride();
    const auto limbs = poly.limbs();

    // Packed little-endian limbs of floor(q/2) for the centered comparison.
    std::vector<u64> half(stride, 0);
    {
        std::size_t words = 0;
        mpz_export(half.data(), &words, -1, sizeof(u64), 0, 0, ctx.half_modulus().get_mpz_t());
    }

    const BigInt two_pow_64 = BigInt(1) << 64;
    Prepared out;
    out.residues.resize(primes_.size());
    for (std::size_t j = 0; j < primes_.size(); ++j) {
        const u64 p = primes_[j];
        const u64 w64 = mpz_fdiv_ui(two_pow_64.get_mpz_t(), p);
        const u64 w64_s = shoup(w64, p);
        const u64 q_mod = mpz_fdiv_ui(ctx.modulus().get_mpz_t(), p);
        auto& lane = out.residues[j];
        lane.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const u64* c = limbs.data() + i * stride;
            u64 r = 0;
            bool greater_half = false;
            for (std::size_t w = stride; w-- > 0;) {
                r = mul_mod_shoup(r, w64, w64_s, p);
                r = add_mod(r, c[w] % p, p);
            }
            // centered representative: subtract q when coeff > q/2
            for (std::size_t w = stride; w-- > 0;) {
                if (c[w] != half[w]) {
                    greater_half = c[w] > half[w];
                    break;
                }
            }
            if (greater_half) r = sub_mod(r, q_mod, p);
            lane[i] = r;
        }
        NttTables::get(n_, p).forward(lane.data());
    }
    return out;
}

ConvEngine::Prepared ConvEngine::prepare(std::span<const std::int64_t> coeffs) const {
    if (coeffs.size() != n_) throw std::invalid_argument("degree mismatch in convolution");
    Prepared out;
    out.residues.resize(primes_.size());
    for (std::size_t j = 0; j < primes_.size(); ++j) {
        const u64 p = primes_[j];
        auto& lane = out.residues[j];
        lane.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            std::int64_t v = coeffs[i];
            if (v >= 0) {
                lane[i] = static_cast<u64>(v) % p;
            } else {
                u64 mag = static_cast<u64>(-(v + 1)) + 1; // safe at INT64_MIN
                u64 r = mag % p;
                lane[i] = r == 0 ? 0 : p - r;
            }
        }
        NttTables::get(n_, p).forward(lane.data());
    }
    return out;
}

ConvEngine::Prepared ConvEngine::prepare(std::span<const BigInt> coeffs) const {
    if (coeffs.size() != n_) throw std::invalid_argument("degree mismatch in convolution");
    Prepared out;
    out.residues.resize(primes_.size());
    for (std::size_t j = 0; j < primes_.size(); ++j) {
        const u64 p = primes_[j];
        auto& lane = out.residues[j];
        lane.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            lane[i] = mpz_fdiv_ui(coeffs[i].get_mpz_t(), p);
        }
        NttTables::get(n_, p).forward(lane.data());
    }
    return out;
}

ConvEngine::Accumulator ConvEngine::make_accumulator() const {
    Accumulator acc;
    acc.lanes.assign(primes_.size(), std::vector<u128>(n_, 0));
    return acc;
}

void ConvEngine::multiply_accumulate(Accumulator& acc, const Prepared& a, const Prepared& b) const {
    if (acc.mac_count >= 60) {
        // 128-bit lanes hold at most 60 unreduced products of 61-bit values;
        // reduce in place and keep accumulating.
        for (std::size_t j = 0; j < primes_.size(); ++j) {
            const u64 p = primes_[j];
            for (auto& v : acc.lanes[j]) v %= p;
        }
        acc.mac_count = 0;
    }
    ++acc.mac_count;
    for (std::size_t j = 0; j < primes_.size(); ++j) {
        const u64* pa = a.residues[j].data();
        const u64* pb = b.residues[j].data();
        u128* pc = acc.lanes[j].data();
        for (std::size_t i = 0; i < n_; ++i) {
            pc[i] += u128(pa[i]) * pb[i];
        }
    }
}

std::vector<BigInt> ConvEngine::reconstruct(Accumulator& acc) const {
    std::vector<std::vector<u64>> reduced(primes_.size());
    for (std::size_t j = 0; j < primes_.size(); ++j) {
        const u64 p = primes_[j];
        reduced[j].resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            reduced[j][i] = static_cast<u64>(acc.lanes[j][i] % p);
        }
        NttTables::get(n_, primes_[j]).inverse(reduced[j].data());
    }
    std::vector<BigInt> out(n_);
    const BigInt& P = crt_product_;
    BigInt half = P >> 1;
    mpz_t tmp;
    mpz_init(tmp);
    for (std::size_t i = 0; i < n_; ++i) {
        mpz_set_ui(tmp, 0);
        for (std::size_t j = 0; j < primes_.size(); ++j) {
            mpz_addmul_ui(tmp, crt_basis_[j].get_mpz_t(), reduced[j][i]);
        }
        mpz_mod(tmp, tmp, P.get_mpz_t());
        out[i] = BigInt(tmp);
        if (out[i] > half) out[i] -= P;
    }
    mpz_clear(tmp);
    return out;
}

std::vector<BigInt> ConvEngine::conv(const Prepared& a, const Prepared& b) const {
    auto acc = make_accumulator();
    multiply_accumulate(acc, a, b);
    return reconstruct(acc);
}

// --- schoolbook reference + dispatch -----------------------------------------

std::vector<BigInt> schoolbook_negacyclic(std::span<const BigInt> a, std::span<const BigInt> b) {
    if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
    const std::size_t n = a.size();
    std::vector<BigInt> out(n, BigInt(0));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (b[j] == 0) continue;
            const std::size_t k = i + j;
            if (k < n) {
                mpz_addmul(out[k].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
            } else {
                mpz_submul(out[k - n].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
            }
        }
    }
    return out;
}

std::vector<BigInt> negacyclic_conv_exact(std::span<const BigInt> a, std::span<const BigInt> b,
                                          MulPath path) {
    if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
    const std::size_t n = a.size();
    if (path == MulPath::automatic) {
        path = (n >= 128 && n <= (std::size_t(1) << 20)) ? MulPath::ntt : MulPath::schoolbook;
    }
    if (path == MulPath::schoolbook) return schoolbook_negacyclic(a, b);

    BigInt max_a = 0, max_b = 0;
    for (const auto& v : a) {
        BigInt m = abs(v);
        if (m > max_a) max_a = m;
    }
    for (const auto& v : b) {
        BigInt m = abs(v);
        if (m > max_b) max_b = m;
    }
    if (max_a == 0 || max_b == 0) return std::vector<BigInt>(n, BigInt(0));
    ConvEngine engine(n, BigInt(max_a * max_b * BigInt(static_cast<unsigned long>(n))));
    return engine.conv(engine.prepare(a), engine.prepare(b));
}

} // namespace heip::ring
