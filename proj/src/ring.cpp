#include "heip/ring.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "heip/ntt.hpp"

namespace heip::ring {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Reads the packed little-endian limbs of one coefficient into out.
inline void load_coeff(mpz_t out, const std::uint64_t* limbs, std::size_t stride) {
    mpz_import(out, stride, -1, sizeof(std::uint64_t), 0, 0, limbs);
}

// Writes value (must be in [0, 2^64*stride)) into packed limbs.
inline void store_coeff(std::uint64_t* limbs, std::size_t stride, const mpz_t value) {
    std::size_t words = 0;
    std::memset(limbs, 0, stride * sizeof(std::uint64_t));
    mpz_export(limbs, &words, -1, sizeof(std::uint64_t), 0, 0, value);
}

} // namespace

RingContext::RingContext(std::size_t n, BigInt q) : n_(n), q_(std::move(q)) {
    if (!is_power_of_two(n_) || n_ < 8) {
        throw std::invalid_argument("ring degree must be a power of two >= 8");
    }
    if (q_ < 2) {
        throw std::invalid_argument("coefficient modulus must be >= 2");
    }
    half_q_ = q_ >> 1;
    q_bits_ = mpz_sizeinbase(q_.get_mpz_t(), 2);
    stride_ = (q_bits_ + 63) / 64;
    q_limbs_.assign(stride_, 0);
    half_q_limbs_.assign(stride_, 0);
    std::size_t words = 0;
    mpz_export(q_limbs_.data(), &words, -1, sizeof(std::uint64_t), 0, 0, q_.get_mpz_t());
    mpz_export(half_q_limbs_.data(), &words, -1, sizeof(std::uint64_t), 0, 0, half_q_.get_mpz_t());
}

ContextPtr make_context(std::size_t n, BigInt q) {
    return std::make_shared<const RingContext>(n, std::move(q));
}

RingPoly::RingPoly(ContextPtr ctx) : ctx_(std::move(ctx)) {
    limbs_.assign(ctx_->degree() * ctx_->stride(), 0);
}

RingPoly::RingPoly(ContextPtr ctx, std::span<const BigInt> coeffs) : RingPoly(std::move(ctx)) {
    if (coeffs.size() != ctx_->degree()) {
        throw std::invalid_argument("coefficient count does not match ring degree");
    }
    for (std::size_t i = 0; i < coeffs.size(); ++i) set_coeff(i, coeffs[i]);
}

BigInt RingPoly::coeff(std::size_t i) const {
    BigInt out;
    load_coeff(out.get_mpz_t(), limbs_.data() + i * ctx_->stride(), ctx_->stride());
    return out;
}

void RingPoly::set_coeff(std::size_t i, const BigInt& value) {
    BigInt r = value % ctx_->modulus();
    if (r < 0) r += ctx_->modulus();
    store_coeff(limbs_.data() + i * ctx_->stride(), ctx_->stride(), r.get_mpz_t());
}

bool RingPoly::is_zero() const {
    for (auto limb : limbs_)
        if (limb != 0) return false;
    return true;
}

bool RingPoly::operator==(const RingPoly& other) const {
    return *ctx_ == *other.ctx_ && limbs_ == other.limbs_;
}

RingPoly RingPoly::one(ContextPtr ctx) { return monomial(std::move(ctx), 0, 1); }

RingPoly RingPoly::monomial(ContextPtr ctx, std::size_t deg, const BigInt& c) {
    RingPoly p(std::move(ctx));
    if (deg >= p.degree()) throw std::invalid_argument("monomial degree out of range");
    p.set_coeff(deg, c);
    return p;
}

namespace {

void require_same_context(const RingPoly& a, const RingPoly& b) {
    if (!(*a.context() == *b.context())) {
        throw std::invalid_argument("ring context mismatch");
    }
}

// Multi-word helpers over packed coefficients; all values below 2^(64*s).
inline std::uint64_t add_words(std::uint64_t* out, const std::uint64_t* a, const std::uint64_t* b,
                               std::size_t s) {
    unsigned char carry = 0;
    for (std::size_t i = 0; i < s; ++i) {
        std::uint64_t t = a[i] + carry;
        carry = (t < a[i]) ? 1 : 0;
        out[i] = t + b[i];
        carry |= (out[i] < t) ? 1 : 0;
    }
    return carry;
}

inline std::uint64_t sub_words(std::uint64_t* out, const std::uint64_t* a, const std::uint64_t* b,
                               std::size_t s) {
    unsigned char borrow = 0;
    for (std::size_t i = 0; i < s; ++i) {
        std::uint64_t t = a[i] - b[i];
        std::uint64_t b2 = (a[i] < b[i]) ? 1 : 0;
        out[i] = t - borrow;
        borrow = b2 | ((t < borrow) ? 1 : 0);
    }
    return borrow;
}

inline bool geq_words(const std::uint64_t* a, const std::uint64_t* b, std::size_t s) {
    for (std::size_t i = s; i-- > 0;) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return true;
}

} // namespace

RingPoly poly_add(const RingPoly& a, const RingPoly& b) {
    require_same_context(a, b);
    const auto& ctx = *a.context();
    const std::size_t s = ctx.stride();
    const auto* q = ctx.q_limbs().data();
    RingPoly out(a.context());
    const auto* pa = a.limbs().data();
    const auto* pb = b.limbs().data();
    auto* po = out.limbs_mut().data();
    for (std::size_t i = 0; i < ctx.degree(); ++i, pa += s, pb += s, po += s) {
        std::uint64_t carry = add_words(po, pa, pb, s);
        if (carry || geq_words(po, q, s)) sub_words(po, po, q, s);
    }
    return out;
}

RingPoly poly_sub(const RingPoly& a, const RingPoly& b) {
    require_same_context(a, b);
    const auto& ctx = *a.context();
    const std::size_t s = ctx.stride();
    const auto* q = ctx.q_limbs().data();
    RingPoly out(a.context());
    const auto* pa = a.limbs().data();
    const auto* pb = b.limbs().data();
    auto* po = out.limbs_mut().data();
    for (std::size_t i = 0; i < ctx.degree(); ++i, pa += s, pb += s, po += s) {
        if (sub_words(po, pa, pb, s)) add_words(po, po, q, s);
    }
    return out;
}

RingPoly poly_negate(const RingPoly& a) {
    return poly_sub(RingPoly::zero(a.context()), a);
}

RingPoly poly_scalar_mul(const RingPoly& a, const BigInt& k) {
    const auto& ctx = *a.context();
    BigInt kr = k % ctx.modulus();
    if (kr < 0) kr += ctx.modulus();
    RingPoly out(a.context());
    mpz_t x;
    mpz_init(x);
    const std::size_t stride = ctx.stride();
    const auto* pa = a.limbs().data();
    auto* po = out.limbs_mut().data();
    for (std::size_t i = 0; i < ctx.degree(); ++i) {
        load_coeff(x, pa + i * stride, stride);
        mpz_mul(x, x, kr.get_mpz_t());
        mpz_mod(x, x, ctx.modulus().get_mpz_t());
        store_coeff(po + i * stride, stride, x);
    }
    mpz_clear(x);
    return out;
}

std::vector<BigInt> centered_lift(const RingPoly& a) {
    const auto& ctx = *a.context();
    std::vector<BigInt> out(ctx.degree());
    for (std::size_t i = 0; i < ctx.degree(); ++i) {
        out[i] = a.coeff(i);
        if (out[i] > ctx.half_modulus()) out[i] -= ctx.modulus();
    }
    return out;
}

RingPoly from_signed(ContextPtr ctx, std::span<const BigInt> coeffs) {
    if (coeffs.size() != ctx->degree()) {
        throw std::invalid_argument("coefficient count does not match ring degree");
    }
    RingPoly out(std::move(ctx));
    for (std::size_t i = 0; i < coeffs.size(); ++i) out.set_coeff(i, coeffs[i]);
    return out;
}

RingPoly poly_mul(const RingPoly& a, const RingPoly& b, MulPath path) {
    require_same_context(a, b);
    auto ca = centered_lift(a);
    auto cb = centered_lift(b);
    auto conv = negacyclic_conv_exact(ca, cb, path);
    return from_signed(a.context(), conv);
}

// --- samplers ---------------------------------------------------------------

GaussianSampler::GaussianSampler(double sigma_, double tail_bound_)
    : sigma(sigma_), tail_bound(tail_bound_) {
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
    if (!(tail_bound >= 3)) throw std::invalid_argument("tail bound must be >= 3");
}

long GaussianSampler::sample_int(Prng& prng) const {
    const double cutoff = tail_bound * sigma;
    for (;;) {
        // Box-Muller; one variate per iteration keeps the stream simple.
        double u1 = prng.next_double();
        double u2 = prng.next_double();
        if (u1 <= 0) continue;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        double v = z * sigma;
        if (std::fabs(v) > cutoff) continue;
        return std::lround(v);
    }
}

RingPoly sample_binary(const ContextPtr& ctx, Prng& prng) {
    RingPoly out(ctx);
    for (std::size_t i = 0; i < ctx->degree(); ++i) {
        if (prng.next_bit()) out.set_coeff(i, 1);
    }
    return out;
}

RingPoly sample_uniform(const ContextPtr& ctx, Prng& prng) {
    RingPoly out(ctx);
    const std::size_t bits = ctx->modulus_bits();
    const std::size_t words = (bits + 63) / 64;
    const unsigned top_shift = static_cast<unsigned>(words * 64 - bits);
    std::vector<std::uint64_t> raw(words);
    BigInt v;
    for (std::size_t i = 0; i < ctx->degree(); ++i) {
        for (;;) {
            for (auto& w : raw) w = prng.next_u64();
            raw[words - 1] >>= top_shift;
            mpz_import(v.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, raw.data());
            if (v < ctx->modulus()) break;
        }
        out.set_coeff(i, v);
    }
    return out;
}

RingPoly sample_gaussian(const ContextPtr& ctx, const GaussianSampler& sampler, Prng& prng) {
    if (!(sampler.sigma > 0) || !(sampler.tail_bound >= 3)) {
        throw std::invalid_argument("invalid Gaussian sampler parameters");
    }
    RingPoly out(ctx);
    for (std::size_t i = 0; i < ctx->degree(); ++i) {
        long v = sampler.sample_int(prng);
        out.set_coeff(i, BigInt(v));
    }
    return out;
}

} // namespace heip::ring
