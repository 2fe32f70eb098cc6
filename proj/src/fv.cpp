#include "heip/fv.hpp"

#include <cstring>
#include <stdexcept>

#include "heip/ntt.hpp"

namespace heip::fv {

using ring::BigInt;
using ring::RingPoly;

namespace {

const PresetEntry kPresets[] = {
    {2048, 54, 128},
    {4096, 109, 128},
    {8192, 218, 128},
    {16384, 438, 128},
};

// Round num/den to the nearest integer, ties away from zero; den > 0.
BigInt round_div_half_away(const BigInt& num, const BigInt& den) {
    BigInt mag = abs(num);
    BigInt r = (2 * mag + den) / (2 * den); // operands non-negative: truncation == floor
    return sgn(num) < 0 ? BigInt(-r) : r;
}

std::uint64_t fnv1a(std::uint64_t h, const unsigned char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::span<const PresetEntry> presets() { return {kPresets, std::size(kPresets)}; }

EncryptionParams EncryptionParams::create(std::size_t n, std::uint64_t t,
                                          std::optional<unsigned> q_bits, double sigma) {
    if (t < 2) throw std::invalid_argument("plaintext modulus must be >= 2");
    unsigned bits = 0;
    unsigned lambda = 0;
    if (q_bits) {
        bits = *q_bits;
    } else {
        for (const auto& p : presets()) {
            if (p.n == n) {
                bits = p.q_bits;
                lambda = p.lambda_bits;
                break;
            }
        }
        if (bits == 0) {
            throw std::invalid_argument("no q preset for this ring degree; pass q_bits");
        }
    }
    if (bits < 2) throw std::invalid_argument("q_bits too small");
    EncryptionParams params;
    params.n = n;
    params.t = t;
    params.sigma = sigma;
    params.lambda_bits = lambda;
    // Smallest prime of exactly `bits` bits: deterministic, reproducible.
    BigInt base = BigInt(1) << (bits - 1);
    mpz_nextprime(params.q.get_mpz_t(), base.get_mpz_t());
    if (BigInt(t) >= params.q) throw std::invalid_argument("t must be smaller than q");
    params.rq = ring::make_context(n, params.q);
    params.rt = ring::make_context(n, BigInt(t));
    return params;
}

std::uint64_t EncryptionParams::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::uint64_t n64 = n;
    h = fnv1a(h, reinterpret_cast<const unsigned char*>(&n64), 8);
    h = fnv1a(h, reinterpret_cast<const unsigned char*>(&t), 8);
    std::uint64_t sig;
    static_assert(sizeof(double) == 8);
    std::memcpy(&sig, &sigma, 8);
    h = fnv1a(h, reinterpret_cast<const unsigned char*>(&sig), 8);
    std::string qs = q.get_str(16);
    h = fnv1a(h, reinterpret_cast<const unsigned char*>(qs.data()), qs.size());
    return h;
}

std::pair<SecretKey, PublicKey> keygen(const EncryptionParams& params, Prng& prng) {
    if (!params.valid()) throw std::invalid_argument("invalid encryption parameters");
    ring::GaussianSampler chi(params.sigma, params.tail_bound);
    RingPoly s = ring::sample_binary(params.rq, prng);
    RingPoly a = ring::sample_uniform(params.rq, prng);
    RingPoly e = ring::sample_gaussian(params.rq, chi, prng);
    RingPoly p0 = ring::poly_negate(ring::poly_add(ring::poly_mul(a, s), e));
    const std::uint64_t fp = params.fingerprint();
    return {SecretKey{std::move(s), fp}, PublicKey{std::move(p0), a, fp}};
}

// --- Encryptor ----------------------------------------------------------------

struct Encryptor::KeyTransforms {
    ring::ConvEngine engine;
    ring::ConvEngine::Prepared p0, p1;

    KeyTransforms(const EncryptionParams& params, const PublicKey& pk)
        : engine(params.n,
                 BigInt(params.rq->half_modulus() * BigInt(static_cast<unsigned long>(params.n)))),
          p0(engine.prepare(pk.p0)),
          p1(engine.prepare(pk.p1)) {}
};

Encryptor::Encryptor(EncryptionParams params, PublicKey pk)
    : params_(std::move(params)), pk_(std::move(pk)) {
    if (pk_.fingerprint != params_.fingerprint()) {
        throw std::invalid_argument("public key does not match parameters");
    }
    prepared_ = std::make_shared<const KeyTransforms>(params_, pk_);
}

Ciphertext Encryptor::encrypt(const ring::RingPoly& m, Prng& prng) const {
    if (!(*m.context() == *params_.rt)) {
        throw std::invalid_argument("plaintext must live in R_t for these parameters");
    }
    ring::GaussianSampler chi(params_.sigma, params_.tail_bound);
    RingPoly u = ring::sample_binary(params_.rq, prng);
    RingPoly e0 = ring::sample_gaussian(params_.rq, chi, prng);
    RingPoly e1 = ring::sample_gaussian(params_.rq, chi, prng);

    auto prep_u = prepared_->engine.prepare(u);
    RingPoly p0u = ring::from_signed(params_.rq, prepared_->engine.conv(prepared_->p0, prep_u));
    RingPoly p1u = ring::from_signed(params_.rq, prepared_->engine.conv(prepared_->p1, prep_u));

    // floor(q/t) * m, lifted into R_q.
    const BigInt delta = params_.delta();
    RingPoly dm(params_.rq);
    for (std::size_t i = 0; i < params_.n; ++i) {
        BigInt c = m.coeff(i);
        if (c != 0) dm.set_coeff(i, delta * c);
    }

    Ciphertext ct;
    ct.fingerprint = params_.fingerprint();
    ct.polys.push_back(ring::poly_add(ring::poly_add(dm, p0u), e0));
    ct.polys.push_back(ring::poly_add(p1u, e1));
    return ct;
}

// --- Decryptor ----------------------------------------------------------------

Decryptor::Decryptor(EncryptionParams params, SecretKey sk)
    : params_(std::move(params)), sk_(std::move(sk)) {
    if (sk_.fingerprint != params_.fingerprint()) {
        throw std::invalid_argument("secret key does not match parameters");
    }
}

ring::RingPoly Decryptor::key_power_sum(const Ciphertext& ct) const {
    if (ct.fingerprint != params_.fingerprint()) {
        throw std::invalid_argument("ciphertext does not match parameters");
    }
    if (ct.size() < 2) throw std::invalid_argument("ciphertext must hold at least two polynomials");
    // Horner evaluation of sum_i c_i s^i in R_q.
    RingPoly acc = ct.polys.back();
    for (std::size_t i = ct.size() - 1; i-- > 0;) {
        acc = ring::poly_add(ring::poly_mul(acc, sk_.s), ct.polys[i]);
    }
    return acc;
}

ring::RingPoly Decryptor::decrypt(const Ciphertext& ct) const {
    auto w = ring::centered_lift(key_power_sum(ct));
    RingPoly m(params_.rt);
    const BigInt t(params_.t);
    for (std::size_t i = 0; i < params_.n; ++i) {
        if (w[i] == 0) continue;
        m.set_coeff(i, round_div_half_away(t * w[i], params_.q));
    }
    return m;
}

std::uint32_t Decryptor::noise_budget(const Ciphertext& ct) const {
    auto w = ring::centered_lift(key_power_sum(ct));
    const BigInt t(params_.t);
    const BigInt delta = params_.delta();
    BigInt vmax = 0;
    for (std::size_t i = 0; i < params_.n; ++i) {
        // decrypted coefficient, canonical in [0, t)
        BigInt mi = round_div_half_away(t * w[i], params_.q) % t;
        if (mi < 0) mi += t;
        // residual noise r = w - delta*m, centered mod q
        BigInt v = (w[i] - delta * mi) % params_.q;
        if (v < 0) v += params_.q;
        if (v > params_.rq->half_modulus()) v -= params_.q;
        BigInt mag = abs(v);
        if (mag > vmax) vmax = mag;
    }
    BigInt d = params_.q / (2 * t * (vmax + 1));
    if (d < 1) return 0;
    return static_cast<std::uint32_t>(mpz_sizeinbase(d.get_mpz_t(), 2) - 1);
}

// --- Evaluator ----------------------------------------------------------------

Evaluator::Evaluator(EncryptionParams params) : params_(std::move(params)) {}

void Evaluator::check(const Ciphertext& ct) const {
    if (ct.fingerprint != params_.fingerprint()) {
        throw std::invalid_argument("ciphertext does not match evaluator parameters");
    }
    if (ct.size() < 2) throw std::invalid_argument("ciphertext must hold at least two polynomials");
}

void Evaluator::check_plain(const ring::RingPoly& p) const {
    if (!(*p.context() == *params_.rt)) {
        throw std::invalid_argument("plaintext must live in R_t for these parameters");
    }
}

Ciphertext Evaluator::add(const Ciphertext& a, const Ciphertext& b) const {
    check(a);
    check(b);
    const std::size_t len = std::max(a.size(), b.size());
    Ciphertext out;
    out.fingerprint = a.fingerprint;
    out.polys.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        if (i >= a.size()) out.polys.push_back(b.polys[i]);
        else if (i >= b.size()) out.polys.push_back(a.polys[i]);
        else out.polys.push_back(ring::poly_add(a.polys[i], b.polys[i]));
    }
    return out;
}

Ciphertext Evaluator::sub(const Ciphertext& a, const Ciphertext& b) const {
    check(a);
    check(b);
    const std::size_t len = std::max(a.size(), b.size());
    Ciphertext out;
    out.fingerprint = a.fingerprint;
    out.polys.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        if (i >= a.size()) out.polys.push_back(ring::poly_negate(b.polys[i]));
        else if (i >= b.size()) out.polys.push_back(a.polys[i]);
        else out.polys.push_back(ring::poly_sub(a.polys[i], b.polys[i]));
    }
    return out;
}

Ciphertext Evaluator::negate(const Ciphertext& a) const {
    check(a);
    Ciphertext out;
    out.fingerprint = a.fingerprint;
    for (const auto& p : a.polys) out.polys.push_back(ring::poly_negate(p));
    return out;
}

Ciphertext Evaluator::multiply(const Ciphertext& a, const Ciphertext& b) const {
    check(a);
    check(b);
    ++ct_mul_;
    const std::size_t la = a.size(), lb = b.size();
    const BigInt half_q = params_.rq->half_modulus();
    // Every output index accumulates at most min(la, lb) pairwise products of
    // centered polynomials, each bounded by n * (q/2)^2.
    BigInt bound = half_q * half_q * BigInt(static_cast<unsigned long>(params_.n)) *
                   BigInt(static_cast<unsigned long>(std::min(la, lb)));
    ring::ConvEngine engine(params_.n, bound);

    std::vector<ring::ConvEngine::Prepared> pa, pb;
    pa.reserve(la);
    pb.reserve(lb);
    for (const auto& p : a.polys) pa.push_back(engine.prepare(p));
    for (const auto& p : b.polys) pb.push_back(engine.prepare(p));

    Ciphertext out;
    out.fingerprint = a.fingerprint;
    const BigInt t(params_.t);
    for (std::size_t i = 0; i + 1 < la + lb; ++i) {
        auto acc = engine.make_accumulator();
        for (std::size_t r = 0; r < la; ++r) {
            if (i < r || i - r >= lb) continue;
            engine.multiply_accumulate(acc, pa[r], pb[i - r]);
        }
        auto conv = engine.reconstruct(acc);
        // scale by t/q with rounding to nearest (ties away from zero)
        for (auto& c : conv) c = round_div_half_away(t * c, params_.q);
        out.polys.push_back(ring::from_signed(params_.rq, conv));
    }
    return out;
}

Ciphertext Evaluator::multiply_plain(const Ciphertext& a, const ring::RingPoly& p) const {
    const Ciphertext* ct = &a;
    const ring::RingPoly* pp = &p;
    return weighted_sum_plain({&ct, 1}, {&pp, 1});
}

Ciphertext Evaluator::weighted_sum_plain(std::span<const Ciphertext* const> cts,
                                         std::span<const ring::RingPoly* const> plains) const {
    if (cts.size() != plains.size() || cts.empty()) {
        throw std::invalid_argument("weighted sum needs matching ciphertext/plaintext lists");
    }
    std::size_t len = 0;
    for (const auto* ct : cts) {
        check(*ct);
        len = std::max(len, ct->size());
    }
    plain_mul_ += cts.size();

    const BigInt half_q = params_.rq->half_modulus();
    const BigInt half_t = BigInt(params_.t) / 2 + 1;
    BigInt bound = half_q * half_t * BigInt(static_cast<unsigned long>(params_.n)) *
                   BigInt(static_cast<unsigned long>(cts.size()));
    ring::ConvEngine engine(params_.n, bound);

    // Centered plaintext representatives keep the noise growth proportional
    // to the plaintext magnitude rather than to t.
    std::vector<ring::ConvEngine::Prepared> prep_plain;
    prep_plain.reserve(plains.size());
    for (const auto* p : plains) {
        check_plain(*p);
        auto centered = ring::centered_lift(*p);
        std::vector<std::int64_t> small(centered.size());
        for (std::size_t i = 0; i < centered.size(); ++i) {
            if (!centered[i].fits_slong_p()) {
                throw std::invalid_argument("plaintext coefficient too large for weighted sum");
            }
            small[i] = centered[i].get_si();
        }
        prep_plain.push_back(engine.prepare(std::span<const std::int64_t>(small)));
    }

    Ciphertext out;
    out.fingerprint = params_.fingerprint();
    for (std::size_t j = 0; j < len; ++j) {
        auto acc = engine.make_accumulator();
        for (std::size_t i = 0; i < cts.size(); ++i) {
            if (j >= cts[i]->size()) continue;
            engine.multiply_accumulate(acc, engine.prepare(cts[i]->polys[j]), prep_plain[i]);
        }
        auto conv = engine.reconstruct(acc);
        out.polys.push_back(ring::from_signed(params_.rq, conv));
    }
    return out;
}

Evaluator::LinearCombiner::LinearCombiner(const Evaluator& ev, std::size_t max_terms)
    : ev_(&ev), max_terms_(max_terms) {
    const auto& params = ev.params();
    const BigInt half_q = params.rq->half_modulus();
    const BigInt half_t = BigInt(params.t) / 2 + 1;
    BigInt bound = half_q * half_t * BigInt(static_cast<unsigned long>(params.n)) *
                   BigInt(static_cast<unsigned long>(max_terms));
    engine_ = std::make_shared<ring::ConvEngine>(params.n, bound);
}

std::size_t Evaluator::LinearCombiner::add_ciphertext(const Ciphertext& ct) {
    ev_->check(ct);
    std::vector<ring::ConvEngine::Prepared> polys;
    polys.reserve(ct.size());
    for (const auto& p : ct.polys) polys.push_back(engine_->prepare(p));
    cts_.push_back(std::move(polys));
    return cts_.size() - 1;
}

std::size_t Evaluator::LinearCombiner::add_plain(const ring::RingPoly& p) {
    ev_->check_plain(p);
    auto centered = ring::centered_lift(p);
    std::vector<std::int64_t> small(centered.size());
    for (std::size_t i = 0; i < centered.size(); ++i) {
        if (!centered[i].fits_slong_p()) {
            throw std::invalid_argument("plaintext coefficient too large for combiner");
        }
        small[i] = centered[i].get_si();
    }
    plains_.push_back(engine_->prepare(std::span<const std::int64_t>(small)));
    return plains_.size() - 1;
}

Ciphertext Evaluator::LinearCombiner::combine(std::span<const Term> terms) const {
    if (terms.empty() || terms.size() > max_terms_) {
        throw std::invalid_argument("combiner term count out of range");
    }
    std::size_t len = 0;
    for (const auto& t : terms) len = std::max(len, cts_.at(t.ct).size());
    ev_->plain_mul_ += terms.size();
    Ciphertext out;
    out.fingerprint = ev_->params().fingerprint();
    for (std::size_t j = 0; j < len; ++j) {
        auto acc = engine_->make_accumulator();
        for (const auto& t : terms) {
            const auto& polys = cts_[t.ct];
            if (j >= polys.size()) continue;
            engine_->multiply_accumulate(acc, polys[j], plains_.at(t.plain));
        }
        auto conv = engine_->reconstruct(acc);
        out.polys.push_back(ring::from_signed(ev_->params().rq, conv));
    }
    return out;
}

Evaluator::LinearCombiner Evaluator::make_combiner(std::size_t max_terms) const {
    return LinearCombiner(*this, max_terms);
}

Ciphertext Evaluator::add_plain(const Ciphertext& a, const ring::RingPoly& p) const {
    check(a);
    check_plain(p);
    const BigInt delta = params_.delta();
    Ciphertext out = a;
    RingPoly dm(params_.rq);
    for (std::size_t i = 0; i < params_.n; ++i) {
        BigInt c = p.coeff(i);
        if (c != 0) dm.set_coeff(i, delta * c);
    }
    out.polys[0] = ring::poly_add(out.polys[0], dm);
    return out;
}

Ciphertext Evaluator::sub_plain(const Ciphertext& a, const ring::RingPoly& p) const {
    check(a);
    check_plain(p);
    return add_plain(a, ring::poly_negate(p));
}

} // namespace heip::fv
