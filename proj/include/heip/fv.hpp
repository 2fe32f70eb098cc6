#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "heip/ntt.hpp"
#include "heip/ring.hpp"

namespace heip::fv {

struct PresetEntry {
    std::size_t n;
    unsigned q_bits;
    unsigned lambda_bits; // informational security label, documentation only
};

// Default q bit-lengths keyed by ring degree; the single place the preset
// table lives. q itself is the smallest prime with the given bit length.
std::span<const PresetEntry> presets();

struct EncryptionParams {
    std::size_t n = 0;
    ring::BigInt q;
    std::uint64_t t = 0;
    double sigma = 3.2;
    double tail_bound = 6.0;
    unsigned lambda_bits = 0; // informational only

    ring::ContextPtr rq; // Z_q[x]/(x^n+1)
    ring::ContextPtr rt; // Z_t[x]/(x^n+1)

    static EncryptionParams create(std::size_t n, std::uint64_t t,
                                   std::optional<unsigned> q_bits = std::nullopt,
                                   double sigma = 3.2);

    ring::BigInt delta() const { return q / t; } // floor(q/t)
    std::uint64_t fingerprint() const;
    bool valid() const { return n != 0; }
};

struct SecretKey {
    ring::RingPoly s; // binary coefficients, element of R_q
    std::uint64_t fingerprint = 0;
};

struct PublicKey {
    ring::RingPoly p0, p1;
    std::uint64_t fingerprint = 0;
};

// Ordered sequence of R_q polynomials; fresh ciphertexts have two, and the
// length grows under multiplication since relinearization is not used.
struct Ciphertext {
    std::vector<ring::RingPoly> polys;
    std::uint64_t fingerprint = 0;

    std::size_t size() const { return polys.size(); }
};

std::pair<SecretKey, PublicKey> keygen(const EncryptionParams& params, Prng& prng);

class Encryptor {
public:
    Encryptor(EncryptionParams params, PublicKey pk);

    // m must be a plaintext in R_t. The caller supplies the randomness
    // source; use one Prng per thread.
    Ciphertext encrypt(const ring::RingPoly& m, Prng& prng) const;

    const EncryptionParams& params() const { return params_; }

private:
    struct KeyTransforms;
    EncryptionParams params_;
    PublicKey pk_;
    std::shared_ptr<const KeyTransforms> prepared_;
};

class Decryptor {
public:
    Decryptor(EncryptionParams params, SecretKey sk);

    // Valid only while the ciphertext's noise budget is positive; beyond
    // that the result is undefined (not an error).
    ring::RingPoly decrypt(const Ciphertext& ct) const;

    // Bits of headroom before noise corrupts decryption; 0 means unreliable.
    std::uint32_t noise_budget(const Ciphertext& ct) const;

    const EncryptionParams& params() const { return params_; }

private:
    ring::RingPoly key_power_sum(const Ciphertext& ct) const;
    EncryptionParams params_;
    SecretKey sk_;
};

// All evaluation operations are pure functions of their inputs; an Evaluator
// instance may be shared across threads. The multiply counters exist for the
// depth-accounting assertions in tests.
class Evaluator {
public:
    explicit Evaluator(EncryptionParams params);

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) const;
    Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const;
    Ciphertext negate(const Ciphertext& a) const;
    Ciphertext multiply(const Ciphertext& a, const Ciphertext& b) const;
    Ciphertext multiply_plain(const Ciphertext& a, const ring::RingPoly& p) const;
    Ciphertext add_plain(const Ciphertext& a, const ring::RingPoly& p) const;
    Ciphertext sub_plain(const Ciphertext& a, const ring::RingPoly& p) const;

    // sum_i cts[i] * plains[i], with every polynomial product evaluated in a
    // single transformed pass.
    Ciphertext weighted_sum_plain(std::span<const Ciphertext* const> cts,
                                  std::span<const ring::RingPoly* const> plains) const;

    // Reusable plaintext-weighted combination: operands are transformed once
    // and may then be combined many times with different weights. The DCT and
    // Fourier-series circuits evaluate many weighted sums over a fixed set of
    // ciphertexts, which makes this the hot path.
    class LinearCombiner {
    public:
        std::size_t add_ciphertext(const Ciphertext& ct);
        std::size_t add_plain(const ring::RingPoly& p);
        struct Term {
            std::size_t ct;
            std::size_t plain;
        };
        // sum over terms of ct * plain; safe to call concurrently once all
        // operands have been added.
        Ciphertext combine(std::span<const Term> terms) const;

    private:
        friend class Evaluator;
        LinearCombiner(const Evaluator& ev, std::size_t max_terms);
        const Evaluator* ev_;
        std::shared_ptr<ring::ConvEngine> engine_;
        std::size_t max_terms_;
        std::vector<std::vector<ring::ConvEngine::Prepared>> cts_;
        std::vector<ring::ConvEngine::Prepared> plains_;
    };
    LinearCombiner make_combiner(std::size_t max_terms) const;

    const EncryptionParams& params() const { return params_; }

    std::uint64_t ct_multiplies() const { return ct_mul_.load(); }
    std::uint64_t plain_multiplies() const { return plain_mul_.load(); }
    void reset_counters() const { ct_mul_ = 0; plain_mul_ = 0; }

private:
    void check(const Ciphertext& ct) const;
    void check_plain(const ring::RingPoly& p) const;
    EncryptionParams params_;
    mutable std::atomic<std::uint64_t> ct_mul_{0};
    mutable std::atomic<std::uint64_t> plain_mul_{0};
};

} // namespace heip::fv
