#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "heip/rng.hpp"

namespace heip::ring {

using BigInt = mpz_class;

// Parameters of the negacyclic ring Z_q[x]/(x^n + 1). Immutable after
// construction and shared by every polynomial living in the ring.
class RingContext {
public:
    RingContext(std::size_t n, BigInt q);

    std::size_t degree() const { return n_; }
    const BigInt& modulus() const { return q_; }
    const BigInt& half_modulus() const { return half_q_; } // floor(q / 2)
    std::size_t modulus_bits() const { return q_bits_; }
    // Limbs of packed storage per coefficient.
    std::size_t stride() const { return stride_; }
    // Bytes per coefficient in the canonical wire format.
    std::size_t coeff_bytes() const { return (q_bits_ + 7) / 8; }

    bool operator==(const RingContext& other) const {
        return n_ == other.n_ && q_ == other.q_;
    }

    // q and floor(q/2) packed little-endian, stride() limbs each.
    std::span<const std::uint64_t> q_limbs() const { return q_limbs_; }
    std::span<const std::uint64_t> half_q_limbs() const { return half_q_limbs_; }

private:
    std::size_t n_;
    BigInt q_;
    BigInt half_q_;
    std::size_t q_bits_;
    std::size_t stride_;
    std::vector<std::uint64_t> q_limbs_, half_q_limbs_;
};

using ContextPtr = std::shared_ptr<const RingContext>;

ContextPtr make_context(std::size_t n, BigInt q);

// Element of Z_q[x]/(x^n + 1). Coefficients are stored canonically in [0, q),
// packed little-endian into stride() 64-bit limbs each; q may be far larger
// than a machine word. Immutable value semantics: operations return new
// polynomials.
class RingPoly {
public:
    explicit RingPoly(ContextPtr ctx); // zero polynomial
    RingPoly(ContextPtr ctx, std::span<const BigInt> coeffs);

    const ContextPtr& context() const { return ctx_; }
    std::size_t degree() const { return ctx_->degree(); }

    BigInt coeff(std::size_t i) const;
    void set_coeff(std::size_t i, const BigInt& value); // reduced mod q
    // Raw limb access (canonical packed form), used by serialization and the
    // convolution engine.
    std::span<const std::uint64_t> limbs() const { return limbs_; }
    std::span<std::uint64_t> limbs_mut() { return limbs_; }

    bool is_zero() const;
    bool operator==(const RingPoly& other) const;
    bool operator!=(const RingPoly& other) const { return !(*this == other); }

    static RingPoly zero(ContextPtr ctx) { return RingPoly(std::move(ctx)); }
    static RingPoly one(ContextPtr ctx);
    static RingPoly monomial(ContextPtr ctx, std::size_t deg, const BigInt& c);

private:
    ContextPtr ctx_;
    std::vector<std::uint64_t> limbs_; // n * stride
};

// --- arithmetic -------------------------------------------------------------

RingPoly poly_add(const RingPoly& a, const RingPoly& b);
RingPoly poly_sub(const RingPoly& a, const RingPoly& b);
RingPoly poly_negate(const RingPoly& a);
RingPoly poly_scalar_mul(const RingPoly& a, const BigInt& k);

enum class MulPath { automatic, schoolbook, ntt };

// Product reduced modulo x^n + 1 (x^n == -1) and modulo q. The schoolbook
// path is the reference; the NTT path must be bit-identical to it and is
// selected automatically for large rings.
RingPoly poly_mul(const RingPoly& a, const RingPoly& b, MulPath path = MulPath::automatic);

// Representative of each coefficient in (-q/2, q/2].
std::vector<BigInt> centered_lift(const RingPoly& a);
// Inverse of centered_lift: reduces signed coefficients into [0, q).
RingPoly from_signed(ContextPtr ctx, std::span<const BigInt> coeffs);

// --- samplers ---------------------------------------------------------------

// Discrete Gaussian parameters for the FV error distribution. Values beyond
// tail_bound * sigma are rejected and resampled.
struct GaussianSampler {
    double sigma = 3.2;
    double tail_bound = 6.0;

    GaussianSampler() = default;
    GaussianSampler(double sigma_, double tail_bound_);

    // One signed integer sample (not reduced into any ring).
    long sample_int(Prng& prng) const;
};

RingPoly sample_binary(const ContextPtr& ctx, Prng& prng);
RingPoly sample_uniform(const ContextPtr& ctx, Prng& prng);
RingPoly sample_gaussian(const ContextPtr& ctx, const GaussianSampler& sampler, Prng& prng);

// Exact negacyclic convolution of signed integer sequences (no modular
// reduction): the workhorse behind poly_mul and the FV tensor product.
// Declared here for the fv module and tests; implementation in ntt.cpp
// dispatches between the schoolbook reference and the CRT/NTT fast path.
std::vector<BigInt> negacyclic_conv_exact(std::span<const BigInt> a, std::span<const BigInt> b,
                                          MulPath path = MulPath::automatic);

} // namespace heip::ring
