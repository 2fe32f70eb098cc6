#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heip/ring.hpp"

namespace heip::enc {

// CLI-facing encoder parameters, e.g. "B=2,ni=64,nf=32".
struct EncoderParams {
    std::uint32_t base = 2;
    std::uint32_t n_integer = 64;
    std::uint32_t n_fraction = 32;

    static EncoderParams parse(const std::string& text);
    std::string to_string() const;
};

// Maps reals to plaintext polynomials: base-B integer digits a_k go to
// coefficient sign(y)*a_k of x^k, fractional digits b_k to -sign(y)*b_k at
// x^(n-k). The base-B expansion is truncated after n_fraction digits.
class FractionalEncoder {
public:
    FractionalEncoder(ring::ContextPtr plain_ctx, std::uint32_t base, std::uint32_t n_integer,
                      std::uint32_t n_fraction);
    FractionalEncoder(ring::ContextPtr plain_ctx, const EncoderParams& params)
        : FractionalEncoder(std::move(plain_ctx), params.base, params.n_integer,
                            params.n_fraction) {}

    const ring::ContextPtr& context() const { return ctx_; }
    std::uint32_t base() const { return base_; }
    std::uint32_t integer_digits() const { return ni_; }
    std::uint32_t fraction_digits() const { return nf_; }
    EncoderParams params() const { return {base_, ni_, nf_}; }
    // Worst-case representation error of a single encode.
    double resolution() const;

    ring::RingPoly encode(double y) const;
    double decode(const ring::RingPoly& p) const;

    // Signed digit vector of length n before reduction mod t: what encode()
    // would place at each degree. Used by the digit-growth twin.
    std::vector<long long> digits(double y) const;
    // Value of a signed digit vector under the same decode convention.
    double decode_digits(std::span<const long long> digits) const;

private:
    ring::ContextPtr ctx_;
    std::uint32_t base_, ni_, nf_;
};

// Integer-only special case: base-B digits at ascending powers, no
// fractional wrap-around.
class IntegerEncoder {
public:
    IntegerEncoder(ring::ContextPtr plain_ctx, std::uint32_t base);

    const ring::ContextPtr& context() const { return ctx_; }
    std::uint32_t base() const { return base_; }

    ring::RingPoly encode(std::int64_t v) const;
    std::int64_t decode(const ring::RingPoly& p) const;

private:
    ring::ContextPtr ctx_;
    std::uint32_t base_;
};

} // namespace heip::enc
