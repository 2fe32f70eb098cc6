#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "heip/encoding.hpp"
#include "heip/fv.hpp"

namespace heip::circuit {

// The image and Fourier circuits are written once as templates over an
// evaluation backend. HeBackend runs them on ciphertexts; RealBackend runs
// the identical arithmetic on exact reals (the plaintext twin used as test
// oracle); DigitBackend runs on un-reduced integer digit polynomials and
// records the largest coefficient reached, which is how plaintext-modulus
// headroom is sized and asserted.

class RealBackend {
public:
    using Value = double;

    Value from_real(double v) const { return v; }
    Value add(Value a, Value b) const { return a + b; }
    Value sub(Value a, Value b) const { return a - b; }
    Value negate(Value a) const { return -a; }
    Value add_plain(Value a, double w) const { return a + w; }
    Value mul_plain(Value a, double w) const { ++plain_mul_; return a * w; }
    Value mul(Value a, Value b) const { ++ct_mul_; return a * b; }

    std::vector<Value> linear_map(std::span<const Value* const> in, const double* w,
                                  std::size_t n_out, std::size_t n_in) const {
        std::vector<Value> out(n_out, 0.0);
        for (std::size_t o = 0; o < n_out; ++o) {
            for (std::size_t i = 0; i < n_in; ++i) out[o] += w[o * n_in + i] * *in[i];
        }
        plain_mul_ += n_out * n_in;
        return out;
    }

    std::uint64_t ct_multiplies() const { return ct_mul_; }
    std::uint64_t plain_multiplies() const { return plain_mul_; }
    void reset_counters() const { ct_mul_ = 0; plain_mul_ = 0; }

private:
    mutable std::uint64_t ct_mul_ = 0;
    mutable std::uint64_t plain_mul_ = 0;
};

// Signed digit polynomials over Z (no modulus): coefficient growth oracle.
class DigitBackend {
public:
    struct Value {
        std::vector<long long> c;
    };

    explicit DigitBackend(const enc::FractionalEncoder& encoder) : encoder_(&encoder) {}

    Value from_real(double v) const;
    Value add(const Value& a, const Value& b) const;
    Value sub(const Value& a, const Value& b) const;
    Value negate(const Value& a) const;
    Value add_plain(const Value& a, double w) const { return add(a, from_real(w)); }
    Value mul_plain(const Value& a, double w) const { return mul(a, from_real(w)); }
    Value mul(const Value& a, const Value& b) const; // negacyclic, exact
    std::vector<Value> linear_map(std::span<const Value* const> in, const double* w,
                                  std::size_t n_out, std::size_t n_in) const;

    // Largest |coefficient| seen in any produced value.
    long long max_abs() const { return max_abs_; }
    void reset_max() const { max_abs_ = 0; }
    double decode(const Value& v) const;

private:
    void observe(const Value& v) const;
    const enc::FractionalEncoder* encoder_;
    mutable long long max_abs_ = 0;
};

class HeBackend {
public:
    using Value = fv::Ciphertext;

    HeBackend(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder, int threads = 1)
        : ev_(&ev), encoder_(&encoder), threads_(threads) {}

    Value add(const Value& a, const Value& b) const { return ev_->add(a, b); }
    Value sub(const Value& a, const Value& b) const { return ev_->sub(a, b); }
    Value negate(const Value& a) const { return ev_->negate(a); }
    Value add_plain(const Value& a, double w) const { return ev_->add_plain(a, plain_for(w)); }
    Value mul_plain(const Value& a, double w) const { return ev_->multiply_plain(a, plain_for(w)); }
    Value mul(const Value& a, const Value& b) const { return ev_->multiply(a, b); }
    std::vector<Value> linear_map(std::span<const Value* const> in, const double* w,
                                  std::size_t n_out, std::size_t n_in) const;

    const fv::Evaluator& evaluator() const { return *ev_; }
    const enc::FractionalEncoder& encoder() const { return *encoder_; }

    // Encoded plaintext for a public weight, cached per distinct bit pattern.
    const ring::RingPoly& plain_for(double w) const;

private:
    const fv::Evaluator* ev_;
    const enc::FractionalEncoder* encoder_;
    int threads_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::uint64_t, std::unique_ptr<ring::RingPoly>> cache_;
};

} // namespace heip::circuit
