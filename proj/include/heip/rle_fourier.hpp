#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "heip/circuit.hpp"
#include "heip/encoding.hpp"
#include "heip/fv.hpp"
#include "heip/jpeg.hpp"

namespace heip::rle {

struct FourierParams {
    int period = 64;      // fixed denominator of the series formula
    int degree = 16;      // number of series terms
    double delta = 0.5;   // step-width tuning; 0.5 makes the half-width b/2 exactly
    int taylor_order = 10;

    void validate() const;
};

// Encrypted (value, runlength) pairs with a fixed output length. The client
// guarantees that the encrypted run lengths sum to out_len.
struct RleStream {
    std::vector<std::pair<fv::Ciphertext, fv::Ciphertext>> pairs; // (a_i, b_i)
    std::uint32_t out_len = 16; // 16 or 64
};

// --- Taylor trigonometry (template circuits) -----------------------------------

// Maclaurin polynomial of sin up to the given order, factored Horner form:
// x (1 - u/6 (1 - u/20 (1 - u/42 (...)))) with u = x^2.
template <class B>
typename B::Value taylor_sin_circuit(const B& b, const typename B::Value& x, int order) {
    const int terms = (order + 1) / 2; // odd powers 1..2*terms-1
    if (terms <= 1) return b.mul_plain(x, 1.0);
    auto u = b.mul(x, x);
    const int kmax = terms - 1;
    auto acc = b.add_plain(b.negate(b.mul_plain(u, 1.0 / double(2 * kmax * (2 * kmax + 1)))), 1.0);
    for (int k = kmax - 1; k >= 1; --k) {
        auto t = b.mul_plain(b.mul(u, acc), 1.0 / double(2 * k * (2 * k + 1)));
        acc = b.add_plain(b.negate(t), 1.0);
    }
    return b.mul(x, acc);
}

template <class B>
typename B::Value detail_cos_from_u(const B& b, const typename B::Value& u, int terms) {
    if (terms <= 1) return b.add_plain(b.mul_plain(u, 0.0), 1.0);
    const int kmax = terms - 1;
    auto acc = b.add_plain(b.negate(b.mul_plain(u, 1.0 / double((2 * kmax - 1) * 2 * kmax))), 1.0);
    for (int k = kmax - 1; k >= 1; --k) {
        auto t = b.mul_plain(b.mul(u, acc), 1.0 / double((2 * k - 1) * 2 * k));
        acc = b.add_plain(b.negate(t), 1.0);
    }
    return acc;
}

// Maclaurin polynomial of cos up to the given order:
// 1 - u/2 (1 - u/12 (1 - u/30 (...))) with u = x^2.
template <class B>
typename B::Value taylor_cos_circuit(const B& b, const typename B::Value& x, int order) {
    const int terms = order / 2 + 1; // even powers 0..2*(terms-1)
    auto u = b.mul(x, x);
    return detail_cos_from_u(b, u, terms);
}

// sin and cos of the same argument share the squared-argument ciphertext.
template <class B>
std::pair<typename B::Value, typename B::Value> taylor_sin_cos_circuit(const B& b,
                                                                       const typename B::Value& x,
                                                                       int order) {
    const int sin_terms = (order + 1) / 2;
    const int cos_terms = order / 2 + 1;
    auto u = b.mul(x, x);
    typename B::Value s = [&] {
        if (sin_terms <= 1) return b.mul_plain(x, 1.0);
        const int kmax = sin_terms - 1;
        auto acc =
            b.add_plain(b.negate(b.mul_plain(u, 1.0 / double(2 * kmax * (2 * kmax + 1)))), 1.0);
        for (int k = kmax - 1; k >= 1; --k) {
            auto t = b.mul_plain(b.mul(u, acc), 1.0 / double(2 * k * (2 * k + 1)));
            acc = b.add_plain(b.negate(t), 1.0);
        }
        return b.mul(x, acc);
    }();
    return {std::move(s), detail_cos_from_u(b, u, cos_terms)};
}

// --- step-function series ---------------------------------------------------------

// One series term pair for index k with scale = k*pi/64:
//   U = a * sin(scale*w) * cos(scale*o), V = a * sin(scale*w) * sin(scale*o).
// The public sample position enters later through the angle-difference
// identity cos(k(x-o)pi/64) = cos(kx..)cos(ko..) + sin(kx..)sin(ko..), so only
// the encrypted offset and width pass through Taylor trigonometry.
template <class B>
std::pair<typename B::Value, typename B::Value> series_uv_circuit(const B& b,
                                                                  const typename B::Value& a,
                                                                  const typename B::Value& w,
                                                                  const typename B::Value& o,
                                                                  double scale, int taylor_order) {
    auto p = taylor_sin_circuit(b, b.mul_plain(w, scale), taylor_order);
    auto cs = taylor_sin_cos_circuit(b, b.mul_plain(o, scale), taylor_order);
    auto ap = b.mul(a, p);
    return {b.mul(ap, cs.second), b.mul(ap, cs.first)};
}

// Truncated series of the step function of height 1 on (-w, w) shifted to o,
// sampled at public integer x:
//   H(w, o, x) = w/64 + sum_k (2/k pi) sin(k w pi/64) cos(k (x-o) pi/64).
template <class B>
typename B::Value step_series_circuit(const B& b, const typename B::Value& w,
                                      const typename B::Value& o, int x, const FourierParams& p) {
    p.validate();
    std::vector<typename B::Value> inputs;
    std::vector<double> weights;
    inputs.push_back(w);
    weights.push_back(1.0 / double(p.period));
    for (int k = 1; k <= p.degree; ++k) {
        const double scale = double(k) * M_PI / double(p.period);
        auto pk = taylor_sin_circuit(b, b.mul_plain(w, scale), p.taylor_order);
        auto cs = taylor_sin_cos_circuit(b, b.mul_plain(o, scale), p.taylor_order);
        const double amp = 2.0 / (double(k) * M_PI);
        inputs.push_back(b.mul(pk, cs.second));
        weights.push_back(amp * std::cos(scale * double(x)));
        inputs.push_back(b.mul(pk, cs.first));
        weights.push_back(amp * std::sin(scale * double(x)));
    }
    std::vector<const typename B::Value*> ptrs;
    ptrs.reserve(inputs.size());
    for (const auto& v : inputs) ptrs.push_back(&v);
    auto out = b.linear_map(std::span<const typename B::Value* const>(ptrs.data(), ptrs.size()),
                            weights.data(), 1, weights.size());
    return std::move(out[0]);
}

// Weight matrix of the final assembly: row x holds the DC weight for every
// pair followed by the (U, V) weights of every (pair, k) term.
std::vector<double> rle_weight_matrix(std::size_t pair_count, std::uint32_t out_len,
                                      const FourierParams& p);

// --- run-length decoding ------------------------------------------------------------

// Sequential reference circuit shared by the homomorphic path and the
// circuit-faithful twin: identical arithmetic, backend decides the domain.
template <class B>
std::vector<typename B::Value> rle_decode_circuit(
    const B& b, std::span<const std::pair<typename B::Value, typename B::Value>> pairs,
    std::uint32_t out_len, const FourierParams& p) {
    p.validate();
    if (pairs.empty()) throw std::invalid_argument("empty RLE stream");
    const std::size_t t = pairs.size();

    // halfwidth w_i = b_i/2 + (delta - 1/2); offset o_i = b_i/2 + sum_{k<i} b_k
    std::vector<typename B::Value> halfw, offs;
    halfw.reserve(t);
    offs.reserve(t);
    typename B::Value prefix{};
    for (std::size_t i = 0; i < t; ++i) {
        auto half = b.mul_plain(pairs[i].second, 0.5);
        if (i == 0) {
            offs.push_back(half);
        } else {
            prefix = (i == 1) ? pairs[0].second : b.add(prefix, pairs[i - 1].second);
            offs.push_back(b.add(half, prefix));
        }
        halfw.push_back(p.delta == 0.5 ? std::move(half) : b.add_plain(half, p.delta - 0.5));
    }

    std::vector<typename B::Value> inputs;
    inputs.reserve(t + 2 * t * std::size_t(p.degree));
    for (std::size_t i = 0; i < t; ++i) inputs.push_back(b.mul(pairs[i].first, halfw[i]));
    for (std::size_t i = 0; i < t; ++i) {
        for (int k = 1; k <= p.degree; ++k) {
            const double scale = double(k) * M_PI / double(p.period);
            auto uv = series_uv_circuit(b, pairs[i].first, halfw[i], offs[i], scale, p.taylor_order);
            inputs.push_back(std::move(uv.first));
            inputs.push_back(std::move(uv.second));
        }
    }

    auto wm = rle_weight_matrix(t, out_len, p);
    std::vector<const typename B::Value*> ptrs;
    ptrs.reserve(inputs.size());
    for (const auto& v : inputs) ptrs.push_back(&v);
    return b.linear_map(std::span<const typename B::Value* const>(ptrs.data(), ptrs.size()),
                        wm.data(), out_len, inputs.size());
}

// Homomorphic decode; parallelizes the per-term work across threads.
std::vector<fv::Ciphertext> rle_decode(const fv::Evaluator& ev, const RleStream& stream,
                                       const FourierParams& params, int threads = 0,
                                       const enc::EncoderParams& encoder_params = {});

fv::Ciphertext taylor_sin_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                            const fv::Ciphertext& x, int order);
fv::Ciphertext taylor_cos_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                            const fv::Ciphertext& x, int order);
fv::Ciphertext step_series_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                             const fv::Ciphertext& halfwidth, const fv::Ciphertext& offset, int x,
                             const FourierParams& params);

// Ciphertext-ciphertext multiply count of one decode, asserted against the
// evaluator's instrumentation counter.
std::uint64_t rle_decode_ct_mul_count(std::size_t pairs, const FourierParams& params);

// --- twins ---------------------------------------------------------------------------

struct TwinResult {
    std::vector<double> circuit; // Taylor-trig circuit on exact reals
    std::vector<double> series;  // truncated series with exact trigonometry
    std::vector<double> ideal;   // exact run-length expansion
};

TwinResult rle_decode_twin(std::span<const std::pair<double, int>> pairs, std::uint32_t out_len,
                           const FourierParams& params);

// Exact-real references used by the twins and tests.
double taylor_sin_ref(double x, int order);
double taylor_cos_ref(double x, int order);
double step_series_ref(double w, double o, double x, const FourierParams& params, bool taylor_trig);

// Parameter preset for this module: Taylor circuits are multiplicatively deep,
// so the ring and moduli are larger than the generic image presets.
struct RlePreset {
    std::size_t n;
    unsigned q_bits;
    std::uint64_t t;
    enc::EncoderParams encoder;
    int max_degree; // largest series degree the preset's depth check allows
};
const RlePreset& default_rle_preset();
// Throws when the requested degree/order exceeds what the preset was sized for.
void check_depth(const fv::EncryptionParams& params, const FourierParams& fourier);

} // namespace heip::rle
