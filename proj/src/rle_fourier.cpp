#include "heip/rle_fourier.hpp"

#include <cmath>
#include <stdexcept>

#include "heip/parallel.hpp"

namespace heip::rle {

using circuit::HeBackend;
using circuit::RealBackend;

void FourierParams::validate() const {
    if (degree < 1) throw std::invalid_argument("series degree must be >= 1");
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("delta must be in (0, 1]");
    if (taylor_order < 1) throw std::invalid_argument("taylor order must be >= 1");
    if (period != 64) throw std::invalid_argument("the series formula fixed the period at 64");
}

std::vector<double> rle_weight_matrix(std::size_t pair_count, std::uint32_t out_len,
                                      const FourierParams& p) {
    const std::size_t n_in = pair_count * (1 + 2 * std::size_t(p.degree));
    std::vector<double> wm(std::size_t(out_len) * n_in, 0.0);
    for (std::uint32_t x = 0; x < out_len; ++x) {
        double* row = wm.data() + std::size_t(x) * n_in;
        for (std::size_t i = 0; i < pair_count; ++i) row[i] = 1.0 / double(p.period);
        for (std::size_t i = 0; i < pair_count; ++i) {
            for (int k = 1; k <= p.degree; ++k) {
                const double scale = double(k) * M_PI / double(p.period);
                const double amp = 2.0 / (double(k) * M_PI);
                const std::size_t col = pair_count + (i * std::size_t(p.degree) + (k - 1)) * 2;
                row[col] = amp * std::cos(scale * double(x));
                row[col + 1] = amp * std::sin(scale * double(x));
            }
        }
    }
    return wm;
}

std::uint64_t rle_decode_ct_mul_count(std::size_t pairs, const FourierParams& params) {
    const int terms_s = (params.taylor_order + 1) / 2;
    const int terms_c = params.taylor_order / 2 + 1;
    const std::uint64_t sin_muls = terms_s <= 1 ? 0 : std::uint64_t(terms_s);
    const std::uint64_t pair_muls = 1 + (terms_s <= 1 ? 0 : std::uint64_t(terms_s) - 1) +
                                    (terms_c <= 1 ? 0 : std::uint64_t(terms_c) - 1);
    const std::uint64_t per_uv = sin_muls + pair_muls + 3; // AP, U, V
    return pairs * (1 + std::uint64_t(params.degree) * per_uv);
}

// --- homomorphic decode -----------------------------------------------------------

std::vector<fv::Ciphertext> rle_decode(const fv::Evaluator& ev, const RleStream& stream,
                                       const FourierParams& params, int threads,
                                       const enc::EncoderParams& encoder_params) {
    params.validate();
    if (stream.out_len != 16 && stream.out_len != 64) {
        throw std::invalid_argument("output length must be 16 or 64");
    }
    if (stream.pairs.empty()) throw std::invalid_argument("empty RLE stream");
    check_depth(ev.params(), params);
    enc::FractionalEncoder encoder(ev.params().rt, encoder_params);
    HeBackend b(ev, encoder, threads);

    const std::size_t t = stream.pairs.size();
    std::vector<fv::Ciphertext> halfw, offs;
    halfw.reserve(t);
    offs.reserve(t);
    fv::Ciphertext prefix;
    for (std::size_t i = 0; i < t; ++i) {
        auto half = b.mul_plain(stream.pairs[i].second, 0.5);
        if (i == 0) {
            offs.push_back(half);
        } else {
            prefix = (i == 1) ? stream.pairs[0].second : b.add(prefix, stream.pairs[i - 1].second);
            offs.push_back(b.add(half, prefix));
        }
        halfw.push_back(params.delta == 0.5 ? std::move(half)
                                            : b.add_plain(half, params.delta - 0.5));
    }

    // DC terms and the per-(pair, k) series factors; independent jobs.
    const std::size_t n_in = t * (1 + 2 * std::size_t(params.degree));
    std::vector<fv::Ciphertext> inputs(n_in);
    parallel_for(0, t, threads,
                 [&](std::size_t i) { inputs[i] = b.mul(stream.pairs[i].first, halfw[i]); });
    parallel_for(0, t * std::size_t(params.degree), threads, [&](std::size_t job) {
        const std::size_t i = job / params.degree;
        const int k = int(job % params.degree) + 1;
        const double scale = double(k) * M_PI / double(params.period);
        auto uv = series_uv_circuit(b, stream.pairs[i].first, halfw[i], offs[i], scale,
                                    params.taylor_order);
        const std::size_t col = t + (i * std::size_t(params.degree) + (k - 1)) * 2;
        inputs[col] = std::move(uv.first);
        inputs[col + 1] = std::move(uv.second);
    });

    auto wm = rle_weight_matrix(t, stream.out_len, params);
    std::vector<const fv::Ciphertext*> ptrs;
    ptrs.reserve(inputs.size());
    for (const auto& v : inputs) ptrs.push_back(&v);
    return b.linear_map(std::span<const fv::Ciphertext* const>(ptrs.data(), ptrs.size()), wm.data(),
                        stream.out_len, inputs.size());
}

fv::Ciphertext taylor_sin_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                            const fv::Ciphertext& x, int order) {
    HeBackend b(ev, encoder);
    return taylor_sin_circuit(b, x, order);
}

fv::Ciphertext taylor_cos_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                            const fv::Ciphertext& x, int order) {
    HeBackend b(ev, encoder);
    return taylor_cos_circuit(b, x, order);
}

fv::Ciphertext step_series_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                             const fv::Ciphertext& halfwidth, const fv::Ciphertext& offset, int x,
                             const FourierParams& params) {
    HeBackend b(ev, encoder);
    return step_series_circuit(b, halfwidth, offset, x, params);
}

// --- exact-real references ----------------------------------------------------------

double taylor_sin_ref(double x, int order) {
    const int terms = (order + 1) / 2;
    double acc = 0.0;
    double term = x;
    for (int k = 0; k < terms; ++k) {
        acc += term;
        term *= -x * x / double((2 * k + 2) * (2 * k + 3));
    }
    return acc;
}

double taylor_cos_ref(double x, int order) {
    const int terms = order / 2 + 1;
    double acc = 0.0;
    double term = 1.0;
    for (int k = 0; k < terms; ++k) {
        acc += term;
        term *= -x * x / double((2 * k + 1) * (2 * k + 2));
    }
    return acc;
}

double step_series_ref(double w, double o, double x, const FourierParams& params,
                       bool taylor_trig) {
    double acc = w / double(params.period);
    for (int k = 1; k <= params.degree; ++k) {
        const double scale = double(k) * M_PI / double(params.period);
        double sw, cd;
        if (taylor_trig) {
            // same angle-difference split as the circuit
            sw = taylor_sin_ref(scale * w, params.taylor_order);
            cd = std::cos(scale * x) * taylor_cos_ref(scale * o, params.taylor_order) +
                 std::sin(scale * x) * taylor_sin_ref(scale * o, params.taylor_order);
        } else {
            sw = std::sin(scale * w);
            cd = std::cos(scale * (x - o));
        }
        acc += 2.0 / (double(k) * M_PI) * sw * cd;
    }
    return acc;
}

TwinResult rle_decode_twin(std::span<const std::pair<double, int>> pairs, std::uint32_t out_len,
                           const FourierParams& params) {
    params.validate();
    if (pairs.empty()) throw std::invalid_argument("empty RLE stream");
    TwinResult out;
    out.ideal = jpeg::rle_expand_plain(pairs, out_len);

    // Circuit-faithful: the identical template the homomorphic path runs.
    RealBackend rb;
    std::vector<std::pair<double, double>> real_pairs;
    real_pairs.reserve(pairs.size());
    for (const auto& [a, b_] : pairs) real_pairs.emplace_back(a, double(b_));
    out.circuit = rle_decode_circuit(
        rb, std::span<const std::pair<double, double>>(real_pairs), out_len, params);

    // Independent route: the truncated series evaluated with exact
    // trigonometry, straight from the formula.
    out.series.resize(out_len);
    for (std::uint32_t x = 0; x < out_len; ++x) {
        double acc = 0.0;
        double prefix = 0.0;
        for (const auto& [a, b_] : pairs) {
            const double w = double(b_) / 2.0 + params.delta - 0.5;
            const double o = double(b_) / 2.0 + prefix;
            acc += a * step_series_ref(w, o, double(x), params, false);
            prefix += double(b_);
        }
        out.series[x] = acc;
    }
    return out;
}

// --- preset / depth check -------------------------------------------------------------

const RlePreset& default_rle_preset() {
    // Sized with the digit-growth twin and the measured noise of the order-10
    // Taylor chain; see the calibration test. lambda here is "research rig",
    // not a security claim.
    static const RlePreset preset{8192, 700, 0x100000000001ULL /* placeholder prime-ish */, {3, 12, 18}, 16};
    return preset;
}

void check_depth(const fv::EncryptionParams& params, const FourierParams& fourier) {
    const int terms_s = (fourier.taylor_order + 1) / 2;
    // Sequential ciphertext-multiply depth of one series term.
    const int depth = terms_s + 3;
    const double t_bits = std::log2(double(params.t));
    const double n_bits = std::log2(double(params.n));
    const double need = double(depth) * (t_bits + n_bits + 6.0) + t_bits + 24.0;
    const double have = double(mpz_sizeinbase(params.q.get_mpz_t(), 2));
    if (need > have) {
        throw std::invalid_argument(
            "ring parameters too small for this Taylor depth; use the rle preset");
    }
}

} // namespace heip::rle
