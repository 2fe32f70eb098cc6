#include "heip/image.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "heip/parallel.hpp"

namespace heip::img {

namespace {

// ITU-T T.81 Annex K base tables, natural (row-major) order.
constexpr std::uint16_t kLuminanceBase[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  //
    12, 12, 14, 19, 26,  58,  60,  55,  //
    14, 13, 16, 24, 40,  57,  69,  56,  //
    14, 17, 22, 29, 51,  87,  80,  62,  //
    18, 22, 37, 56, 68,  109, 103, 77,  //
    24, 35, 55, 64, 81,  104, 113, 92,  //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
};

constexpr std::uint16_t kChrominanceBase[64] = {
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
};

QuantMatrix scale_table(const std::uint16_t* base, int quality) {
    if (quality < 1 || quality > 100) throw std::invalid_argument("quality must be in [1, 100]");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    QuantMatrix q;
    q.quality = quality;
    for (int i = 0; i < 64; ++i) {
        int v = (base[i] * scale + 50) / 100;
        q.values[i] = static_cast<std::uint16_t>(std::clamp(v, 1, 255));
    }
    return q;
}

} // namespace

QuantMatrix QuantMatrix::luminance(int quality) { return scale_table(kLuminanceBase, quality); }
QuantMatrix QuantMatrix::chrominance(int quality) { return scale_table(kChrominanceBase, quality); }

std::array<double, 2> lerp_weights(double t) { return {1.0 - t, t}; }

std::array<double, 4> cubic_weights(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {
        0.5 * (-t + 2 * t2 - t3),
        0.5 * (2 - 5 * t2 + 3 * t3),
        0.5 * (t + 4 * t2 - 3 * t3),
        0.5 * (-t2 + t3),
    };
}

AxisTaps axis_taps(std::uint32_t src_size, std::uint32_t dst_size, std::uint32_t dst_pos,
                   ResizeMode mode) {
    if (src_size == 0 || dst_size == 0) throw std::invalid_argument("empty geometry");
    // Half-pixel centers: source position of the destination sample center.
    const double scale = double(src_size) / double(dst_size);
    double src = (double(dst_pos) + 0.5) * scale - 0.5;
    double x0 = std::floor(src);
    AxisTaps taps;
    taps.t = src - x0;
    const int base = static_cast<int>(x0);
    auto clamp_idx = [&](int v) { return std::clamp(v, 0, int(src_size) - 1); };
    if (mode == ResizeMode::bilinear) {
        taps.count = 2;
        auto w = lerp_weights(taps.t);
        for (int i = 0; i < 2; ++i) {
            taps.idx[i] = clamp_idx(base + i);
            taps.w[i] = w[i];
        }
    } else {
        taps.count = 4;
        auto w = cubic_weights(taps.t);
        for (int i = 0; i < 4; ++i) {
            taps.idx[i] = clamp_idx(base - 1 + i);
            taps.w[i] = w[i];
        }
    }
    return taps;
}

const std::array<std::array<double, 3>, 3>& ycbcr_matrix() {
    static const std::array<std::array<double, 3>, 3> m = {{
        {0.299, 0.587, 0.114},
        {-0.168736, -0.331264, 0.5},
        {0.5, -0.418688, -0.081312},
    }};
    return m;
}

double dct_factor(int u, int x) {
    const double alpha = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
    return alpha * 0.5 * std::cos((2 * x + 1) * u * M_PI / 16.0);
}

// --- HeBackend pieces ---------------------------------------------------------

namespace {

fv::Ciphertext zero_ciphertext(const fv::EncryptionParams& params) {
    fv::Ciphertext ct;
    ct.fingerprint = params.fingerprint();
    ct.polys.assign(2, ring::RingPoly(params.rq));
    return ct;
}

std::uint64_t weight_key(double w) {
    std::uint64_t k;
    std::memcpy(&k, &w, sizeof(k));
    return k;
}

} // namespace

} // namespace heip::img

namespace heip::circuit {

const ring::RingPoly& HeBackend::plain_for(double w) const {
    const std::uint64_t key = img::weight_key(w);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        it = cache_.emplace(key, std::make_unique<ring::RingPoly>(encoder_->encode(w))).first;
    }
    return *it->second;
}

std::vector<fv::Ciphertext> HeBackend::linear_map(std::span<const Value* const> in,
                                                  const double* w, std::size_t n_out,
                                                  std::size_t n_in) const {
    auto comb = ev_->make_combiner(n_in);
    std::vector<std::size_t> ct_handle(n_in);
    for (std::size_t i = 0; i < n_in; ++i) ct_handle[i] = comb.add_ciphertext(*in[i]);
    std::unordered_map<std::uint64_t, std::size_t> plain_handle;
    std::vector<fv::Ciphertext> out;
    out.reserve(n_out);
    std::vector<fv::Evaluator::LinearCombiner::Term> terms;
    for (std::size_t o = 0; o < n_out; ++o) {
        terms.clear();
        for (std::size_t i = 0; i < n_in; ++i) {
            const double weight = w[o * n_in + i];
            if (weight == 0.0) continue;
            auto key = img::weight_key(weight);
            auto it = plain_handle.find(key);
            if (it == plain_handle.end()) {
                it = plain_handle.emplace(key, comb.add_plain(encoder_->encode(weight))).first;
            }
            terms.push_back({ct_handle[i], it->second});
        }
        out.push_back(terms.empty() ? img::zero_ciphertext(ev_->params())
                                    : comb.combine(terms));
    }
    return out;
}

// --- DigitBackend -------------------------------------------------------------

DigitBackend::Value DigitBackend::from_real(double v) const {
    Value out;
    out.c = encoder_->digits(v);
    return out;
}

void DigitBackend::observe(const Value& v) const {
    for (long long c : v.c) {
        long long a = c < 0 ? -c : c;
        if (a > max_abs_) max_abs_ = a;
    }
}

DigitBackend::Value DigitBackend::add(const Value& a, const Value& b) const {
    Value out = a;
    for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] += b.c[i];
    observe(out);
    return out;
}

DigitBackend::Value DigitBackend::sub(const Value& a, const Value& b) const {
    Value out = a;
    for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] -= b.c[i];
    observe(out);
    return out;
}

DigitBackend::Value DigitBackend::negate(const Value& a) const {
    Value out = a;
    for (auto& c : out.c) c = -c;
    return out;
}

DigitBackend::Value DigitBackend::mul(const Value& a, const Value& b) const {
    const std::size_t n = a.c.size();
    std::vector<__int128> acc(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (a.c[i] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (b.c[j] == 0) continue;
            const std::size_t k = i + j;
            const __int128 p = static_cast<__int128>(a.c[i]) * b.c[j];
            if (k < n) acc[k] += p;
            else acc[k - n] -= p;
        }
    }
    Value out;
    out.c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (acc[i] > INT64_MAX || acc[i] < INT64_MIN) {
            throw std::overflow_error("digit-twin coefficient exceeded 63 bits");
        }
        out.c[i] = static_cast<long long>(acc[i]);
    }
    observe(out);
    return out;
}

std::vector<DigitBackend::Value> DigitBackend::linear_map(std::span<const Value* const> in,
                                                          const double* w, std::size_t n_out,
                                                          std::size_t n_in) const {
    std::vector<Value> out;
    out.reserve(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
        Value acc;
        acc.c.assign(in.empty() ? 0 : in[0]->c.size(), 0);
        for (std::size_t i = 0; i < n_in; ++i) {
            const double weight = w[o * n_in + i];
            if (weight == 0.0) continue;
            acc = add(acc, mul(*in[i], from_real(weight)));
        }
        out.push_back(std::move(acc));
    }
    return out;
}

double DigitBackend::decode(const Value& v) const { return encoder_->decode_digits(v.c); }

} // namespace heip::circuit

namespace heip::img {

using circuit::HeBackend;
using circuit::RealBackend;

// --- encrypt / decrypt --------------------------------------------------------

EncryptedImage encrypt_image(const PlainImage& image, const fv::Encryptor& encryptor,
                             const enc::FractionalEncoder& encoder, const Prng& base_prng,
                             int threads) {
    if (image.samples.size() != image.cell_count()) {
        throw std::invalid_argument("image sample buffer does not match geometry");
    }
    EncryptedImage out;
    out.width = image.width;
    out.height = image.height;
    out.channels = image.channels;
    out.params = encryptor.params();
    out.encoder = encoder.params();
    out.cells.resize(image.cell_count(), zero_ciphertext(encryptor.params()));
    // One deterministic sampler per cell: the result is independent of the
    // thread count, which the fixed-seed determinism guarantee relies on.
    parallel_for(0, out.cells.size(), threads, [&](std::size_t i) {
        Prng cell_prng = base_prng.fork(i);
        out.cells[i] = encryptor.encrypt(encoder.encode(double(image.samples[i])), cell_prng);
    });
    return out;
}

std::vector<double> decrypt_reals(std::span<const fv::Ciphertext> cells,
                                  const fv::Decryptor& decryptor,
                                  const enc::FractionalEncoder& encoder, int threads) {
    std::vector<double> out(cells.size());
    parallel_for(0, cells.size(), threads,
                 [&](std::size_t i) { out[i] = encoder.decode(decryptor.decrypt(cells[i])); });
    return out;
}

PlainImage decrypt_image(const EncryptedImage& image, const fv::Decryptor& decryptor,
                         const enc::FractionalEncoder& encoder, int threads) {
    PlainImage out;
    out.width = image.width;
    out.height = image.height;
    out.channels = image.channels;
    auto reals = decrypt_reals(image.cells, decryptor, encoder, threads);
    out.samples.resize(reals.size());
    for (std::size_t i = 0; i < reals.size(); ++i) {
        out.samples[i] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(reals[i]), 0, 255));
    }
    return out;
}

// --- spec operations ------------------------------------------------------------

fv::Ciphertext lerp_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                      const fv::Ciphertext& c0, const fv::Ciphertext& c1, double t) {
    HeBackend b(ev, encoder);
    return lerp_circuit(b, c0, c1, t);
}

fv::Ciphertext cubic_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                       const fv::Ciphertext& cm1, const fv::Ciphertext& c0,
                       const fv::Ciphertext& c1, const fv::Ciphertext& c2, double t) {
    HeBackend b(ev, encoder);
    return cubic_circuit(b, cm1, c0, c1, c2, t);
}

EncryptedImage resize(const fv::Evaluator& ev, const EncryptedImage& image,
                      const ResizeSpec& spec, int threads) {
    if (spec.src_width != image.width || spec.src_height != image.height) {
        throw std::invalid_argument("resize spec does not match source geometry");
    }
    if (spec.dst_width == 0 || spec.dst_height == 0) {
        throw std::invalid_argument("destination must be at least 1x1");
    }
    enc::FractionalEncoder encoder(image.params.rt, image.encoder);
    HeBackend b(ev, encoder, threads);

    std::vector<AxisTaps> tx(spec.dst_width), ty(spec.dst_height);
    for (std::uint32_t x = 0; x < spec.dst_width; ++x) {
        tx[x] = axis_taps(spec.src_width, spec.dst_width, x, spec.mode);
    }
    for (std::uint32_t y = 0; y < spec.dst_height; ++y) {
        ty[y] = axis_taps(spec.src_height, spec.dst_height, y, spec.mode);
    }
    // Warm the weight cache before the parallel region.
    for (const auto& t : tx)
        for (int i = 0; i < t.count; ++i) b.plain_for(t.w[i]);
    for (const auto& t : ty)
        for (int i = 0; i < t.count; ++i) b.plain_for(t.w[i]);

    EncryptedImage out;
    out.width = spec.dst_width;
    out.height = spec.dst_height;
    out.channels = image.channels;
    out.params = image.params;
    out.encoder = image.encoder;
    out.cells.resize(out.cell_count(), zero_ciphertext(image.params));
    parallel_for(0, out.cells.size(), threads, [&](std::size_t i) {
        const std::uint32_t c = i % image.channels;
        const std::uint32_t x = (i / image.channels) % spec.dst_width;
        const std::uint32_t y = (i / image.channels) / spec.dst_width;
        out.cells[i] = resize_pixel_circuit(b, std::span<const fv::Ciphertext>(image.cells),
                                            image.width, image.channels, tx[x], ty[y], c);
    });
    return out;
}

EncryptedImage rgb_to_ycbcr_h(const fv::Evaluator& ev, const EncryptedImage& image, int threads) {
    if (image.channels != 3) throw std::invalid_argument("color transform needs 3 channels");
    enc::FractionalEncoder encoder(image.params.rt, image.encoder);
    HeBackend b(ev, encoder, threads);
    EncryptedImage out = image;
    const std::size_t pixels = std::size_t(image.width) * image.height;
    parallel_for(0, pixels, threads, [&](std::size_t p) {
        auto ycc = ycbcr_pixel_circuit(b, image.cells[p * 3], image.cells[p * 3 + 1],
                                       image.cells[p * 3 + 2]);
        for (int c = 0; c < 3; ++c) out.cells[p * 3 + c] = std::move(ycc[c]);
    });
    return out;
}

std::vector<fv::Ciphertext> dct8_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                                   std::span<const fv::Ciphertext> block) {
    if (block.size() != 64) throw std::invalid_argument("DCT needs a full 8x8 block");
    HeBackend b(ev, encoder);
    const fv::Ciphertext* ptrs[64];
    for (int i = 0; i < 64; ++i) ptrs[i] = &block[i];
    return dct8_circuit(b, std::span<const fv::Ciphertext* const>(ptrs, 64));
}

std::vector<fv::Ciphertext> quantize_h(const fv::Evaluator& ev,
                                       const enc::FractionalEncoder& encoder,
                                       std::span<const fv::Ciphertext> block,
                                       const QuantMatrix& q) {
    if (block.size() != 64) throw std::invalid_argument("quantize needs a full 8x8 block");
    HeBackend b(ev, encoder);
    const fv::Ciphertext* ptrs[64];
    for (int i = 0; i < 64; ++i) ptrs[i] = &block[i];
    return quantize_circuit(b, std::span<const fv::Ciphertext* const>(ptrs, 64), q);
}

namespace {

std::uint32_t pad8(std::uint32_t v) { return (v + 7u) & ~7u; }

// Edge-replicated cell index for padded coordinates.
template <typename Grid>
const auto& padded_cell(const Grid& cells, std::uint32_t w, std::uint32_t h, std::uint32_t c_count,
                        std::uint32_t x, std::uint32_t y, std::uint32_t c) {
    x = std::min(x, w - 1);
    y = std::min(y, h - 1);
    return cells[(std::size_t(y) * w + x) * c_count + c];
}

} // namespace

EncryptedCoefGrid jpeg_encode_h(const fv::Evaluator& ev, const EncryptedImage& image,
                                std::uint32_t quality, int threads) {
    const EncryptedImage* src = &image;
    EncryptedImage transformed;
    if (image.channels == 3) {
        transformed = rgb_to_ycbcr_h(ev, image, threads);
        src = &transformed;
    } else if (image.channels != 1) {
        throw std::invalid_argument("JPEG encoding expects 1 or 3 channels");
    }
    enc::FractionalEncoder encoder(image.params.rt, image.encoder);
    HeBackend b(ev, encoder, threads);

    EncryptedCoefGrid out;
    out.orig_width = image.width;
    out.orig_height = image.height;
    out.pad_width = pad8(image.width);
    out.pad_height = pad8(image.height);
    out.channels = image.channels;
    out.quality = quality;
    out.params = image.params;
    out.encoder = image.encoder;
    out.cells.resize(out.cell_count(), zero_ciphertext(image.params));

    const QuantMatrix lum = QuantMatrix::luminance(int(quality));
    const QuantMatrix chrom = QuantMatrix::chrominance(int(quality));
    const std::uint32_t bw = out.pad_width / 8, bh = out.pad_height / 8;
    parallel_for(0, std::size_t(bw) * bh * image.channels, threads, [&](std::size_t job) {
        const std::uint32_t c = job % image.channels;
        const std::uint32_t bx = (job / image.channels) % bw;
        const std::uint32_t by = (job / image.channels) / bw;
        const fv::Ciphertext* block[64];
        for (std::uint32_t v = 0; v < 8; ++v) {
            for (std::uint32_t u = 0; u < 8; ++u) {
                block[v * 8 + u] = &padded_cell(src->cells, src->width, src->height,
                                                src->channels, bx * 8 + u, by * 8 + v, c);
            }
        }
        auto coeffs = dct8_circuit(b, std::span<const fv::Ciphertext* const>(block, 64));
        const fv::Ciphertext* cptr[64];
        for (int i = 0; i < 64; ++i) cptr[i] = &coeffs[i];
        auto quant = quantize_circuit(b, std::span<const fv::Ciphertext* const>(cptr, 64),
                                      c == 0 ? lum : chrom);
        for (std::uint32_t v = 0; v < 8; ++v) {
            for (std::uint32_t u = 0; u < 8; ++u) {
                out.cells[(std::size_t(by * 8 + v) * out.pad_width + bx * 8 + u) * out.channels +
                          c] = std::move(quant[v * 8 + u]);
            }
        }
    });
    return out;
}

// --- twins ---------------------------------------------------------------------

std::vector<double> to_real_grid(const PlainImage& image) {
    std::vector<double> out(image.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = double(image.samples[i]);
    return out;
}

std::vector<double> resize_twin(std::span<const double> grid, std::uint32_t src_w,
                                std::uint32_t src_h, std::uint32_t channels,
                                const ResizeSpec& spec) {
    if (grid.size() != std::size_t(src_w) * src_h * channels || spec.src_width != src_w ||
        spec.src_height != src_h) {
        throw std::invalid_argument("twin geometry mismatch");
    }
    RealBackend b;
    std::vector<double> out(std::size_t(spec.dst_width) * spec.dst_height * channels);
    for (std::uint32_t y = 0; y < spec.dst_height; ++y) {
        auto ty = axis_taps(src_h, spec.dst_height, y, spec.mode);
        for (std::uint32_t x = 0; x < spec.dst_width; ++x) {
            auto tx = axis_taps(src_w, spec.dst_width, x, spec.mode);
            for (std::uint32_t c = 0; c < channels; ++c) {
                out[(std::size_t(y) * spec.dst_width + x) * channels + c] =
                    resize_pixel_circuit(b, grid, src_w, channels, tx, ty, c);
            }
        }
    }
    return out;
}

std::vector<double> ycbcr_twin(std::span<const double> grid, std::uint32_t pixels) {
    if (grid.size() != std::size_t(pixels) * 3) throw std::invalid_argument("twin needs 3 channels");
    RealBackend b;
    std::vector<double> out(grid.size());
    for (std::uint32_t p = 0; p < pixels; ++p) {
        auto ycc = ycbcr_pixel_circuit(b, grid[p * 3], grid[p * 3 + 1], grid[p * 3 + 2]);
        for (int c = 0; c < 3; ++c) out[p * 3 + c] = ycc[c];
    }
    return out;
}

std::array<double, 64> dct8_twin(std::span<const double> block) {
    if (block.size() != 64) throw std::invalid_argument("DCT needs a full 8x8 block");
    RealBackend b;
    const double* ptrs[64];
    for (int i = 0; i < 64; ++i) ptrs[i] = &block[i];
    auto v = dct8_circuit(b, std::span<const double* const>(ptrs, 64));
    std::array<double, 64> out;
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

std::array<double, 64> quantize_twin(std::span<const double> block, const QuantMatrix& q) {
    if (block.size() != 64) throw std::invalid_argument("quantize needs a full 8x8 block");
    RealBackend b;
    const double* ptrs[64];
    for (int i = 0; i < 64; ++i) ptrs[i] = &block[i];
    auto v = quantize_circuit(b, std::span<const double* const>(ptrs, 64), q);
    std::array<double, 64> out;
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

std::vector<double> jpeg_encode_twin(const PlainImage& image, std::uint32_t quality,
                                     std::uint32_t& pad_w, std::uint32_t& pad_h) {
    RealBackend b;
    std::vector<double> grid = to_real_grid(image);
    if (image.channels == 3) grid = ycbcr_twin(grid, image.width * image.height);
    pad_w = pad8(image.width);
    pad_h = pad8(image.height);
    const QuantMatrix lum = QuantMatrix::luminance(int(quality));
    const QuantMatrix chrom = QuantMatrix::chrominance(int(quality));
    std::vector<double> out(std::size_t(pad_w) * pad_h * image.channels, 0.0);
    for (std::uint32_t by = 0; by < pad_h / 8; ++by) {
        for (std::uint32_t bx = 0; bx < pad_w / 8; ++bx) {
            for (std::uint32_t c = 0; c < image.channels; ++c) {
                const double* block[64];
                for (std::uint32_t v = 0; v < 8; ++v)
                    for (std::uint32_t u = 0; u < 8; ++u)
                        block[v * 8 + u] = &padded_cell(grid, image.width, image.height,
                                                        image.channels, bx * 8 + u, by * 8 + v, c);
                auto coeffs = dct8_circuit(b, std::span<const double* const>(block, 64));
                const double* cptr[64];
                for (int i = 0; i < 64; ++i) cptr[i] = &coeffs[i];
                auto quant = quantize_circuit(b, std::span<const double* const>(cptr, 64),
                                              c == 0 ? lum : chrom);
                for (std::uint32_t v = 0; v < 8; ++v)
                    for (std::uint32_t u = 0; u < 8; ++u)
                        out[(std::size_t(by * 8 + v) * pad_w + bx * 8 + u) * image.channels + c] =
                            quant[v * 8 + u];
            }
        }
    }
    return out;
}

} // namespace heip::img
