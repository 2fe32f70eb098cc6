#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "heip/circuit.hpp"
#include "heip/encoding.hpp"
#include "heip/fv.hpp"
#include "heip/rng.hpp"

namespace heip::img {

struct PlainImage {
    std::uint32_t width = 0, height = 0, channels = 1;
    std::vector<std::uint8_t> samples; // row-major, channel-interleaved

    std::uint8_t at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
        return samples[(std::size_t(y) * width + x) * channels + c];
    }
    std::size_t cell_count() const { return std::size_t(width) * height * channels; }
};

// W x H x C grid of per-pixel-per-channel ciphertexts.
struct EncryptedImage {
    std::uint32_t width = 0, height = 0, channels = 1;
    fv::EncryptionParams params;
    enc::EncoderParams encoder;
    std::vector<fv::Ciphertext> cells;

    const fv::Ciphertext& at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
        return cells[(std::size_t(y) * width + x) * channels + c];
    }
    std::size_t cell_count() const { return std::size_t(width) * height * channels; }
};

// Server-side JPEG state after the homomorphic half: DCT coefficients divided
// by the quantization entries, laid out as a padded coefficient grid where
// cell (bx*8+u, by*8+v) holds coefficient (u, v) of block (bx, by).
struct EncryptedCoefGrid {
    std::uint32_t orig_width = 0, orig_height = 0;
    std::uint32_t pad_width = 0, pad_height = 0;
    std::uint32_t channels = 1;
    std::uint32_t quality = 75;
    fv::EncryptionParams params;
    enc::EncoderParams encoder;
    std::vector<fv::Ciphertext> cells;

    const fv::Ciphertext& at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
        return cells[(std::size_t(y) * pad_width + x) * channels + c];
    }
    std::size_t cell_count() const { return std::size_t(pad_width) * pad_height * channels; }
};

// 8x8 quantization matrix in natural (row-major) order, scaled from the
// standard base tables with the usual libjpeg quality curve.
struct QuantMatrix {
    std::array<std::uint16_t, 64> values{};
    int quality = 75;

    static QuantMatrix luminance(int quality);
    static QuantMatrix chrominance(int quality);
};

enum class ResizeMode { bilinear, bicubic };

struct ResizeSpec {
    std::uint32_t src_width = 0, src_height = 0;
    std::uint32_t dst_width = 0, dst_height = 0;
    ResizeMode mode = ResizeMode::bilinear;
};

// --- interpolation geometry (shared by the HE path and the twins) -----------

std::array<double, 2> lerp_weights(double t);
// (1 t t^2 t^3) * M / 2 for the Catmull-Rom style matrix.
std::array<double, 4> cubic_weights(double t);

struct AxisTaps {
    int idx[4] = {0, 0, 0, 0}; // clamped source indices
    double w[4] = {0, 0, 0, 0};
    int count = 0;
    double t = 0; // interpolation parameter in [0, 1)
};
AxisTaps axis_taps(std::uint32_t src_size, std::uint32_t dst_size, std::uint32_t dst_pos,
                   ResizeMode mode);

const std::array<std::array<double, 3>, 3>& ycbcr_matrix();
// alpha(u)/2 * cos((2x+1) u pi / 16): one tap of the separable 8x8 DCT.
double dct_factor(int u, int x);

// --- template circuits -------------------------------------------------------

// Linear interpolation between two samples; weights are public plaintexts.
template <class B>
typename B::Value lerp_circuit(const B& b, const typename B::Value& c0,
                               const typename B::Value& c1, double t) {
    auto w = lerp_weights(t);
    return b.add(b.mul_plain(c0, w[0]), b.mul_plain(c1, w[1]));
}

// Cubic interpolation over four taps; one plaintext multiply per tap.
template <class B>
typename B::Value cubic_circuit(const B& b, const typename B::Value& cm1,
                                const typename B::Value& c0, const typename B::Value& c1,
                                const typename B::Value& c2, double t) {
    auto w = cubic_weights(t);
    auto acc = b.add(b.mul_plain(cm1, w[0]), b.mul_plain(c0, w[1]));
    acc = b.add(acc, b.mul_plain(c1, w[2]));
    return b.add(acc, b.mul_plain(c2, w[3]));
}

// One destination sample: interpolate along x within each contributing row,
// then across rows (the two-pass structure).
template <class B>
typename B::Value resize_pixel_circuit(const B& b, std::span<const typename B::Value> grid,
                                       std::uint32_t src_w, std::uint32_t channels,
                                       const AxisTaps& tx, const AxisTaps& ty,
                                       std::uint32_t channel) {
    auto cell = [&](int x, int y) -> const typename B::Value& {
        return grid[(std::size_t(y) * src_w + x) * channels + channel];
    };
    std::vector<typename B::Value> rows;
    rows.reserve(ty.count);
    for (int r = 0; r < ty.count; ++r) {
        const int y = ty.idx[r];
        if (tx.count == 2) {
            rows.push_back(lerp_circuit(b, cell(tx.idx[0], y), cell(tx.idx[1], y), tx.t));
        } else {
            rows.push_back(cubic_circuit(b, cell(tx.idx[0], y), cell(tx.idx[1], y),
                                         cell(tx.idx[2], y), cell(tx.idx[3], y), tx.t));
        }
    }
    if (ty.count == 2) return lerp_circuit(b, rows[0], rows[1], ty.t);
    return cubic_circuit(b, rows[0], rows[1], rows[2], rows[3], ty.t);
}

// Per-pixel color transform: the 3x3 matrix applied with plaintext weights.
template <class B>
std::vector<typename B::Value> ycbcr_pixel_circuit(const B& b, const typename B::Value& r,
                                                   const typename B::Value& g,
                                                   const typename B::Value& bch) {
    const auto& m = ycbcr_matrix();
    const typename B::Value* in[3] = {&r, &g, &bch};
    return b.linear_map(std::span<const typename B::Value* const>(in, 3), &m[0][0], 3, 3);
}

// Separable 8x8 DCT: rows then columns, 8 plaintext taps per output.
template <class B>
std::vector<typename B::Value> dct8_circuit(const B& b,
                                            std::span<const typename B::Value* const> block) {
    if (block.size() != 64) throw std::invalid_argument("DCT needs a full 8x8 block");
    double wt[64];
    for (int u = 0; u < 8; ++u)
        for (int x = 0; x < 8; ++x) wt[u * 8 + x] = dct_factor(u, x);

    std::vector<typename B::Value> tmp; // tmp[x*8+v] = sum_y A[x][y] c(v,y)
    tmp.reserve(64);
    for (int x = 0; x < 8; ++x) {
        auto row = b.linear_map(block.subspan(std::size_t(x) * 8, 8), wt, 8, 8);
        for (auto& v : row) tmp.push_back(std::move(v));
    }
    std::vector<typename B::Value> out(64, tmp[0]);
    for (int v = 0; v < 8; ++v) {
        const typename B::Value* col[8];
        for (int x = 0; x < 8; ++x) col[x] = &tmp[std::size_t(x) * 8 + v];
        auto res = b.linear_map(std::span<const typename B::Value* const>(col, 8), wt, 8, 8);
        for (int u = 0; u < 8; ++u) out[std::size_t(u) * 8 + v] = std::move(res[u]);
    }
    return out;
}

// Multiply each coefficient by the public reciprocal 1/Q_ij. Rounding is the
// client's job after decryption; round-to-nearest has no arithmetic circuit.
template <class B>
std::vector<typename B::Value> quantize_circuit(const B& b,
                                                std::span<const typename B::Value* const> block,
                                                const QuantMatrix& q) {
    if (block.size() != 64) throw std::invalid_argument("quantize needs a full 8x8 block");
    std::vector<typename B::Value> out;
    out.reserve(64);
    for (std::size_t i = 0; i < 64; ++i) {
        out.push_back(b.mul_plain(*block[i], 1.0 / double(q.values[i])));
    }
    return out;
}

// --- encrypted-image operations ----------------------------------------------

EncryptedImage encrypt_image(const PlainImage& image, const fv::Encryptor& encryptor,
                             const enc::FractionalEncoder& encoder, const Prng& base_prng,
                             int threads = 0);
PlainImage decrypt_image(const EncryptedImage& image, const fv::Decryptor& decryptor,
                         const enc::FractionalEncoder& encoder, int threads = 0);
std::vector<double> decrypt_reals(std::span<const fv::Ciphertext> cells,
                                  const fv::Decryptor& decryptor,
                                  const enc::FractionalEncoder& encoder, int threads = 0);

fv::Ciphertext lerp_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                      const fv::Ciphertext& c0, const fv::Ciphertext& c1, double t);
fv::Ciphertext cubic_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                       const fv::Ciphertext& cm1, const fv::Ciphertext& c0,
                       const fv::Ciphertext& c1, const fv::Ciphertext& c2, double t);

EncryptedImage resize(const fv::Evaluator& ev, const EncryptedImage& image,
                      const ResizeSpec& spec, int threads = 0);
EncryptedImage rgb_to_ycbcr_h(const fv::Evaluator& ev, const EncryptedImage& image,
                              int threads = 0);
std::vector<fv::Ciphertext> dct8_h(const fv::Evaluator& ev, const enc::FractionalEncoder& encoder,
                                   std::span<const fv::Ciphertext> block);
std::vector<fv::Ciphertext> quantize_h(const fv::Evaluator& ev,
                                       const enc::FractionalEncoder& encoder,
                                       std::span<const fv::Ciphertext> block,
                                       const QuantMatrix& q);
// Color transform (3-channel inputs), edge replication to block size, DCT and
// reciprocal quantization: the full server half of JPEG encoding.
EncryptedCoefGrid jpeg_encode_h(const fv::Evaluator& ev, const EncryptedImage& image,
                                std::uint32_t quality, int threads = 0);

// --- plaintext twins ----------------------------------------------------------

std::vector<double> resize_twin(std::span<const double> grid, std::uint32_t src_w,
                                std::uint32_t src_h, std::uint32_t channels,
                                const ResizeSpec& spec);
std::vector<double> ycbcr_twin(std::span<const double> grid, std::uint32_t pixels);
std::array<double, 64> dct8_twin(std::span<const double> block);
std::array<double, 64> quantize_twin(std::span<const double> block, const QuantMatrix& q);
// Full JPEG server-half twin on reals; same layout as EncryptedCoefGrid.
std::vector<double> jpeg_encode_twin(const PlainImage& image, std::uint32_t quality,
                                     std::uint32_t& pad_w, std::uint32_t& pad_h);

std::vector<double> to_real_grid(const PlainImage& image);

} // namespace heip::img
