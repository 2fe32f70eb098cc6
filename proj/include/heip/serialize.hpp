#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heip/fv.hpp"
#include "heip/image.hpp"
#include "heip/rle_fourier.hpp"

namespace heip::io {

// Binary container for keys and ciphertext grids. Canonical form: writing the
// result of a read reproduces the input byte for byte.
//
//   magic   "HEIP"
//   version u32 (currently 1)
//   kind    u32
//   params  n u32, t u64, q-length u32, q bytes big-endian, sigma f64 bits
//   encoder B u32, ni u32, nf u32 (all zero when not applicable)
//   payload per kind; every ciphertext cell is a u32 polynomial count followed
//   by count * n coefficients, each q-byte-length little-endian bytes
enum class Kind : std::uint32_t {
    secret_key = 1,
    public_key = 2,
    image = 3,
    coef_grid = 4,
    rle_stream = 5,
};

constexpr std::uint32_t kFormatVersion = 1;

void write_secret_key(const std::string& path, const fv::EncryptionParams& params,
                      const fv::SecretKey& sk);
std::pair<fv::EncryptionParams, fv::SecretKey> read_secret_key(const std::string& path);

void write_public_key(const std::string& path, const fv::EncryptionParams& params,
                      const fv::PublicKey& pk);
std::pair<fv::EncryptionParams, fv::PublicKey> read_public_key(const std::string& path);

void write_image(const std::string& path, const img::EncryptedImage& image);
img::EncryptedImage read_image(const std::string& path);

void write_coef_grid(const std::string& path, const img::EncryptedCoefGrid& grid);
img::EncryptedCoefGrid read_coef_grid(const std::string& path);

// Encrypted RLE representation of an image: one stream per (row, channel).
struct EncryptedRleImage {
    std::uint32_t width = 0, height = 0, channels = 1;
    std::uint32_t out_len = 16;
    fv::EncryptionParams params;
    enc::EncoderParams encoder;
    // index (y * channels + c)
    std::vector<std::vector<std::pair<fv::Ciphertext, fv::Ciphertext>>> streams;
};

void write_rle(const std::string& path, const EncryptedRleImage& rle);
EncryptedRleImage read_rle(const std::string& path);

Kind peek_kind(const std::string& path);

// All ciphertext cells of any payload kind, for diagnostics such as the
// noise-budget command.
std::pair<fv::EncryptionParams, std::vector<fv::Ciphertext>> read_all_cells(
    const std::string& path);

// In-memory variants used by tests.
std::vector<std::uint8_t> image_to_bytes(const img::EncryptedImage& image);
img::EncryptedImage image_from_bytes(std::span<const std::uint8_t> bytes);

} // namespace heip::io
