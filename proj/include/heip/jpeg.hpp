#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heip/image.hpp"

namespace heip::jpeg {

// --- PPM / PGM ----------------------------------------------------------------

img::PlainImage read_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_ppm(const img::PlainImage& image);
img::PlainImage load_ppm(const std::string& path);
void save_ppm(const std::string& path, const img::PlainImage& image);

// --- zig-zag -------------------------------------------------------------------

// Natural (row-major) position of each zig-zag rank; a permutation of 0..63.
std::span<const int> zigzag_order();
std::array<int, 64> zigzag_scan(std::span<const int> block_natural);
std::array<int, 64> zigzag_unscan(std::span<const int> block_zigzag);

// --- client-side finalization ---------------------------------------------------

// Round half away from zero, the tie rule fixed for cross-language determinism.
int round_half_away(double v);

// Quantized integer blocks in natural order, grouped per block then channel:
// index (by * blocks_w + bx) * channels + c.
struct QuantizedBlocks {
    std::uint32_t blocks_w = 0, blocks_h = 0, channels = 1;
    std::uint32_t width = 0, height = 0; // original pixel geometry
    std::uint32_t quality = 75;
    std::vector<std::array<int, 64>> blocks;
};

// Turns decrypted per-coefficient reals (already divided by Q on the server)
// into integer blocks: applies the luma level-shift correction on the DC
// term and rounds. Grid layout matches EncryptedCoefGrid.
QuantizedBlocks client_finalize(std::span<const double> coef_grid, std::uint32_t orig_w,
                                std::uint32_t orig_h, std::uint32_t pad_w, std::uint32_t pad_h,
                                std::uint32_t channels, std::uint32_t quality);

// --- entropy coding + container ---------------------------------------------------

// Baseline scan data: zig-zag, DC differences, AC run/size coding with the
// standard Huffman tables, byte stuffing included.
std::vector<std::uint8_t> entropy_encode(const QuantizedBlocks& blocks);

struct JpegWriter {
    std::uint32_t quality = 75;
    std::uint32_t width = 0, height = 0, channels = 1;

    // SOI/APP0/DQT/SOF0/DHT/SOS + scan + EOI, no subsampling.
    std::vector<std::uint8_t> emit(std::span<const std::uint8_t> scan) const;
};

std::vector<std::uint8_t> write_jpeg(const QuantizedBlocks& blocks);

// --- plain run-length encoding ----------------------------------------------------

// Maximal (value, runlength) pairs of a sequence of length 16 or 64; the
// producer of rle_fourier test and input streams.
std::vector<std::pair<double, int>> rle_encode_plain(std::span<const double> values,
                                                     std::uint32_t out_len);
std::vector<double> rle_expand_plain(std::span<const std::pair<double, int>> pairs,
                                     std::uint32_t out_len);

} // namespace heip::jpeg
