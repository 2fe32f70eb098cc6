#include "heip/jpeg.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace heip::jpeg {

// --- PPM -------------------------------------------------------------------------

namespace {

struct ByteReader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    bool eof() const { return pos >= data.size(); }
    std::uint8_t next() {
        if (eof()) throw std::invalid_argument("truncated PPM data");
        return data[pos++];
    }
    // Skips whitespace and '#' comments, then reads an unsigned decimal token.
    unsigned token() {
        for (;;) {
            if (eof()) throw std::invalid_argument("malformed PPM header");
            std::uint8_t c = data[pos];
            if (c == '#') {
                while (!eof() && data[pos] != '\n') ++pos;
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
        if (!std::isdigit(data[pos])) throw std::invalid_argument("malformed PPM header");
        unsigned v = 0;
        while (!eof() && std::isdigit(data[pos])) {
            v = v * 10 + (data[pos] - '0');
            if (v > 1u << 30) throw std::invalid_argument("malformed PPM header");
            ++pos;
        }
        return v;
    }
};

} // namespace

img::PlainImage read_ppm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw std::invalid_argument("not a binary PGM/PPM file");
    }
    const std::uint32_t channels = bytes[1] == '6' ? 3 : 1;
    ByteReader r{bytes, 2};
    const unsigned width = r.token();
    const unsigned height = r.token();
    const unsigned maxval = r.token();
    if (width == 0 || height == 0) throw std::invalid_argument("malformed PPM header");
    if (maxval != 255) throw std::invalid_argument("only maxval 255 is supported");
    r.next(); // single whitespace after maxval
    img::PlainImage out;
    out.width = width;
    out.height = height;
    out.channels = channels;
    const std::size_t need = std::size_t(width) * height * channels;
    if (bytes.size() - r.pos < need) throw std::invalid_argument("truncated PPM data");
    out.samples.assign(bytes.begin() + r.pos, bytes.begin() + r.pos + need);
    return out;
}

std::vector<std::uint8_t> write_ppm(const img::PlainImage& image) {
    if (image.channels != 1 && image.channels != 3) {
        throw std::invalid_argument("PPM output needs 1 or 3 channels");
    }
    std::string header = (image.channels == 3 ? std::string("P6\n") : std::string("P5\n")) +
                         std::to_string(image.width) + " " + std::to_string(image.height) +
                         "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.samples.begin(), image.samples.end());
    return out;
}

img::PlainImage load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return read_ppm(bytes);
}

void save_ppm(const std::string& path, const img::PlainImage& image) {
    auto bytes = write_ppm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

// --- zig-zag ----------------------------------------------------------------------

namespace {
constexpr int kZigZag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  //
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28, //
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, //
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
};
} // namespace

std::span<const int> zigzag_order() { return {kZigZag, 64}; }

std::array<int, 64> zigzag_scan(std::span<const int> block_natural) {
    std::array<int, 64> out;
    for (int i = 0; i < 64; ++i) out[i] = block_natural[kZigZag[i]];
    return out;
}

std::array<int, 64> zigzag_unscan(std::span<const int> block_zigzag) {
    std::array<int, 64> out;
    for (int i = 0; i < 64; ++i) out[kZigZag[i]] = block_zigzag[i];
    return out;
}

// --- client finalize ---------------------------------------------------------------

int round_half_away(double v) {
    return v < 0 ? -int(std::floor(-v + 0.5)) : int(std::floor(v + 0.5));
}

QuantizedBlocks client_finalize(std::span<const double> coef_grid, std::uint32_t orig_w,
                                std::uint32_t orig_h, std::uint32_t pad_w, std::uint32_t pad_h,
                                std::uint32_t channels, std::uint32_t quality) {
    if (pad_w % 8 || pad_h % 8 || coef_grid.size() != std::size_t(pad_w) * pad_h * channels) {
        throw std::invalid_argument("coefficient grid geometry mismatch");
    }
    QuantizedBlocks out;
    out.blocks_w = pad_w / 8;
    out.blocks_h = pad_h / 8;
    out.channels = channels;
    out.width = orig_w;
    out.height = orig_h;
    out.quality = quality;
    out.blocks.resize(std::size_t(out.blocks_w) * out.blocks_h * channels);
    const auto lum = img::QuantMatrix::luminance(int(quality));
    // The homomorphic half runs the color matrix verbatim (no level shift, no
    // chroma offset); the file format wants DCT(channel - 128). Luma needs the
    // DC corrected by 8*128/Q00, chroma is already centered.
    const double luma_dc_shift = 1024.0 / double(lum.values[0]);
    for (std::uint32_t by = 0; by < out.blocks_h; ++by) {
        for (std::uint32_t bx = 0; bx < out.blocks_w; ++bx) {
            for (std::uint32_t c = 0; c < channels; ++c) {
                auto& block = out.blocks[(std::size_t(by) * out.blocks_w + bx) * channels + c];
                for (int v = 0; v < 8; ++v) {
                    for (int u = 0; u < 8; ++u) {
                        double value =
                            coef_grid[(std::size_t(by * 8 + v) * pad_w + bx * 8 + u) * channels + c];
                        if (c == 0 && u == 0 && v == 0) value -= luma_dc_shift;
                        block[std::size_t(v) * 8 + u] = round_half_away(value);
                    }
                }
            }
        }
    }
    return out;
}

// --- Huffman tables (ITU-T T.81 Annex K) -------------------------------------------

namespace {

struct HuffSpec {
    const std::uint8_t* bits; // counts per code length 1..16
    const std::uint8_t* vals;
    std::size_t val_count;
};

constexpr std::uint8_t kDcLumBits[16] = {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
constexpr std::uint8_t kDcVals[12] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
constexpr std::uint8_t kDcChromBits[16] = {0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0};

constexpr std::uint8_t kAcLumBits[16] = {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d};
constexpr std::uint8_t kAcLumVals[162] = {
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
    0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52,
    0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25,
    0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
    0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
    0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3,
    0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8,
    0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
};
constexpr std::uint8_t kAcChromBits[16] = {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77};
constexpr std::uint8_t kAcChromVals[162] = {
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61,
    0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33,
    0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18,
    0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44,
    0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63,
    0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a,
    0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97,
    0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
    0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca,
    0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7,
    0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
};

constexpr HuffSpec kDcLum{kDcLumBits, kDcVals, 12};
constexpr HuffSpec kDcChrom{kDcChromBits, kDcVals, 12};
constexpr HuffSpec kAcLum{kAcLumBits, kAcLumVals, 162};
constexpr HuffSpec kAcChrom{kAcChromBits, kAcChromVals, 162};

struct HuffCodes {
    std::uint16_t code[256];
    std::uint8_t length[256];

    explicit HuffCodes(const HuffSpec& spec) {
        std::memset(length, 0, sizeof(length));
        std::uint16_t next = 0;
        std::size_t k = 0;
        for (int len = 1; len <= 16; ++len) {
            for (int i = 0; i < spec.bits[len - 1]; ++i) {
                const std::uint8_t v = spec.vals[k++];
                code[v] = next++;
                length[v] = static_cast<std::uint8_t>(len);
            }
            next = static_cast<std::uint16_t>(next << 1);
        }
        if (k != spec.val_count) throw std::logic_error("inconsistent Huffman spec");
    }
};

struct BitWriter {
    std::vector<std::uint8_t> bytes;
    std::uint32_t bucket = 0;
    int bits = 0;

    void put(std::uint32_t value, int count) {
        if (count == 0) return;
        bucket = (bucket << count) | (value & ((1u << count) - 1));
        bits += count;
        while (bits >= 8) {
            std::uint8_t b = static_cast<std::uint8_t>((bucket >> (bits - 8)) & 0xff);
            bytes.push_back(b);
            if (b == 0xff) bytes.push_back(0x00); // byte stuffing
            bits -= 8;
        }
    }
    void flush() {
        if (bits > 0) put(0x7f, 8 - bits); // pad with 1s
    }
};

// Magnitude category: number of bits needed for |v|.
int bit_size(int v) {
    int a = v < 0 ? -v : v;
    int s = 0;
    while (a) {
        ++s;
        a >>= 1;
    }
    return s;
}

void emit_coefficient(BitWriter& bw, const HuffCodes& huff, int symbol, int value, int size) {
    bw.put(huff.code[symbol], huff.length[symbol]);
    if (size > 0) {
        int bits = value < 0 ? value + (1 << size) - 1 : value;
        bw.put(static_cast<std::uint32_t>(bits), size);
    }
}

} // namespace

std::vector<std::uint8_t> entropy_encode(const QuantizedBlocks& blocks) {
    const HuffCodes dc_lum(kDcLum), dc_chrom(kDcChrom), ac_lum(kAcLum), ac_chrom(kAcChrom);
    BitWriter bw;
    std::vector<int> prev_dc(blocks.channels, 0);
    for (std::size_t b = 0; b < std::size_t(blocks.blocks_w) * blocks.blocks_h; ++b) {
        for (std::uint32_t c = 0; c < blocks.channels; ++c) {
            const auto& natural = blocks.blocks[b * blocks.channels + c];
            auto zz = zigzag_scan(std::span<const int>(natural.data(), 64));
            const HuffCodes& dc = c == 0 ? dc_lum : dc_chrom;
            const HuffCodes& ac = c == 0 ? ac_lum : ac_chrom;

            const int diff = zz[0] - prev_dc[c];
            prev_dc[c] = zz[0];
            const int dsize = bit_size(diff);
            if (dsize > 11) throw std::invalid_argument("DC coefficient outside baseline range");
            emit_coefficient(bw, dc, dsize, diff, dsize);

            int run = 0;
            for (int k = 1; k < 64; ++k) {
                if (zz[k] == 0) {
                    ++run;
                    continue;
                }
                while (run >= 16) {
                    emit_coefficient(bw, ac, 0xf0, 0, 0); // ZRL
                    run -= 16;
                }
                const int size = bit_size(zz[k]);
                if (size > 10) throw std::invalid_argument("AC coefficient outside baseline range");
                emit_coefficient(bw, ac, (run << 4) | size, zz[k], size);
                run = 0;
            }
            if (run > 0) emit_coefficient(bw, ac, 0x00, 0, 0); // EOB
        }
    }
    bw.flush();
    return std::move(bw.bytes);
}

// --- container -----------------------------------------------------------------------

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_marker(std::vector<std::uint8_t>& out, std::uint8_t code) {
    out.push_back(0xff);
    out.push_back(code);
}

void put_dqt(std::vector<std::uint8_t>& out, int id, const img::QuantMatrix& q) {
    put_marker(out, 0xdb);
    put_u16(out, 67);
    out.push_back(static_cast<std::uint8_t>(id)); // 8-bit precision
    int natural[64];
    for (int i = 0; i < 64; ++i) natural[i] = q.values[i];
    auto zz = zigzag_scan(std::span<const int>(natural, 64));
    for (int i = 0; i < 64; ++i) out.push_back(static_cast<std::uint8_t>(zz[i]));
}

void put_dht(std::vector<std::uint8_t>& out, int cls, int id, const HuffSpec& spec) {
    put_marker(out, 0xc4);
    put_u16(out, static_cast<std::uint16_t>(19 + spec.val_count));
    out.push_back(static_cast<std::uint8_t>((cls << 4) | id));
    for (int i = 0; i < 16; ++i) out.push_back(spec.bits[i]);
    for (std::size_t i = 0; i < spec.val_count; ++i) out.push_back(spec.vals[i]);
}

} // namespace

std::vector<std::uint8_t> JpegWriter::emit(std::span<const std::uint8_t> scan) const {
    if (channels != 1 && channels != 3) {
        throw std::invalid_argument("baseline writer supports 1 or 3 components");
    }
    std::vector<std::uint8_t> out;
    put_marker(out, 0xd8); // SOI
    // APP0 / JFIF
    put_marker(out, 0xe0);
    put_u16(out, 16);
    const char jfif[5] = {'J', 'F', 'I', 'F', '\0'};
    out.insert(out.end(), jfif, jfif + 5);
    out.push_back(1);
    out.push_back(1); // version 1.1
    out.push_back(0); // aspect-ratio units
    put_u16(out, 1);
    put_u16(out, 1);
    out.push_back(0);
    out.push_back(0); // no thumbnail

    put_dqt(out, 0, img::QuantMatrix::luminance(int(quality)));
    if (channels == 3) put_dqt(out, 1, img::QuantMatrix::chrominance(int(quality)));

    // SOF0: baseline, 8-bit samples, 1x1 sampling everywhere.
    put_marker(out, 0xc0);
    put_u16(out, static_cast<std::uint16_t>(8 + 3 * channels));
    out.push_back(8);
    put_u16(out, static_cast<std::uint16_t>(height));
    put_u16(out, static_cast<std::uint16_t>(width));
    out.push_back(static_cast<std::uint8_t>(channels));
    for (std::uint32_t c = 0; c < channels; ++c) {
        out.push_back(static_cast<std::uint8_t>(c + 1)); // component id
        out.push_back(0x11);                             // 1x1 sampling
        out.push_back(c == 0 ? 0 : 1);                   // quant table id
    }

    put_dht(out, 0, 0, kDcLum);
    put_dht(out, 1, 0, kAcLum);
    if (channels == 3) {
        put_dht(out, 0, 1, kDcChrom);
        put_dht(out, 1, 1, kAcChrom);
    }

    put_marker(out, 0xda); // SOS
    put_u16(out, static_cast<std::uint16_t>(6 + 2 * channels));
    out.push_back(static_cast<std::uint8_t>(channels));
    for (std::uint32_t c = 0; c < channels; ++c) {
        out.push_back(static_cast<std::uint8_t>(c + 1));
        out.push_back(c == 0 ? 0x00 : 0x11);
    }
    out.push_back(0);
    out.push_back(63);
    out.push_back(0);

    out.insert(out.end(), scan.begin(), scan.end());
    put_marker(out, 0xd9); // EOI
    return out;
}

std::vector<std::uint8_t> write_jpeg(const QuantizedBlocks& blocks) {
    JpegWriter writer{blocks.quality, blocks.width, blocks.height, blocks.channels};
    return writer.emit(entropy_encode(blocks));
}

// --- plain RLE --------------------------------------------------------------------

std::vector<std::pair<double, int>> rle_encode_plain(std::span<const double> values,
                                                     std::uint32_t out_len) {
    if (out_len != 16 && out_len != 64) throw std::invalid_argument("output length must be 16 or 64");
    if (values.size() != out_len) throw std::invalid_argument("sequence length must equal out_len");
    std::vector<std::pair<double, int>> pairs;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i + 1;
        while (j < values.size() && values[j] == values[i]) ++j;
        pairs.emplace_back(values[i], int(j - i));
        i = j;
    }
    return pairs;
}

std::vector<double> rle_expand_plain(std::span<const std::pair<double, int>> pairs,
                                     std::uint32_t out_len) {
    std::vector<double> out;
    out.reserve(out_len);
    for (const auto& [value, run] : pairs) {
        for (int i = 0; i < run; ++i) out.push_back(value);
    }
    if (out.size() != out_len) throw std::invalid_argument("run lengths do not sum to out_len");
    return out;
}

} // namespace heip::jpeg
