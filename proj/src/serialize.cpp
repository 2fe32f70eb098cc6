#include "heip/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace heip::io {

namespace {

constexpr char kMagic[4] = {'H', 'E', 'I', 'P'};

struct Writer {
    std::vector<std::uint8_t> bytes;

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(std::uint8_t(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(std::uint8_t(v >> (8 * i)));
    }
    void raw(const void* data, std::size_t len) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes.insert(bytes.end(), p, p + len);
    }
};

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t len) const {
        if (pos + len > bytes.size()) throw std::invalid_argument("truncated cipher file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    const std::uint8_t* raw(std::size_t len) {
        need(len);
        const auto* p = bytes.data() + pos;
        pos += len;
        return p;
    }
    void expect_end() const {
        if (pos != bytes.size()) throw std::invalid_argument("trailing bytes in cipher file");
    }
};

void write_header(Writer& w, Kind kind, const fv::EncryptionParams& params,
                  const enc::EncoderParams* encoder) {
    w.raw(kMagic, 4);
    w.u32(kFormatVersion);
    w.u32(std::uint32_t(kind));
    w.u32(std::uint32_t(params.n));
    w.u64(params.t);
    // q as big-endian bytes, exactly coeff_bytes of them
    const std::size_t qlen = params.rq->coeff_bytes();
    w.u32(std::uint32_t(qlen));
    std::vector<std::uint8_t> qbytes(qlen, 0);
    std::size_t words = 0;
    mpz_export(qbytes.data(), &words, 1, 1, 1, 0, params.q.get_mpz_t());
    w.raw(qbytes.data(), qlen);
    std::uint64_t sigma_bits;
    std::memcpy(&sigma_bits, &params.sigma, 8);
    w.u64(sigma_bits);
    if (encoder) {
        w.u32(encoder->base);
        w.u32(encoder->n_integer);
        w.u32(encoder->n_fraction);
    } else {
        w.u32(0);
        w.u32(0);
        w.u32(0);
    }
}

struct Header {
    Kind kind;
    fv::EncryptionParams params;
    enc::EncoderParams encoder;
    bool has_encoder = false;
};

Header read_header(Reader& r) {
    const std::uint8_t* magic = r.raw(4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw std::invalid_argument("bad cipher file magic");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) throw std::invalid_argument("unsupported cipher file version");
    Header h;
    h.kind = Kind(r.u32());
    const std::uint32_t n = r.u32();
    const std::uint64_t t = r.u64();
    const std::uint32_t qlen = r.u32();
    if (qlen == 0 || qlen > 1 << 20) throw std::invalid_argument("bad modulus length");
    const std::uint8_t* qbytes = r.raw(qlen);
    ring::BigInt q;
    mpz_import(q.get_mpz_t(), qlen, 1, 1, 1, 0, qbytes);
    const std::uint64_t sigma_bits = r.u64();
    double sigma;
    std::memcpy(&sigma, &sigma_bits, 8);

    h.params.n = n;
    h.params.q = q;
    h.params.t = t;
    h.params.sigma = sigma;
    h.params.rq = ring::make_context(n, q);
    h.params.rt = ring::make_context(n, ring::BigInt(t));
    if (h.params.rq->coeff_bytes() != qlen) {
        throw std::invalid_argument("modulus byte length is not canonical");
    }

    h.encoder.base = r.u32();
    h.encoder.n_integer = r.u32();
    h.encoder.n_fraction = r.u32();
    h.has_encoder = h.encoder.base != 0;
    return h;
}

void write_poly(Writer& w, const ring::RingPoly& p) {
    const auto& ctx = *p.context();
    const std::size_t bytes = ctx.coeff_bytes();
    std::vector<std::uint8_t> buf(bytes);
    for (std::size_t i = 0; i < ctx.degree(); ++i) {
        std::fill(buf.begin(), buf.end(), 0);
        ring::BigInt c = p.coeff(i);
        std::size_t words = 0;
        mpz_export(buf.data(), &words, -1, 1, 0, 0, c.get_mpz_t());
        w.raw(buf.data(), bytes);
    }
}

ring::RingPoly read_poly(Reader& r, const ring::ContextPtr& ctx) {
    const std::size_t bytes = ctx->coeff_bytes();
    ring::RingPoly p(ctx);
    ring::BigInt c;
    for (std::size_t i = 0; i < ctx->degree(); ++i) {
        const std::uint8_t* raw = r.raw(bytes);
        mpz_import(c.get_mpz_t(), bytes, -1, 1, 0, 0, raw);
        if (c >= ctx->modulus()) throw std::invalid_argument("coefficient out of range");
        p.set_coeff(i, c);
    }
    return p;
}

void write_cell(Writer& w, const fv::Ciphertext& ct) {
    w.u32(std::uint32_t(ct.size()));
    for (const auto& p : ct.polys) write_poly(w, p);
}

fv::Ciphertext read_cell(Reader& r, const fv::EncryptionParams& params) {
    const std::uint32_t count = r.u32();
    if (count < 2 || count > 1 << 16) throw std::invalid_argument("bad ciphertext length");
    fv::Ciphertext ct;
    ct.fingerprint = params.fingerprint();
    ct.polys.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) ct.polys.push_back(read_poly(r, params.rq));
    return ct;
}

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

} // namespace

void write_secret_key(const std::string& path, const fv::EncryptionParams& params,
                      const fv::SecretKey& sk) {
    Writer w;
    write_header(w, Kind::secret_key, params, nullptr);
    write_poly(w, sk.s);
    spit(path, w.bytes);
}

std::pair<fv::EncryptionParams, fv::SecretKey> read_secret_key(const std::string& path) {
    auto bytes = slurp(path);
    Reader r{bytes};
    Header h = read_header(r);
    if (h.kind != Kind::secret_key) throw std::invalid_argument("not a secret key file");
    fv::SecretKey sk{read_poly(r, h.params.rq), h.params.fingerprint()};
    r.expect_end();
    return {std::move(h.params), std::move(sk)};
}

void write_public_key(const std::string& path, const fv::EncryptionParams& params,
                      const fv::PublicKey& pk) {
    Writer w;
    write_header(w, Kind::public_key, params, nullptr);
    write_poly(w, pk.p0);
    write_poly(w, pk.p1);
    spit(path, w.bytes);
}

std::pair<fv::EncryptionParams, fv::PublicKey> read_public_key(const std::string& path) {
    auto bytes = slurp(path);
    Reader r{bytes};
    Header h = read_header(r);
    if (h.kind != Kind::public_key) throw std::invalid_argument("not a public key file");
    fv::PublicKey pk;
    pk.p0 = read_poly(r, h.params.rq);
    pk.p1 = read_poly(r, h.params.rq);
    pk.fingerprint = h.params.fingerprint();
    r.expect_end();
    return {std::move(h.params), std::move(pk)};
}

std::vector<std::uint8_t> image_to_bytes(const img::EncryptedImage& image) {
    Writer w;
    write_header(w, Kind::image, image.params, &image.encoder);
    w.u32(image.width);
    w.u32(image.height);
    w.u32(image.channels);
    for (const auto& c : image.cells) write_cell(w, c);
    return std::move(w.bytes);
}

img::EncryptedImage image_from_bytes(std::span<const std::uint8_t> bytes) {
    Reader r{bytes};
    Header h = read_header(r);
    if (h.kind != Kind::image) throw std::invalid_argument("not an encrypted image file");
    img::EncryptedImage out;
    out.params = h.params;
    out.encoder = h.encoder;
    out.width = r.u32();
    out.height = r.u32();
    out.channels = r.u32();
    if (out.channels != 1 && out.channels != 3) throw std::invalid_argument("bad channel count");
    const std::size_t cells = out.cell_count();
    if (cells == 0 || cells > (std::size_t(1) << 28)) throw std::invalid_argument("bad geometry");
    out.cells.reserve(cells);
    for (std::size_t i = 0; i < cells; ++i) out.cells.push_back(read_cell(r, h.params));
    r.expect_end();
    return out;
}

void write_image(const std::string& path, const img::EncryptedImage& image) {
    spit(path, image_to_bytes(image));
}

img::EncryptedImage read_image(const std::string& path) {
    auto bytes = slurp(path);
    return image_from_bytes(bytes);
}

void write_coef_grid(const std::string& path, const img::EncryptedCoefGrid& grid) {
    Writer w;
    write_header(w, Kind::coef_grid, grid.params, &grid.encoder);
    w.u32(grid.orig_width);
    w.u32(grid.orig_height);
    w.u32(grid.pad_width);
    w.u32(grid.pad_height);
    w.u32(grid.channels);
    w.u32(grid.quality);
    for (const auto& c : grid.cells) write_cell(w, c);
    spit(path, w.bytes);
}

img::EncryptedCoefGrid read_coef_grid(const std::string& path) {
    auto bytes = slurp(path);
    Reader r{bytes};
    Header h = read_header(r);
    if (h.kind != Kind::coef_grid) throw std::invalid_argument("not a coefficient grid file");
    img::EncryptedCoefGrid out;
    out.params = h.params;
    out.encoder = h.encoder;
    out.orig_width = r.u32();
    out.orig_height = r.u32();
    out.pad_width = r.u32();
    out.pad_height = r.u32();
    out.channels = r.u32();
    out.quality = r.u32();
    if (out.pad_width % 8 || out.pad_height % 8 || out.pad_width < out.orig_width ||
        out.pad_height < out.orig_height) {
        throw std::invalid_argument("bad padded geometry");
    }
    const std::size_t cells = out.cell_count();
    if (cells == 0 || cells > (std::size_t(1) << 28)) throw std::invalid_argument("bad geometry");
    out.cells.reserve(cells);
    for (std::size_t i = 0; i < cells; ++i) out.cells.push_back(read_cell(r, h.params));
    r.expect_end();
    return out;
}

void write_rle(const std::string& path, const EncryptedRleImage& rle) {
    Writer w;
    write_header(w, Kind::rle_stream, rle.params, &rle.encoder);
    w.u32(rle.width);
    w.u32(rle.height);
    w.u32(rle.channels);
    w.u32(rle.out_len);
    for (const auto& stream : rle.streams) {
        w.u32(std::uint32_t(stream.size()));
        for (const auto& [a, b] : stream) {
            write_cell(w, a);
            write_cell(w, b);
        }
    }
    spit(path, w.bytes);
}

EncryptedRleImage read_rle(const std::string& path) {
    auto bytes = slurp(path);
    Reader r{bytes};
    Header h = read_header(r);
    if (h.kind != Kind::rle_stream) throw std::invalid_argument("not an RLE stream file");
    EncryptedRleImage out;
    out.params = h.params;
    out.encoder = h.encoder;
    out.width = r.u32();
    out.height = r.u32();
    out.channels = r.u32();
    out.out_len = r.u32();
    if (out.out_len != 16 && out.out_len != 64) throw std::invalid_argument("bad output length");
    const std::size_t streams = std::size_t(out.height) * out.channels;
    out.streams.resize(streams);
    for (auto& stream : out.streams) {
        const std::uint32_t count = r.u32();
        if (count == 0 || count > out.out_len) throw std::invalid_argument("bad pair count");
        stream.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            auto a = read_cell(r, h.params);
            auto b = read_cell(r, h.params);
            stream.emplace_back(std::move(a), std::move(b));
        }
    }
    r.expect_end();
    return out;
}

Kind peek_kind(const std::string& path) {
    auto bytes = slurp(path);
    Reader r{bytes};
    return read_header(r).kind;
}

std::pair<fv::EncryptionParams, std::vector<fv::Ciphertext>> read_all_cells(
    const std::string& path) {
    switch (peek_kind(path)) {
    case Kind::image: {
        auto image = read_image(path);
        return {image.params, std::move(image.cells)};
    }
    case Kind::coef_grid: {
        auto grid = read_coef_grid(path);
        return {grid.params, std::move(grid.cells)};
    }
    case Kind::rle_stream: {
        auto rle = read_rle(path);
        std::vector<fv::Ciphertext> cells;
        for (auto& stream : rle.streams) {
            for (auto& [a, b] : stream) {
                cells.push_back(std::move(a));
                cells.push_back(std::move(b));
            }
        }
        return {rle.params, std::move(cells)};
    }
    default:
        throw std::invalid_argument("file holds no ciphertext cells");
    }
}

} // namespace heip::io
