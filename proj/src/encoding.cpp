#include "heip/encoding.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace heip::enc {

EncoderParams EncoderParams::parse(const std::string& text) {
    EncoderParams out;
    std::stringstream ss(text);
    std::string item;
    bool saw_any = false;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad encoder spec: " + text);
        std::string key = item.substr(0, eq);
        long value = std::stol(item.substr(eq + 1));
        if (value <= 0) throw std::invalid_argument("encoder values must be positive");
        if (key == "B") out.base = static_cast<std::uint32_t>(value);
        else if (key == "ni") out.n_integer = static_cast<std::uint32_t>(value);
        else if (key == "nf") out.n_fraction = static_cast<std::uint32_t>(value);
        else throw std::invalid_argument("unknown encoder key: " + key);
        saw_any = true;
    }
    if (!saw_any) throw std::invalid_argument("empty encoder spec");
    return out;
}

std::string EncoderParams::to_string() const {
    std::ostringstream os;
    os << "B=" << base << ",ni=" << n_integer << ",nf=" << n_fraction;
    return os.str();
}

FractionalEncoder::FractionalEncoder(ring::ContextPtr plain_ctx, std::uint32_t base,
                                     std::uint32_t n_integer, std::uint32_t n_fraction)
    : ctx_(std::move(plain_ctx)), base_(base), ni_(n_integer), nf_(n_fraction) {
    if (base_ < 2) throw std::invalid_argument("encoder base must be >= 2");
    if (std::size_t(ni_) + std::size_t(nf_) > ctx_->degree()) {
        throw std::invalid_argument("ni + nf must not exceed the ring degree");
    }
}

double FractionalEncoder::resolution() const { return std::pow(double(base_), -double(nf_)); }

std::vector<long long> FractionalEncoder::digits(double y) const {
    const std::size_t n = ctx_->degree();
    std::vector<long long> out(n, 0);
    if (y == 0.0 || !std::isfinite(y)) {
        if (!std::isfinite(y)) throw std::invalid_argument("cannot encode non-finite value");
        return out;
    }
    const long long sign = y < 0 ? -1 : 1;
    double mag = std::fabs(y);
    double ipart_d = std::floor(mag);
    if (ipart_d >= std::pow(double(base_), double(ni_))) {
        throw std::invalid_argument("integer part exceeds encoder range");
    }
    // Integer digits, least significant first.
    std::uint64_t ipart = static_cast<std::uint64_t>(ipart_d);
    std::size_t k = 0;
    while (ipart != 0) {
        out[k] = sign * static_cast<long long>(ipart % base_);
        ipart /= base_;
        ++k;
    }
    // Fractional digits, truncated beyond nf.
    double frac = mag - ipart_d;
    for (std::uint32_t j = 1; j <= nf_ && frac > 0; ++j) {
        frac *= base_;
        double d = std::floor(frac);
        frac -= d;
        if (d != 0) out[n - j] = -sign * static_cast<long long>(d);
    }
    return out;
}

double FractionalEncoder::decode_digits(std::span<const long long> digits) const {
    const std::size_t n = ctx_->degree();
    if (digits.size() != n) throw std::invalid_argument("digit vector length mismatch");
    const std::size_t split = n / 2;
    const double b = double(base_);
    double value = 0.0;
    for (std::size_t k = 0; k < split; ++k) {
        if (digits[k] != 0) value += double(digits[k]) * std::pow(b, double(k));
    }
    for (std::size_t k = split; k < n; ++k) {
        if (digits[k] != 0) value -= double(digits[k]) * std::pow(b, -double(n - k));
    }
    return value;
}

ring::RingPoly FractionalEncoder::encode(double y) const {
    auto d = digits(y);
    ring::RingPoly p(ctx_);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] != 0) p.set_coeff(i, ring::BigInt(static_cast<long>(d[i])));
    }
    return p;
}

double FractionalEncoder::decode(const ring::RingPoly& p) const {
    if (!(*p.context() == *ctx_)) throw std::invalid_argument("encoder/plaintext context mismatch");
    const std::size_t n = ctx_->degree();
    const std::size_t split = n / 2; // degrees below: B^k, at/above: -B^-(n-k)
    auto centered = ring::centered_lift(p);
    double value = 0.0;
    const double b = double(base_);
    for (std::size_t k = 0; k < split; ++k) {
        if (centered[k] == 0) continue;
        value += centered[k].get_d() * std::pow(b, double(k));
    }
    for (std::size_t k = split; k < n; ++k) {
        if (centered[k] == 0) continue;
        value -= centered[k].get_d() * std::pow(b, -double(n - k));
    }
    return value;
}

IntegerEncoder::IntegerEncoder(ring::ContextPtr plain_ctx, std::uint32_t base)
    : ctx_(std::move(plain_ctx)), base_(base) {
    if (base_ < 2) throw std::invalid_argument("encoder base must be >= 2");
}

ring::RingPoly IntegerEncoder::encode(std::int64_t v) const {
    ring::RingPoly p(ctx_);
    const int sign = v < 0 ? -1 : 1;
    std::uint64_t mag = v < 0 ? static_cast<std::uint64_t>(-(v + 1)) + 1 : static_cast<std::uint64_t>(v);
    std::size_t k = 0;
    while (mag != 0) {
        if (k >= ctx_->degree()) throw std::invalid_argument("integer exceeds encoder range");
        std::uint32_t digit = static_cast<std::uint32_t>(mag % base_);
        mag /= base_;
        if (digit != 0) p.set_coeff(k, ring::BigInt(long(digit) * sign));
        ++k;
    }
    return p;
}

std::int64_t IntegerEncoder::decode(const ring::RingPoly& p) const {
    if (!(*p.context() == *ctx_)) throw std::invalid_argument("encoder/plaintext context mismatch");
    auto centered = ring::centered_lift(p);
    ring::BigInt value = 0;
    ring::BigInt power = 1;
    for (std::size_t k = 0; k < centered.size(); ++k) {
        if (centered[k] != 0) value += centered[k] * power;
        power *= base_;
        if (power > (ring::BigInt(1) << 80) ) {
            // remaining digits must be zero for a representable integer
            bool rest_zero = true;
            for (std::size_t j = k + 1; j < centered.size(); ++j) {
                if (centered[j] != 0) { rest_zero = false; break; }
            }
            if (rest_zero) break;
            throw std::invalid_argument("decoded integer exceeds 64-bit range");
        }
    }
    if (!value.fits_slong_p()) throw std::invalid_argument("decoded integer exceeds 64-bit range");
    return static_cast<std::int64_t>(value.get_si());
}

} // namespace heip::enc
