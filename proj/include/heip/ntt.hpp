#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "heip/ring.hpp"

namespace heip::ring {

// Negacyclic number-theoretic transform modulo one 61-bit prime p with
// p = 1 (mod 2^21), supporting every power-of-two ring degree up to 2^20.
// Tables are built once per (degree, prime) and cached; transforms are const
// and safe to use concurrently.
class NttTables {
public:
    NttTables(std::size_t n, std::uint64_t prime);

    std::size_t degree() const { return n_; }
    std::uint64_t prime() const { return p_; }

    void forward(std::uint64_t* values) const;  // natural order in, bit-reversed out
    void inverse(std::uint64_t* values) const;  // undoes forward, rescales by 1/n

    static const NttTables& get(std::size_t n, std::uint64_t prime); // cached

private:
    std::size_t n_;
    std::uint64_t p_;
    std::vector<std::uint64_t> roots_, roots_shoup_;   // psi^bitrev(j), heap order
    std::vector<std::uint64_t> iroots_, iroots_shoup_; // inverses, matching order
    std::uint64_t n_inv_, n_inv_shoup_;
};

// Lazily extended pool of NTT-friendly primes just below 2^61.
std::span<const std::uint64_t> prime_pool(std::size_t count);

// Exact integer negacyclic convolution via per-prime NTTs plus CRT
// recombination. An engine is constructed for a specific ring degree and a
// bound on the absolute value of any output coefficient (including any
// accumulation the caller plans); it picks just enough primes that the CRT
// product exceeds twice the bound, making signed reconstruction exact.
class ConvEngine {
public:
    ConvEngine(std::size_t n, const BigInt& abs_bound);

    std::size_t degree() const { return n_; }
    std::size_t prime_count() const { return primes_.size(); }

    // Per-prime forward transforms of one operand.
    struct Prepared {
        std::vector<std::vector<std::uint64_t>> residues; // [prime][n], NTT domain
    };

    // Canonical [0, q) polynomial, interpreted via its centered representative.
    Prepared prepare(const RingPoly& poly) const;
    // Small signed coefficients (e.g. plaintexts centered mod t).
    Prepared prepare(std::span<const std::int64_t> coeffs) const;
    // Arbitrary signed coefficients.
    Prepared prepare(std::span<const BigInt> coeffs) const;

    // Lazy accumulator: products are summed without reduction, which is safe
    // for up to 60 multiply-accumulates (61-bit primes, 128-bit lanes).
    struct Accumulator {
        std::vector<std::vector<unsigned __int128>> lanes; // [prime][n]
        std::size_t mac_count = 0;
    };
    Accumulator make_accumulator() const;

    // acc += a * b (pointwise in the transformed domain).
    void multiply_accumulate(Accumulator& acc, const Prepared& a, const Prepared& b) const;

    // Inverse transforms + CRT: signed coefficients, exact provided the
    // engine's bound was honored.
    std::vector<BigInt> reconstruct(Accumulator& acc) const;

    // Convenience single product.
    std::vector<BigInt> conv(const Prepared& a, const Prepared& b) const;

private:
    std::size_t n_;
    std::vector<std::uint64_t> primes_;
    BigInt crt_product_;
    std::vector<BigInt> crt_basis_; // inv_i * (P / p_i), premultiplied
};

// Schoolbook exact signed negacyclic convolution, O(n^2); the reference path.
std::vector<BigInt> schoolbook_negacyclic(std::span<const BigInt> a, std::span<const BigInt> b);

} // namespace heip::ring
