#pragma once

// Slow, independent reference arithmetic used to check the library. Nothing here calls
// into the srb field tables.

#include <cstdint>
#include <random>
#include <vector>

#include "srb/finite_field.hpp"

namespace oracle {

inline std::uint32_t clmul_reduce(std::uint32_t a, std::uint32_t b, std::uint32_t poly)
{
    unsigned degree = 0;
    while ((poly >> (degree + 1)) != 0) {
        ++degree;
    }
    std::uint64_t prod = 0;
    for (unsigned i = 0; i < 32; ++i) {
        if ((b >> i) & 1u) {
            prod ^= static_cast<std::uint64_t>(a) << i;
        }
    }
    for (int bit = 63; bit >= static_cast<int>(degree); --bit) {
        if ((prod >> bit) & 1u) {
            prod ^= static_cast<std::uint64_t>(poly) << (bit - static_cast<int>(degree));
        }
    }
    return static_cast<std::uint32_t>(prod);
}

/// Schoolbook GF(q) arithmetic: integers mod q, or carry-less products mod the polynomial.
struct Arith {
    srb::FieldSpec spec;

    [[nodiscard]] std::uint32_t q() const { return spec.order(); }
    [[nodiscard]] std::uint32_t add(std::uint32_t a, std::uint32_t b) const
    {
        return spec.kind == srb::FieldKind::binary ? a ^ b : (a + b) % q();
    }
    [[nodiscard]] std::uint32_t sub(std::uint32_t a, std::uint32_t b) const
    {
        return spec.kind == srb::FieldKind::binary ? a ^ b : (a + q() - b) % q();
    }
    [[nodiscard]] std::uint32_t mul(std::uint32_t a, std::uint32_t b) const
    {
        if (spec.kind == srb::FieldKind::binary) {
            return clmul_reduce(a, b, spec.parameter);
        }
        return static_cast<std::uint32_t>(static_cast<std::uint64_t>(a) * b % q());
    }
    [[nodiscard]] std::uint32_t pow(std::uint32_t a, std::uint64_t e) const
    {
        std::uint32_t r = 1;
        for (std::uint64_t i = 0; i < e; ++i) {
            r = mul(r, a);
        }
        return r;
    }
    /// a^(q-2)
    [[nodiscard]] std::uint32_t inv(std::uint32_t a) const
    {
        std::uint32_t r = 1;
        std::uint32_t base = a;
        std::uint64_t e = q() - 2;
        while (e != 0) {
            if (e & 1u) {
                r = mul(r, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        return r;
    }

    /// psi(gamma)^T M for a row-major alpha x alpha matrix.
    [[nodiscard]] std::vector<std::uint32_t> row_times_matrix(std::uint32_t gamma,
        const std::vector<std::uint32_t>& m, std::size_t alpha) const
    {
        std::vector<std::uint32_t> out(alpha, 0);
        std::uint32_t power = 1;
        for (std::size_t i = 0; i < alpha; ++i) {
            for (std::size_t j = 0; j < alpha; ++j) {
                out[j] = add(out[j], mul(power, m[i * alpha + j]));
            }
            power = mul(power, gamma);
        }
        return out;
    }

    /// psi(a)^T M psi(b)
    [[nodiscard]] std::uint32_t bilinear(std::uint32_t a, const std::vector<std::uint32_t>& m, std::size_t alpha,
        std::uint32_t b) const
    {
        const auto row = row_times_matrix(a, m, alpha);
        std::uint32_t acc = 0;
        std::uint32_t power = 1;
        for (std::size_t j = 0; j < alpha; ++j) {
            acc = add(acc, mul(row[j], power));
            power = mul(power, b);
        }
        return acc;
    }
};

/// The message matrix written out directly from the layout rule, without the library.
inline std::vector<std::uint32_t> message_matrix(const std::vector<std::uint32_t>& msg, std::size_t k,
    std::size_t alpha)
{
    std::vector<std::uint32_t> m(alpha * alpha, 0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            m[i * alpha + j] = m[j * alpha + i] = msg[next++];
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = k; j < alpha; ++j) {
            m[i * alpha + j] = m[j * alpha + i] = msg[next++];
        }
    }
    return m;
}

/// Distinct random values in [lo, q).
inline std::vector<std::uint32_t> distinct(std::mt19937_64& rng, std::uint32_t q, std::size_t count,
    std::uint32_t lo = 0)
{
    std::vector<std::uint32_t> out;
    std::uniform_int_distribution<std::uint32_t> pick(lo, q - 1);
    while (out.size() < count) {
        const auto v = pick(rng);
        bool seen = false;
        for (auto o : out) {
            seen = seen || o == v;
        }
        if (!seen) {
            out.push_back(v);
        }
    }
    return out;
}

} // namespace oracle
