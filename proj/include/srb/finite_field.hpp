#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srb/error.hpp"

namespace srb {

/// Raw field symbol. Always interpreted relative to a Field; valid values are [0, q).
using Symbol = std::uint32_t;

enum class FieldKind : std::uint8_t {
    prime = 0,
    binary = 1,
};

/// Defining parameters of GF(q).
///
/// For prime fields `parameter` is q itself. For binary-extension fields it is the
/// reduction polynomial as a bitmask including the leading x^m term, so the degree
/// is recoverable from the bitmask alone. Orders above 2^16 are rejected.
struct FieldSpec {
    FieldKind kind = FieldKind::binary;
    std::uint32_t parameter = 0;

    static FieldSpec prime(std::uint32_t q);
    /// `polynomial == 0` selects the built-in primitive polynomial for `degree`.
    static FieldSpec binary(unsigned degree, std::uint32_t polynomial = 0);
    /// GF(2^16) with x^16 + x^12 + x^3 + x + 1.
    static FieldSpec gf65536() { return binary(16); }

    /// Accepts "gf13", "gf257", "gf2^16", "gf2^4:0x13".
    static FieldSpec parse(std::string_view text);

    [[nodiscard]] std::uint32_t order() const;
    [[nodiscard]] unsigned degree() const;
    /// Bytes used to store one symbol on disk: ceil(bitlen(q - 1) / 8).
    [[nodiscard]] unsigned symbol_width() const;
    [[nodiscard]] std::string to_string() const;

    /// Throws Error(argument) unless q is prime, or the polynomial is irreducible of
    /// degree 1..16.
    void validate() const;

    friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Built-in primitive reduction polynomial for GF(2^degree), degree in [1, 16].
std::uint32_t default_binary_polynomial(unsigned degree);

/// Exhaustive factor search; valid for polynomials of degree <= 16.
bool is_irreducible_gf2(std::uint32_t polynomial);
bool is_prime(std::uint32_t n);

class FieldElement;

/// Arithmetic context for GF(q). Cheap to copy: tables are shared and immutable.
class Field {
public:
    explicit Field(FieldSpec spec);

    [[nodiscard]] const FieldSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::uint32_t order() const noexcept { return order_; }
    [[nodiscard]] bool contains(std::uint64_t value) const noexcept { return value < order_; }

    /// Checked conversion from an integer; throws Error(argument) when value >= q.
    [[nodiscard]] Symbol element(std::uint64_t value) const;

    /// Bytes used to store one symbol on disk: ceil(bitlen(q - 1) / 8).
    [[nodiscard]] unsigned symbol_width() const noexcept { return symbol_width_; }

    [[nodiscard]] Symbol add(Symbol a, Symbol b) const noexcept
    {
        if (binary_) {
            return a ^ b;
        }
        const Symbol s = a + b;
        return s >= order_ ? s - order_ : s;
    }

    [[nodiscard]] Symbol sub(Symbol a, Symbol b) const noexcept
    {
        if (binary_) {
            return a ^ b;
        }
        return a >= b ? a - b : a + order_ - b;
    }

    [[nodiscard]] Symbol neg(Symbol a) const noexcept
    {
        if (binary_ || a == 0) {
            return a;
        }
        return order_ - a;
    }

    [[nodiscard]] Symbol mul(Symbol a, Symbol b) const noexcept
    {
        if (binary_) {
            if (a == 0 || b == 0) {
                return 0;
            }
            return tables_->exp[tables_->log[a] + tables_->log[b]];
        }
        return static_cast<Symbol>((static_cast<std::uint64_t>(a) * b) % order_);
    }

    /// Throws Error(division_by_zero) for a == 0.
    [[nodiscard]] Symbol inv(Symbol a) const;
    [[nodiscard]] Symbol div(Symbol a, Symbol b) const { return mul(a, inv(b)); }
    [[nodiscard]] Symbol pow(Symbol base, std::uint64_t exponent) const noexcept;

    /// Wrap a raw value; throws if out of range.
    [[nodiscard]] FieldElement operator()(std::uint64_t value) const;

    friend bool operator==(const Field& a, const Field& b) noexcept { return a.spec_ == b.spec_; }

private:
    struct Tables {
        std::vector<Symbol> exp;  // doubled so log[a] + log[b] never wraps
        std::vector<std::uint32_t> log;
    };

    FieldSpec spec_;
    std::uint32_t order_ = 0;
    unsigned symbol_width_ = 0;
    bool binary_ = false;
    std::shared_ptr<const Tables> tables_;
};

enum class ArithOp { add, sub, mul, div };

/// A symbol bound to its field. Mixing fields is an error rather than UB.
class FieldElement {
public:
    FieldElement(Field field, Symbol value);

    [[nodiscard]] const Field& field() const noexcept { return field_; }
    [[nodiscard]] Symbol value() const noexcept { return value_; }
    [[nodiscard]] FieldElement inverse() const;

    friend FieldElement operator+(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator/(const FieldElement& a, const FieldElement& b);

    friend bool operator==(const FieldElement& a, const FieldElement& b) noexcept
    {
        return a.field_ == b.field_ && a.value_ == b.value_;
    }

private:
    Field field_;
    Symbol value_;
};

FieldElement ff_arith(const FieldElement& a, const FieldElement& b, ArithOp op);

/// [1, x, x^2, ..., x^(width-1)]
std::vector<Symbol> vandermonde_row(const Field& field, Symbol x, std::size_t width);

/// Horner evaluation of sum_j coeffs[j] * x^j.
Symbol poly_eval(const Field& field, std::span<const Symbol> coeffs, Symbol x);

struct EvalSample {
    Symbol x;
    Symbol y;
};

/// Coefficients of the unique polynomial of degree < points.size() through the points.
std::vector<Symbol> interpolate(const Field& field, std::span<const EvalSample> points);

/// Largest number of errors a length-n, dimension-dim evaluation code can correct.
constexpr std::size_t rs_error_budget(std::size_t n, std::size_t dim) noexcept
{
    return n >= dim ? (n - dim) / 2 : 0;
}

/// Generalized Reed-Solomon error decoding over arbitrary distinct evaluation points.
///
/// Returns the coefficient vector c (length `dim`) of the unique polynomial that agrees
/// with all but at most rs_error_budget(points.size(), dim) samples. Uses a direct
/// interpolation fast path and falls back to Berlekamp-Welch.
///
/// Throws Error(argument) on duplicate x's or too few points, and
/// Error(decode_failure) when no codeword lies within the budget.
std::vector<Symbol> rs_decode(const Field& field, std::span<const EvalSample> points, std::size_t dim);

} // namespace srb
