#include "srb/finite_field.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <optional>
#include <unordered_set>

namespace srb {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::argument: return "argument";
    case ErrorKind::division_by_zero: return "division_by_zero";
    case ErrorKind::field_mismatch: return "field_mismatch";
    case ErrorKind::decode_failure: return "decode_failure";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::underflow: return "underflow";
    case ErrorKind::format: return "format";
    }
    return "unknown";
}

namespace {

constexpr std::uint32_t kMaxOrder = 1u << 16;

// Primitive polynomials, index = degree.
constexpr std::uint32_t kPrimitivePolys[17] = {
    0,      0x3,    0x7,    0xB,    0x13,   0x25,   0x43,   0x89,   0x11D,
    0x211,  0x409,  0x805,  0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
};

unsigned poly_degree(std::uint32_t poly) noexcept
{
    return poly == 0 ? 0 : static_cast<unsigned>(std::bit_width(poly)) - 1;
}

std::uint32_t gf2_mod(std::uint32_t a, std::uint32_t b) noexcept
{
    const unsigned db = poly_degree(b);
    while (a != 0 && poly_degree(a) >= db) {
        a ^= b << (poly_degree(a) - db);
    }
    return a;
}

// Carry-less product reduced modulo `poly`; used only while building tables.
std::uint32_t slow_mul(std::uint32_t a, std::uint32_t b, std::uint32_t poly) noexcept
{
    const unsigned m = poly_degree(poly);
    std::uint32_t acc = 0;
    while (b != 0) {
        if (b & 1u) {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a & (1u << m)) {
            a ^= poly;
        }
    }
    return acc;
}

std::uint32_t slow_pow(std::uint32_t base, std::uint64_t e, std::uint32_t poly) noexcept
{
    std::uint32_t acc = 1;
    while (e != 0) {
        if (e & 1u) {
            acc = slow_mul(acc, base, poly);
        }
        base = slow_mul(base, base, poly);
        e >>= 1;
    }
    return acc;
}

std::vector<std::uint32_t> prime_factors(std::uint32_t n)
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t f = 2; f * f <= n; ++f) {
        if (n % f == 0) {
            out.push_back(f);
            while (n % f == 0) {
                n /= f;
            }
        }
    }
    if (n > 1) {
        out.push_back(n);
    }
    return out;
}

std::uint32_t parse_u32(std::string_view text, const char* what)
{
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
        base = 16;
    }
    std::uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorKind::argument, std::string("cannot parse ") + what + ": '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

bool is_prime(std::uint32_t n)
{
    if (n < 2) {
        return false;
    }
    for (std::uint64_t f = 2; f * f <= n; ++f) {
        if (n % f == 0) {
            return false;
        }
    }
    return true;
}

bool is_irreducible_gf2(std::uint32_t polynomial)
{
    const unsigned m = poly_degree(polynomial);
    if (m == 0 || m > 16) {
        return false;
    }
    // Any reducible polynomial has a factor of degree <= m/2.
    for (unsigned d = 1; d <= m / 2; ++d) {
        for (std::uint32_t f = 1u << d; f < (2u << d); ++f) {
            if (gf2_mod(polynomial, f) == 0) {
                return false;
            }
        }
    }
    return true;
}

std::uint32_t default_binary_polynomial(unsigned degree)
{
    if (degree < 1 || degree > 16) {
        throw Error(ErrorKind::argument, "binary field degree must be in [1, 16]");
    }
    return kPrimitivePolys[degree];
}

FieldSpec FieldSpec::prime(std::uint32_t q)
{
    FieldSpec spec{FieldKind::prime, q};
    spec.validate();
    return spec;
}

FieldSpec FieldSpec::binary(unsigned degree, std::uint32_t polynomial)
{
    if (polynomial == 0) {
        polynomial = default_binary_polynomial(degree);
    }
    if (poly_degree(polynomial) != degree) {
        throw Error(ErrorKind::argument, "reduction polynomial degree does not match field degree");
    }
    FieldSpec spec{FieldKind::binary, polynomial};
    spec.validate();
    return spec;
}

FieldSpec FieldSpec::parse(std::string_view text)
{
    if (text.substr(0, 2) != "gf" && text.substr(0, 2) != "GF") {
        throw Error(ErrorKind::argument, "field must look like gf13, gf257 or gf2^16: '" + std::string(text) + "'");
    }
    text.remove_prefix(2);
    if (const auto caret = text.find('^'); caret != std::string_view::npos) {
        if (parse_u32(text.substr(0, caret), "field characteristic") != 2) {
            throw Error(ErrorKind::argument, "only characteristic-2 extension fields are supported");
        }
        text.remove_prefix(caret + 1);
        std::uint32_t poly = 0;
        if (const auto colon = text.find(':'); colon != std::string_view::npos) {
            poly = parse_u32(text.substr(colon + 1), "reduction polynomial");
            text = text.substr(0, colon);
        }
        return binary(parse_u32(text, "field degree"), poly);
    }
    return prime(parse_u32(text, "field order"));
}

std::uint32_t FieldSpec::order() const
{
    return kind == FieldKind::prime ? parameter : (1u << poly_degree(parameter));
}

unsigned FieldSpec::degree() const
{
    return kind == FieldKind::prime ? 1 : poly_degree(parameter);
}

unsigned FieldSpec::symbol_width() const
{
    return std::max(1u, (static_cast<unsigned>(std::bit_width(order() - 1)) + 7) / 8);
}

std::string FieldSpec::to_string() const
{
    char buf[48];
    if (kind == FieldKind::prime) {
        std::snprintf(buf, sizeof buf, "gf%u", parameter);
    } else {
        std::snprintf(buf, sizeof buf, "gf2^%u:0x%X", degree(), parameter);
    }
    return buf;
}

void FieldSpec::validate() const
{
    if (kind == FieldKind::prime) {
        if (parameter > kMaxOrder || !is_prime(parameter)) {
            throw Error(ErrorKind::argument, "field order " + std::to_string(parameter) + " is not a prime <= 65536");
        }
        return;
    }
    if (kind != FieldKind::binary) {
        throw Error(ErrorKind::argument, "unknown field kind");
    }
    const unsigned m = poly_degree(parameter);
    if (m < 1 || m > 16) {
        throw Error(ErrorKind::argument, "binary field degree must be in [1, 16]");
    }
    if (!is_irreducible_gf2(parameter)) {
        throw Error(ErrorKind::argument, "reduction polynomial " + to_string() + " is reducible");
    }
}

Field::Field(FieldSpec spec)
    : spec_(spec)
{
    spec_.validate();
    order_ = spec_.order();
    binary_ = spec_.kind == FieldKind::binary;
    symbol_width_ = spec_.symbol_width();
    if (!binary_) {
        return;
    }

    // The reduction polynomial need not be primitive, so search for a generator.
    const std::uint32_t group = order_ - 1;
    const auto factors = prime_factors(group);
    std::uint32_t generator = 1;
    for (std::uint32_t g = 2; g < order_ && group > 1; ++g) {
        const bool ok = std::all_of(factors.begin(), factors.end(), [&](std::uint32_t f) {
            return slow_pow(g, group / f, spec_.parameter) != 1;
        });
        if (ok) {
            generator = g;
            break;
        }
    }

    auto tables = std::make_shared<Tables>();
    tables->exp.resize(2 * static_cast<std::size_t>(order_));
    tables->log.assign(order_, 0);
    std::uint32_t x = 1;
    for (std::uint32_t i = 0; i < group; ++i) {
        tables->exp[i] = x;
        tables->log[x] = i;
        x = slow_mul(x, generator, spec_.parameter);
    }
    for (std::size_t i = group; i < tables->exp.size(); ++i) {
        tables->exp[i] = tables->exp[i - group];
    }
    tables_ = std::move(tables);
}

Symbol Field::element(std::uint64_t value) const
{
    if (!contains(value)) {
        throw Error(ErrorKind::argument,
            "value " + std::to_string(value) + " is not an element of " + spec_.to_string());
    }
    return static_cast<Symbol>(value);
}

Symbol Field::inv(Symbol a) const
{
    if (a == 0) {
        throw Error(ErrorKind::division_by_zero, "inverse of zero in " + spec_.to_string());
    }
    if (binary_) {
        const std::uint32_t group = order_ - 1;
        return tables_->exp[(group - tables_->log[a]) % group];
    }
    return pow(a, order_ - 2);
}

Symbol Field::pow(Symbol base, std::uint64_t exponent) const noexcept
{
    Symbol acc = 1;
    while (exponent != 0) {
        if (exponent & 1u) {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exponent >>= 1;
    }
    return acc;
}

FieldElement Field::operator()(std::uint64_t value) const
{
    return FieldElement(*this, element(value));
}

FieldElement::FieldElement(Field field, Symbol value)
    : field_(std::move(field))
    , value_(field_.element(value))
{
}

FieldElement FieldElement::inverse() const
{
    return FieldElement(field_, field_.inv(value_));
}

FieldElement ff_arith(const FieldElement& a, const FieldElement& b, ArithOp op)
{
    if (!(a.field() == b.field())) {
        throw Error(ErrorKind::field_mismatch,
            "operands from " + a.field().spec().to_string() + " and " + b.field().spec().to_string());
    }
    const Field& f = a.field();
    switch (op) {
    case ArithOp::add: return FieldElement(f, f.add(a.value(), b.value()));
    case ArithOp::sub: return FieldElement(f, f.sub(a.value(), b.value()));
    case ArithOp::mul: return FieldElement(f, f.mul(a.value(), b.value()));
    case ArithOp::div: return FieldElement(f, f.div(a.value(), b.value()));
    }
    throw Error(ErrorKind::argument, "unknown arithmetic op");
}

FieldElement operator+(const FieldElement& a, const FieldElement& b) { return ff_arith(a, b, ArithOp::add); }
FieldElement operator-(const FieldElement& a, const FieldElement& b) { return ff_arith(a, b, ArithOp::sub); }
FieldElement operator*(const FieldElement& a, const FieldElement& b) { return ff_arith(a, b, ArithOp::mul); }
FieldElement operator/(const FieldElement& a, const FieldElement& b) { return ff_arith(a, b, ArithOp::div); }

std::vector<Symbol> vandermonde_row(const Field& field, Symbol x, std::size_t width)
{
    if (width == 0) {
        throw Error(ErrorKind::argument, "vandermonde row width must be >= 1");
    }
    std::vector<Symbol> row(width);
    row[0] = 1;
    for (std::size_t j = 1; j < width; ++j) {
        row[j] = field.mul(row[j - 1], x);
    }
    return row;
}

Symbol poly_eval(const Field& field, std::span<const Symbol> coeffs, Symbol x)
{
    Symbol acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = field.add(field.mul(acc, x), *it);
    }
    return acc;
}

namespace {

void require_distinct(std::span<const EvalSample> points)
{
    std::unordered_set<Symbol> seen;
    seen.reserve(points.size());
    for (const auto& p : points) {
        if (!seen.insert(p.x).second) {
            throw Error(ErrorKind::argument, "duplicate evaluation point " + std::to_string(p.x));
        }
    }
}

std::size_t count_agreements(const Field& field, std::span<const Symbol> coeffs, std::span<const EvalSample> points)
{
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(),
        [&](const EvalSample& p) { return poly_eval(field, coeffs, p.x) == p.y; }));
}

std::vector<Symbol> interpolate_unchecked(const Field& field, std::span<const EvalSample> points)
{
    const std::size_t n = points.size();
    // master(x) = prod (x - x_i), coefficients low to high
    std::vector<Symbol> master(n + 1, 0);
    master[0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const Symbol neg_x = field.neg(points[i].x);
        for (std::size_t j = i + 1; j > 0; --j) {
            master[j] = field.add(master[j - 1], field.mul(master[j], neg_x));
        }
        master[0] = field.mul(master[0], neg_x);
    }

    std::vector<Symbol> result(n, 0);
    std::vector<Symbol> quotient(n);
    for (std::size_t i = 0; i < n; ++i) {
        // master / (x - x_i) by synthetic division
        Symbol carry = 0;
        for (std::size_t j = n; j > 0; --j) {
            carry = field.add(master[j], field.mul(carry, points[i].x));
            quotient[j - 1] = carry;
        }
        const Symbol denom = poly_eval(field, quotient, points[i].x);
        const Symbol scale = field.div(points[i].y, denom);
        if (scale == 0) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            result[j] = field.add(result[j], field.mul(scale, quotient[j]));
        }
    }
    return result;
}

// Gaussian elimination on an augmented row-major matrix [A | b]. Free variables are
// set to zero. Returns nullopt if the system is inconsistent.
std::optional<std::vector<Symbol>> solve_linear(const Field& field, std::vector<Symbol> a,
    std::size_t rows, std::size_t cols)
{
    const std::size_t stride = cols + 1;
    auto at = [&](std::size_t r, std::size_t c) -> Symbol& { return a[r * stride + c]; };

    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t pivot = r;
        while (pivot < rows && at(pivot, c) == 0) {
            ++pivot;
        }
        if (pivot == rows) {
            continue;
        }
        if (pivot != r) {
            for (std::size_t j = 0; j < stride; ++j) {
                std::swap(at(r, j), at(pivot, j));
            }
        }
        const Symbol inv = field.inv(at(r, c));
        for (std::size_t j = c; j < stride; ++j) {
            at(r, j) = field.mul(at(r, j), inv);
        }
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || at(i, c) == 0) {
                continue;
            }
            const Symbol factor = at(i, c);
            for (std::size_t j = c; j < stride; ++j) {
                at(i, j) = field.sub(at(i, j), field.mul(factor, at(r, j)));
            }
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i) {
        if (at(i, cols) != 0) {
            return std::nullopt;
        }
    }
    std::vector<Symbol> x(cols, 0);
    for (std::size_t i = 0; i < r; ++i) {
        x[pivot_col[i]] = at(i, cols);
    }
    return x;
}

std::vector<Symbol> berlekamp_welch(const Field& field, std::span<const EvalSample> points,
    std::size_t dim, std::size_t errors)
{
    // Unknowns: E_0..E_{e-1} (E monic of degree e) then Q_0..Q_{e+dim-1}.
    // Row i: sum_j Q_j x^j - y * sum_{j<e} E_j x^j = y * x^e
    const std::size_t n = points.size();
    const std::size_t q_len = errors + dim;
    const std::size_t cols = errors + q_len;
    std::vector<Symbol> system(n * (cols + 1), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto powers = vandermonde_row(field, points[i].x, q_len + 1);
        Symbol* row = &system[i * (cols + 1)];
        for (std::size_t j = 0; j < errors; ++j) {
            row[j] = field.neg(field.mul(points[i].y, powers[j]));
        }
        for (std::size_t j = 0; j < q_len; ++j) {
            row[errors + j] = powers[j];
        }
        row[cols] = field.mul(points[i].y, powers[errors]);
    }
    const auto solution = solve_linear(field, std::move(system), n, cols);
    if (!solution) {
        throw Error(ErrorKind::decode_failure, "no codeword within the error budget");
    }

    std::vector<Symbol> locator(solution->begin(), solution->begin() + static_cast<std::ptrdiff_t>(errors));
    locator.push_back(1);
    std::vector<Symbol> rem(solution->begin() + static_cast<std::ptrdiff_t>(errors), solution->end());

    // Q / E, E monic.
    std::vector<Symbol> quotient(dim, 0);
    for (std::size_t d = q_len; d-- > errors;) {
        const Symbol lead = rem[d];
        quotient[d - errors] = lead;
        if (lead == 0) {
            continue;
        }
        for (std::size_t j = 0; j <= errors; ++j) {
            const std::size_t idx = d - errors + j;
            rem[idx] = field.sub(rem[idx], field.mul(lead, locator[j]));
        }
    }
    for (std::size_t j = 0; j < errors; ++j) {
        if (rem[j] != 0) {
            throw Error(ErrorKind::decode_failure, "error locator does not divide the key equation");
        }
    }
    return quotient;
}

} // namespace

std::vector<Symbol> interpolate(const Field& field, std::span<const EvalSample> points)
{
    if (points.empty()) {
        throw Error(ErrorKind::argument, "interpolation needs at least one point");
    }
    require_distinct(points);
    return interpolate_unchecked(field, points);
}

std::vector<Symbol> rs_decode(const Field& field, std::span<const EvalSample> points, std::size_t dim)
{
    if (dim == 0) {
        throw Error(ErrorKind::argument, "code dimension must be >= 1");
    }
    if (points.size() < dim) {
        throw Error(ErrorKind::argument,
            "need at least " + std::to_string(dim) + " points, got " + std::to_string(points.size()));
    }
    for (const auto& p : points) {
        if (!field.contains(p.x) || !field.contains(p.y)) {
            throw Error(ErrorKind::argument, "sample outside " + field.spec().to_string());
        }
    }
    require_distinct(points);

    const std::size_t n = points.size();
    const std::size_t budget = rs_error_budget(n, dim);
    const std::size_t needed = n - budget;

    // Minimum distance n - dim + 1 > 2 * budget, so any codeword this close is the answer.
    auto coeffs = interpolate_unchecked(field, points.first(dim));
    if (count_agreements(field, coeffs, points) >= needed) {
        return coeffs;
    }
    if (budget == 0) {
        throw Error(ErrorKind::decode_failure, "samples are not a codeword and there is no redundancy to correct");
    }
    coeffs = berlekamp_welch(field, points, dim, budget);
    if (count_agreements(field, coeffs, points) < needed) {
        throw Error(ErrorKind::decode_failure, "decoded polynomial disagrees with more samples than the budget allows");
    }
    return coeffs;
}

} // namespace srb
