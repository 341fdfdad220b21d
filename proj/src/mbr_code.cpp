#include "srb/mbr_code.hpp"

#include <string>
#include <unordered_set>

namespace srb {

void MbrParams::validate_shape() const
{
    if (k < 1) {
        throw Error(ErrorKind::argument, "k must be >= 1");
    }
    if (k > alpha) {
        throw Error(ErrorKind::argument,
            "k = " + std::to_string(k) + " exceeds alpha = " + std::to_string(alpha));
    }
}

void MbrParams::validate() const
{
    validate_shape();
    if (repair_degree() + 1 > n) {
        throw Error(ErrorKind::argument, "alpha + 2p = " + std::to_string(repair_degree()) +
            " helpers need n >= " + std::to_string(repair_degree() + 1) + ", got n = " + std::to_string(n));
    }
    if (reconstruct_degree() > n) {
        throw Error(ErrorKind::argument, "k + 2p exceeds n");
    }
}

void MbrParams::validate_for(const Field& field) const
{
    validate();
    if (field.order() < n) {
        throw Error(ErrorKind::argument, field.spec().to_string() + " has fewer than n = " +
            std::to_string(n) + " distinct coefficients");
    }
}

MessageMatrix::MessageMatrix(std::size_t alpha, std::vector<Symbol> entries)
    : alpha_(alpha)
    , entries_(std::move(entries))
{
    if (entries_.size() != alpha_ * alpha_) {
        throw Error(ErrorKind::argument, "message matrix needs alpha^2 entries");
    }
}

MessageMatrix build_message_matrix(const Field& field, std::span<const Symbol> msg, const MbrParams& params)
{
    params.validate_shape();
    const std::size_t k = params.k;
    const std::size_t alpha = params.alpha;
    if (msg.size() != params.message_length()) {
        throw Error(ErrorKind::argument, "message has " + std::to_string(msg.size()) +
            " symbols, code needs L = " + std::to_string(params.message_length()));
    }
    std::vector<Symbol> e(alpha * alpha, 0);
    std::size_t next = 0;
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = r; c < k; ++c) {
            const Symbol v = field.element(msg[next++]);
            e[r * alpha + c] = v;
            e[c * alpha + r] = v;
        }
    }
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = k; c < alpha; ++c) {
            const Symbol v = field.element(msg[next++]);
            e[r * alpha + c] = v;
            e[c * alpha + r] = v;
        }
    }
    return MessageMatrix(alpha, std::move(e));
}

std::vector<Symbol> extract_message(const MessageMatrix& m, const MbrParams& params)
{
    params.validate_shape();
    const std::size_t k = params.k;
    const std::size_t alpha = params.alpha;
    if (m.alpha() != alpha) {
        throw Error(ErrorKind::argument, "message matrix size does not match alpha");
    }
    for (std::size_t r = 0; r < alpha; ++r) {
        for (std::size_t c = r + 1; c < alpha; ++c) {
            if (m.at(r, c) != m.at(c, r)) {
                throw Error(ErrorKind::integrity, "message matrix is not symmetric at (" +
                    std::to_string(r) + ", " + std::to_string(c) + ")");
            }
        }
    }
    for (std::size_t r = k; r < alpha; ++r) {
        for (std::size_t c = k; c < alpha; ++c) {
            if (m.at(r, c) != 0) {
                throw Error(ErrorKind::integrity, "message matrix has a nonzero bottom-right block");
            }
        }
    }
    std::vector<Symbol> msg;
    msg.reserve(params.message_length());
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = r; c < k; ++c) {
            msg.push_back(m.at(r, c));
        }
    }
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = k; c < alpha; ++c) {
            msg.push_back(m.at(r, c));
        }
    }
    return msg;
}

NodeRow encode_node(const Field& field, const MessageMatrix& m, Symbol gamma, std::uint64_t* multiplications)
{
    const std::size_t alpha = m.alpha();
    const auto psi = vandermonde_row(field, field.element(gamma), alpha);
    NodeRow out{gamma, std::vector<Symbol>(alpha, 0)};
    for (std::size_t r = 0; r < alpha; ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < alpha; ++c) {
            out.symbols[c] = field.add(out.symbols[c], field.mul(psi[r], row[c]));
        }
    }
    if (multiplications != nullptr) {
        *multiplications += alpha * alpha;
    }
    return out;
}

Symbol repair_share(const Field& field, const NodeRow& helper, Symbol target_gamma)
{
    if (helper.gamma == target_gamma) {
        throw Error(ErrorKind::argument, "a node cannot serve a repair share to itself");
    }
    const auto psi = vandermonde_row(field, field.element(target_gamma), helper.symbols.size());
    Symbol acc = 0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        acc = field.add(acc, field.mul(helper.symbols[j], psi[j]));
    }
    return acc;
}

NodeRow secure_repair(const Field& field, std::span<const EvalSample> shares, Symbol target_gamma,
    const MbrParams& params)
{
    params.validate_shape();
    if (shares.size() != params.repair_degree()) {
        throw Error(ErrorKind::argument, "secure repair needs alpha + 2p = " +
            std::to_string(params.repair_degree()) + " shares, got " + std::to_string(shares.size()));
    }
    for (const auto& s : shares) {
        if (s.x == target_gamma) {
            throw Error(ErrorKind::argument, "helper coefficient equals the target coefficient");
        }
    }
    // Shares are evaluations of the polynomial with coefficients M psi(target) at each helper
    // gamma; by symmetry of M that vector is also psi(target)^T M.
    try {
        return NodeRow{target_gamma, rs_decode(field, shares, params.alpha)};
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::decode_failure) {
            throw Error(ErrorKind::decode_failure, std::string("repair failed: error budget exceeded (") + e.what() + ")");
        }
        throw;
    }
}

std::vector<Symbol> secure_reconstruct(const Field& field, std::span<const NodeRow> rows, const MbrParams& params)
{
    params.validate_shape();
    const std::size_t k = params.k;
    const std::size_t alpha = params.alpha;
    if (rows.size() != params.reconstruct_degree()) {
        throw Error(ErrorKind::argument, "reconstruction needs k + 2p = " +
            std::to_string(params.reconstruct_degree()) + " rows, got " + std::to_string(rows.size()));
    }
    std::unordered_set<Symbol> seen;
    for (const auto& row : rows) {
        if (row.symbols.size() != alpha) {
            throw Error(ErrorKind::argument, "node row length differs from alpha");
        }
        if (!seen.insert(row.gamma).second) {
            throw Error(ErrorKind::argument, "duplicate node coefficient " + std::to_string(row.gamma));
        }
    }

    std::vector<Symbol> m(alpha * alpha, 0);
    std::vector<EvalSample> samples(rows.size());
    auto decode_column = [&](std::size_t col) {
        try {
            return rs_decode(field, samples, k);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::decode_failure) {
                throw Error(ErrorKind::decode_failure, "reconstruction failed at column " +
                    std::to_string(col) + ": " + e.what());
            }
            throw;
        }
    };

    // Column c >= k of C is Phi V[:, c-k]: a degree < k polynomial in gamma.
    for (std::size_t c = k; c < alpha; ++c) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            samples[i] = {rows[i].gamma, rows[i].symbols[c]};
        }
        const auto v_col = decode_column(c);
        for (std::size_t r = 0; r < k; ++r) {
            m[r * alpha + c] = v_col[r];
            m[c * alpha + r] = v_col[r];
        }
    }

    // Column c < k of C is Phi U[:, c] + Delta V^T[:, c]; strip the Delta part, then decode.
    std::vector<std::vector<Symbol>> powers;
    powers.reserve(rows.size());
    for (const auto& row : rows) {
        powers.push_back(vandermonde_row(field, field.element(row.gamma), alpha));
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Symbol delta = 0;
            for (std::size_t j = k; j < alpha; ++j) {
                delta = field.add(delta, field.mul(powers[i][j], m[c * alpha + j]));
            }
            samples[i] = {rows[i].gamma, field.sub(rows[i].symbols[c], delta)};
        }
        const auto u_col = decode_column(c);
        for (std::size_t r = 0; r < k; ++r) {
            m[r * alpha + c] = u_col[r];
        }
    }
    // U columns were decoded independently; symmetry is the integrity check.
    return extract_message(MessageMatrix(alpha, std::move(m)), params);
}

} // namespace srb
