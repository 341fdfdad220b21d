#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "srb/finite_field.hpp"

namespace srb {

/// Product-matrix MBR code shape with beta = 1, so the repair degree d equals alpha.
struct MbrParams {
    std::size_t k = 1;      // reconstruction threshold
    std::size_t alpha = 1;  // symbols per node per stripe
    std::size_t n = 0;      // nodes holding the code; 0 = not yet known
    std::size_t p = 0;      // malicious nodes a decode must tolerate

    /// L = k * alpha - k(k-1)/2
    [[nodiscard]] std::size_t message_length() const noexcept { return k * alpha - k * (k - 1) / 2; }
    [[nodiscard]] std::size_t repair_degree() const noexcept { return alpha + 2 * p; }
    [[nodiscard]] std::size_t reconstruct_degree() const noexcept { return k + 2 * p; }

    /// 1 <= k <= alpha. Checks only the code shape.
    void validate_shape() const;
    /// Shape plus alpha + 2p <= n - 1 and k + 2p <= n.
    void validate() const;
    /// validate() plus q >= n so that n distinct coefficients exist.
    void validate_for(const Field& field) const;
};

/// Symmetric alpha x alpha matrix [[U, V], [V^T, 0]] holding the L message symbols of one stripe.
class MessageMatrix {
public:
    MessageMatrix() = default;
    MessageMatrix(std::size_t alpha, std::vector<Symbol> entries);

    [[nodiscard]] std::size_t alpha() const noexcept { return alpha_; }
    [[nodiscard]] Symbol at(std::size_t row, std::size_t col) const { return entries_[row * alpha_ + col]; }
    [[nodiscard]] std::span<const Symbol> row(std::size_t r) const
    {
        return std::span<const Symbol>(entries_).subspan(r * alpha_, alpha_);
    }
    [[nodiscard]] const std::vector<Symbol>& entries() const noexcept { return entries_; }

    friend bool operator==(const MessageMatrix&, const MessageMatrix&) = default;

private:
    std::size_t alpha_ = 0;
    std::vector<Symbol> entries_;
};

/// One node's coded symbols for one stripe: psi(gamma)^T M.
struct NodeRow {
    Symbol gamma = 0;
    std::vector<Symbol> symbols;

    friend bool operator==(const NodeRow&, const NodeRow&) = default;
};

/// Places msg into M: U's upper triangle row-major, then V row-major, mirrored for symmetry.
MessageMatrix build_message_matrix(const Field& field, std::span<const Symbol> msg, const MbrParams& params);

/// Inverse of build_message_matrix. Throws Error(integrity) on an asymmetric matrix or a
/// nonzero bottom-right block.
std::vector<Symbol> extract_message(const MessageMatrix& m, const MbrParams& params);

/// psi(gamma)^T M. If `multiplications` is given it is incremented by the number of field
/// multiplications spent on the matrix-vector product (alpha^2).
NodeRow encode_node(const Field& field, const MessageMatrix& m, Symbol gamma,
    std::uint64_t* multiplications = nullptr);

/// The single symbol a helper sends to a node being repaired: helper.symbols . psi(target).
Symbol repair_share(const Field& field, const NodeRow& helper, Symbol target_gamma);

/// Recovers psi(target)^T M from alpha + 2p shares (x = helper gamma, y = share), tolerating
/// up to p corrupted shares.
NodeRow secure_repair(const Field& field, std::span<const EvalSample> shares, Symbol target_gamma,
    const MbrParams& params);

/// Recovers the L message symbols from k + 2p node rows, up to p of which may be arbitrary.
std::vector<Symbol> secure_reconstruct(const Field& field, std::span<const NodeRow> rows, const MbrParams& params);

} // namespace srb
