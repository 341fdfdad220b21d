#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "srb/finite_field.hpp"
#include "srb/mbr_code.hpp"

namespace srb {

using RawBlock = std::vector<std::uint8_t>;
using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint16_t kStateFormatVersion = 1;

/// Bytes of block payload packed into one field symbol. Fields with q < 256 take one byte
/// per symbol and reject byte values >= q.
unsigned payload_bytes_per_symbol(const Field& field) noexcept;

/// Blocks cut into field symbols. symbols[l * stripes + s] is stripe s of block l.
struct StripeSet {
    std::size_t block_size = 0;
    std::size_t stripes = 0;  // Z
    unsigned payload_bytes = 1;
    std::vector<Symbol> symbols;
    std::vector<std::uint32_t> lengths;  // true byte length of each block

    [[nodiscard]] std::size_t block_count() const noexcept { return lengths.size(); }
    [[nodiscard]] Symbol at(std::size_t block, std::size_t stripe) const { return symbols[block * stripes + stripe]; }
};

StripeSet stripe_blocks(const Field& field, std::span<const RawBlock> blocks, std::size_t block_size);
std::vector<RawBlock> unstripe_blocks(const StripeSet& stripes);

/// Self-describing metadata shared by stored node state and repair shares.
struct StateHeader {
    std::uint16_t version = kStateFormatVersion;
    FieldSpec field;
    std::uint16_t k = 0;
    std::uint16_t alpha = 0;
    std::uint32_t gamma = 0;
    std::uint32_t generation = 0;
    std::uint32_t block_size = 0;
    std::uint32_t stripes = 0;
    std::vector<std::uint32_t> lengths;  // one per block; size() == L

    [[nodiscard]] MbrParams params(std::size_t p = 0) const;
    /// Everything except gamma matches.
    [[nodiscard]] bool same_code(const StateHeader& other) const;

    friend bool operator==(const StateHeader&, const StateHeader&) = default;
};

/// One node's stored data for one generation: alpha coded blocks of Z symbols each.
/// payload[j * stripes + s] is stripe s of coded block j.
struct CodedNodeState {
    StateHeader header;
    std::vector<Symbol> payload;

    [[nodiscard]] NodeRow stripe_row(std::size_t stripe) const;

    friend bool operator==(const CodedNodeState&, const CodedNodeState&) = default;
};

/// One helper's contribution to a bootstrap: a single coded block addressed to target_gamma.
/// header.gamma is the helper's coefficient.
struct RepairShare {
    StateHeader header;
    Symbol target_gamma = 0;
    std::vector<Symbol> symbols;

    friend bool operator==(const RepairShare&, const RepairShare&) = default;
};

/// Stripes one generation once and encodes it for any number of node coefficients.
class GenerationEncoder {
public:
    GenerationEncoder(Field field, std::span<const RawBlock> blocks, const MbrParams& params,
        std::uint32_t generation, std::size_t block_size);

    [[nodiscard]] CodedNodeState encode(Symbol gamma, std::uint64_t* multiplications = nullptr) const;

    [[nodiscard]] const Field& field() const noexcept { return field_; }
    [[nodiscard]] const StateHeader& header() const noexcept { return header_; }
    [[nodiscard]] const std::vector<MessageMatrix>& matrices() const noexcept { return matrices_; }

private:
    Field field_;
    MbrParams params_;
    StateHeader header_;
    std::vector<MessageMatrix> matrices_;  // one per stripe
};

CodedNodeState encode_generation(const Field& field, std::span<const RawBlock> blocks, Symbol gamma,
    const MbrParams& params, std::uint32_t generation, std::size_t block_size);

RepairShare serve_repair(const Field& field, const CodedNodeState& state, Symbol target_gamma);

/// Rebuilds the state a node with target_gamma would have stored, from alpha + 2p shares of
/// which at most p are corrupted.
CodedNodeState bootstrap_node(const Field& field, std::span<const RepairShare> shares, Symbol target_gamma,
    std::size_t p);

/// Recovers the generation's L raw blocks from k + 2p states, at most p of them malicious.
std::vector<RawBlock> reconstruct_generation(const Field& field, std::span<const CodedNodeState> states,
    std::size_t p);

// On-disk / wire format. Header integers little-endian, symbols big-endian.
std::size_t header_wire_size(std::size_t block_count) noexcept;
std::size_t state_wire_size(const StateHeader& header) noexcept;
std::size_t share_wire_size(const StateHeader& header) noexcept;

Bytes serialize_state(const CodedNodeState& state);
CodedNodeState parse_state(std::span<const std::uint8_t> bytes);
Bytes serialize_share(const RepairShare& share);
RepairShare parse_share(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace srb
