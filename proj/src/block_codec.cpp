#include "srb/block_codec.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <string>

namespace srb {

namespace {

constexpr char kMagic[4] = {'S', 'R', 'B', '1'};

void require_field(const Field& field, const StateHeader& header)
{
    if (!(field.spec() == header.field)) {
        throw Error(ErrorKind::field_mismatch, "state is over " + header.field.to_string() +
            ", caller supplied " + field.spec().to_string());
    }
}

class Writer {
public:
    explicit Writer(Bytes& out)
        : out_(out)
    {
    }

    void raw(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const std::uint8_t*>(data);
        out_.insert(out_.end(), p, p + n);
    }

    template <typename T>
    void le(T v)
    {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    void symbol(Symbol v, unsigned width)
    {
        for (unsigned i = width; i-- > 0;) {
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

private:
    Bytes& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in)
        : in_(in)
    {
    }

    std::span<const std::uint8_t> take(std::size_t n)
    {
        if (in_.size() - pos_ < n) {
            throw Error(ErrorKind::format, "truncated SRB1 record");
        }
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    template <typename T>
    T le()
    {
        const auto s = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<T>(s[i]) << (8 * i));
        }
        return v;
    }

    Symbol symbol(unsigned width)
    {
        const auto s = take(width);
        Symbol v = 0;
        for (auto b : s) {
            v = (v << 8) | b;
        }
        return v;
    }

    [[nodiscard]] std::size_t remaining() const noexcept { return in_.size() - pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_header(Writer& w, const StateHeader& h)
{
    w.raw(kMagic, sizeof kMagic);
    w.le<std::uint16_t>(h.version);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(h.field.kind));
    w.le<std::uint32_t>(h.field.parameter);
    w.le<std::uint16_t>(h.k);
    w.le<std::uint16_t>(h.alpha);
    w.le<std::uint32_t>(h.gamma);
    w.le<std::uint32_t>(h.generation);
    w.le<std::uint32_t>(h.block_size);
    w.le<std::uint32_t>(h.stripes);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(h.lengths.size()));
    for (auto len : h.lengths) {
        w.le<std::uint32_t>(len);
    }
}

StateHeader read_header(Reader& r)
{
    const auto magic = r.take(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) {
        throw Error(ErrorKind::format, "missing SRB1 magic");
    }
    StateHeader h;
    h.version = r.le<std::uint16_t>();
    if (h.version != kStateFormatVersion) {
        throw Error(ErrorKind::format, "unsupported SRB1 version " + std::to_string(h.version));
    }
    const auto kind = r.le<std::uint8_t>();
    if (kind > 1) {
        throw Error(ErrorKind::format, "unknown field kind " + std::to_string(kind));
    }
    h.field.kind = static_cast<FieldKind>(kind);
    h.field.parameter = r.le<std::uint32_t>();
    try {
        h.field.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::format, std::string("bad field in header: ") + e.what());
    }
    h.k = r.le<std::uint16_t>();
    h.alpha = r.le<std::uint16_t>();
    h.gamma = r.le<std::uint32_t>();
    h.generation = r.le<std::uint32_t>();
    h.block_size = r.le<std::uint32_t>();
    h.stripes = r.le<std::uint32_t>();
    const auto count = r.le<std::uint32_t>();
    if (h.k == 0 || h.k > h.alpha) {
        throw Error(ErrorKind::format, "header has invalid k/alpha");
    }
    if (count != h.params().message_length()) {
        throw Error(ErrorKind::format, "header block count does not equal L");
    }
    if (r.remaining() / 4 < count) {
        throw Error(ErrorKind::format, "truncated SRB1 record");
    }
    h.lengths.resize(count);
    for (auto& len : h.lengths) {
        len = r.le<std::uint32_t>();
        if (len > h.block_size) {
            throw Error(ErrorKind::format, "block length exceeds block size");
        }
    }
    if (h.gamma >= h.field.order()) {
        throw Error(ErrorKind::format, "gamma outside the field");
    }
    return h;
}

std::vector<Symbol> read_symbols(Reader& r, std::size_t count, const FieldSpec& field)
{
    const unsigned width = field.symbol_width();
    if (r.remaining() != count * width) {
        throw Error(ErrorKind::format, "payload size mismatch: expected " +
            std::to_string(count * width) + " bytes, found " + std::to_string(r.remaining()));
    }
    std::vector<Symbol> out(count);
    for (auto& s : out) {
        s = r.symbol(width);
        if (s >= field.order()) {
            throw Error(ErrorKind::format, "symbol outside the field");
        }
    }
    return out;
}

} // namespace

unsigned payload_bytes_per_symbol(const Field& field) noexcept
{
    const unsigned floor_bits = static_cast<unsigned>(std::bit_width(field.order())) - 1;
    return std::max(1u, floor_bits / 8);
}

StripeSet stripe_blocks(const Field& field, std::span<const RawBlock> blocks, std::size_t block_size)
{
    StripeSet out;
    out.block_size = block_size;
    out.payload_bytes = payload_bytes_per_symbol(field);
    out.stripes = (block_size + out.payload_bytes - 1) / out.payload_bytes;
    out.symbols.assign(blocks.size() * out.stripes, 0);
    out.lengths.reserve(blocks.size());
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        const auto& block = blocks[l];
        if (block.size() > block_size) {
            throw Error(ErrorKind::argument, "block " + std::to_string(l) + " has " +
                std::to_string(block.size()) + " bytes, block size is " + std::to_string(block_size));
        }
        out.lengths.push_back(static_cast<std::uint32_t>(block.size()));
        for (std::size_t s = 0; s < out.stripes; ++s) {
            std::uint64_t v = 0;
            for (unsigned b = 0; b < out.payload_bytes; ++b) {
                const std::size_t idx = s * out.payload_bytes + b;
                v = (v << 8) | (idx < block.size() ? block[idx] : 0u);
            }
            if (!field.contains(v)) {
                throw Error(ErrorKind::argument, "byte value " + std::to_string(v) +
                    " in block " + std::to_string(l) + " does not fit " + field.spec().to_string());
            }
            out.symbols[l * out.stripes + s] = static_cast<Symbol>(v);
        }
    }
    return out;
}

std::vector<RawBlock> unstripe_blocks(const StripeSet& stripes)
{
    std::vector<RawBlock> out;
    out.reserve(stripes.block_count());
    for (std::size_t l = 0; l < stripes.block_count(); ++l) {
        RawBlock block(stripes.stripes * stripes.payload_bytes);
        for (std::size_t s = 0; s < stripes.stripes; ++s) {
            const Symbol v = stripes.at(l, s);
            for (unsigned b = 0; b < stripes.payload_bytes; ++b) {
                block[s * stripes.payload_bytes + b] =
                    static_cast<std::uint8_t>(v >> (8 * (stripes.payload_bytes - 1 - b)));
            }
        }
        block.resize(stripes.lengths[l]);
        out.push_back(std::move(block));
    }
    return out;
}

MbrParams StateHeader::params(std::size_t p) const
{
    MbrParams mp;
    mp.k = k;
    mp.alpha = alpha;
    mp.p = p;
    return mp;
}

bool StateHeader::same_code(const StateHeader& other) const
{
    return version == other.version && field == other.field && k == other.k && alpha == other.alpha &&
        generation == other.generation && block_size == other.block_size && stripes == other.stripes &&
        lengths == other.lengths;
}

NodeRow CodedNodeState::stripe_row(std::size_t stripe) const
{
    NodeRow row{header.gamma, std::vector<Symbol>(header.alpha)};
    for (std::size_t j = 0; j < header.alpha; ++j) {
        row.symbols[j] = payload[j * header.stripes + stripe];
    }
    return row;
}

GenerationEncoder::GenerationEncoder(Field field, std::span<const RawBlock> blocks, const MbrParams& params,
    std::uint32_t generation, std::size_t block_size)
    : field_(std::move(field))
    , params_(params)
{
    params_.validate_shape();
    if (blocks.size() != params_.message_length()) {
        throw Error(ErrorKind::argument, "generation needs exactly L = " +
            std::to_string(params_.message_length()) + " blocks, got " + std::to_string(blocks.size()));
    }
    const auto stripes = stripe_blocks(field_, blocks, block_size);
    header_.field = field_.spec();
    header_.k = static_cast<std::uint16_t>(params_.k);
    header_.alpha = static_cast<std::uint16_t>(params_.alpha);
    header_.generation = generation;
    header_.block_size = static_cast<std::uint32_t>(block_size);
    header_.stripes = static_cast<std::uint32_t>(stripes.stripes);
    header_.lengths = stripes.lengths;

    const std::size_t L = params_.message_length();
    std::vector<Symbol> msg(L);
    matrices_.reserve(stripes.stripes);
    for (std::size_t s = 0; s < stripes.stripes; ++s) {
        for (std::size_t l = 0; l < L; ++l) {
            msg[l] = stripes.at(l, s);
        }
        matrices_.push_back(build_message_matrix(field_, msg, params_));
    }
}

CodedNodeState GenerationEncoder::encode(Symbol gamma, std::uint64_t* multiplications) const
{
    CodedNodeState state;
    state.header = header_;
    state.header.gamma = field_.element(gamma);
    const std::size_t Z = header_.stripes;
    state.payload.assign(params_.alpha * Z, 0);
    for (std::size_t s = 0; s < Z; ++s) {
        const auto row = encode_node(field_, matrices_[s], gamma, multiplications);
        for (std::size_t j = 0; j < params_.alpha; ++j) {
            state.payload[j * Z + s] = row.symbols[j];
        }
    }
    return state;
}

CodedNodeState encode_generation(const Field& field, std::span<const RawBlock> blocks, Symbol gamma,
    const MbrParams& params, std::uint32_t generation, std::size_t block_size)
{
    return GenerationEncoder(field, blocks, params, generation, block_size).encode(gamma);
}

RepairShare serve_repair(const Field& field, const CodedNodeState& state, Symbol target_gamma)
{
    require_field(field, state.header);
    if (state.header.gamma == target_gamma) {
        throw Error(ErrorKind::argument, "a node cannot serve a repair share to itself");
    }
    const std::size_t Z = state.header.stripes;
    const std::size_t alpha = state.header.alpha;
    const auto psi = vandermonde_row(field, field.element(target_gamma), alpha);
    RepairShare share{state.header, target_gamma, std::vector<Symbol>(Z, 0)};
    for (std::size_t j = 0; j < alpha; ++j) {
        if (psi[j] == 0) {
            continue;
        }
        for (std::size_t s = 0; s < Z; ++s) {
            share.symbols[s] = field.add(share.symbols[s], field.mul(psi[j], state.payload[j * Z + s]));
        }
    }
    return share;
}

CodedNodeState bootstrap_node(const Field& field, std::span<const RepairShare> shares, Symbol target_gamma,
    std::size_t p)
{
    if (shares.empty()) {
        throw Error(ErrorKind::argument, "bootstrap needs repair shares");
    }
    const StateHeader& ref = shares.front().header;
    require_field(field, ref);
    const MbrParams params = ref.params(p);
    if (shares.size() != params.repair_degree()) {
        throw Error(ErrorKind::argument, "bootstrap needs alpha + 2p = " +
            std::to_string(params.repair_degree()) + " shares, got " + std::to_string(shares.size()));
    }
    for (const auto& s : shares) {
        if (!s.header.same_code(ref)) {
            throw Error(ErrorKind::argument, "repair shares disagree on the code header");
        }
        if (s.target_gamma != target_gamma) {
            throw Error(ErrorKind::argument, "repair share addressed to gamma " +
                std::to_string(s.target_gamma) + ", expected " + std::to_string(target_gamma));
        }
        if (s.symbols.size() != ref.stripes) {
            throw Error(ErrorKind::argument, "repair share length differs from Z");
        }
    }

    CodedNodeState out;
    out.header = ref;
    out.header.gamma = field.element(target_gamma);
    const std::size_t Z = ref.stripes;
    out.payload.assign(params.alpha * Z, 0);
    std::vector<EvalSample> samples(shares.size());
    for (std::size_t s = 0; s < Z; ++s) {
        for (std::size_t h = 0; h < shares.size(); ++h) {
            samples[h] = {shares[h].header.gamma, shares[h].symbols[s]};
        }
        const auto row = secure_repair(field, samples, target_gamma, params);
        for (std::size_t j = 0; j < params.alpha; ++j) {
            out.payload[j * Z + s] = row.symbols[j];
        }
    }
    return out;
}

std::vector<RawBlock> reconstruct_generation(const Field& field, std::span<const CodedNodeState> states,
    std::size_t p)
{
    if (states.empty()) {
        throw Error(ErrorKind::argument, "reconstruction needs node states");
    }
    const StateHeader& ref = states.front().header;
    require_field(field, ref);
    const MbrParams params = ref.params(p);
    for (const auto& st : states) {
        if (!st.header.same_code(ref)) {
            throw Error(ErrorKind::argument, "node states disagree on the code header");
        }
        if (st.payload.size() != params.alpha * ref.stripes) {
            throw Error(ErrorKind::argument, "node state payload has the wrong size");
        }
    }

    StripeSet stripes;
    stripes.block_size = ref.block_size;
    stripes.stripes = ref.stripes;
    stripes.payload_bytes = payload_bytes_per_symbol(field);
    stripes.lengths = ref.lengths;
    const std::size_t L = params.message_length();
    stripes.symbols.assign(L * ref.stripes, 0);

    const Symbol payload_limit = stripes.payload_bytes >= 4 ? ~Symbol{0} : (Symbol{1} << (8 * stripes.payload_bytes)) - 1;
    std::vector<NodeRow> rows(states.size());
    for (std::size_t s = 0; s < ref.stripes; ++s) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            rows[i] = states[i].stripe_row(s);
        }
        const auto msg = secure_reconstruct(field, rows, params);
        for (std::size_t l = 0; l < L; ++l) {
            if (msg[l] > payload_limit) {
                throw Error(ErrorKind::integrity, "recovered symbol does not fit the block byte packing");
            }
            stripes.symbols[l * ref.stripes + s] = msg[l];
        }
    }
    return unstripe_blocks(stripes);
}

std::size_t header_wire_size(std::size_t block_count) noexcept
{
    return 4 + 2 + 1 + 4 + 2 + 2 + 4 + 4 + 4 + 4 + 4 + 4 * block_count;
}

std::size_t state_wire_size(const StateHeader& header) noexcept
{
    return header_wire_size(header.lengths.size()) +
        std::size_t{header.alpha} * header.stripes * header.field.symbol_width();
}

std::size_t share_wire_size(const StateHeader& header) noexcept
{
    return header_wire_size(header.lengths.size()) + 4 +
        std::size_t{header.stripes} * header.field.symbol_width();
}

Bytes serialize_state(const CodedNodeState& state)
{
    const unsigned width = state.header.field.symbol_width();
    Bytes out;
    out.reserve(state_wire_size(state.header));
    Writer w(out);
    write_header(w, state.header);
    for (auto s : state.payload) {
        w.symbol(s, width);
    }
    return out;
}

CodedNodeState parse_state(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    CodedNodeState state;
    state.header = read_header(r);
    state.payload = read_symbols(r, std::size_t{state.header.alpha} * state.header.stripes, state.header.field);
    return state;
}

Bytes serialize_share(const RepairShare& share)
{
    const unsigned width = share.header.field.symbol_width();
    Bytes out;
    out.reserve(share_wire_size(share.header));
    Writer w(out);
    write_header(w, share.header);
    w.le<std::uint32_t>(share.target_gamma);
    for (auto s : share.symbols) {
        w.symbol(s, width);
    }
    return out;
}

RepairShare parse_share(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    RepairShare share;
    share.header = read_header(r);
    share.target_gamma = r.le<std::uint32_t>();
    if (share.target_gamma >= share.header.field.order()) {
        throw Error(ErrorKind::format, "target gamma outside the field");
    }
    share.symbols = read_symbols(r, share.header.stripes, share.header.field);
    return share;
}

Bytes read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::argument, "cannot open " + path.string());
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::argument, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace srb
