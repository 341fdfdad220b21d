#include "srb/shard_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace srb::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr int kMaxPlacementDraws = 100000;

double ring_distance(double a, double b) noexcept
{
    const double d = std::fabs(a - b);
    return std::min(d, 1.0 - d);
}

std::string hex(std::uint64_t v)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string join(const std::vector<std::size_t>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += std::to_string(values[i]);
    }
    return out;
}

std::string fixed(double v, int digits = 6)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

std::uint64_t Rng::below(std::uint64_t n)
{
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x = next();
    while (x < threshold) {
        x = next();
    }
    return x % n;
}

Rng Rng::fork(std::uint64_t stream)
{
    return Rng(splitmix64(next() ^ splitmix64(stream)));
}

const char* to_string(AdversaryStrategy strategy) noexcept
{
    switch (strategy) {
    case AdversaryStrategy::flip_random_symbols: return "flip_random_symbols";
    case AdversaryStrategy::zero_out: return "zero_out";
    case AdversaryStrategy::consistent_wrong_polynomial: return "consistent_wrong_polynomial";
    }
    return "?";
}

AdversaryStrategy parse_strategy(std::string_view text)
{
    for (auto s : {AdversaryStrategy::flip_random_symbols, AdversaryStrategy::zero_out,
             AdversaryStrategy::consistent_wrong_polynomial}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw Error(ErrorKind::argument, "unknown adversary strategy '" + std::string(text) + "'");
}

RepairShare adversary_corrupt(const Field& field, const RepairShare& share, AdversaryStrategy strategy, Rng& rng,
    std::uint64_t collusion_seed)
{
    RepairShare out = share;
    const std::uint32_t q = field.order();
    switch (strategy) {
    case AdversaryStrategy::flip_random_symbols: {
        auto flip = [&](Symbol v) { return static_cast<Symbol>((v + 1 + rng.below(q - 1)) % q); };
        bool changed = false;
        for (auto& s : out.symbols) {
            if (rng.next() & 1u) {
                s = flip(s);
                changed = true;
            }
        }
        if (!changed && !out.symbols.empty()) {
            auto& s = out.symbols[rng.below(out.symbols.size())];
            s = flip(s);
        }
        break;
    }
    case AdversaryStrategy::zero_out:
        std::fill(out.symbols.begin(), out.symbols.end(), 0);
        break;
    case AdversaryStrategy::consistent_wrong_polynomial: {
        // Every colluder adds psi(helper)^T F psi(target) for one shared fake message matrix F
        // per (generation, stripe), so the corrupted shares are evaluations of one wrong row.
        const MbrParams params = share.header.params();
        std::vector<Symbol> fake(params.message_length());
        for (std::size_t s = 0; s < out.symbols.size(); ++s) {
            Rng local(splitmix64(collusion_seed ^ splitmix64(share.header.generation) ^ splitmix64(s + 0x5157)));
            for (auto& v : fake) {
                v = static_cast<Symbol>(local.below(q));
            }
            const auto f = build_message_matrix(field, fake, params);
            const auto row = encode_node(field, f, share.header.gamma);
            out.symbols[s] = field.add(out.symbols[s], repair_share(field, row, share.target_gamma));
        }
        break;
    }
    }
    return out;
}

std::size_t shard_of(double position, std::size_t shards) noexcept
{
    const double scaled = std::ceil(position * static_cast<double>(shards));
    if (scaled <= 1.0) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(scaled) - 1, shards - 1);
}

std::vector<std::size_t> Overlay::shard_sizes() const
{
    std::vector<std::size_t> sizes(shards, 0);
    for (const auto& [id, pos] : positions) {
        ++sizes[shard_of(pos, shards)];
    }
    return sizes;
}

MembershipDelta cuckoo_join(Overlay& overlay, NodeId joiner, double epsilon, Rng& rng, const PlacementFilter& accept)
{
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw Error(ErrorKind::argument, "cuckoo interval must lie in [0, 1)");
    }
    if (overlay.positions.count(joiner) != 0) {
        throw Error(ErrorKind::argument, "joining node already has a position");
    }
    auto draw = [&](NodeId id) {
        for (int attempt = 0; attempt < kMaxPlacementDraws; ++attempt) {
            const double pos = rng.position();
            if (!accept || accept(id, shard_of(pos, overlay.shards))) {
                return pos;
            }
        }
        throw Error(ErrorKind::argument, "no admissible position for node " + std::to_string(id));
    };

    MembershipDelta delta;
    delta.joiner = joiner;
    const double center = draw(joiner);
    overlay.positions[joiner] = center;
    delta.joiner_shard = shard_of(center, overlay.shards);

    std::vector<NodeId> evicted;
    for (const auto& [id, pos] : overlay.positions) {
        if (id != joiner && ring_distance(pos, center) < epsilon / 2.0) {
            evicted.push_back(id);
        }
    }
    for (NodeId id : evicted) {
        const std::size_t from = overlay.shard(id);
        const double pos = draw(id);
        overlay.positions[id] = pos;
        delta.moved.push_back({id, from, shard_of(pos, overlay.shards)});
    }
    return delta;
}

MbrParams SimConfig::params() const
{
    MbrParams mp;
    mp.k = k;
    mp.alpha = alpha;
    mp.n = shard_size();
    mp.p = p;
    return mp;
}

void SimConfig::validate() const
{
    if (m == 0 || N == 0 || N % m != 0) {
        throw Error(ErrorKind::argument, "N must be a positive multiple of m");
    }
    if (T > N) {
        throw Error(ErrorKind::argument, "T exceeds N");
    }
    const MbrParams mp = params();
    mp.validate_shape();
    if (!(mp.repair_degree() < shard_size())) {
        throw Error(ErrorKind::argument, "alpha + 2p must be below n_S");
    }
    if (mp.reconstruct_degree() > shard_size()) {
        throw Error(ErrorKind::argument, "k + 2p exceeds n_S");
    }
    field.validate();
    if (field.order() < shard_size()) {
        throw Error(ErrorKind::argument, "field too small for n_S distinct coefficients");
    }
    if (block_size == 0) {
        throw Error(ErrorKind::argument, "block_size must be positive");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw Error(ErrorKind::argument, "epsilon must lie in [0, 1)");
    }
    if (cap_malicious && T > m * p) {
        throw Error(ErrorKind::argument, "cannot place T malicious nodes with at most p per shard");
    }
    if (balance_threshold < 0.0) {
        throw Error(ErrorKind::argument, "balance_threshold must be >= 0");
    }
}

std::string SimConfig::to_text() const
{
    std::ostringstream os;
    os << "version=1\n"
       << "N=" << N << "\n"
       << "m=" << m << "\n"
       << "T=" << T << "\n"
       << "k=" << k << "\n"
       << "alpha=" << alpha << "\n"
       << "p=" << p << "\n"
       << "field=" << field.to_string() << "\n"
       << "block_size=" << block_size << "\n"
       << "blocks_per_epoch=" << blocks_per_epoch << "\n"
       << "joins_per_epoch=" << joins_per_epoch << "\n"
       << "leaves_per_epoch=" << leaves_per_epoch << "\n"
       << "epsilon=" << fixed(epsilon, 9) << "\n"
       << "strategy=" << to_string(strategy) << "\n"
       << "cap_malicious=" << (cap_malicious ? 1 : 0) << "\n"
       << "balance_threshold=" << fixed(balance_threshold, 6) << "\n"
       << "seed=" << seed << "\n"
       << "epochs=" << epochs << "\n";
    return os.str();
}

SimConfig SimConfig::parse(std::string_view text)
{
    SimConfig cfg;
    bool saw_version = false;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::format, "config line " + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));

        auto bad = [&]() {
            return Error(ErrorKind::format, "config line " + std::to_string(lineno) + ": bad value for " + key);
        };
        auto as_size = [&]() {
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw bad();
            }
            return v;
        };
        auto as_double = [&]() {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(value, &used);
            } catch (const std::exception&) {
                throw bad();
            }
            if (used != value.size()) {
                throw bad();
            }
            return v;
        };

        if (key == "version") {
            if (as_size() != 1) {
                throw Error(ErrorKind::format, "unsupported config version " + value);
            }
            saw_version = true;
        } else if (key == "N") {
            cfg.N = as_size();
        } else if (key == "m") {
            cfg.m = as_size();
        } else if (key == "T") {
            cfg.T = as_size();
        } else if (key == "k") {
            cfg.k = as_size();
        } else if (key == "alpha") {
            cfg.alpha = as_size();
        } else if (key == "p") {
            cfg.p = as_size();
        } else if (key == "field") {
            try {
                cfg.field = FieldSpec::parse(value);
            } catch (const Error&) {
                throw bad();
            }
        } else if (key == "block_size") {
            cfg.block_size = as_size();
        } else if (key == "blocks_per_epoch") {
            cfg.blocks_per_epoch = as_size();
        } else if (key == "joins_per_epoch") {
            cfg.joins_per_epoch = as_size();
        } else if (key == "leaves_per_epoch") {
            cfg.leaves_per_epoch = as_size();
        } else if (key == "epsilon") {
            cfg.epsilon = as_double();
        } else if (key == "strategy") {
            try {
                cfg.strategy = parse_strategy(value);
            } catch (const Error&) {
                throw bad();
            }
        } else if (key == "cap_malicious") {
            cfg.cap_malicious = as_size() != 0;
        } else if (key == "balance_threshold") {
            cfg.balance_threshold = as_double();
        } else if (key == "seed") {
            cfg.seed = as_size();
        } else if (key == "epochs") {
            cfg.epochs = as_size();
        } else {
            throw Error(ErrorKind::format, "config line " + std::to_string(lineno) + ": unknown key " + key);
        }
    }
    if (!saw_version) {
        throw Error(ErrorKind::format, "config is missing version=1");
    }
    return cfg;
}

std::size_t SimReport::total_failures() const
{
    return static_cast<std::size_t>(std::count_if(bootstraps.begin(), bootstraps.end(),
        [](const BootstrapOutcome& b) { return !b.success; }));
}

std::string SimReport::to_text() const
{
    std::ostringstream os;
    os << "# srb-sim-report v1\n";
    os << "config";
    std::istringstream cfg(config.to_text());
    std::string kv;
    while (std::getline(cfg, kv)) {
        os << ' ' << kv;
    }
    os << "\n";
    for (const auto& e : epochs) {
        os << "epoch=" << e.epoch << " randomness=" << hex(e.randomness) << " active=" << e.active
           << " joins=" << e.joins << " leaves=" << e.leaves << " moved=" << e.moved << " resharded=" << e.resharded
           << " bootstraps=" << e.bootstraps << " bootstrap_failures=" << e.bootstrap_failures
           << " silent_corruptions=" << e.silent_corruptions << " generations=" << e.generations
           << " download_payload_bytes=" << e.download_payload_bytes
           << " download_header_bytes=" << e.download_header_bytes << " storage_min=" << e.storage_min
           << " storage_max=" << e.storage_max << " storage_mean=" << fixed(e.storage_mean, 3)
           << " shard_sizes=" << join(e.shard_sizes) << " malicious=" << join(e.malicious_per_shard)
           << " balance=" << fixed(e.balance_ratio, 6) << "\n";
    }
    for (const auto& b : bootstraps) {
        os << "bootstrap node=" << b.node << " generation=" << b.generation << " malicious_helpers="
           << b.malicious_helpers << " success=" << (b.success ? 1 : 0) << " verified="
           << (b.matches_direct_encoding ? 1 : 0) << " payload_bytes=" << b.payload_bytes
           << " header_bytes=" << b.header_bytes << "\n";
    }

    std::size_t silent = 0;
    std::size_t payload_min = 0;
    std::size_t payload_max = 0;
    bool first = true;
    for (const auto& b : bootstraps) {
        if (b.success && !b.matches_direct_encoding) {
            ++silent;
        }
        payload_min = first ? b.payload_bytes : std::min(payload_min, b.payload_bytes);
        payload_max = first ? b.payload_bytes : std::max(payload_max, b.payload_bytes);
        first = false;
    }
    os << "summary epochs=" << epochs.size() << " generations_per_shard=" << generations_per_shard
       << " bootstraps=" << bootstraps.size() << " failures=" << total_failures() << " silent_corruptions=" << silent
       << " breaches=" << breaches.size() << "\n";

    const auto& last = epochs.empty() ? EpochRecord{} : epochs.back();
    char line[160];
    std::snprintf(line, sizeof line, "%-48s %16s %16s\n", "metric", "measured", "analytic");
    os << line;
    auto row = [&](const char* name, const std::string& measured, const std::string& analytic) {
        std::snprintf(line, sizeof line, "%-48s %16s %16s\n", name, measured.c_str(), analytic.c_str());
        os << line;
    };
    const std::size_t per_state = analytic_storage_per_generation + header_bytes_per_state;
    row("storage_per_node_max_bytes", std::to_string(last.storage_max),
        std::to_string(generations_per_shard * per_state));
    row("storage_per_node_min_bytes", std::to_string(last.storage_min),
        std::to_string(generations_per_shard * per_state));
    row("storage_payload_per_generation_bytes", std::to_string(analytic_storage_per_generation),
        std::to_string(config.alpha * config.block_size));
    row("bootstrap_payload_per_generation_min", std::to_string(payload_min),
        std::to_string(analytic_bootstrap_per_generation));
    row("bootstrap_payload_per_generation_max", std::to_string(payload_max),
        std::to_string(analytic_bootstrap_per_generation));
    row("bootstrap_blocks_p0 (SRB alpha)", "-", std::to_string(config.alpha));
    row("bootstrap_blocks_full_download (RapidChain L)", "-", std::to_string(config.params().message_length()));
    row("storage_overhead (n_S alpha / L)", "-",
        fixed(static_cast<double>(config.shard_size() * config.alpha) /
            static_cast<double>(config.params().message_length())));
    for (const auto& b : breaches) {
        os << "breach " << b << "\n";
    }
    return os.str();
}

Simulator::Simulator(SimConfig config)
    : config_(std::move(config))
    , field_((config_.validate(), config_.field))
    , params_(config_.params())
    , rng_(config_.seed)
{
    collusion_seed_ = rng_.next();
    const std::size_t m = config_.m;
    overlay_.shards = m;
    live_gammas_.resize(m);
    quarantined_gammas_.resize(m);
    pending_.resize(m);
    encoders_.resize(m);

    for (std::size_t i = 0; i < config_.N; ++i) {
        const NodeId id = next_id_++;
        const std::size_t s = i % m;
        double pos = (static_cast<double>(s) + rng_.position()) / static_cast<double>(m);
        if (shard_of(pos, m) != s) {
            pos = (static_cast<double>(s) + 0.5) / static_cast<double>(m);
        }
        overlay_.positions[id] = pos;
        NodeRecord rec;
        rec.id = id;
        rec.shard = s;
        rec.gamma = assign_gamma(s);
        nodes_.emplace(id, std::move(rec));
    }

    std::vector<NodeId> order;
    order.reserve(nodes_.size());
    for (const auto& [id, rec] : nodes_) {
        order.push_back(id);
    }
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng_.below(i)]);
    }
    std::vector<std::size_t> per_shard(m, 0);
    std::size_t placed = 0;
    for (NodeId id : order) {
        if (placed == config_.T) {
            break;
        }
        auto& rec = nodes_.at(id);
        if (config_.cap_malicious && per_shard[rec.shard] >= config_.p) {
            continue;
        }
        rec.honesty = Honesty::malicious;
        ++per_shard[rec.shard];
        ++placed;
    }

    reference_.epoch = 0;
    reference_.randomness = rng_.next();
    for (const auto& [id, rec] : nodes_) {
        reference_.entries.push_back({id, rec.shard, rec.gamma});
    }
}

std::vector<NodeId> Simulator::members(std::size_t shard) const
{
    std::vector<NodeId> out;
    for (const auto& [id, rec] : nodes_) {
        if (rec.shard == shard) {
            out.push_back(id);
        }
    }
    return out;
}

Symbol Simulator::assign_gamma(std::size_t shard)
{
    auto& live = live_gammas_[shard];
    const auto& quarantine = quarantined_gammas_[shard];
    if (live.size() + quarantine.size() >= field_.order()) {
        throw Error(ErrorKind::underflow, "shard " + std::to_string(shard) + " has no free node coefficient");
    }
    for (;;) {
        const auto g = static_cast<Symbol>(rng_.below(field_.order()));
        if (live.count(g) == 0 && quarantine.count(g) == 0) {
            live.insert(g);
            return g;
        }
    }
}

void Simulator::retire_gamma(std::size_t shard, Symbol gamma)
{
    live_gammas_[shard].erase(gamma);
    quarantined_gammas_[shard].insert(gamma);
}

void Simulator::remove_node(NodeId id)
{
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        throw Error(ErrorKind::argument, "unknown node " + std::to_string(id));
    }
    const std::size_t shard = it->second.shard;
    retire_gamma(shard, it->second.gamma);
    nodes_.erase(it);
    overlay_.positions.erase(id);
    const std::size_t size = members(shard).size();
    if (size < params_.repair_degree() + 1) {
        throw Error(ErrorKind::underflow, "shard underflow: shard " + std::to_string(shard) + " has " +
            std::to_string(size) + " nodes, needs alpha + 2p + 1 = " + std::to_string(params_.repair_degree() + 1));
    }
}

void Simulator::enter_shard(NodeId id, std::size_t shard)
{
    auto& rec = nodes_.at(id);
    rec.shard = shard;
    rec.storage.clear();
    rec.gamma = assign_gamma(shard);
}

std::size_t Simulator::malicious_in(std::size_t shard, NodeId except) const
{
    std::size_t count = 0;
    for (const auto& [id, rec] : nodes_) {
        if (id != except && rec.honesty == Honesty::malicious && overlay_.positions.count(id) != 0 &&
            overlay_.shard(id) == shard) {
            ++count;
        }
    }
    return count;
}

void Simulator::set_honesty(NodeId id, Honesty honesty)
{
    nodes_.at(id).honesty = honesty;
}

void Simulator::queue_join()
{
    ++queued_joins_;
}

void Simulator::queue_leave(NodeId id)
{
    queued_leaves_.push_back(id);
}

BootstrapOutcome Simulator::bootstrap(NodeId node, std::uint32_t generation, std::span<const NodeId> helpers)
{
    auto& target = nodes_.at(node);
    const std::size_t shard = target.shard;
    if (generation >= encoders_[shard].size()) {
        throw Error(ErrorKind::argument, "shard has not encoded generation " + std::to_string(generation));
    }

    BootstrapOutcome outcome;
    outcome.node = node;
    outcome.generation = generation;
    std::vector<RepairShare> received;
    received.reserve(helpers.size());
    for (NodeId h : helpers) {
        const auto& helper = nodes_.at(h);
        if (h == node || helper.shard != shard) {
            throw Error(ErrorKind::argument, "helper " + std::to_string(h) + " is not a shard peer");
        }
        const auto stored = helper.storage.find(generation);
        if (stored == helper.storage.end()) {
            throw Error(ErrorKind::argument, "helper " + std::to_string(h) + " lacks the generation");
        }
        RepairShare share = serve_repair(field_, stored->second, target.gamma);
        if (helper.honesty == Honesty::malicious) {
            share = adversary_corrupt(field_, share, config_.strategy, rng_, collusion_seed_);
            ++outcome.malicious_helpers;
        }
        const Bytes wire = serialize_share(share);
        const std::size_t payload = share.symbols.size() * field_.symbol_width();
        outcome.payload_bytes += payload;
        outcome.header_bytes += wire.size() - payload;
        received.push_back(parse_share(wire));
    }

    try {
        auto state = bootstrap_node(field_, received, target.gamma, config_.p);
        outcome.success = true;
        outcome.matches_direct_encoding = state == encoders_[shard][generation]->encode(target.gamma);
        target.storage[generation] = std::move(state);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::decode_failure) {
            throw;
        }
        outcome.success = false;
    }

    ++current_.bootstraps;
    current_.download_payload_bytes += outcome.payload_bytes;
    current_.download_header_bytes += outcome.header_bytes;
    if (!outcome.success) {
        ++current_.bootstrap_failures;
        if (outcome.malicious_helpers <= config_.p) {
            breaches_.push_back("epoch " + std::to_string(epoch_) + ": bootstrap of node " + std::to_string(node) +
                " failed with only " + std::to_string(outcome.malicious_helpers) + " malicious helpers");
        }
    } else if (!outcome.matches_direct_encoding) {
        ++current_.silent_corruptions;
        breaches_.push_back("epoch " + std::to_string(epoch_) + ": silent corruption at node " +
            std::to_string(node) + " generation " + std::to_string(generation));
    }
    bootstraps_.push_back(outcome);
    return outcome;
}

void Simulator::bootstrap_all(NodeId id)
{
    const std::size_t shard = nodes_.at(id).shard;
    for (std::uint32_t g = 0; g < encoders_[shard].size(); ++g) {
        std::vector<NodeId> holders;
        for (const auto& [peer, rec] : nodes_) {
            if (peer != id && rec.shard == shard && rec.storage.count(g) != 0) {
                holders.push_back(peer);
            }
        }
        const std::size_t need = params_.repair_degree();
        if (holders.size() < need) {
            throw Error(ErrorKind::underflow, "shard underflow: shard " + std::to_string(shard) + " has " +
                std::to_string(holders.size()) + " holders of generation " + std::to_string(g) + ", bootstrap needs " +
                std::to_string(need));
        }
        for (std::size_t i = 0; i < need; ++i) {
            std::swap(holders[i], holders[i + rng_.below(holders.size() - i)]);
        }
        holders.resize(need);
        bootstrap(id, g, holders);
    }
}

const ReferenceBlock& Simulator::epoch_reconfigure()
{
    ++epoch_;
    const std::uint64_t randomness = rng_.next();

    for (NodeId id : queued_leaves_) {
        if (nodes_.count(id) != 0) {
            remove_node(id);
            ++current_.leaves;
        }
    }
    queued_leaves_.clear();

    const PlacementFilter cap = [this](NodeId id, std::size_t shard) {
        const auto it = nodes_.find(id);
        if (!config_.cap_malicious || it == nodes_.end() || it->second.honesty != Honesty::malicious) {
            return true;
        }
        return malicious_in(shard, id) < config_.p;
    };

    for (std::size_t j = 0; j < queued_joins_; ++j) {
        const NodeId id = next_id_++;
        NodeRecord rec;
        rec.id = id;
        nodes_.emplace(id, std::move(rec));
        const auto delta = cuckoo_join(overlay_, id, config_.epsilon, rng_, cap);
        enter_shard(id, delta.joiner_shard);
        ++current_.joins;
        current_.moved += delta.moved.size();

        std::vector<NodeId> to_bootstrap{id};
        for (const auto& mv : delta.moved) {
            if (mv.from == mv.to) {
                continue;
            }
            ++current_.resharded;
            auto& rec_moved = nodes_.at(mv.id);
            retire_gamma(mv.from, rec_moved.gamma);
            rec_moved.shard = mv.to;
            const std::size_t left = members(mv.from).size();
            if (left < params_.repair_degree() + 1) {
                throw Error(ErrorKind::underflow, "shard underflow: shard " + std::to_string(mv.from) +
                    " dropped to " + std::to_string(left) + " nodes");
            }
            enter_shard(mv.id, mv.to);
            to_bootstrap.push_back(mv.id);
        }
        for (NodeId b : to_bootstrap) {
            bootstrap_all(b);
        }
    }
    queued_joins_ = 0;

    reference_ = ReferenceBlock{};
    reference_.epoch = epoch_;
    reference_.randomness = randomness;
    for (const auto& [id, rec] : nodes_) {
        reference_.entries.push_back({id, rec.shard, rec.gamma});
    }
    current_.randomness = randomness;
    return reference_;
}

void Simulator::deliver_blocks()
{
    const std::size_t L = params_.message_length();
    const std::uint64_t byte_range = std::min<std::uint64_t>(256, field_.order());
    for (std::size_t s = 0; s < config_.m; ++s) {
        for (std::size_t b = 0; b < config_.blocks_per_epoch; ++b) {
            RawBlock block(1 + rng_.below(config_.block_size));
            for (auto& byte : block) {
                byte = static_cast<std::uint8_t>(rng_.below(byte_range));
            }
            pending_[s].push_back(std::move(block));
            if (pending_[s].size() < L) {
                continue;
            }
            const auto generation = static_cast<std::uint32_t>(encoders_[s].size());
            auto encoder = std::make_unique<GenerationEncoder>(field_, pending_[s], params_, generation,
                config_.block_size);
            for (auto& [id, rec] : nodes_) {
                if (rec.shard == s) {
                    rec.storage[generation] = encoder->encode(rec.gamma);
                }
            }
            encoders_[s].push_back(std::move(encoder));
            // Raw blocks are dropped once coded; retired coefficients become reusable.
            pending_[s].clear();
            quarantined_gammas_[s].clear();
        }
    }
}

EpochRecord Simulator::snapshot() const
{
    EpochRecord rec = current_;
    rec.epoch = epoch_;
    rec.active = nodes_.size();
    rec.shard_sizes.assign(config_.m, 0);
    rec.malicious_per_shard.assign(config_.m, 0);
    bool first = true;
    double total = 0.0;
    for (const auto& [id, node] : nodes_) {
        ++rec.shard_sizes[node.shard];
        if (node.honesty == Honesty::malicious) {
            ++rec.malicious_per_shard[node.shard];
        }
        std::size_t bytes = 0;
        for (const auto& [g, state] : node.storage) {
            bytes += state_wire_size(state.header);
        }
        rec.storage_min = first ? bytes : std::min(rec.storage_min, bytes);
        rec.storage_max = first ? bytes : std::max(rec.storage_max, bytes);
        total += static_cast<double>(bytes);
        first = false;
    }
    rec.storage_mean = nodes_.empty() ? 0.0 : total / static_cast<double>(nodes_.size());
    for (std::size_t s = 0; s < config_.m; ++s) {
        rec.generations += encoders_[s].size();
    }
    const auto [lo, hi] = std::minmax_element(rec.shard_sizes.begin(), rec.shard_sizes.end());
    rec.balance_ratio = *lo == 0 ? 0.0 : static_cast<double>(*hi) / static_cast<double>(*lo);
    return rec;
}

EpochRecord Simulator::run_epoch()
{
    current_ = EpochRecord{};
    for (std::size_t j = 0; j < config_.joins_per_epoch; ++j) {
        queue_join();
    }
    if (config_.leaves_per_epoch > 0) {
        std::vector<NodeId> ids;
        ids.reserve(nodes_.size());
        for (const auto& [id, rec] : nodes_) {
            ids.push_back(id);
        }
        const std::size_t count = std::min(config_.leaves_per_epoch, ids.size());
        for (std::size_t i = 0; i < count; ++i) {
            std::swap(ids[i], ids[i + rng_.below(ids.size() - i)]);
            queue_leave(ids[i]);
        }
    }
    epoch_reconfigure();
    deliver_blocks();
    EpochRecord rec = snapshot();
    if (config_.balance_threshold > 0.0 && (rec.balance_ratio == 0.0 || rec.balance_ratio > config_.balance_threshold)) {
        breaches_.push_back("epoch " + std::to_string(epoch_) + ": shard balance " + fixed(rec.balance_ratio) +
            " exceeds " + fixed(config_.balance_threshold));
    }
    return rec;
}

SimReport Simulator::run()
{
    SimReport report;
    report.config = config_;
    for (std::size_t e = 0; e < config_.epochs; ++e) {
        report.epochs.push_back(run_epoch());
    }
    report.bootstraps = bootstraps_;
    report.breaches = breaches_;
    report.generations_per_shard = encoders_.empty() ? 0 : encoders_[0].size();
    for (const auto& enc : encoders_) {
        report.generations_per_shard = std::min(report.generations_per_shard, enc.size());
    }
    const std::size_t L = params_.message_length();
    const std::size_t payload_bytes = payload_bytes_per_symbol(field_);
    const std::size_t stripes = (config_.block_size + payload_bytes - 1) / payload_bytes;
    const std::size_t coded_block = stripes * field_.symbol_width();
    report.header_bytes_per_state = header_wire_size(L);
    report.share_bytes = header_wire_size(L) + 4 + coded_block;
    report.analytic_storage_per_generation = config_.alpha * coded_block;
    report.analytic_bootstrap_per_generation = params_.repair_degree() * coded_block;
    return report;
}

SimReport run_simulation(const SimConfig& config)
{
    Simulator sim(config);
    return sim.run();
}

} // namespace srb::sim
