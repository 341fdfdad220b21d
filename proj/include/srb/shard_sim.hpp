#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "srb/block_codec.hpp"

namespace srb::sim {

/// Seeded generator with platform-independent derived distributions (the standard
/// library's distributions are implementation-defined, the engine is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : engine_(seed)
    {
    }

    std::uint64_t next() { return engine_(); }
    /// [0, 1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// (0, 1]
    double position() { return 1.0 - uniform01(); }
    /// Unbiased integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    /// Independent stream derived from this generator's seed material.
    Rng fork(std::uint64_t stream);

private:
    std::mt19937_64 engine_;
};

using NodeId = std::uint32_t;

enum class Honesty { honest, malicious };

enum class AdversaryStrategy { flip_random_symbols, zero_out, consistent_wrong_polynomial };

const char* to_string(AdversaryStrategy strategy) noexcept;
AdversaryStrategy parse_strategy(std::string_view text);

/// Corrupts a share the way a malicious helper would. With consistent_wrong_polynomial all
/// helpers sharing `collusion_seed` serve evaluations of the same wrong message matrix, so
/// their shares are mutually consistent.
RepairShare adversary_corrupt(const Field& field, const RepairShare& share, AdversaryStrategy strategy, Rng& rng,
    std::uint64_t collusion_seed = 0);

/// Region index for a position in (0, 1] with m equal-width regions.
std::size_t shard_of(double position, std::size_t shards) noexcept;

/// Positions of all nodes on the (0, 1] ring.
struct Overlay {
    std::size_t shards = 1;
    std::map<NodeId, double> positions;

    [[nodiscard]] std::size_t shard(NodeId id) const { return shard_of(positions.at(id), shards); }
    [[nodiscard]] std::vector<std::size_t> shard_sizes() const;
};

struct Relocation {
    NodeId id = 0;
    std::size_t from = 0;
    std::size_t to = 0;

    friend bool operator==(const Relocation&, const Relocation&) = default;
};

struct MembershipDelta {
    NodeId joiner = 0;
    std::size_t joiner_shard = 0;
    std::vector<Relocation> moved;  // every node re-drawn, including those landing in the same shard

    friend bool operator==(const MembershipDelta&, const MembershipDelta&) = default;
};

/// Decides whether `id` may be placed in `shard`; rejected draws are retried.
using PlacementFilter = std::function<bool(NodeId id, std::size_t shard)>;

/// Places `joiner` uniformly in (0, 1] and re-draws every node whose ring distance to it is
/// below epsilon / 2.
MembershipDelta cuckoo_join(Overlay& overlay, NodeId joiner, double epsilon, Rng& rng,
    const PlacementFilter& accept = {});

struct SimConfig {
    std::size_t N = 200;
    std::size_t m = 4;
    std::size_t T = 0;
    std::size_t k = 5;
    std::size_t alpha = 8;
    std::size_t p = 1;
    FieldSpec field = FieldSpec::gf65536();
    std::size_t block_size = 2048;
    std::size_t blocks_per_epoch = 6;   // per shard
    std::size_t joins_per_epoch = 2;
    std::size_t leaves_per_epoch = 0;
    double epsilon = 0.01;
    AdversaryStrategy strategy = AdversaryStrategy::consistent_wrong_polynomial;
    bool cap_malicious = true;          // keep <= p malicious nodes per shard
    double balance_threshold = 0.0;     // max/min shard size; 0 disables the check
    std::uint64_t seed = 1;
    std::size_t epochs = 10;

    [[nodiscard]] std::size_t shard_size() const noexcept { return m == 0 ? 0 : N / m; }
    [[nodiscard]] MbrParams params() const;
    void validate() const;

    /// Flat key=value text, "version=1" first.
    [[nodiscard]] std::string to_text() const;
    static SimConfig parse(std::string_view text);
};

struct NodeRecord {
    NodeId id = 0;
    std::size_t shard = 0;
    Symbol gamma = 0;
    Honesty honesty = Honesty::honest;
    std::map<std::uint32_t, CodedNodeState> storage;  // by generation
};

struct ReferenceEntry {
    NodeId id = 0;
    std::size_t shard = 0;
    Symbol gamma = 0;

    friend bool operator==(const ReferenceEntry&, const ReferenceEntry&) = default;
};

/// What the reference committee publishes at the start of an epoch.
struct ReferenceBlock {
    std::uint64_t epoch = 0;
    std::uint64_t randomness = 0;
    std::vector<ReferenceEntry> entries;  // sorted by id
};

struct BootstrapOutcome {
    NodeId node = 0;
    std::uint32_t generation = 0;
    std::size_t malicious_helpers = 0;
    bool success = false;
    bool matches_direct_encoding = false;
    std::size_t payload_bytes = 0;  // coded symbols downloaded
    std::size_t header_bytes = 0;   // share headers downloaded
};

struct EpochRecord {
    std::uint64_t epoch = 0;
    std::uint64_t randomness = 0;
    std::size_t active = 0;
    std::size_t joins = 0;
    std::size_t leaves = 0;
    std::size_t moved = 0;
    std::size_t resharded = 0;
    std::size_t bootstraps = 0;
    std::size_t bootstrap_failures = 0;
    std::size_t silent_corruptions = 0;
    std::size_t generations = 0;  // encoded so far, per shard, summed
    std::size_t download_payload_bytes = 0;
    std::size_t download_header_bytes = 0;
    std::size_t storage_min = 0;
    std::size_t storage_max = 0;
    double storage_mean = 0.0;
    std::vector<std::size_t> shard_sizes;
    std::vector<std::size_t> malicious_per_shard;
    double balance_ratio = 0.0;
};

struct SimReport {
    SimConfig config;
    std::vector<EpochRecord> epochs;
    std::vector<BootstrapOutcome> bootstraps;
    std::vector<std::string> breaches;

    std::size_t generations_per_shard = 0;
    std::size_t header_bytes_per_state = 0;
    std::size_t share_bytes = 0;                 // one repair share on the wire
    std::size_t analytic_storage_per_generation = 0;  // alpha * block_size
    std::size_t analytic_bootstrap_per_generation = 0;  // (alpha + 2p) * block_size

    [[nodiscard]] std::size_t total_failures() const;
    [[nodiscard]] std::string to_text() const;
};

class Simulator {
public:
    explicit Simulator(SimConfig config);

    [[nodiscard]] const SimConfig& config() const noexcept { return config_; }
    [[nodiscard]] const Field& field() const noexcept { return field_; }
    [[nodiscard]] const std::map<NodeId, NodeRecord>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const Overlay& overlay() const noexcept { return overlay_; }
    [[nodiscard]] std::vector<NodeId> members(std::size_t shard) const;
    [[nodiscard]] std::size_t generations(std::size_t shard) const { return encoders_[shard].size(); }
    [[nodiscard]] const ReferenceBlock& reference() const noexcept { return reference_; }
    [[nodiscard]] const std::vector<BootstrapOutcome>& bootstraps() const noexcept { return bootstraps_; }

    void queue_join();
    void queue_leave(NodeId id);

    /// Applies queued churn (Cuckoo joins, leaves), bootstraps every node that landed in a
    /// new shard, assigns fresh coefficients and publishes the next reference block.
    /// Throws Error(underflow) when a shard cannot keep alpha + 2p + 1 members.
    const ReferenceBlock& epoch_reconfigure();

    /// Delivers blocks_per_epoch blocks to every shard, encoding each full generation.
    void deliver_blocks();

    EpochRecord run_epoch();

    /// Bootstraps `node` for `generation` of its shard using explicit helpers.
    BootstrapOutcome bootstrap(NodeId node, std::uint32_t generation, std::span<const NodeId> helpers);

    /// Forces honesty; lets tests stage adversarial placements.
    void set_honesty(NodeId id, Honesty honesty);

    /// Must be called with a fresh simulator; runs config.epochs epochs.
    SimReport run();

private:
    Symbol assign_gamma(std::size_t shard);
    void retire_gamma(std::size_t shard, Symbol gamma);
    void remove_node(NodeId id);
    void enter_shard(NodeId id, std::size_t shard);
    void bootstrap_all(NodeId id);
    std::size_t malicious_in(std::size_t shard, NodeId except) const;
    EpochRecord snapshot() const;

    SimConfig config_;
    Field field_;
    MbrParams params_;
    Rng rng_;
    Overlay overlay_;
    std::map<NodeId, NodeRecord> nodes_;
    NodeId next_id_ = 0;
    std::uint64_t epoch_ = 0;
    std::uint64_t collusion_seed_ = 0;
    ReferenceBlock reference_;

    std::vector<std::set<Symbol>> live_gammas_;
    std::vector<std::set<Symbol>> quarantined_gammas_;
    std::vector<std::vector<RawBlock>> pending_;
    // Ground truth per shard and generation; used only to verify bootstraps.
    std::vector<std::vector<std::unique_ptr<GenerationEncoder>>> encoders_;

    std::size_t queued_joins_ = 0;
    std::vector<NodeId> queued_leaves_;
    std::vector<BootstrapOutcome> bootstraps_;
    std::vector<std::string> breaches_;
    EpochRecord current_;
};

SimReport run_simulation(const SimConfig& config);

} // namespace srb::sim
