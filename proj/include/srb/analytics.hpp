#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace srb::analytics {

enum class Protocol { rapidchain, sef, srb };

const char* to_string(Protocol protocol) noexcept;

/// Failure probability of the initial committee election, 2^-26.36.
double default_bootstrap_failure() noexcept;

struct ProtocolParams {
    // shard and code shape
    std::size_t n_s = 1000;
    std::size_t L = 1065;
    std::size_t alpha = 50;
    std::size_t k = 30;
    std::size_t p = 0;
    // SeF
    double delta = 0.1;
    double rho = 2.0;
    double c = 1.0;
    // network
    std::size_t N = 16000;
    std::size_t m = 16;
    std::size_t T = 0;
    std::uint64_t block_size = 2'000'000;

    void validate() const;
};

/// Inputs of the sharded-ledger throughput bound. alpha is real so the alpha -> 0 limit
/// can be evaluated.
struct ThroughputParams {
    double alpha = 0.0;
    double n = 16000.0;     // total nodes
    double p_frac = 0.0;    // fraction of malicious nodes
    double mu = 1.0;        // ratio of honest blocks
    double tau = 1.0;       // latency factor
    double v = 1.0;         // average transaction size
};

struct ThroughputResult {
    double resiliency = 0.0;     // a_SRB
    double sigma = 0.0;          // SRB bound
    double rc_resiliency = 0.5;  // a_RC
    double rc_sigma = 0.0;       // RapidChain bound at identical inputs
};

struct BootstrapCost {
    double blocks = 0.0;
    double bytes = 0.0;
    /// SRB only: alpha + 2p helpers when p malicious nodes are tolerated.
    double secure_blocks = 0.0;
    double secure_bytes = 0.0;
};

struct EpochSecurity {
    double exact = 0.0;          // unclamped rational value
    std::uint64_t tolerated = 0; // floor, clamped at 0
    bool clamped = false;
};

struct HypergeomTail {
    boost::multiprecision::cpp_int numerator;
    boost::multiprecision::cpp_int denominator;  // C(N, n_S)
    double value = 0.0;
};

enum class EncodingPhase { init, bootstrap };

struct EncodingCost {
    double value = 0.0;
    /// init: the alpha^2 multiplications one node row actually needs per stripe.
    double per_row_actual = 0.0;
    double r = 0.0;
    std::string note;
};

/// c * sqrt(L) * ln^2(L / delta)
double sef_overhead_blocks(std::size_t L, double delta, double c);

double storage_overhead(Protocol protocol, const ProtocolParams& params);
BootstrapCost bootstrap_cost(Protocol protocol, const ProtocolParams& params);
EpochSecurity epoch_security(Protocol protocol, const ProtocolParams& params);

/// P[X >= t_S] for X ~ Hypergeometric(N, T, n_S), exact rational.
HypergeomTail hypergeom_tail_exact(std::uint64_t N, std::uint64_t T, std::uint64_t n_s, std::uint64_t t_s);
double hypergeom_tail(std::uint64_t N, std::uint64_t T, std::uint64_t n_s, std::uint64_t t_s);

/// ((g/r)^r ((1-g)/(1-r))^(1-r))^n_S with g = T/N, r = t_S/n_S. Requires g < r <= 1.
double hoeffding_bound(std::uint64_t N, std::uint64_t T, std::uint64_t n_s, std::uint64_t t_s);

/// p_bootstrap + m G. Not clamped; callers decide how to print values above 1.
double failure_upper_bound(std::size_t m, double g_bound, double p_bootstrap = default_bootstrap_failure());

/// Throws Error(argument, "resiliency exhausted") when a_SRB <= p_frac.
ThroughputResult throughput_factor(const ThroughputParams& params);

EncodingCost encoding_cost(const ProtocolParams& params, EncodingPhase phase);

struct ProtocolMetrics {
    Protocol protocol = Protocol::srb;
    double storage_overhead = 0.0;
    double storage_blocks = 0.0;   // per node
    double storage_bytes = 0.0;
    BootstrapCost bootstrap;
    EpochSecurity security;
    std::optional<double> shard_failure;  // H at t_S, when t_S > 0
    std::optional<double> shard_bound;    // G at t_S, when in the bound regime
    std::optional<double> system_bound;   // U = p_bootstrap + m G
};

struct MetricsReport {
    ProtocolParams params;
    std::vector<ProtocolMetrics> rows;  // RapidChain, SeF, SRB
    EncodingCost srb_init;
    EncodingCost srb_bootstrap;
    std::optional<ThroughputResult> throughput;
    std::string throughput_note;
};

MetricsReport table1_report(const ProtocolParams& params);

/// Comparison table plus key=value records; byte figures use 1 MB = 10^6 bytes.
std::string format_report(const MetricsReport& report);

/// Human units, decimal: "100MB", "2.13GB".
std::string format_bytes(double bytes);

} // namespace srb::analytics
