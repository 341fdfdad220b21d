#include "srb/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "srb/error.hpp"

namespace srb::analytics {

namespace mp = boost::multiprecision;

namespace {

mp::cpp_int binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    mp::cpp_int acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc *= n - k + i;
        acc /= i;
    }
    return acc;
}

std::string fmt(const char* format, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

} // namespace

const char* to_string(Protocol protocol) noexcept
{
    switch (protocol) {
    case Protocol::rapidchain: return "RapidChain";
    case Protocol::sef: return "SeF";
    case Protocol::srb: return "SRB";
    }
    return "?";
}

double default_bootstrap_failure() noexcept
{
    return std::exp2(-26.36);
}

void ProtocolParams::validate() const
{
    if (n_s == 0 || alpha == 0 || k == 0 || N == 0 || m == 0) {
        throw Error(ErrorKind::argument, "n_S, alpha, k, N and m must be positive");
    }
    if (L == 0) {
        throw Error(ErrorKind::argument, "L must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw Error(ErrorKind::argument, "delta must lie in (0, 1)");
    }
    if (!(rho > 0.0) || !(c >= 0.0)) {
        throw Error(ErrorKind::argument, "rho must be positive and c non-negative");
    }
    if (T > N) {
        throw Error(ErrorKind::argument, "T exceeds N");
    }
}

double sef_overhead_blocks(std::size_t L, double delta, double c)
{
    const double lg = std::log(static_cast<double>(L) / delta);
    return c * std::sqrt(static_cast<double>(L)) * lg * lg;
}

double storage_overhead(Protocol protocol, const ProtocolParams& params)
{
    params.validate();
    switch (protocol) {
    case Protocol::rapidchain: return static_cast<double>(params.n_s);
    case Protocol::sef: return 1.0 + params.delta;
    case Protocol::srb:
        return static_cast<double>(params.n_s) * static_cast<double>(params.alpha) / static_cast<double>(params.L);
    }
    return 0.0;
}

BootstrapCost bootstrap_cost(Protocol protocol, const ProtocolParams& params)
{
    params.validate();
    const double bs = static_cast<double>(params.block_size);
    BootstrapCost cost;
    switch (protocol) {
    case Protocol::rapidchain:
        cost.blocks = static_cast<double>(params.L);
        break;
    case Protocol::sef:
        cost.blocks = static_cast<double>(params.L) + sef_overhead_blocks(params.L, params.delta, params.c);
        break;
    case Protocol::srb:
        cost.blocks = static_cast<double>(params.alpha);
        cost.secure_blocks = static_cast<double>(params.alpha + 2 * params.p);
        break;
    }
    if (protocol != Protocol::srb) {
        cost.secure_blocks = cost.blocks;
    }
    cost.bytes = cost.blocks * bs;
    cost.secure_bytes = cost.secure_blocks * bs;
    return cost;
}

EpochSecurity epoch_security(Protocol protocol, const ProtocolParams& params)
{
    params.validate();
    const double n_s = static_cast<double>(params.n_s);
    EpochSecurity s;
    switch (protocol) {
    case Protocol::rapidchain:
        s.exact = n_s / 2.0;
        break;
    case Protocol::sef:
        s.exact = n_s - (static_cast<double>(params.L) + sef_overhead_blocks(params.L, params.delta, params.c)) / params.rho;
        break;
    case Protocol::srb:
        s.exact = (n_s - static_cast<double>(params.alpha)) / 2.0;
        break;
    }
    if (s.exact < 0.0) {
        s.clamped = true;
        s.tolerated = 0;
    } else {
        s.tolerated = static_cast<std::uint64_t>(std::floor(s.exact));
    }
    return s;
}

HypergeomTail hypergeom_tail_exact(std::uint64_t N, std::uint64_t T, std::uint64_t n_s, std::uint64_t t_s)
{
    if (T > N || n_s > N || t_s > n_s) {
        throw Error(ErrorKind::argument, "hypergeometric tail needs T <= N, t_S <= n_S <= N");
    }
    HypergeomTail out;
    out.denominator = binomial(N, n_s);
    out.numerator = 0;
    for (std::uint64_t l = t_s; l <= n_s; ++l) {
        if (l > T || n_s - l > N - T) {
            continue;
        }
        out.numerator += binomial(T, l) * binomial(N - T, n_s - l);
    }
    using Float = mp::cpp_bin_float_100;
    out.value = static_cast<double>(Float(out.numerator) / Float(out.denominator));
    return out;
}

double hypergeom_tail(std::uint64_t N, std::uint64_t T, std::uint64_t n_s, std::uint64_t t_s)
{
    return hypergeom_tail_exact(N, T, n_s, t_s).value;
}

double hoeffding_bound(std::uint64_t N, std::uint64_t T, std::uint64_t n_s, std::uint64_t t_s)
{
    if (N == 0 || n_s == 0 || T > N || t_s > n_s) {
        throw Error(ErrorKind::argument, "hoeffding bound needs T <= N and t_S <= n_S, both positive");
    }
    const double g = static_cast<double>(T) / static_cast<double>(N);
    const double r = static_cast<double>(t_s) / static_cast<double>(n_s);
    if (!(r > g)) {
        throw Error(ErrorKind::argument, "bound regime violated: t_S/n_S must exceed T/N");
    }
    const double n = static_cast<double>(n_s);
    if (g == 0.0) {
        return 0.0;
    }
    if (t_s == n_s) {
        return std::pow(g, n);
    }
    const double log_g = n * (r * std::log(g / r) + (1.0 - r) * std::log((1.0 - g) / (1.0 - r)));
    return std::exp(log_g);
}

double failure_upper_bound(std::size_t m, double g_bound, double p_bootstrap)
{
    if (!(g_bound >= 0.0 && g_bound <= 1.0) || !(p_bootstrap >= 0.0 && p_bootstrap <= 1.0)) {
        throw Error(ErrorKind::argument, "probabilities must lie in [0, 1]");
    }
    return p_bootstrap + static_cast<double>(m) * g_bound;
}

namespace {

double throughput_bound(double a, const ThroughputParams& t)
{
    const double x = a - t.p_frac;
    return t.mu * t.tau * (t.n / std::log(t.n)) * (x * x / (2.0 + x)) / t.v;
}

} // namespace

ThroughputResult throughput_factor(const ThroughputParams& params)
{
    if (!(params.n > 1.0) || !(params.v > 0.0)) {
        throw Error(ErrorKind::argument, "throughput needs n > 1 and v > 0");
    }
    if (!(params.p_frac >= 0.0 && params.p_frac < 1.0) || params.alpha < 0.0) {
        throw Error(ErrorKind::argument, "throughput needs p_frac in [0, 1) and alpha >= 0");
    }
    ThroughputResult out;
    out.resiliency = 0.5 - params.alpha / (2.0 * std::log(params.n));
    if (!(out.resiliency - params.p_frac > 0.0)) {
        throw Error(ErrorKind::argument, "resiliency exhausted: a_SRB = " + fmt("%.6g", out.resiliency) +
            " <= p_frac = " + fmt("%.6g", params.p_frac));
    }
    out.sigma = throughput_bound(out.resiliency, params);
    out.rc_sigma = throughput_bound(out.rc_resiliency, params);
    return out;
}

EncodingCost encoding_cost(const ProtocolParams& params, EncodingPhase phase)
{
    EncodingCost cost;
    const double alpha = static_cast<double>(params.alpha);
    if (phase == EncodingPhase::init) {
        cost.value = alpha * alpha * alpha;
        cost.per_row_actual = alpha * alpha;
        cost.note = "field multiplications per node per stripe";
        return cost;
    }
    cost.r = static_cast<double>(params.alpha + 2 * params.p);
    const double r = cost.r;
    if (r <= std::exp(1.0)) {
        cost.value = r * r;
        cost.note = "r <= e: log log r undefined or non-positive, reporting r^2";
        return cost;
    }
    const double lr = std::log(r);
    cost.value = r * r * lr * lr * std::log(lr);
    cost.note = "nominal units r^2 ln^2 r ln ln r, r = alpha + 2p";
    return cost;
}

MetricsReport table1_report(const ProtocolParams& params)
{
    params.validate();
    MetricsReport report;
    report.params = params;
    const double bs = static_cast<double>(params.block_size);
    for (auto protocol : {Protocol::rapidchain, Protocol::sef, Protocol::srb}) {
        ProtocolMetrics row;
        row.protocol = protocol;
        row.storage_overhead = storage_overhead(protocol, params);
        switch (protocol) {
        case Protocol::rapidchain: row.storage_blocks = static_cast<double>(params.L); break;
        case Protocol::sef: row.storage_blocks = params.rho; break;
        case Protocol::srb: row.storage_blocks = static_cast<double>(params.alpha); break;
        }
        row.storage_bytes = row.storage_blocks * bs;
        row.bootstrap = bootstrap_cost(protocol, params);
        row.security = epoch_security(protocol, params);
        const std::uint64_t t_s = row.security.tolerated;
        if (t_s > 0 && t_s <= params.n_s && params.n_s <= params.N) {
            row.shard_failure = hypergeom_tail(params.N, params.T, params.n_s, t_s);
            const double g = static_cast<double>(params.T) / static_cast<double>(params.N);
            if (static_cast<double>(t_s) / static_cast<double>(params.n_s) > g) {
                row.shard_bound = hoeffding_bound(params.N, params.T, params.n_s, t_s);
                row.system_bound = params.m * *row.shard_bound + default_bootstrap_failure();
            }
        }
        report.rows.push_back(row);
    }
    report.srb_init = encoding_cost(params, EncodingPhase::init);
    report.srb_bootstrap = encoding_cost(params, EncodingPhase::bootstrap);

    ThroughputParams tp;
    tp.alpha = static_cast<double>(params.alpha);
    tp.n = static_cast<double>(params.N);
    tp.p_frac = static_cast<double>(params.T) / static_cast<double>(params.N);
    try {
        report.throughput = throughput_factor(tp);
    } catch (const Error& e) {
        report.throughput_note = e.what();
    }
    return report;
}

std::string format_bytes(double bytes)
{
    const char* units[] = {"B", "KB", "MB", "GB", "TB"};
    int u = 0;
    while (bytes >= 1000.0 && u < 4) {
        bytes /= 1000.0;
        ++u;
    }
    return fmt("%.3g", bytes) + units[u];
}

std::string format_report(const MetricsReport& report)
{
    const auto& p = report.params;
    std::ostringstream os;
    os << "# srb metrics v1\n";
    os << "params n_s=" << p.n_s << " L=" << p.L << " k=" << p.k << " alpha=" << p.alpha << " p=" << p.p
       << " delta=" << p.delta << " rho=" << p.rho << " c=" << p.c << " N=" << p.N << " m=" << p.m
       << " T=" << p.T << " block_size=" << p.block_size << "\n";
    os << "L_from_code " << (p.k * p.alpha - p.k * (p.k - 1) / 2) << "\n";

    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-18s %-22s %-26s %-14s\n", "protocol", "storage_overhead",
        "storage_per_node", "bootstrap_cost", "t_S");
    os << line;
    for (const auto& row : report.rows) {
        const std::string storage = fmt("%.10g", row.storage_blocks) + " blk (" + format_bytes(row.storage_bytes) + ")";
        std::string boot = fmt("%.6g", row.bootstrap.blocks) + " blk (" + format_bytes(row.bootstrap.bytes) + ")";
        std::string sec = fmt("%.6g", row.security.exact);
        if (row.security.clamped) {
            sec = "0 (raw " + sec + ")";
        }
        std::snprintf(line, sizeof line, "%-12s %-18s %-22s %-26s %-14s\n", to_string(row.protocol),
            fmt("%.6g", row.storage_overhead).c_str(), storage.c_str(), boot.c_str(), sec.c_str());
        os << line;
    }
    for (const auto& row : report.rows) {
        os << "record protocol=" << to_string(row.protocol) << " storage_overhead=" << fmt("%.17g", row.storage_overhead)
           << " storage_blocks=" << fmt("%.17g", row.storage_blocks) << " storage_bytes=" << fmt("%.17g", row.storage_bytes)
           << " bootstrap_blocks=" << fmt("%.17g", row.bootstrap.blocks)
           << " bootstrap_bytes=" << fmt("%.17g", row.bootstrap.bytes)
           << " secure_bootstrap_blocks=" << fmt("%.17g", row.bootstrap.secure_blocks)
           << " t_s_exact=" << fmt("%.17g", row.security.exact) << " t_s=" << row.security.tolerated
           << " t_s_clamped=" << (row.security.clamped ? 1 : 0);
        if (row.shard_failure) {
            os << " H=" << fmt("%.6e", *row.shard_failure);
        }
        if (row.shard_bound) {
            os << " G=" << fmt("%.6e", *row.shard_bound) << " U=" << fmt("%.6e", *row.system_bound);
        }
        os << "\n";
    }
    os << "encoding init_alpha3=" << fmt("%.17g", report.srb_init.value)
       << " per_row_alpha2=" << fmt("%.17g", report.srb_init.per_row_actual)
       << " bootstrap=" << fmt("%.6g", report.srb_bootstrap.value) << " r=" << fmt("%g", report.srb_bootstrap.r) << "\n";
    if (report.throughput) {
        os << "throughput a_srb=" << fmt("%.6g", report.throughput->resiliency)
           << " sigma_srb=" << fmt("%.6g", report.throughput->sigma)
           << " sigma_rc=" << fmt("%.6g", report.throughput->rc_sigma) << "\n";
    } else {
        os << "throughput n/a (" << report.throughput_note << ")\n";
    }
    os << "# logs are natural; SeF O() constant c=" << p.c << "; 1MB = 10^6 bytes; H sums l >= t_S;"
          " G uses g = T/N; latency tau_SRB ~ tau_RC assumed\n";
    return os.str();
}

} // namespace srb::analytics
