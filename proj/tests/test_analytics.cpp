#include <doctest.h>

#include <cmath>
#include <random>

#include "srb/analytics.hpp"
#include "srb/error.hpp"

using namespace srb::analytics;
using boost::multiprecision::cpp_int;

namespace {

// Counts every n_S-subset of N nodes (the first T malicious) with at least t_S malicious members.
std::pair<std::uint64_t, std::uint64_t> enumerate_committees(unsigned N, unsigned T, unsigned n_s, unsigned t_s)
{
    std::uint64_t hits = 0;
    std::uint64_t total = 0;
    for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
        if (static_cast<unsigned>(__builtin_popcount(mask)) != n_s) {
            continue;
        }
        ++total;
        const unsigned bad = static_cast<unsigned>(__builtin_popcount(mask & ((1u << T) - 1)));
        hits += bad >= t_s ? 1 : 0;
    }
    return {hits, total};
}

double rel(double a, double b)
{
    return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
}

} // namespace

TEST_SUITE("analytics")
{
    TEST_CASE("storage overhead")
    {
        ProtocolParams p;
        CHECK(storage_overhead(Protocol::srb, p) == doctest::Approx(1000.0 * 50 / 1065));
        CHECK(storage_overhead(Protocol::srb, p) == doctest::Approx(46.95).epsilon(1e-3));
        CHECK(storage_overhead(Protocol::rapidchain, p) == 1000.0);
        CHECK(storage_overhead(Protocol::sef, p) == doctest::Approx(1.1));
        ProtocolParams single;
        single.n_s = 1;
        single.alpha = single.L = single.k = 1;
        CHECK(storage_overhead(Protocol::srb, single) == 1.0);
        ProtocolParams bad;
        bad.L = 0;
        CHECK_THROWS_AS(storage_overhead(Protocol::srb, bad), srb::Error);
    }

    TEST_CASE("bootstrap cost")
    {
        ProtocolParams p;
        const auto srb_cost = bootstrap_cost(Protocol::srb, p);
        CHECK(srb_cost.blocks == 50);
        CHECK(srb_cost.bytes == 100e6);
        const auto rc = bootstrap_cost(Protocol::rapidchain, p);
        CHECK(rc.blocks == 1065);
        CHECK(rc.bytes == 2.13e9);
        const double sef = 1065 + std::sqrt(1065.0) * std::pow(std::log(10650.0), 2);
        CHECK(bootstrap_cost(Protocol::sef, p).blocks == doctest::Approx(sef));
        CHECK(bootstrap_cost(Protocol::sef, p).blocks > 1065);
        p.p = 3;
        CHECK(bootstrap_cost(Protocol::srb, p).blocks == 50);
        CHECK(bootstrap_cost(Protocol::srb, p).secure_blocks == 56);
    }

    TEST_CASE("epoch security")
    {
        ProtocolParams p;
        CHECK(epoch_security(Protocol::srb, p).tolerated == 475);
        CHECK(epoch_security(Protocol::rapidchain, p).tolerated == 500);
        const auto sef = epoch_security(Protocol::sef, p);
        CHECK(sef.clamped);
        CHECK(sef.tolerated == 0);
        CHECK(sef.exact == doctest::Approx(1000 - (1065 + std::sqrt(1065.0) * std::pow(std::log(10650.0), 2)) / 2));
        ProtocolParams tight;
        tight.n_s = tight.alpha = 50;
        CHECK(epoch_security(Protocol::srb, tight).tolerated == 0);
        ProtocolParams odd;
        odd.n_s = 1001;
        CHECK(epoch_security(Protocol::srb, odd).exact == 475.5);
        CHECK(epoch_security(Protocol::srb, odd).tolerated == 475);
    }

    TEST_CASE("hypergeometric tail is exact")
    {
        const auto t = hypergeom_tail_exact(10, 4, 5, 3);
        CHECK(t.numerator == 66);
        CHECK(t.denominator == 252);
        const auto [hits, total] = enumerate_committees(10, 4, 5, 3);
        CHECK(hits == 66);
        CHECK(total == 252);
        CHECK(hypergeom_tail(10, 4, 5, 3) == doctest::Approx(66.0 / 252.0).epsilon(1e-15));
        CHECK(hypergeom_tail(10, 4, 5, 0) == 1.0);
        CHECK(hypergeom_tail(10, 4, 5, 5) == 0.0);
        CHECK_THROWS_AS(hypergeom_tail(10, 11, 5, 3), srb::Error);
        CHECK_THROWS_AS(hypergeom_tail(10, 4, 5, 6), srb::Error);
    }

    TEST_CASE("hypergeometric tail matches enumeration on small instances")
    {
        for (unsigned N = 1; N <= 14; ++N) {
            for (unsigned T = 0; T <= N; T += 2) {
                for (unsigned n = 1; n <= N; n += 3) {
                    for (unsigned t = 0; t <= n; ++t) {
                        const auto [hits, total] = enumerate_committees(N, T, n, t);
                        const auto exact = hypergeom_tail_exact(N, T, n, t);
                        REQUIRE(exact.numerator * cpp_int(total) == cpp_int(hits) * exact.denominator);
                    }
                }
            }
        }
    }

    TEST_CASE("hypergeometric tail at full scale")
    {
        const auto t = hypergeom_tail_exact(16000, 4000, 1000, 475);
        CHECK(t.value > 0.0);
        CHECK(t.value < 1e-40);
        CHECK(t.denominator > cpp_int(1) << 1000);
    }

    TEST_CASE("hypergeometric tail against sampling")
    {
        std::mt19937_64 rng(51);
        const unsigned N = 40;
        const unsigned T = 12;
        const unsigned n = 10;
        const unsigned t = 4;
        std::vector<int> pool(N);
        for (unsigned i = 0; i < N; ++i) {
            pool[i] = i < T ? 1 : 0;
        }
        const int samples = 100000;
        int hits = 0;
        for (int s = 0; s < samples; ++s) {
            int bad = 0;
            for (unsigned i = 0; i < n; ++i) {
                std::uniform_int_distribution<unsigned> pick(i, N - 1);
                std::swap(pool[i], pool[pick(rng)]);
                bad += pool[i];
            }
            hits += bad >= static_cast<int>(t) ? 1 : 0;
        }
        const double h = hypergeom_tail(N, T, n, t);
        const double sigma = std::sqrt(h * (1 - h) / samples);
        CHECK(std::fabs(hits / static_cast<double>(samples) - h) < 4 * sigma);
    }

    TEST_CASE("hoeffding bound")
    {
        const double g = std::pow(std::pow(0.4 / 0.6, 0.6) * std::pow(0.6 / 0.4, 0.4), 5);
        CHECK(hoeffding_bound(10, 4, 5, 3) == doctest::Approx(g).epsilon(1e-12));
        CHECK(hoeffding_bound(10, 4, 5, 3) >= hypergeom_tail(10, 4, 5, 3));
        CHECK(hoeffding_bound(10, 0, 5, 3) == 0.0);
        CHECK(hoeffding_bound(10, 4, 5, 5) == doctest::Approx(std::pow(0.4, 5)).epsilon(1e-12));
        CHECK_THROWS_AS(hoeffding_bound(10, 4, 5, 2), srb::Error);
        CHECK_THROWS_AS(hoeffding_bound(10, 4, 5, 1), srb::Error);
    }

    TEST_CASE("hoeffding bound dominates the exact tail")
    {
        std::mt19937_64 rng(52);
        for (int i = 0; i < 300; ++i) {
            const unsigned N = 2 + rng() % 300;
            const unsigned T = rng() % N;
            const unsigned n = 1 + rng() % N;
            const unsigned lo = static_cast<unsigned>(std::floor(static_cast<double>(T) * n / N)) + 1;
            if (lo > n) {
                continue;
            }
            const unsigned t = lo + rng() % (n - lo + 1);
            REQUIRE(hoeffding_bound(N, T, n, t) >= hypergeom_tail(N, T, n, t) * (1 - 1e-12));
        }
    }

    TEST_CASE("failure upper bound")
    {
        CHECK(failure_upper_bound(7, 0.0) == default_bootstrap_failure());
        CHECK(default_bootstrap_failure() == std::exp2(-26.36));
        CHECK(failure_upper_bound(16, 1e-9) == doctest::Approx(std::exp2(-26.36) + 1.6e-8).epsilon(1e-14));
        CHECK(failure_upper_bound(1, 0.25, 0.0) == 0.25);
        CHECK(failure_upper_bound(16, 0.5) > 1.0);
        CHECK_THROWS_AS(failure_upper_bound(1, 1.5), srb::Error);
    }

    TEST_CASE("throughput factor")
    {
        ThroughputParams t;
        t.alpha = 2;
        const auto r = throughput_factor(t);
        const double a = 0.5 - 2.0 / (2 * std::log(16000.0));
        CHECK(r.resiliency == doctest::Approx(0.39670).epsilon(1e-4));
        CHECK(r.resiliency == doctest::Approx(a));
        CHECK(r.sigma == doctest::Approx(16000 / std::log(16000.0) * (a * a / (2 + a))));
        CHECK(r.sigma == doctest::Approx(108.5).epsilon(1e-3));
        CHECK(r.sigma < r.rc_sigma);
        t.alpha = 0;
        const auto zero = throughput_factor(t);
        CHECK(zero.resiliency == 0.5);
        CHECK(zero.sigma == zero.rc_sigma);
        t.alpha = 50;
        CHECK_THROWS_AS(throughput_factor(t), srb::Error);
        t.alpha = 1;
        t.p_frac = 0.45;
        CHECK_THROWS_AS(throughput_factor(t), srb::Error);
    }

    TEST_CASE("throughput is below the RapidChain factor for every positive alpha")
    {
        std::mt19937_64 rng(53);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int checked = 0;
        while (checked < 2000) {
            ThroughputParams t;
            t.n = 2 + unit(rng) * 1e6;
            t.p_frac = unit(rng) * 0.45;
            t.mu = 0.1 + unit(rng);
            t.tau = 0.1 + unit(rng);
            t.v = 0.1 + unit(rng) * 10;
            const double max_alpha = (0.5 - t.p_frac) * 2 * std::log(t.n);
            t.alpha = unit(rng) * max_alpha;
            if (!(t.alpha > 0) || !(0.5 - t.alpha / (2 * std::log(t.n)) > t.p_frac)) {
                continue;
            }
            const auto r = throughput_factor(t);
            REQUIRE(r.sigma < r.rc_sigma);
            ++checked;
        }
    }

    TEST_CASE("encoding cost")
    {
        ProtocolParams p;
        const auto init = encoding_cost(p, EncodingPhase::init);
        CHECK(init.value == 125000);
        CHECK(init.per_row_actual == 2500);
        const auto boot = encoding_cost(p, EncodingPhase::bootstrap);
        CHECK(boot.r == 50);
        CHECK(boot.value == doctest::Approx(2500 * std::pow(std::log(50.0), 2) * std::log(std::log(50.0))));
        ProtocolParams one;
        one.alpha = one.k = one.L = 1;
        const auto degenerate = encoding_cost(one, EncodingPhase::bootstrap);
        CHECK(degenerate.value == 1);
        CHECK_FALSE(degenerate.note.empty());
    }

    TEST_CASE("table report on the 2MB example")
    {
        const auto rep = table1_report(ProtocolParams{});
        REQUIRE(rep.rows.size() == 3);
        CHECK(rep.rows[0].protocol == Protocol::rapidchain);
        CHECK(rep.rows[0].storage_blocks == 1065);
        CHECK(rep.rows[0].storage_bytes == 2.13e9);
        CHECK(rep.rows[1].storage_bytes == 4e6);
        CHECK(rep.rows[2].storage_blocks == 50);
        CHECK(rep.rows[2].storage_bytes == 100e6);
        CHECK(rep.rows[2].bootstrap.bytes == 100e6);
        const auto text = format_report(rep);
        CHECK(text.find("100MB") != std::string::npos);
        CHECK(text.find("2.13GB") != std::string::npos);
        CHECK(text.find("4MB") != std::string::npos);
        CHECK(text.find("L_from_code 1065") != std::string::npos);
    }

    TEST_CASE("byte formatting")
    {
        CHECK(format_bytes(100e6) == "100MB");
        CHECK(format_bytes(2.13e9) == "2.13GB");
        CHECK(format_bytes(4e6) == "4MB");
        CHECK(format_bytes(512) == "512B");
    }
}
