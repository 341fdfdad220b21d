// srb: command-line front end for the SRB codec, simulator and metrics.
//
// Exit codes: 0 ok, 2 usage / bad input, 3 decode failure, 4 invariant breach.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srb/analytics.hpp"
#include "srb/block_codec.hpp"
#include "srb/shard_sim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDecode = 3;
constexpr int kExitBreach = 4;

int exit_code(srb::ErrorKind kind)
{
    switch (kind) {
    case srb::ErrorKind::decode_failure:
    case srb::ErrorKind::integrity: return kExitDecode;
    case srb::ErrorKind::underflow: return kExitBreach;
    default: return kExitUsage;
    }
}

srb::Symbol parse_gamma(const srb::Field& field, std::uint64_t value)
{
    if (value >= field.order()) {
        throw srb::Error(srb::ErrorKind::argument,
            "gamma " + std::to_string(value) + " is not an element of " + field.spec().to_string());
    }
    return static_cast<srb::Symbol>(value);
}

std::string describe_bytes(std::size_t bytes)
{
    return std::to_string(bytes) + " bytes (" + srb::analytics::format_bytes(static_cast<double>(bytes)) + ")";
}

struct EncodeOpts {
    std::string blocks_dir;
    std::size_t k = 0;
    std::size_t alpha = 0;
    std::uint64_t gamma = 0;
    std::string field = "gf2^16";
    std::size_t block_size = 0;
    std::uint32_t gen = 0;
    std::string out;
};

int cmd_encode(const EncodeOpts& o)
{
    const srb::Field field(srb::FieldSpec::parse(o.field));
    srb::MbrParams params;
    params.k = o.k;
    params.alpha = o.alpha;
    params.validate_shape();
    const std::size_t L = params.message_length();

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.blocks_dir)) {
        if (entry.is_regular_file()) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.size() != L) {
        throw srb::Error(srb::ErrorKind::argument, "expected exactly L = " + std::to_string(L) + " block files in " +
            o.blocks_dir + ", found " + std::to_string(files.size()));
    }

    std::vector<srb::RawBlock> blocks;
    std::size_t largest = 0;
    for (const auto& f : files) {
        blocks.push_back(srb::read_file(f));
        largest = std::max(largest, blocks.back().size());
    }
    const std::size_t block_size = o.block_size == 0 ? largest : o.block_size;
    const srb::Symbol gamma = parse_gamma(field, o.gamma);

    std::cout << "effective: srb encode --blocks " << o.blocks_dir << " --k " << o.k << " --alpha " << o.alpha
              << " --gamma " << gamma << " --field " << field.spec().to_string() << " --block-size " << block_size
              << " --gen " << o.gen << " --out " << o.out << "\n";

    const auto state = srb::encode_generation(field, blocks, gamma, params, o.gen, block_size);
    const auto bytes = srb::serialize_state(state);
    srb::write_file(o.out, bytes);

    const std::size_t coded_block = state.header.stripes * field.symbol_width();
    std::cout << "L=" << L << " blocks encoded, stripes=" << state.header.stripes << "\n"
              << "stored: " << o.alpha << " coded blocks x " << coded_block << " bytes = "
              << describe_bytes(o.alpha * coded_block) << "\n"
              << "header: " << describe_bytes(srb::header_wire_size(L)) << "\n"
              << "file: " << describe_bytes(bytes.size()) << "\n";
    return 0;
}

int cmd_serve_repair(const std::string& state_path, std::uint64_t target, const std::string& out)
{
    const auto state = srb::parse_state(srb::read_file(state_path));
    const srb::Field field(state.header.field);
    const srb::Symbol gamma = parse_gamma(field, target);
    std::cout << "effective: srb serve-repair --state " << state_path << " --target-gamma " << gamma << " --out "
              << out << "\n";
    const auto share = srb::serve_repair(field, state, gamma);
    const auto bytes = srb::serialize_share(share);
    srb::write_file(out, bytes);
    std::cout << "share from gamma=" << state.header.gamma << " to gamma=" << gamma << ": 1 coded block, "
              << describe_bytes(bytes.size()) << " on the wire\n";
    return 0;
}

int cmd_bootstrap(std::uint64_t target, const std::vector<std::string>& share_paths, std::size_t p,
    const std::string& out)
{
    std::vector<srb::RepairShare> shares;
    std::size_t wire = 0;
    for (const auto& path : share_paths) {
        const auto bytes = srb::read_file(path);
        wire += bytes.size();
        shares.push_back(srb::parse_share(bytes));
    }
    if (shares.empty()) {
        throw srb::Error(srb::ErrorKind::argument, "no share files given");
    }
    const srb::Field field(shares.front().header.field);
    const srb::Symbol gamma = parse_gamma(field, target);

    std::cout << "effective: srb bootstrap --target-gamma " << gamma << " --p " << p << " --out " << out
              << " --shares";
    for (const auto& path : share_paths) {
        std::cout << ' ' << path;
    }
    std::cout << "\n";

    const auto state = srb::bootstrap_node(field, shares, gamma, p);
    srb::write_file(out, srb::serialize_state(state));

    const std::size_t coded_block = state.header.stripes * field.symbol_width();
    std::cout << "downloaded: " << shares.size() << " coded blocks = " << describe_bytes(shares.size() * coded_block)
              << " payload, " << describe_bytes(wire) << " on the wire\n"
              << "full download would be L=" << state.header.lengths.size() << " blocks\n";
    return 0;
}

int cmd_reconstruct(const std::vector<std::string>& state_paths, std::size_t p, const std::string& out_dir)
{
    std::vector<srb::CodedNodeState> states;
    for (const auto& path : state_paths) {
        states.push_back(srb::parse_state(srb::read_file(path)));
    }
    if (states.empty()) {
        throw srb::Error(srb::ErrorKind::argument, "no state files given");
    }
    std::cout << "effective: srb reconstruct --p " << p << " --out-dir " << out_dir << " --states";
    for (const auto& path : state_paths) {
        std::cout << ' ' << path;
    }
    std::cout << "\n";

    const srb::Field field(states.front().header.field);
    const auto blocks = srb::reconstruct_generation(field, states, p);
    fs::create_directories(out_dir);
    const std::size_t digits = std::to_string(blocks.size()).size();
    std::size_t total = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        std::string name = std::to_string(i + 1);
        name.insert(0, digits - name.size(), '0');
        srb::write_file(fs::path(out_dir) / ("block_" + name + ".bin"), blocks[i]);
        total += blocks[i].size();
    }
    std::cout << "recovered " << blocks.size() << " blocks, " << describe_bytes(total) << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::optional<std::uint64_t>& seed, const std::string& out)
{
    srb::sim::SimConfig cfg;
    if (!config_path.empty()) {
        const auto raw = srb::read_file(config_path);
        cfg = srb::sim::SimConfig::parse(std::string(raw.begin(), raw.end()));
    }
    if (seed) {
        cfg.seed = *seed;
    }
    std::cerr << "effective config:\n" << cfg.to_text();
    const auto report = srb::sim::run_simulation(cfg);
    const std::string text = report.to_text();
    if (out.empty()) {
        std::cout << text;
    } else {
        srb::write_file(out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    if (!report.breaches.empty()) {
        std::cerr << "srb: " << report.breaches.size() << " invariant breach(es)\n";
        return kExitBreach;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Secure-repair regenerating-code storage for sharded ledgers"};
    app.require_subcommand(1);

    EncodeOpts enc;
    auto* encode = app.add_subcommand("encode", "encode L block files into one node's coded state");
    encode->add_option("--blocks", enc.blocks_dir, "directory holding exactly L block files")->required();
    encode->add_option("--k", enc.k)->required();
    encode->add_option("--alpha", enc.alpha)->required();
    encode->add_option("--gamma", enc.gamma, "node encoder coefficient")->required();
    encode->add_option("--field", enc.field, "gf<q> or gf2^<m>[:0xPOLY]")->capture_default_str();
    encode->add_option("--block-size", enc.block_size, "bytes; 0 uses the largest input block");
    encode->add_option("--gen", enc.gen, "generation index");
    encode->add_option("--out", enc.out)->required();

    std::string sr_state;
    std::string sr_out;
    std::uint64_t sr_target = 0;
    auto* serve = app.add_subcommand("serve-repair", "compute the repair share a helper sends to a new node");
    serve->add_option("--state", sr_state)->required();
    serve->add_option("--target-gamma", sr_target)->required();
    serve->add_option("--out", sr_out)->required();

    std::uint64_t bs_target = 0;
    std::vector<std::string> bs_shares;
    std::size_t bs_p = 0;
    std::string bs_out;
    auto* boot = app.add_subcommand("bootstrap", "rebuild a node's state from alpha + 2p repair shares");
    boot->add_option("--target-gamma", bs_target)->required();
    boot->add_option("--shares", bs_shares)->required();
    boot->add_option("--p", bs_p, "tolerated malicious helpers");
    boot->add_option("--out", bs_out)->required();

    std::vector<std::string> rc_states;
    std::size_t rc_p = 0;
    std::string rc_out;
    auto* recon = app.add_subcommand("reconstruct", "recover the L original blocks from k + 2p node states");
    recon->add_option("--states", rc_states)->required();
    recon->add_option("--p", rc_p);
    recon->add_option("--out-dir", rc_out)->required();

    std::string sim_config;
    std::optional<std::uint64_t> sim_seed;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "run the sharded storage simulator");
    simulate->add_option("--config", sim_config, "key=value config file, version=1");
    simulate->add_option("--seed", sim_seed);
    simulate->add_option("--out", sim_out, "report file; stdout when omitted");

    srb::analytics::ProtocolParams mp;
    bool worked_example = false;
    auto* metrics = app.add_subcommand("metrics", "storage, bootstrap, security and throughput comparison");
    metrics->add_flag("--paper-example", worked_example, "k=30, alpha=50, n_S=1000, N=16000, m=16, 2MB blocks");
    metrics->add_option("--n-s", mp.n_s)->capture_default_str();
    metrics->add_option("--L", mp.L, "blocks per generation")->capture_default_str();
    metrics->add_option("--alpha", mp.alpha)->capture_default_str();
    metrics->add_option("--k", mp.k)->capture_default_str();
    metrics->add_option("--p", mp.p)->capture_default_str();
    metrics->add_option("--delta", mp.delta)->capture_default_str();
    metrics->add_option("--rho", mp.rho)->capture_default_str();
    metrics->add_option("--c", mp.c)->capture_default_str();
    metrics->add_option("--N", mp.N)->capture_default_str();
    metrics->add_option("--m", mp.m)->capture_default_str();
    metrics->add_option("--T", mp.T)->capture_default_str();
    metrics->add_option("--block-size", mp.block_size)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*encode) {
            return cmd_encode(enc);
        }
        if (*serve) {
            return cmd_serve_repair(sr_state, sr_target, sr_out);
        }
        if (*boot) {
            return cmd_bootstrap(bs_target, bs_shares, bs_p, bs_out);
        }
        if (*recon) {
            return cmd_reconstruct(rc_states, rc_p, rc_out);
        }
        if (*simulate) {
            return cmd_simulate(sim_config, sim_seed, sim_out);
        }
        if (*metrics) {
            if (worked_example) {
                mp = srb::analytics::ProtocolParams{};
            }
            std::cout << srb::analytics::format_report(srb::analytics::table1_report(mp));
            return 0;
        }
    } catch (const srb::Error& e) {
        const int code = exit_code(e.kind());
        std::cerr << "srb: " << e.what() << "\n";
        return code;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "srb: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
