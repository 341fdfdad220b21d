#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "srb/block_codec.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

class Workdir {
public:
    explicit Workdir(const std::string& name)
        : path_(fs::temp_directory_path() / ("srb_cli_" + name))
    {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~Workdir() { fs::remove_all(path_); }
    Workdir(const Workdir&) = delete;
    Workdir& operator=(const Workdir&) = delete;

    [[nodiscard]] const fs::path& path() const { return path_; }
    [[nodiscard]] std::string operator/(const std::string& name) const { return (path_ / name).string(); }

    Run srb(const std::string& args) const
    {
        const auto log = path_ / "last.log";
        const std::string cmd = std::string(SRB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        r.out = ss.str();
        return r;
    }

private:
    fs::path path_;
};

void write_blocks(const fs::path& dir, const std::vector<srb::RawBlock>& blocks)
{
    fs::create_directories(dir);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "b%03zu.bin", i);
        srb::write_file(dir / name, blocks[i]);
    }
}

std::vector<srb::RawBlock> example_blocks()
{
    std::vector<srb::RawBlock> blocks;
    for (std::uint8_t v : {3, 1, 4, 1, 5, 9, 2, 6, 5}) {
        blocks.push_back({v});
    }
    return blocks;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("encode the 9-block example")
    {
        Workdir w("encode");
        write_blocks(w.path() / "blocks", example_blocks());
        const auto r = w.srb("encode --blocks " + (w / "blocks") + " --k 3 --alpha 4 --gamma 1 --field gf13 --out " +
            (w / "n1.srb"));
        REQUIRE(r.code == 0);
        CHECK(r.out.find("effective: srb encode") != std::string::npos);
        const auto state = srb::parse_state(srb::read_file(w / "n1.srb"));
        CHECK(state.header.alpha == 4);
        CHECK(state.payload.size() == 4);
        CHECK(state == srb::encode_generation(srb::Field(srb::FieldSpec::prime(13)), example_blocks(), 1, [] {
            srb::MbrParams mp;
            mp.k = 3;
            mp.alpha = 4;
            return mp;
        }(), 0, 1));

        const auto again = w.srb("encode --blocks " + (w / "blocks") +
            " --k 3 --alpha 4 --gamma 1 --field gf13 --out " + (w / "n1b.srb"));
        REQUIRE(again.code == 0);
        CHECK(srb::read_file(w / "n1.srb") == srb::read_file(w / "n1b.srb"));
    }

    TEST_CASE("encode with the wrong file count")
    {
        Workdir w("arity");
        fs::create_directories(w.path() / "empty");
        const auto r = w.srb("encode --blocks " + (w / "empty") + " --k 1 --alpha 1 --gamma 1 --out " + (w / "x"));
        CHECK(r.code == 2);
        CHECK(r.out.find("L = 1") != std::string::npos);
    }

    TEST_CASE("usage errors exit 2")
    {
        Workdir w("usage");
        CHECK(w.srb("").code == 2);
        CHECK(w.srb("frobnicate").code == 2);
        CHECK(w.srb("encode --k 3").code == 2);
        CHECK(w.srb("--help").code == 0);
    }

    TEST_CASE("serve, bootstrap and reconstruct through files")
    {
        Workdir w("roundtrip");
        std::mt19937_64 rng(61);
        std::vector<srb::RawBlock> blocks(9);
        for (auto& b : blocks) {
            b.resize(rng() % 300);
            for (auto& v : b) {
                v = static_cast<std::uint8_t>(rng());
            }
        }
        write_blocks(w.path() / "blocks", blocks);
        for (int g = 1; g <= 6; ++g) {
            REQUIRE(w.srb("encode --blocks " + (w / "blocks") + " --k 3 --alpha 4 --block-size 300 --gamma " +
                          std::to_string(g) + " --out " + (w / ("n" + std::to_string(g) + ".srb")))
                        .code == 0);
        }

        // node 6 from nodes 2..5 at p = 0
        std::string shares;
        for (int g = 2; g <= 5; ++g) {
            const std::string share = w / ("s" + std::to_string(g) + ".share");
            REQUIRE(w.srb("serve-repair --state " + (w / ("n" + std::to_string(g) + ".srb")) +
                          " --target-gamma 100 --out " + share)
                        .code == 0);
            shares += " " + share;
        }
        REQUIRE(w.srb("encode --blocks " + (w / "blocks") + " --k 3 --alpha 4 --block-size 300 --gamma 100 --out " +
                      (w / "direct.srb"))
                    .code == 0);
        auto r = w.srb("bootstrap --target-gamma 100 --p 0 --out " + (w / "boot.srb") + " --shares" + shares);
        REQUIRE(r.code == 0);
        CHECK(r.out.find("downloaded: 4 coded blocks") != std::string::npos);
        CHECK(srb::read_file(w / "boot.srb") == srb::read_file(w / "direct.srb"));

        // p = 1 with one corrupted share
        const std::string extra = w / "s1.share";
        REQUIRE(w.srb("serve-repair --state " + (w / "n1.srb") + " --target-gamma 100 --out " + extra).code == 0);
        REQUIRE(w.srb("serve-repair --state " + (w / "n6.srb") + " --target-gamma 100 --out " + (w / "s6.share"))
                    .code == 0);
        auto share_bytes = srb::read_file(w / "s3.share");
        share_bytes[share_bytes.size() - 1] ^= 0x5A;
        srb::write_file(w / "s3.share", share_bytes);
        const std::string six = " " + extra + shares + " " + (w / "s6.share");
        r = w.srb("bootstrap --target-gamma 100 --p 1 --out " + (w / "boot1.srb") + " --shares" + six);
        REQUIRE(r.code == 0);
        CHECK(srb::read_file(w / "boot1.srb") == srb::read_file(w / "direct.srb"));

        // p + 1 corrupted in the same stripe
        share_bytes = srb::read_file(w / "s4.share");
        share_bytes[share_bytes.size() - 1] ^= 0x33;
        srb::write_file(w / "s4.share", share_bytes);
        r = w.srb("bootstrap --target-gamma 100 --p 1 --out " + (w / "boot2.srb") + " --shares" + six);
        CHECK(r.code == 3);
        CHECK(r.out.find("repair failed") != std::string::npos);

        // header mismatch: a share addressed to another node
        REQUIRE(w.srb("serve-repair --state " + (w / "n1.srb") + " --target-gamma 101 --out " + (w / "odd.share"))
                    .code == 0);
        r = w.srb("bootstrap --target-gamma 100 --p 0 --out " + (w / "boot3.srb") + " --shares " + (w / "odd.share") +
            " " + (w / "s2.share") + " " + (w / "s5.share") + " " + (w / "s6.share"));
        CHECK(r.code == 2);

        // reconstruct from 3 honest states
        r = w.srb("reconstruct --p 0 --out-dir " + (w / "out") + " --states " + (w / "n1.srb") + " " + (w / "n4.srb") +
            " " + (w / "boot.srb"));
        REQUIRE(r.code == 0);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            CHECK(srb::read_file(w.path() / "out" / ("block_" + std::to_string(i + 1) + ".bin")) == blocks[i]);
        }
    }

    TEST_CASE("metrics for the 2MB example")
    {
        Workdir w("metrics");
        const auto r = w.srb("metrics --paper-example");
        REQUIRE(r.code == 0);
        CHECK(r.out.find("50 blk (100MB)") != std::string::npos);
        CHECK(r.out.find("1065 blk (2.13GB)") != std::string::npos);
        CHECK(r.out.find("2 blk (4MB)") != std::string::npos);
    }

    TEST_CASE("simulate is reproducible")
    {
        Workdir w("simulate");
        {
            std::ofstream cfg(w / "sim.cfg");
            cfg << "version=1\nN=48\nm=2\nk=3\nalpha=4\np=1\nT=2\nblock_size=32\nblocks_per_epoch=9\nepochs=2\n";
        }
        REQUIRE(w.srb("simulate --config " + (w / "sim.cfg") + " --seed 7 --out " + (w / "a.txt")).code == 0);
        REQUIRE(w.srb("simulate --config " + (w / "sim.cfg") + " --seed 7 --out " + (w / "b.txt")).code == 0);
        CHECK(srb::read_file(w / "a.txt") == srb::read_file(w / "b.txt"));
        {
            std::ofstream cfg(w / "bad.cfg");
            cfg << "version=1\nN=3\n";
        }
        CHECK(w.srb("simulate --config " + (w / "bad.cfg")).code == 2);
    }

    TEST_CASE("simulate exits 4 on an invariant breach")
    {
        Workdir w("breach");
        {
            std::ofstream cfg(w / "sim.cfg");
            // Uncapped adversary with p = 0: any malicious helper breaks a bootstrap.
            cfg << "version=1\nN=48\nm=2\nk=3\nalpha=4\np=0\nT=24\ncap_malicious=0\nblock_size=16\n"
                   "blocks_per_epoch=9\njoins_per_epoch=3\nepsilon=0.2\nepochs=3\nstrategy=zero_out\n";
        }
        CHECK(w.srb("simulate --config " + (w / "sim.cfg") + " --out " + (w / "r.txt")).code == 4);
    }
}
