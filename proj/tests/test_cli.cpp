#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cltrack/cli/app.hpp"
#include "cltrack/cli/manifest.hpp"

using namespace cltrack;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("cltrack-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) { return cli::read_file(path); }

std::size_t lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    TempDir tmp;
    const auto out = tmp / "o";
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"--out", out, "verify", "--suite", "nope"}).code == 2);
    CHECK(invoke({"--out", out, "simulate", "--policy", "lru"}).code == 2);
    CHECK(invoke({"--out", out, "simulate", "--scenario", "nope"}).code == 2);
    CHECK(invoke({"--out", out, "--config", tmp / "missing.json", "simulate"}).code == 2);
    CHECK(invoke({"--out", out, "bench", "--frames", "500"}).code == 2);
    CHECK(invoke({"--out", out, "compare", "--policies", "dlm"}).code == 2);
    CHECK(invoke({"--out", out, "gradcheck", "--ops", "conv3x3"}).code == 2);
    CHECK(invoke({"--out", out, "replay", tmp / "missing.json"}).code == 2);
}

TEST_CASE("malformed config file exits with 2") {
    TempDir tmp;
    std::ofstream(tmp / "bad.json") << R"({"length": 100, "colour": "red"})";
    const auto r = invoke({"--out", tmp / "o", "--config", tmp / "bad.json", "simulate"});
    CHECK(r.code == 2);
    CHECK(r.err.find("colour") != std::string::npos);
}

TEST_CASE("simulate writes reproducible outputs") {
    TempDir tmp;
    std::ofstream(tmp / "scene.json") << R"({"length": 80, "presence": [[0, 29], [45, 79]]})";
    const auto a = invoke({"--out", tmp / "a", "--config", tmp / "scene.json", "--seed", "4", "simulate"});
    const auto b = invoke({"--out", tmp / "b", "--config", tmp / "scene.json", "--seed", "4", "simulate"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    for (const char* f : {"run.jsonl", "run.csv", "summary.csv", "config.json"}) {
        CHECK(slurp(tmp / ("a/" + std::string(f))) == slurp(tmp / ("b/" + std::string(f))));
    }
    CHECK(lines(slurp(tmp / "a/run.csv")) == 81);
    CHECK(lines(slurp(tmp / "a/run.jsonl")) == 80);

    const auto manifest = nlohmann::json::parse(slurp(tmp / "a/manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["engine_version"] == cli::kEngineVersion);
    CHECK(manifest["config_hash"] == cli::fnv1a_hex(slurp(tmp / "a/config.json")));

    const auto rep = invoke({"--out", tmp / "r", "replay", tmp / "a/manifest.json"});
    CHECK(rep.code == 0);
    CHECK(slurp(tmp / "r/run.jsonl") == slurp(tmp / "a/run.jsonl"));
}

TEST_CASE("replay detects changed outputs and configs") {
    TempDir tmp;
    std::ofstream(tmp / "scene.json") << R"({"scenario": "static", "length": 40})";
    REQUIRE(invoke({"--out", tmp / "a", "--config", tmp / "scene.json", "simulate"}).code == 0);

    auto m = nlohmann::json::parse(slurp(tmp / "a/manifest.json"));
    m["outputs"][0]["fnv1a64"] = "0000000000000000";
    std::ofstream(tmp / "tampered.json") << m.dump(2);
    CHECK(invoke({"--out", tmp / "r1", "replay", tmp / "tampered.json"}).code == 1);

    std::ofstream(tmp / "scene.json") << R"({"scenario": "static", "length": 41})";
    CHECK(invoke({"--out", tmp / "r2", "replay", tmp / "a/manifest.json"}).code == 2);
    CHECK(invoke({"--out", tmp / "a", "replay", tmp / "a/manifest.json"}).code == 2);
}

TEST_CASE("timing columns are opt-in") {
    TempDir tmp;
    REQUIRE(invoke({"--out", tmp / "a", "simulate", "--scenario", "static"}).code == 0);
    REQUIRE(invoke({"--out", tmp / "b", "simulate", "--scenario", "static", "--timing"}).code == 0);
    const auto plain = slurp(tmp / "a/run.csv");
    const auto timed = slurp(tmp / "b/run.csv");
    CHECK(plain.find(",\n") != std::string::npos);
    CHECK(lines(plain) == lines(timed));
    const auto m = nlohmann::json::parse(slurp(tmp / "b/manifest.json"));
    bool any_nondeterministic = false;
    for (const auto& o : m["outputs"]) any_nondeterministic |= !o["deterministic"].get<bool>();
    CHECK(any_nondeterministic);
}

TEST_CASE("compare writes one row per policy and seed") {
    TempDir tmp;
    std::ofstream(tmp / "scene.json") << R"({"length": 60})";
    const auto r = invoke({"--out", tmp / "c", "--config", tmp / "scene.json", "compare",
                        "--policies", "vanilla,extended,interval,dlm", "--seeds", "20"});
    REQUIRE(r.code == 0);
    CHECK(lines(slurp(tmp / "c/compare.csv")) == 81);
    CHECK(lines(slurp(tmp / "c/aggregate.csv")) == 5);
    const auto agg = nlohmann::json::parse(slurp(tmp / "c/aggregate.json"));
    CHECK(agg["ranking"].size() == 4);

    REQUIRE(invoke({"--out", tmp / "g", "--config", tmp / "scene.json", "compare", "--policies",
                 "dlm", "--gates", "credible,first", "--seeds", "2"})
                .code == 0);
    CHECK(slurp(tmp / "g/compare.csv").find("dlm/first") != std::string::npos);

    CHECK(invoke({"--out", tmp / "r", "replay", tmp / "c/manifest.json"}).code == 0);
}

TEST_CASE("verify suites and mutations") {
    TempDir tmp;
    auto r = invoke({"--out", tmp / "v", "verify", "--suite", "gate"});
    CHECK(r.code == 0);
    auto report = nlohmann::json::parse(slurp(tmp / "v/verify.json"));
    CHECK(report["suites"].size() == 1);

    r = invoke({"--out", tmp / "all", "verify"});
    CHECK(r.code == 0);
    report = nlohmann::json::parse(slurp(tmp / "all/verify.json"));
    CHECK(report["suites"].size() == 5);

    CHECK(invoke({"--out", tmp / "m1", "verify", "--suite", "gate", "--mutate", "gate-window"}).code == 1);
    CHECK(invoke({"--out", tmp / "m2", "verify", "--suite", "memory", "--mutate", "diversity-argmax"}).code == 1);
    CHECK(invoke({"--out", tmp / "m3", "verify", "--suite", "scan", "--mutate", "scan-decay"}).code == 1);
    CHECK(invoke({"--out", tmp / "m4", "verify", "--mutate", "nope"}).code == 2);
}

TEST_CASE("gradcheck") {
    TempDir tmp;
    auto r = invoke({"--out", tmp / "g", "gradcheck", "--seeds", "3"});
    CHECK(r.code == 0);
    CHECK(lines(slurp(tmp / "g/gradcheck.csv")) == 19);
    CHECK(r.err.find("warning") == std::string::npos);

    r = invoke({"--out", tmp / "w", "gradcheck", "--seeds", "1", "--ops", "layer_norm", "--eps", "1e-2"});
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(r.code == 1);
}

TEST_CASE("bench") {
    TempDir tmp;
    const auto r = invoke({"--out", tmp / "b", "bench", "--frames", "1000", "--policy", "dlm", "--repeats", "1"});
    REQUIRE(r.code == 0);
    const auto b = nlohmann::json::parse(slurp(tmp / "b/bench.json"));
    CHECK(b.contains("machine"));
    const auto m = nlohmann::json::parse(slurp(tmp / "b/manifest.json"));
    CHECK_FALSE(m["outputs"][0]["deterministic"].get<bool>());
}
