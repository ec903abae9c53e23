#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "support.hpp"
#include "witb/cli.hpp"

using namespace witb;
using witb::test::fixture;
using witb::test::read_text;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.status = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("witb-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string scene(const char* name) { return fixture(name).string(); }

}  // namespace

TEST_CASE("infer with defaults") {
    const auto r = run({"infer", "--scene", scene("scenario_a.json")});
    REQUIRE(r.status == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["scenario_id"] == "scenario-a");
    CHECK(doc["mode"] == "full");
    CHECK(doc["config"]["samples"] == 1000);
    CHECK(doc["config"]["seed"] == 0);
    CHECK(doc["config"]["eta"] == 1.0);
    for (const auto& [object, row] : doc["marginals"].items()) {
        double sum = 0.0;
        for (const auto& [b, p] : row.items()) sum += p.get<double>();
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    CHECK(doc["diagnostics"]["hypothesis_count"] == 6);

    // The parsed document sorts keys, so order is checked on the raw text.
    const auto pos = [&](const char* key) { return r.out.find(std::string("\"") + key + "\""); };
    CHECK(pos("scenario_id") < pos("mode"));
    CHECK(pos("mode") < pos("config"));
    CHECK(pos("config") < pos("objects"));
    CHECK(pos("boxes") < pos("marginals"));
    CHECK(pos("marginals") < pos("map_placement"));
    CHECK(pos("map_placement") < pos("posterior_entropy"));
    CHECK(pos("posterior_entropy") < pos("diagnostics"));
}

TEST_CASE("infer is byte-stable") {
    const std::vector<std::string> args{"infer", "--scene", scene("scenario_b.json"), "--seed", "7", "--samples", "2000"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "4"});
    CHECK(run(threaded).out == a.out);
    auto other_seed = args;
    other_seed[4] = "8";
    CHECK(run(other_seed).out != a.out);
}

TEST_CASE("infer in audio mode uses the per-object normalization") {
    const auto r = run({"infer", "--scene", scene("worked_example.json"), "--mode", "audio"});
    REQUIRE(r.status == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["mode"] == "audio-only");
    CHECK(std::abs(doc["marginals"]["a"]["box1"].get<double>() - 0.8 / 1.1) < 1e-11);
    CHECK(doc["posterior_entropy"].is_null());
    CHECK(doc["diagnostics"]["hypothesis_count"].is_null());
}

TEST_CASE("infer writes to -o") {
    TempDir dir("infer");
    const fs::path out = dir.path / "report.json";
    const auto r = run({"infer", "--scene", scene("worked_example.json"), "-o", out.string()});
    CHECK(r.status == 0);
    CHECK(r.out.empty());
    CHECK(json::parse(read_text(out))["scenario_id"] == "worked-example");
}

TEST_CASE("infer exit codes") {
    const auto bad = run({"infer", "--scene", scene("bad_audio_sum.json")});
    CHECK(bad.status == 1);
    CHECK(bad.err.find("bad_audio_sum.json:audio_posterior.rows.box2") != std::string::npos);
    CHECK(run({"infer", "--scene", scene("missing.json")}).status == 1);
    CHECK(run({"infer"}).status == 2);
    CHECK(run({"infer", "--scene", scene("minimal.json"), "--mode", "smell"}).status == 2);
    CHECK(run({"infer", "--scene", scene("minimal.json"), "--eta", "1.5"}).status == 2);
    CHECK(run({"infer", "--scene", scene("minimal.json"), "--samples", "0"}).status == 2);
    CHECK(run({"infer", "--scene", scene("minimal.json"), "--audio-floor", "1"}).status == 2);
    CHECK(run({"frobnicate"}).status == 2);
    CHECK(run({}).status == 2);
    CHECK(run({"--help"}).status == 0);
    CHECK(run({"infer", "--scene", scene("minimal.json"), "--cap", "0"}).status == 1);
    TempDir dir("unwritable");
    const auto r = run({"infer", "--scene", scene("minimal.json"), "-o", (dir.path / "no" / "such" / "dir.json").string()});
    CHECK(r.status == 3);
}

TEST_CASE("unknown scene fields are warnings") {
    TempDir dir("warn");
    json doc = json::parse(read_text(fixture("minimal.json")));
    doc["provenance"] = "hand written";
    const fs::path path = dir.path / "scene.json";
    std::ofstream(path) << doc.dump();
    const auto r = run({"infer", "--scene", path.string()});
    CHECK(r.status == 0);
    CHECK(r.err.find("warning:") != std::string::npos);
    CHECK(r.err.find("provenance") != std::string::npos);
}

TEST_CASE("enumerate") {
    CHECK(run({"enumerate", "--objects", "3", "--boxes", "2"}).out == "6\n");
    CHECK(run({"enumerate", "--objects", "3", "--boxes", "2", "--allow-empty"}).out == "8\n");
    CHECK(run({"enumerate", "--objects", "2", "--boxes", "2", "--list"}).out == "2\n[0,1]\n[1,0]\n");
    const auto big = run({"enumerate", "--objects", "30", "--boxes", "3"});
    CHECK(big.status == 1);
    CHECK(big.err.find("cap") != std::string::npos);
    CHECK(run({"enumerate", "--objects", "200", "--boxes", "3", "--allow-empty"}).status == 1);
    CHECK(run({"enumerate", "--objects", "0", "--boxes", "3"}).status == 2);
}

TEST_CASE("eval against the ratings fixture") {
    TempDir dir("eval");
    const fs::path reports = dir.path / "reports";
    fs::create_directories(reports);
    for (const char* name : {"scenario_a.json", "scenario_b.json", "worked_example.json"}) {
        for (const char* mode : {"audio", "full"}) {
            const auto r = run({"infer", "--scene", scene(name), "--mode", mode, "-o",
                                (reports / (std::string(mode) + "-" + name)).string()});
            REQUIRE(r.status == 0);
        }
    }
    const fs::path points = dir.path / "points.csv";
    const auto r = run({"eval", "--reports", reports.string(), "--human", fixture("ratings.csv").string(),
                        "--points", points.string()});
    REQUIRE(r.status == 0);
    const json doc = json::parse(r.out);
    CHECK(std::abs(doc["modes"]["audio-only"]["r"].get<double>() - 1.0) < 1e-9);
    CHECK(doc["modes"]["full"]["r"].get<double>() < 1.0);
    CHECK(doc["excluded_scenarios"] == json::array({"worked-example"}));
    CHECK(doc["excluded_count"] == 1);
    CHECK(read_text(points).starts_with("mode,scenario_id,participant_id,object,box,human,model\n"));

    const auto none = run({"eval", "--reports", reports.string(), "--human", fixture("ratings.csv").string(),
                           "--exclude-below", "-1"});
    CHECK(json::parse(none.out)["excluded_count"] == 0);

    CHECK(run({"eval", "--reports", reports.string(), "--human", (dir.path / "nope.csv").string()}).status == 2);
    CHECK(run({"eval", "--reports", (dir.path / "nowhere").string(), "--human", fixture("ratings.csv").string()})
              .status == 2);

    const fs::path other = dir.path / "other.csv";
    std::ofstream(other) << "scenario_id,participant_id,object,box,rating\nelsewhere,p1,x,box1,100\n";
    const auto disjoint = run({"eval", "--reports", reports.string(), "--human", other.string()});
    CHECK(disjoint.status == 1);
    CHECK(disjoint.err.find("share no scenario") != std::string::npos);
}

TEST_CASE("oracle report matches infer on a zero-variance scene") {
    const auto a = run({"oracle", "--scene", scene("worked_example.json"), "--samples", "1"});
    const auto b = run({"infer", "--scene", scene("worked_example.json"), "--samples", "1"});
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    const json oa = json::parse(a.out);
    const json ob = json::parse(b.out);
    CHECK(oa["marginals"].dump() == ob["marginals"].dump());
    CHECK(oa["map_placement"] == ob["map_placement"]);

    const auto section = [](const std::string& text) {
        const auto start = text.find("\"marginals\"");
        return text.substr(start, text.find("\"map_placement\"") - start);
    };
    CHECK(section(a.out) == section(b.out));
}

TEST_CASE("oracle refuses noisy scenes") {
    const auto r = run({"oracle", "--scene", scene("scenario_b.json")});
    CHECK(r.status == 1);
    CHECK(r.err.find("std") != std::string::npos);
    CHECK(run({"oracle"}).status == 2);
}

TEST_CASE("oracle generates deterministic scenes") {
    const std::vector<std::string> args{"oracle", "--generate", "--seed", "7", "--objects", "3", "--boxes", "2"};
    const auto a = run(args);
    REQUIRE(a.status == 0);
    CHECK(a.out == run(args).out);
    const ParsedScene s = load_scene(a.out);
    CHECK(s.object_count() == 3);
    CHECK(s.box_count() == 2);

    TempDir dir("gen");
    const fs::path path = dir.path / "gen.json";
    REQUIRE(run({"oracle", "--generate", "--seed", "7", "--objects", "3", "--boxes", "2", "-o", path.string()}).status == 0);
    const auto oracle = run({"oracle", "--scene", path.string()});
    const auto engine = run({"infer", "--scene", path.string(), "--samples", "1"});
    CHECK(oracle.status == 0);
    const json oj = json::parse(oracle.out);
    const json ej = json::parse(engine.out);
    CHECK(oj["marginals"] == ej["marginals"]);
}
