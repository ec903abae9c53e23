#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "json.hpp"
#include "support.hpp"
#include "witb/scene.hpp"

using namespace witb;
using witb::test::fixture;
using witb::test::read_text;
using json = nlohmann::json;

namespace {

std::string minimal_text() { return read_text(fixture("minimal.json")); }

// Loads `doc`, expecting failure, and returns the violations.
std::vector<Violation> violations_of(const json& doc) {
    try {
        load_scene(doc.dump());
    } catch (const SceneError& e) {
        return e.violations();
    }
    FAIL("document unexpectedly loaded");
    return {};
}

bool mentions(const std::vector<Violation>& vs, const std::string& path, const std::string& fragment) {
    for (const auto& v : vs) {
        if (v.path == path && v.message.find(fragment) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("minimal scene loads") {
    const ParsedScene s = load_scene(minimal_text());
    CHECK(s.scenario_id == "minimal");
    CHECK(s.object_count() == 1);
    CHECK(s.box_count() == 1);
    CHECK(s.objects[0].name == "ball");
    CHECK(s.audio.rows.at("box1") == std::vector<double>{1.0});
    CHECK(validate_scene(s).empty());
}

TEST_CASE("audio row summing to 0.8 names the box") {
    try {
        load_scene_file(fixture("bad_audio_sum.json"));
        FAIL("expected SceneError");
    } catch (const SceneError& e) {
        REQUIRE(e.violations().size() == 1);
        const Violation& v = e.violations()[0];
        CHECK(v.path.ends_with(":audio_posterior.rows.box2"));
        CHECK(v.path.starts_with(fixture("bad_audio_sum.json").string()));
        CHECK(v.message.find("box 'box2'") != std::string::npos);
        CHECK(v.message.find("0.8") != std::string::npos);
    }
}

TEST_CASE("scenario B round-trips through serialize") {
    const ParsedScene s = load_scene_file(fixture("scenario_b.json"));
    CHECK(s.object_count() == 3);
    CHECK(s.box_count() == 2);
    const std::string text = serialize_scene(s);
    const ParsedScene again = load_scene(text);
    CHECK(again == s);
    CHECK(serialize_scene(again) == text);
}

TEST_CASE("every fixture round-trips") {
    for (const char* name : {"minimal.json", "worked_example.json", "scenario_a.json", "scenario_b.json"}) {
        CAPTURE(name);
        const ParsedScene s = load_scene_file(fixture(name));
        CHECK(load_scene(serialize_scene(s)) == s);
    }
}

TEST_CASE("awkward doubles survive the round trip") {
    ParsedScene s = load_scene(minimal_text());
    s.objects[0].dims.mean = {0.1, 1.0 / 3.0, 1e-300};
    s.objects[0].dims.std = {0.0, 2.0 / 7.0, 5e-324};
    s.objects[0].rigidity = 0.7000000000000001;
    CHECK(load_scene(serialize_scene(s)) == s);
}

TEST_CASE("validate_scene examples") {
    ParsedScene s = load_scene_file(fixture("scenario_b.json"));
    CHECK(validate_scene(s).empty());

    ParsedScene rigid = s;
    rigid.objects[1].rigidity = 1.5;
    const auto v1 = validate_scene(rigid);
    REQUIRE(v1.size() == 1);
    CHECK(v1[0].path == "objects[1].rigidity");
    CHECK(v1[0].message.find("water bottle") != std::string::npos);

    ParsedScene mug = s;
    mug.audio.labels[2] = "mug";
    const auto v2 = validate_scene(mug);
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].path == "audio_posterior.labels[2]");
    CHECK(v2[0].message.find("mug") != std::string::npos);
}

TEST_CASE("validate_scene reports every violation") {
    ParsedScene s = load_scene_file(fixture("scenario_b.json"));
    s.objects[0].dims.mean[1] = 0.0;
    s.objects[1].dims.std[2] = -1.0;
    s.objects[2].rigidity = 0.0;
    s.boxes[1].id = s.boxes[0].id;
    const auto vs = validate_scene(s);
    CHECK(mentions(vs, "objects[0].dims.mean[1]", ""));
    CHECK(mentions(vs, "objects[1].dims.std[2]", ""));
    CHECK(mentions(vs, "objects[2].rigidity", "coins"));
    CHECK(mentions(vs, "boxes[1].id", "duplicate"));
    CHECK(vs.size() >= 4);
}

TEST_CASE("structural errors carry paths") {
    json doc = json::parse(minimal_text());

    SUBCASE("missing required field") {
        doc["objects"][0].erase("rigidity");
        CHECK(mentions(violations_of(doc), "objects[0].rigidity", "missing"));
    }
    SUBCASE("wrong type") {
        doc["boxes"][0]["dims"]["mean"] = "big";
        CHECK(!violations_of(doc).empty());
        CHECK(violations_of(doc)[0].path.starts_with("boxes[0].dims.mean"));
    }
    SUBCASE("vector of the wrong length") {
        doc["objects"][0]["dims"]["std"] = json::array({0, 0});
        CHECK(violations_of(doc)[0].path.starts_with("objects[0].dims.std"));
    }
    SUBCASE("duplicate object names") {
        doc["objects"].push_back(doc["objects"][0]);
        doc["audio_posterior"]["rows"]["box1"] = json::array({0.5, 0.5});
        doc["audio_posterior"]["labels"].push_back("ball");
        CHECK(mentions(violations_of(doc), "objects[1].name", "duplicate"));
    }
    SUBCASE("non-positive mean") {
        doc["objects"][0]["dims"]["mean"][2] = -3;
        CHECK(mentions(violations_of(doc), "objects[0].dims.mean[2]", ""));
    }
    SUBCASE("row for a box that does not exist") {
        doc["audio_posterior"]["rows"]["box9"] = json::array({1.0});
        CHECK(mentions(violations_of(doc), "audio_posterior.rows.box9", "box9"));
    }
    SUBCASE("box without a row") {
        doc["boxes"].push_back(doc["boxes"][0]);
        doc["boxes"][1]["id"] = "box2";
        CHECK(mentions(violations_of(doc), "audio_posterior.rows", "box2"));
    }
    SUBCASE("negative probability") {
        doc["audio_posterior"]["rows"]["box1"] = json::array({-1.0});
        CHECK(mentions(violations_of(doc), "audio_posterior.rows.box1[0]", ""));
    }
    SUBCASE("malformed text") {
        try {
            load_scene("{\"scenario_id\": ");
            FAIL("expected SceneError");
        } catch (const SceneError& e) {
            CHECK(e.violations()[0].path == "$");
        }
    }
    SUBCASE("empty object list") {
        doc["objects"] = json::array();
        doc["audio_posterior"]["labels"] = json::array();
        doc["audio_posterior"]["rows"]["box1"] = json::array();
        CHECK(mentions(violations_of(doc), "objects", "at least one"));
    }
}

TEST_CASE("row tolerance is 1e-6") {
    json doc = json::parse(read_text(fixture("worked_example.json")));
    doc["audio_posterior"]["rows"]["box1"] = json::array({0.8, 0.2 + 5e-7});
    CHECK_NOTHROW(load_scene(doc.dump()));
    doc["audio_posterior"]["rows"]["box1"] = json::array({0.8, 0.2 + 2e-6});
    CHECK_THROWS_AS(load_scene(doc.dump()), SceneError);
}

TEST_CASE("unknown fields warn without failing") {
    json doc = json::parse(minimal_text());
    doc["source"] = "adapter v2";
    doc["objects"][0]["color"] = "red";
    std::vector<std::string> warnings;
    const ParsedScene s = load_scene(doc.dump(), &warnings);
    CHECK(s == load_scene(minimal_text()));
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0].find("source") != std::string::npos);
    CHECK(warnings[1].find("objects[0].color") != std::string::npos);
}

TEST_CASE("reordering the document permutes the scene and nothing else") {
    const ParsedScene s = load_scene_file(fixture("scenario_a.json"));
    const ParsedScene r = witb::test::permuted(s, {2, 0, 1}, {1, 0});
    CHECK(validate_scene(r).empty());
    const ParsedScene back = load_scene(serialize_scene(r));
    CHECK(back == r);
    CHECK(back.objects[0] == s.objects[2]);
    CHECK(back.boxes[0] == s.boxes[1]);

    const auto a = audio_matrix(s);
    const auto b = audio_matrix(r);
    CHECK(b[0][0] == a[1][2]);
    CHECK(b[1][2] == a[0][1]);
}

TEST_CASE("missing scene file is a path-qualified error") {
    try {
        load_scene_file(fixture("does_not_exist.json"));
        FAIL("expected SceneError");
    } catch (const SceneError& e) {
        CHECK(std::string(e.what()).find("does_not_exist.json") != std::string::npos);
    }
}
