#include <catch2/catch_amalgamated.hpp>

#include "msdmad/manifest.hpp"

using namespace msdmad;

namespace {

// Two bona fide visible samples; the smallest valid manifest shape.
const char* kMinimal = R"({
  "version": 1,
  "samples": [
    {"subject_id": "s01", "session": "Session1", "label": "BonaFide",
     "image_path": "s01/a.png"},
    {"subject_id": "s02", "session": "Session1", "label": "BonaFide",
     "image_path": "s02/a.png"}
  ]
})";

}  // namespace

TEST_CASE("minimal manifest parses and counts", "[manifest]") {
    const DatasetManifest m = parse_manifest(kMinimal);
    CHECK(m.version == 1);
    REQUIRE(m.samples.size() == 2);
    CHECK(m.count(Label::BonaFide) == 2);
    CHECK(m.count(Label::Morph) == 0);
    const auto counts = m.counts();
    CHECK(counts.at({SessionId::Session1, std::nullopt, Label::BonaFide}) == 2);
}

TEST_CASE("morph record without parents is rejected", "[manifest]") {
    const char* text = R"({
      "version": 1,
      "samples": [
        {"subject_id": "s01", "session": "Session1", "label": "BonaFide",
         "image_path": "a.png"},
        {"subject_id": "m", "session": "Session1", "label": "Morph",
         "image_path": "m.png"}
      ]
    })";
    CHECK_THROWS_AS(parse_manifest(text), ValidationError);
    CHECK_THROWS_WITH(parse_manifest(text), Catch::Matchers::ContainsSubstring("m.png"));
}

TEST_CASE("duplicate image_path is rejected", "[manifest]") {
    const char* text = R"({
      "version": 1,
      "samples": [
        {"subject_id": "s01", "session": "Session1", "label": "BonaFide",
         "image_path": "a.png"},
        {"subject_id": "s02", "session": "Session1", "label": "BonaFide",
         "image_path": "a.png"}
      ]
    })";
    CHECK_THROWS_AS(parse_manifest(text), ValidationError);
}

TEST_CASE("band and session must agree", "[manifest]") {
    // Band on a visible session.
    CHECK_THROWS_AS(parse_manifest(R"({
      "version": 1,
      "samples": [{"subject_id": "s01", "session": "Session1", "band": "B650",
                   "label": "BonaFide", "image_path": "a.png"}]
    })"),
                    ValidationError);
    // Multispectral without band.
    CHECK_THROWS_AS(parse_manifest(R"({
      "version": 1,
      "samples": [{"subject_id": "s01", "session": "Multispectral",
                   "label": "BonaFide", "image_path": "a.png"}]
    })"),
                    ValidationError);
}

TEST_CASE("unknown keys are rejected at both levels", "[manifest]") {
    CHECK_THROWS_AS(parse_manifest(R"({"version": 1, "samples": [], "extra": 1})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_manifest(R"({
      "version": 1,
      "samples": [{"subject_id": "s01", "session": "Session1", "label": "BonaFide",
                   "image_path": "a.png", "surprise": true}]
    })"),
                    ValidationError);
}

TEST_CASE("morph parents must have bona fide coverage and be distinct", "[manifest]") {
    CHECK_THROWS_AS(parse_manifest(R"({
      "version": 1,
      "samples": [
        {"subject_id": "s01", "session": "Session1", "label": "BonaFide",
         "image_path": "a.png"},
        {"subject_id": "m", "session": "Session1", "label": "Morph",
         "morph_parents": ["s01", "ghost"], "image_path": "m.png"}
      ]
    })"),
                    ValidationError);
    CHECK_THROWS_AS(parse_manifest(R"({
      "version": 1,
      "samples": [
        {"subject_id": "s01", "session": "Session1", "label": "BonaFide",
         "image_path": "a.png"},
        {"subject_id": "m", "session": "Session1", "label": "Morph",
         "morph_parents": ["s01", "s01"], "image_path": "m.png"}
      ]
    })"),
                    ValidationError);
    // Bona fide with parents is also malformed.
    CHECK_THROWS_AS(parse_manifest(R"({
      "version": 1,
      "samples": [
        {"subject_id": "s01", "session": "Session1", "label": "BonaFide",
         "morph_parents": ["a", "b"], "image_path": "a.png"}
      ]
    })"),
                    ValidationError);
}

TEST_CASE("malformed JSON raises ParseError", "[manifest]") {
    CHECK_THROWS_AS(parse_manifest("{"), ParseError);
    CHECK_THROWS_AS(parse_manifest("[]"), ParseError);
    CHECK_THROWS_AS(parse_manifest(R"({"version": "x", "samples": []})"), ParseError);
    CHECK_THROWS_AS(parse_manifest(R"({"samples": []})"), ParseError);
}

TEST_CASE("canonical serialization round-trips byte-identically", "[manifest]") {
    const char* text = R"({
      "version": 3,
      "samples": [
        {"subject_id": "s02", "session": "Multispectral", "band": "WL",
         "label": "BonaFide", "image_path": "z/b.png"},
        {"subject_id": "s01", "session": "Session2", "label": "BonaFide",
         "image_path": "a.png", "landmarks_path": "a.txt"},
        {"subject_id": "s02", "session": "Session1", "label": "BonaFide",
         "image_path": "b.png"},
        {"subject_id": "m_s01_s02", "session": "Session1", "label": "Morph",
         "morph_parents": ["s01", "s02"], "image_path": "m.png"}
      ]
    })";
    const DatasetManifest m = parse_manifest(text);
    const std::string canonical = serialize_manifest(m);
    const std::string again = serialize_manifest(parse_manifest(canonical));
    CHECK(canonical == again);

    // Canonical order is by image_path.
    CHECK(canonical.find("a.png") < canonical.find("b.png"));
    CHECK(canonical.find("b.png") < canonical.find("m.png"));
    CHECK(canonical.find("m.png") < canonical.find("z/b.png"));
}
