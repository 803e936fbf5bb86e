#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "msdmad/bands.hpp"
#include "msdmad/error.hpp"

#include "json.hpp"

namespace msdmad {

/// One catalogued image. Band-tagged samples belong to the multispectral
/// session; visible samples carry no band. Morph samples name their two
/// contributing subjects.
struct SampleRecord {
    std::string subject_id;
    SessionId session = SessionId::Session1;
    std::optional<SpectralBand> band;
    Label label = Label::BonaFide;
    std::optional<std::pair<std::string, std::string>> morph_parents;
    std::string image_path;
    std::optional<std::string> landmarks_path;
};

struct DatasetManifest {
    int version = 1;
    std::vector<SampleRecord> samples;

    /// Derived tallies per (session, band, label). Not serialized.
    std::map<std::tuple<SessionId, std::optional<SpectralBand>, Label>, std::size_t> counts()
        const {
        std::map<std::tuple<SessionId, std::optional<SpectralBand>, Label>, std::size_t> c;
        for (const auto& s : samples) ++c[{s.session, s.band, s.label}];
        return c;
    }

    std::size_t count(Label label) const {
        std::size_t n = 0;
        for (const auto& s : samples)
            if (s.label == label) ++n;
        return n;
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ValidationError("unknown key '" + item.key() + "' in " + where);
}

}  // namespace detail

/// Checks every manifest invariant; messages name the offending record
/// by its image_path.
inline void validate_manifest(const DatasetManifest& manifest) {
    std::set<std::string> paths;
    std::set<std::string> bona_fide_subjects;
    for (const auto& s : manifest.samples)
        if (s.label == Label::BonaFide) bona_fide_subjects.insert(s.subject_id);

    for (const auto& s : manifest.samples) {
        const std::string where = "sample '" + s.image_path + "'";
        if (s.image_path.empty()) throw ValidationError("sample with empty image_path");
        if (!paths.insert(s.image_path).second)
            throw ValidationError("duplicate image_path in " + where);
        if (s.subject_id.empty()) throw ValidationError("empty subject_id in " + where);

        if (s.label == Label::Morph) {
            if (!s.morph_parents)
                throw ValidationError("morph sample missing morph_parents in " + where);
            if (s.morph_parents->first == s.morph_parents->second)
                throw ValidationError("morph_parents must be distinct in " + where);
        } else if (s.morph_parents) {
            throw ValidationError("bona fide sample carries morph_parents in " + where);
        }

        const bool multispectral = s.session == SessionId::Multispectral;
        if (s.band.has_value() != multispectral)
            throw ValidationError(
                "band must be present exactly for Multispectral sessions in " + where);

        if (s.morph_parents) {
            for (const auto& parent : {s.morph_parents->first, s.morph_parents->second})
                if (!bona_fide_subjects.count(parent))
                    throw ValidationError("morph parent '" + parent +
                                          "' has no bona fide sample (" + where + ")");
        }
    }
}

inline DatasetManifest parse_manifest(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("manifest top level must be an object");
    detail::reject_unknown_keys(j, {"version", "samples"}, "manifest");
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw ParseError("manifest missing integer 'version'");
    if (!j.contains("samples") || !j["samples"].is_array())
        throw ParseError("manifest missing array 'samples'");

    DatasetManifest manifest;
    manifest.version = j["version"].get<int>();

    static const std::set<std::string> kSampleKeys = {
        "subject_id", "session", "band", "label", "morph_parents", "image_path",
        "landmarks_path"};
    for (const auto& sj : j["samples"]) {
        if (!sj.is_object()) throw ParseError("sample entries must be objects");
        detail::reject_unknown_keys(sj, kSampleKeys, "sample");
        SampleRecord rec;
        try {
            rec.subject_id = sj.at("subject_id").get<std::string>();
            rec.image_path = sj.at("image_path").get<std::string>();
            const auto session = parse_session(sj.at("session").get<std::string>());
            if (!session) throw ParseError("unknown session in sample '" + rec.image_path + "'");
            rec.session = *session;
            const auto label = parse_label(sj.at("label").get<std::string>());
            if (!label) throw ParseError("unknown label in sample '" + rec.image_path + "'");
            rec.label = *label;
            if (sj.contains("band")) {
                const auto band = parse_band(sj.at("band").get<std::string>());
                if (!band) throw ParseError("unknown band in sample '" + rec.image_path + "'");
                rec.band = band;
            }
            if (sj.contains("morph_parents")) {
                const auto& mp = sj.at("morph_parents");
                if (!mp.is_array() || mp.size() != 2)
                    throw ParseError("morph_parents must be a 2-element array in sample '" +
                                     rec.image_path + "'");
                rec.morph_parents = {mp[0].get<std::string>(), mp[1].get<std::string>()};
            }
            if (sj.contains("landmarks_path"))
                rec.landmarks_path = sj.at("landmarks_path").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed sample record: ") + e.what());
        }
        manifest.samples.push_back(std::move(rec));
    }

    validate_manifest(manifest);
    return manifest;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open manifest " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text);
}

/// Canonical serialization: samples ordered by image_path, keys in a fixed
/// order, optional keys present only when set. Round-trips byte-identically.
inline std::string serialize_manifest(const DatasetManifest& manifest) {
    nlohmann::ordered_json j;
    j["version"] = manifest.version;
    j["samples"] = nlohmann::ordered_json::array();

    std::vector<const SampleRecord*> ordered;
    ordered.reserve(manifest.samples.size());
    for (const auto& s : manifest.samples) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const SampleRecord* a, const SampleRecord* b) {
                  return a->image_path < b->image_path;
              });

    for (const SampleRecord* s : ordered) {
        nlohmann::ordered_json sj;
        sj["subject_id"] = s->subject_id;
        sj["session"] = std::string(session_name(s->session));
        if (s->band) sj["band"] = std::string(band_name(*s->band));
        sj["label"] = std::string(label_name(s->label));
        if (s->morph_parents)
            sj["morph_parents"] = {s->morph_parents->first, s->morph_parents->second};
        sj["image_path"] = s->image_path;
        if (s->landmarks_path) sj["landmarks_path"] = *s->landmarks_path;
        j["samples"].push_back(std::move(sj));
    }
    return j.dump(2) + "\n";
}

inline void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << serialize_manifest(manifest);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace msdmad
