#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msdmad/bands.hpp"
#include "msdmad/embedding.hpp"
#include "msdmad/error.hpp"
#include "msdmad/features.hpp"
#include "msdmad/protocol.hpp"
#include "msdmad/rng.hpp"
#include "msdmad/text.hpp"

namespace msdmad {

inline std::map<SpectralBand, double> default_band_noise() {
    // Increasing ramp across the filtered bands so bands are informative
    // but unequal; the unfiltered capture sits at the ramp midpoint.
    return {
        {SpectralBand::B650, 0.05}, {SpectralBand::B710, 0.10}, {SpectralBand::B770, 0.15},
        {SpectralBand::B830, 0.20}, {SpectralBand::B890, 0.25}, {SpectralBand::B950, 0.30},
        {SpectralBand::WL, 0.175},
    };
}

struct SynthConfig {
    int n_subjects = 60;
    int dimension = 128;
    std::map<SpectralBand, double> band_noise = default_band_noise();
    double morph_noise = 0.01;
    int trusted_per_subject = 5;
    double train_fraction = 0.6;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_subjects < 4)
            throw ConfigError("n_subjects must be >= 4, got " + std::to_string(n_subjects));
        if (dimension < 2) throw ConfigError("dimension must be >= 2");
        if (trusted_per_subject < 1) throw ConfigError("trusted_per_subject must be >= 1");
        if (morph_noise < 0.0) throw ConfigError("morph_noise must be >= 0");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw ConfigError("train_fraction must lie in (0,1)");
        for (SpectralBand b : kAllBands) {
            const auto it = band_noise.find(b);
            if (it == band_noise.end())
                throw ConfigError("band_noise missing " + std::string(band_name(b)));
            if (it->second < 0.0)
                throw ConfigError("band_noise for " + std::string(band_name(b)) +
                                  " must be >= 0");
        }
    }
};

/// A reference embedding (passport side, visible space): either a genuine
/// subject or a morph of two subjects.
struct ReferenceRecord {
    std::string id;
    Label label = Label::BonaFide;
    std::string subject_id;  // for morphs, the synthetic morph id
    std::optional<std::pair<std::string, std::string>> parents;
    EmbeddingVector embedding;
};

/// A trusted-capture embedding for one (subject, band, sample).
struct TrustedRecord {
    std::string id;
    std::string subject_id;
    SpectralBand band = SpectralBand::WL;
    int sample_index = 0;
    EmbeddingVector embedding;
};

struct SyntheticCorpus {
    SynthConfig config;
    std::vector<std::string> subjects;
    std::vector<ReferenceRecord> references;  // bona fide first, then morphs
    std::vector<TrustedRecord> trusted;
    ProtocolSplit split;

    const TrustedRecord& find_trusted(const std::string& subject, SpectralBand band,
                                      int sample) const {
        for (const auto& t : trusted)
            if (t.subject_id == subject && t.band == band && t.sample_index == sample)
                return t;
        throw ValidationError("no trusted embedding for " + subject + "/" +
                              std::string(band_name(band)) + "/t" + std::to_string(sample));
    }
};

namespace detail {

// Subjects sit on a fixed-latitude circle around a seeded mean direction,
// like real face embeddings occupying a cone: u = cos(a) mu + sin(a) t,
// with t a unit tangent. Keeping the latitude exact makes a morph's pull
// toward the cone axis the dominant, band-independent detection signal.
inline constexpr double kSubjectLatitudeCos = 0.6;

// Mild per-band sensor shift: rotation by this angle in a seeded 2-plane.
inline constexpr double kBandRotationAngle = 0.1;

struct PlaneRotation {
    std::vector<double> a, b;  // orthonormal pair spanning the plane
    double angle = 0.0;

    static PlaneRotation make(Rng rng, std::size_t dim, double angle) {
        PlaneRotation r;
        r.a = normalized(rng.gaussian_vector(dim));
        std::vector<double> g = rng.gaussian_vector(dim);
        const double p = dot(g, r.a);
        for (std::size_t i = 0; i < dim; ++i) g[i] -= p * r.a[i];
        r.b = normalized(std::move(g));
        r.angle = angle;
        return r;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        const double xa = dot(x, a), xb = dot(x, b);
        const double ca = std::cos(angle) - 1.0, sa = std::sin(angle);
        std::vector<double> y = x;
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] += ca * (xa * a[i] + xb * b[i]) + sa * (xa * b[i] - xb * a[i]);
        }
        return y;
    }
};

// Isotropic N(0, scale^2 I) perturbation (scale is the per-coordinate
// standard deviation).
inline std::vector<double> add_scaled_noise(std::vector<double> v, Rng rng, double scale) {
    if (scale <= 0.0) return v;
    for (auto& x : v) x += scale * rng.gaussian();
    return v;
}

}  // namespace detail

inline std::string synth_subject_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", i + 1);
    return buf;
}

inline std::string morph_id(const std::string& a, const std::string& b) {
    return "morph_" + a + "_" + b;
}

/// Desk-scale stand-in for a multispectral morphing dataset, fully
/// reproducible from the seed: one visible reference embedding per
/// subject, per-band trusted embeddings (band rotation of the subject
/// base plus band noise), and morph references as the spherical midpoint
/// of the two parents plus morph noise. Morph pairs are enumerated
/// within each side of a disjoint split.
inline SyntheticCorpus generate_synthetic_corpus(const SynthConfig& config) {
    config.validate();
    const std::size_t dim = static_cast<std::size_t>(config.dimension);
    const Rng root(config.seed);

    SyntheticCorpus corpus;
    corpus.config = config;

    const std::vector<double> axis = normalized(root.derive("cone-axis").gaussian_vector(dim));
    const double lat_cos = detail::kSubjectLatitudeCos;
    const double lat_sin = std::sqrt(1.0 - lat_cos * lat_cos);

    std::map<std::string, std::vector<double>> base;
    for (int i = 0; i < config.n_subjects; ++i) {
        const std::string id = synth_subject_id(i);
        corpus.subjects.push_back(id);
        std::vector<double> g = root.derive("subject").derive(id).gaussian_vector(dim);
        const double p = dot(g, axis);
        for (std::size_t k = 0; k < dim; ++k) g[k] -= p * axis[k];
        const std::vector<double> tangent = normalized(std::move(g));
        std::vector<double> u(dim);
        for (std::size_t k = 0; k < dim; ++k)
            u[k] = lat_cos * axis[k] + lat_sin * tangent[k];
        base[id] = u;

        ReferenceRecord ref;
        ref.id = "ref_" + id;
        ref.label = Label::BonaFide;
        ref.subject_id = id;
        ref.embedding = EmbeddingVector{u, 1.0};
        corpus.references.push_back(std::move(ref));
    }

    corpus.split =
        make_disjoint_split(corpus.subjects, config.train_fraction, root.derive("split").next_u64());

    // Trusted captures per (subject, band, sample).
    std::map<SpectralBand, detail::PlaneRotation> rotation;
    for (SpectralBand band : kAllBands)
        rotation.emplace(band, detail::PlaneRotation::make(
                                   root.derive("band-plane",
                                               static_cast<std::uint64_t>(band_index(band))),
                                   dim, detail::kBandRotationAngle));

    for (const std::string& id : corpus.subjects) {
        for (SpectralBand band : kAllBands) {
            const double sigma = config.band_noise.at(band);
            const std::vector<double> rotated = rotation.at(band).apply(base.at(id));
            for (int j = 0; j < config.trusted_per_subject; ++j) {
                Rng draw = root.derive("trusted").derive(id).derive(
                    "band", static_cast<std::uint64_t>(band_index(band)));
                TrustedRecord t;
                t.id = id + "_" + std::string(band_name(band)) + "_t" + std::to_string(j);
                t.subject_id = id;
                t.band = band;
                t.sample_index = j;
                t.embedding = EmbeddingVector::from_unnormalized(detail::add_scaled_noise(
                    rotated, draw.derive("sample", static_cast<std::uint64_t>(j)), sigma));
                corpus.trusted.push_back(std::move(t));
            }
        }
    }

    // Morph references: all pairs within each split side.
    for (Side side : {Side::Train, Side::Test}) {
        const auto pairs = enumerate_morph_pairs(corpus.split, side, std::nullopt,
                                                 root.derive("pairs").next_u64());
        for (const auto& [a, b] : pairs) {
            std::vector<double> mid = slerp(base.at(a), base.at(b), 0.5);
            Rng draw = root.derive("morph").derive(a).derive(b);
            ReferenceRecord ref;
            ref.id = morph_id(a, b);
            ref.label = Label::Morph;
            ref.subject_id = ref.id;
            ref.parents = {a, b};
            ref.embedding = EmbeddingVector::from_unnormalized(
                detail::add_scaled_noise(std::move(mid), draw, config.morph_noise));
            corpus.references.push_back(std::move(ref));
        }
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Embedding store: one DMF1 record file per embedding plus a CSV index
// and the split.
// ---------------------------------------------------------------------------

inline void save_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "emb");
    save_split(corpus.split, dir / "split.json");

    std::ofstream index(dir / "index.csv", std::ios::binary);
    if (!index) throw IoError("cannot open " + (dir / "index.csv").string());
    index << "file,id,kind,subject_id,band,sample_index,label,parent_a,parent_b\n";

    auto write_embedding = [&](const std::string& id, const EmbeddingVector& e,
                               std::uint8_t band_byte) {
        DmfRecord rec;
        rec.method = DmadMethod::DiffFeature;
        rec.band_byte = band_byte;
        rec.values = e.values;
        const std::string file = "emb/" + id + ".dmf";
        write_feature_file(dir / file, rec);
        return file;
    };

    for (const auto& r : corpus.references) {
        const std::string file = write_embedding(r.id, r.embedding, 0);
        index << file << "," << r.id << ",reference," << r.subject_id << ",,,"
              << label_name(r.label) << "," << (r.parents ? r.parents->first : "") << ","
              << (r.parents ? r.parents->second : "") << "\n";
    }
    for (const auto& t : corpus.trusted) {
        const std::string file = write_embedding(
            t.id, t.embedding, static_cast<std::uint8_t>(band_index(t.band)));
        index << file << "," << t.id << ",trusted," << t.subject_id << ","
              << band_name(t.band) << "," << t.sample_index << ",BonaFide,,\n";
    }
    if (!index) throw IoError("index write failed");

    // Configuration echo so a store is self-describing.
    nlohmann::ordered_json j;
    j["n_subjects"] = corpus.config.n_subjects;
    j["dimension"] = corpus.config.dimension;
    j["morph_noise"] = corpus.config.morph_noise;
    j["trusted_per_subject"] = corpus.config.trusted_per_subject;
    j["train_fraction"] = corpus.config.train_fraction;
    j["seed"] = corpus.config.seed;
    for (SpectralBand b : kAllBands)
        j["band_noise"][std::string(band_name(b))] = corpus.config.band_noise.at(b);
    std::ofstream cfg(dir / "store.json", std::ios::binary);
    cfg << j.dump(2) << "\n";
    if (!cfg) throw IoError("store.json write failed");
}

inline SyntheticCorpus load_corpus(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    SyntheticCorpus corpus;
    corpus.split = load_split(dir / "split.json");

    std::ifstream cfg(dir / "store.json");
    if (!cfg) throw ParseError("missing store.json in " + dir.string());
    try {
        nlohmann::json j;
        cfg >> j;
        corpus.config.n_subjects = j.at("n_subjects").get<int>();
        corpus.config.dimension = j.at("dimension").get<int>();
        corpus.config.morph_noise = j.at("morph_noise").get<double>();
        corpus.config.trusted_per_subject = j.at("trusted_per_subject").get<int>();
        corpus.config.train_fraction = j.at("train_fraction").get<double>();
        corpus.config.seed = j.at("seed").get<std::uint64_t>();
        for (SpectralBand b : kAllBands)
            corpus.config.band_noise[b] =
                j.at("band_noise").at(std::string(band_name(b))).get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad store.json: ") + e.what());
    }

    std::ifstream index(dir / "index.csv");
    if (!index) throw ParseError("missing index.csv in " + dir.string());
    std::string line;
    if (!std::getline(index, line) ||
        line != "file,id,kind,subject_id,band,sample_index,label,parent_a,parent_b")
        throw ParseError("bad index header in " + dir.string());

    std::set<std::string> seen_subjects;
    while (std::getline(index, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 9) throw ParseError("bad index row: " + line);
        const DmfRecord rec = read_feature_file(dir / cols[0]);
        EmbeddingVector emb{rec.values, norm(rec.values)};
        if (cols[2] == "reference") {
            ReferenceRecord r;
            r.id = cols[1];
            r.subject_id = cols[3];
            const auto label = parse_label(cols[6]);
            if (!label) throw ParseError("bad label in index row: " + line);
            r.label = *label;
            if (r.label == Label::Morph) {
                if (cols[7].empty() || cols[8].empty())
                    throw ParseError("morph row missing parents: " + line);
                r.parents = {cols[7], cols[8]};
            } else {
                seen_subjects.insert(r.subject_id);
            }
            r.embedding = std::move(emb);
            corpus.references.push_back(std::move(r));
        } else if (cols[2] == "trusted") {
            TrustedRecord t;
            t.id = cols[1];
            t.subject_id = cols[3];
            const auto band = parse_band(cols[4]);
            if (!band) throw ParseError("bad band in index row: " + line);
            t.band = *band;
            t.sample_index = std::stoi(cols[5]);
            t.embedding = std::move(emb);
            corpus.trusted.push_back(std::move(t));
        } else {
            throw ParseError("unknown record kind in index row: " + line);
        }
    }
    corpus.subjects.assign(seen_subjects.begin(), seen_subjects.end());
    return corpus;
}

}  // namespace msdmad
