#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "msdmad/classifier.hpp"
#include "msdmad/config.hpp"
#include "msdmad/features.hpp"
#include "msdmad/fusion.hpp"
#include "msdmad/manifest.hpp"
#include "msdmad/metrics.hpp"
#include "msdmad/morph.hpp"
#include "msdmad/protocol.hpp"
#include "msdmad/synthetic.hpp"

namespace msdmad {

/// One (reference, trusted capture) comparison. Scores for the same trial
/// across all 7 bands are fused into the final decision.
struct Trial {
    std::string reference_id;
    std::string trusted_subject;
    int sample_index = 0;
    Label label = Label::BonaFide;
};

inline std::string make_trusted_id(const std::string& subject, SpectralBand band, int sample) {
    return subject + "_" + std::string(band_name(band)) + "_t" + std::to_string(sample);
}

// ---------------------------------------------------------------------------
// Embedding sources. The pipeline only needs embeddings per
// (entity, provider slot); slot 0 is the difference-feature provider and
// slots 1..6 are the six networks of the hierarchical method.
// ---------------------------------------------------------------------------

class EmbeddingSource {
public:
    virtual ~EmbeddingSource() = default;
    virtual int dimension() const = 0;
    virtual const ProtocolSplit& split() const = 0;
    virtual std::vector<Trial> trials(Side side) const = 0;
    virtual EmbeddingVector reference_embedding(const std::string& reference_id,
                                                int slot) const = 0;
    virtual EmbeddingVector trusted_embedding(const std::string& subject, SpectralBand band,
                                              int sample, int slot) const = 0;
};

namespace detail {

// How a provider "sees" a stored embedding: a mild seeded plane rotation
// plus a small offset, re-normalized. Distinct networks embed the same
// faces with highly correlated but not identical geometry; keeping the
// views near-identity preserves that correlation.
inline constexpr double kViewRotationAngle = 0.15;
inline constexpr double kViewOffsetNorm = 0.10;

struct ProviderView {
    PlaneRotation rotation;
    std::vector<double> offset;

    static ProviderView make(const ProviderDescriptor& provider, int dimension) {
        provider.validate();
        if (provider.dimension != dimension)
            throw ConfigError("provider '" + provider.name + "' has dimension " +
                              std::to_string(provider.dimension) + ", store has " +
                              std::to_string(dimension));
        const Rng root(provider.seed.value_or(0));
        ProviderView v;
        v.rotation = PlaneRotation::make(root.derive("view-rot"),
                                         static_cast<std::size_t>(dimension),
                                         kViewRotationAngle);
        v.offset = normalized(root.derive("view-offset").gaussian_vector(
            static_cast<std::size_t>(dimension)));
        for (auto& x : v.offset) x *= kViewOffsetNorm;
        return v;
    }

    EmbeddingVector apply(const EmbeddingVector& e) const {
        auto v = rotation.apply(e.values);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += offset[i];
        return EmbeddingVector::from_unnormalized(std::move(v));
    }
};

}  // namespace detail

/// Serves embeddings out of a synthetic corpus store. Slot 0 returns the
/// stored embedding; network slots apply per-provider views.
class StoreEmbeddingSource : public EmbeddingSource {
public:
    StoreEmbeddingSource(SyntheticCorpus corpus, const PipelineConfig& cfg)
        : corpus_(std::move(corpus)) {
        for (const auto& name : cfg.slerp_providers)
            views_.push_back(
                detail::ProviderView::make(cfg.providers.at(name), corpus_.config.dimension));
        for (const auto& r : corpus_.references) refs_[r.id] = &r;
        for (const auto& t : corpus_.trusted)
            trusted_[t.subject_id][band_index(t.band)][t.sample_index] = &t.embedding;
    }

    int dimension() const override { return corpus_.config.dimension; }
    const ProtocolSplit& split() const override { return corpus_.split; }

    std::vector<Trial> trials(Side side) const override {
        std::vector<Trial> out;
        const auto& subjects = side == Side::Train ? corpus_.split.train_subjects
                                                   : corpus_.split.test_subjects;
        for (const auto& s : subjects)
            for (int j = 0; j < corpus_.config.trusted_per_subject; ++j)
                out.push_back({"ref_" + s, s, j, Label::BonaFide});
        for (const auto& r : corpus_.references) {
            if (r.label != Label::Morph) continue;
            const bool in_side = side == Side::Train
                                     ? corpus_.split.in_train(r.parents->first)
                                     : corpus_.split.in_test(r.parents->first);
            if (!in_side) continue;
            for (const auto& parent : {r.parents->first, r.parents->second})
                for (int j = 0; j < corpus_.config.trusted_per_subject; ++j)
                    out.push_back({r.id, parent, j, Label::Morph});
        }
        return out;
    }

    EmbeddingVector reference_embedding(const std::string& reference_id,
                                        int slot) const override {
        const auto it = refs_.find(reference_id);
        if (it == refs_.end())
            throw ValidationError("unknown reference '" + reference_id + "'");
        return slot == 0 ? it->second->embedding
                         : views_[static_cast<std::size_t>(slot - 1)].apply(
                               it->second->embedding);
    }

    EmbeddingVector trusted_embedding(const std::string& subject, SpectralBand band,
                                      int sample, int slot) const override {
        const auto s = trusted_.find(subject);
        if (s == trusted_.end())
            throw ValidationError("no trusted embeddings for subject '" + subject + "'");
        const auto& e = *s->second.at(band_index(band)).at(sample);
        return slot == 0 ? e : views_[static_cast<std::size_t>(slot - 1)].apply(e);
    }

    const SyntheticCorpus& corpus() const { return corpus_; }

private:
    SyntheticCorpus corpus_;
    std::vector<detail::ProviderView> views_;
    std::map<std::string, const ReferenceRecord*> refs_;
    std::map<std::string, std::map<int, std::map<int, const EmbeddingVector*>>> trusted_;
};

/// Serves embeddings computed from the images of a dataset manifest:
/// Session1 visible samples are references (one per subject), morph
/// records are attack references, and Multispectral samples are the
/// trusted captures. Each provider slot embeds the image itself.
class ManifestEmbeddingSource : public EmbeddingSource {
public:
    ManifestEmbeddingSource(const std::filesystem::path& manifest_path, ProtocolSplit split,
                            const PipelineConfig& cfg)
        : base_dir_(manifest_path.parent_path()), split_(std::move(split)) {
        manifest_ = load_manifest(manifest_path);
        providers_.push_back(cfg.providers.at(cfg.diff_provider));
        for (const auto& name : cfg.slerp_providers)
            providers_.push_back(cfg.providers.at(name));
        dimension_ = providers_.front().dimension;
        for (const auto& p : providers_)
            if (p.dimension != dimension_)
                throw ConfigError("all providers must share one dimension for fusion");

        for (const auto& s : manifest_.samples) {
            if (s.session == SessionId::Multispectral && s.label == Label::BonaFide) {
                trusted_paths_[s.subject_id][band_index(*s.band)].push_back(s.image_path);
            } else if (s.label == Label::Morph) {
                morphs_.push_back(&s);
            } else if (s.session == SessionId::Session1) {
                auto& slot = reference_paths_[s.subject_id];
                if (slot.empty() || s.image_path < slot) slot = s.image_path;
            }
        }
        for (auto& [subject, bands] : trusted_paths_)
            for (auto& [band, paths] : bands) std::sort(paths.begin(), paths.end());
    }

    int dimension() const override { return dimension_; }
    const ProtocolSplit& split() const override { return split_; }

    std::vector<Trial> trials(Side side) const override {
        std::vector<Trial> out;
        const auto& subjects =
            side == Side::Train ? split_.train_subjects : split_.test_subjects;
        for (const auto& s : subjects) {
            const int n = samples_per_subject(s);
            for (int j = 0; j < n; ++j) out.push_back({"ref_" + s, s, j, Label::BonaFide});
        }
        for (const SampleRecord* m : morphs_) {
            const auto& [a, b] = *m->morph_parents;
            const bool in_side = side == Side::Train
                                     ? (split_.in_train(a) && split_.in_train(b))
                                     : (split_.in_test(a) && split_.in_test(b));
            if (!in_side) continue;
            for (const auto& parent : {a, b}) {
                const int n = samples_per_subject(parent);
                for (int j = 0; j < n; ++j)
                    out.push_back({m->subject_id, parent, j, Label::Morph});
            }
        }
        return out;
    }

    EmbeddingVector reference_embedding(const std::string& reference_id,
                                        int slot) const override {
        if (reference_id.rfind("ref_", 0) == 0) {
            const std::string subject = reference_id.substr(4);
            const auto it = reference_paths_.find(subject);
            if (it == reference_paths_.end() || it->second.empty())
                throw ValidationError("no Session1 bona fide image for subject '" + subject +
                                      "'");
            return embed_path(it->second, slot);
        }
        for (const SampleRecord* m : morphs_)
            if (m->subject_id == reference_id) return embed_path(m->image_path, slot);
        throw ValidationError("unknown reference '" + reference_id + "'");
    }

    EmbeddingVector trusted_embedding(const std::string& subject, SpectralBand band,
                                      int sample, int slot) const override {
        const auto s = trusted_paths_.find(subject);
        if (s == trusted_paths_.end())
            throw ValidationError("no multispectral captures for subject '" + subject + "'");
        const auto b = s->second.find(band_index(band));
        if (b == s->second.end() || sample >= static_cast<int>(b->second.size()))
            throw ValidationError("missing " + std::string(band_name(band)) + " capture t" +
                                  std::to_string(sample) + " for subject '" + subject + "'");
        return embed_path(b->second[static_cast<std::size_t>(sample)], slot);
    }

private:
    int samples_per_subject(const std::string& subject) const {
        const auto it = trusted_paths_.find(subject);
        if (it == trusted_paths_.end()) return 0;
        int n = INT32_MAX;
        for (SpectralBand band : kAllBands) {
            const auto b = it->second.find(band_index(band));
            n = std::min(n, b == it->second.end() ? 0 : static_cast<int>(b->second.size()));
        }
        return n == INT32_MAX ? 0 : n;
    }

    EmbeddingVector embed_path(const std::string& rel_path, int slot) const {
        const auto& provider = providers_[static_cast<std::size_t>(slot)];
        const std::string key = provider.name + "\n" + rel_path;
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            const auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        const EmbeddingVector e = embed(provider, load_png(base_dir_ / rel_path));
        std::lock_guard<std::mutex> lock(cache_mutex_);
        return cache_.emplace(key, e).first->second;
    }

    std::filesystem::path base_dir_;
    ProtocolSplit split_;
    DatasetManifest manifest_;
    std::vector<ProviderDescriptor> providers_;  // [0] diff, [1..6] nets
    int dimension_ = 0;
    std::map<std::string, std::string> reference_paths_;
    std::map<std::string, std::map<int, std::vector<std::string>>> trusted_paths_;
    std::vector<const SampleRecord*> morphs_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, EmbeddingVector> cache_;
};

// ---------------------------------------------------------------------------
// Stage: feature extraction
// ---------------------------------------------------------------------------

struct FeatureSet {
    std::vector<Trial> trials;
    std::vector<DmadFeature> features;
    std::vector<Label> labels;
};

inline DmadFeature compute_trial_feature(const EmbeddingSource& source, const Trial& trial,
                                         SpectralBand band, DmadMethod method,
                                         const SlerpParams& slerp_params, bool absolute_diff) {
    const std::string trusted_id =
        make_trusted_id(trial.trusted_subject, band, trial.sample_index);
    if (method == DmadMethod::DiffFeature) {
        return difference_feature(source.reference_embedding(trial.reference_id, 0),
                                  source.trusted_embedding(trial.trusted_subject, band,
                                                           trial.sample_index, 0),
                                  band, trial.reference_id, trusted_id, absolute_diff);
    }
    std::vector<DmadFeature> nets;
    nets.reserve(6);
    for (int slot = 1; slot <= 6; ++slot)
        nets.push_back(difference_feature(
            source.reference_embedding(trial.reference_id, slot),
            source.trusted_embedding(trial.trusted_subject, band, trial.sample_index, slot),
            band, trial.reference_id, trusted_id));
    return hierarchical_slerp_fuse(nets, slerp_params);
}

inline FeatureSet extract_features(const EmbeddingSource& source, Side side, SpectralBand band,
                                   DmadMethod method, const SlerpParams& slerp_params,
                                   bool absolute_diff) {
    FeatureSet set;
    set.trials = source.trials(side);
    set.features.reserve(set.trials.size());
    for (const auto& trial : set.trials) {
        set.features.push_back(
            compute_trial_feature(source, trial, band, method, slerp_params, absolute_diff));
        set.labels.push_back(trial.label);
    }
    return set;
}

inline std::string side_name(Side side) { return side == Side::Train ? "train" : "test"; }

inline std::filesystem::path feature_stream_path(const std::filesystem::path& features_dir,
                                                 DmadMethod method, SpectralBand band,
                                                 Side side) {
    return features_dir / std::string(method_name(method)) /
           (std::string(band_name(band)) + "_" + side_name(side) + ".dmfs");
}

/// Persists one extracted feature set as a packed record stream plus a
/// sidecar index (rows in record order).
inline void persist_features(const std::filesystem::path& features_dir, DmadMethod method,
                             SpectralBand band, Side side, const FeatureSet& set) {
    const auto path = feature_stream_path(features_dir, method, band, side);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    std::vector<FeatureIndexRow> rows;
    rows.reserve(set.features.size());
    for (std::size_t i = 0; i < set.features.size(); ++i) {
        DmfRecord rec;
        rec.method = method;
        rec.band_byte = static_cast<std::uint8_t>(band_index(band));
        rec.values = set.features[i].values;
        write_dmf_record(out, rec);
        rows.push_back({path.filename().string(), set.features[i].reference_id,
                        set.features[i].trusted_id, band, set.labels[i]});
    }
    write_feature_index(std::filesystem::path(path).replace_extension(".index.csv"), rows);
}

inline FeatureSet load_features(const std::filesystem::path& features_dir, DmadMethod method,
                                SpectralBand band, Side side) {
    const auto path = feature_stream_path(features_dir, method, band, side);
    const auto records = read_feature_stream(path);
    const auto rows =
        read_feature_index(std::filesystem::path(path).replace_extension(".index.csv"));
    if (records.size() != rows.size())
        throw ValidationError("feature stream and index disagree for " + path.string());
    FeatureSet set;
    for (std::size_t i = 0; i < records.size(); ++i) {
        DmadFeature f;
        f.values = records[i].values;
        f.method = method;
        f.band = band;
        f.reference_id = rows[i].reference_id;
        f.trusted_id = rows[i].trusted_id;
        set.features.push_back(std::move(f));
        set.labels.push_back(rows[i].label);

        // Reconstruct the trial key from the trusted id: <subject>_<band>_t<j>.
        const std::string& tid = rows[i].trusted_id;
        const auto t_pos = tid.rfind("_t");
        const auto band_pos = tid.rfind('_', t_pos == std::string::npos ? tid.size() : t_pos - 1);
        if (t_pos == std::string::npos || band_pos == std::string::npos)
            throw ParseError("bad trusted id '" + tid + "' in " + path.string());
        Trial trial;
        trial.reference_id = rows[i].reference_id;
        trial.trusted_subject = tid.substr(0, band_pos);
        trial.sample_index = std::stoi(tid.substr(t_pos + 2));
        trial.label = rows[i].label;
        set.trials.push_back(std::move(trial));
    }
    return set;
}

// ---------------------------------------------------------------------------
// Stage: training and evaluation
// ---------------------------------------------------------------------------

inline std::filesystem::path model_path(const std::filesystem::path& models_dir,
                                        DmadMethod method, SpectralBand band) {
    return models_dir /
           (std::string(method_name(method)) + "_" + std::string(band_name(band)) + ".json");
}

/// Deterministic worker pool over count tasks. Exceptions propagate.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int n = std::min<int>(jobs, static_cast<int>(count));
    threads.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

struct BandEvaluation {
    LinearModel model;
    std::vector<double> train_scores;  // aligned with the train trial list
    std::vector<double> test_scores;   // aligned with the test trial list
};

struct MethodEvaluation {
    DmadMethod method = DmadMethod::DiffFeature;
    bool mean_rule = false;
    std::vector<Trial> train_trials;
    std::vector<Trial> test_trials;
    std::map<SpectralBand, BandEvaluation> bands;
    ScoreSet fused_train;
    ScoreSet fused_test;
    double threshold = 0.0;
    EvalReport report;
};

namespace detail {

inline ScoreSet scores_by_label(const std::vector<Trial>& trials,
                                const std::vector<double>& scores) {
    ScoreSet s;
    for (std::size_t i = 0; i < trials.size(); ++i)
        (trials[i].label == Label::Morph ? s.attack : s.bona_fide).push_back(scores[i]);
    return s;
}

}  // namespace detail

/// Fusion, threshold derivation, and report assembly shared by the
/// in-process pipeline and the disk-staged eval command.
inline MethodEvaluation assemble_evaluation(DmadMethod method, const PipelineConfig& cfg,
                                            std::vector<Trial> train_trials,
                                            std::vector<Trial> test_trials,
                                            std::map<SpectralBand, BandEvaluation> bands) {
    MethodEvaluation eval;
    eval.method = method;
    eval.mean_rule = cfg.mean_rule;
    eval.train_trials = std::move(train_trials);
    eval.test_trials = std::move(test_trials);
    eval.bands = std::move(bands);

    auto fuse_rows = [&](const std::vector<Trial>& trials, bool train_side) {
        std::vector<double> fused(trials.size(), 0.0);
        for (const auto& [band, be] : eval.bands) {
            const auto& scores = train_side ? be.train_scores : be.test_scores;
            if (scores.size() != trials.size())
                throw ValidationError("band score count mismatch during fusion");
            for (std::size_t i = 0; i < trials.size(); ++i) fused[i] += scores[i];
        }
        if (cfg.mean_rule)
            for (auto& f : fused) f /= static_cast<double>(eval.bands.size());
        return fused;
    };
    eval.fused_train =
        detail::scores_by_label(eval.train_trials, fuse_rows(eval.train_trials, true));
    eval.fused_test =
        detail::scores_by_label(eval.test_trials, fuse_rows(eval.test_trials, false));
    eval.threshold = derive_threshold_eer(eval.fused_train);

    eval.report.morph_type = cfg.morph_type_label;
    eval.report.mad_algorithm = std::string(method_name(method));
    const double t5 = cfg.apcer_targets.size() > 0 ? cfg.apcer_targets[0] : 0.05;
    const double t10 = cfg.apcer_targets.size() > 1 ? cfg.apcer_targets[1] : 0.10;
    for (SpectralBand band : kAllBands) {
        const ScoreSet s =
            detail::scores_by_label(eval.test_trials, eval.bands.at(band).test_scores);
        eval.report.rows.push_back({std::string(band_name(band)), 100.0 * d_eer(s),
                                    100.0 * bpcer_at_apcer(s, t5),
                                    100.0 * bpcer_at_apcer(s, t10)});
    }
    eval.report.rows.push_back({"fused", 100.0 * d_eer(eval.fused_test),
                                100.0 * bpcer_at_apcer(eval.fused_test, t5),
                                100.0 * bpcer_at_apcer(eval.fused_test, t10)});
    return eval;
}

/// Runs extract -> train -> score for every band of one method, fuses the
/// per-trial scores, derives the operating threshold on the training
/// split, and assembles the per-band + fused report.
inline MethodEvaluation evaluate_method(const EmbeddingSource& source, DmadMethod method,
                                        const PipelineConfig& cfg,
                                        const std::filesystem::path& out_dir,
                                        bool persist = true) {
    std::map<SpectralBand, BandEvaluation> bands;
    std::mutex bands_mutex;
    parallel_for(kAllBands.size(), cfg.jobs, [&](std::size_t bi) {
        const SpectralBand band = kAllBands[bi];
        FeatureSet train_set =
            extract_features(source, Side::Train, band, method, cfg.slerp, cfg.absolute_diff);
        FeatureSet test_set =
            extract_features(source, Side::Test, band, method, cfg.slerp, cfg.absolute_diff);
        if (persist) {
            persist_features(out_dir / "features", method, band, Side::Train, train_set);
            persist_features(out_dir / "features", method, band, Side::Test, test_set);
        }
        BandEvaluation be;
        be.model = train_logistic(train_set.features, train_set.labels, cfg.train);
        if (persist) {
            std::filesystem::create_directories(out_dir / "models");
            save_model(be.model, model_path(out_dir / "models", method, band));
        }
        for (const auto& f : train_set.features)
            be.train_scores.push_back(score_feature(be.model, f));
        for (const auto& f : test_set.features)
            be.test_scores.push_back(score_feature(be.model, f));
        std::lock_guard<std::mutex> lock(bands_mutex);
        bands.emplace(band, std::move(be));
    });
    return assemble_evaluation(method, cfg, source.trials(Side::Train),
                               source.trials(Side::Test), std::move(bands));
}

/// Stage variant of evaluate_method: consumes previously persisted feature
/// streams and saved models instead of an embedding source.
inline MethodEvaluation evaluate_from_disk(const std::filesystem::path& features_dir,
                                           const std::filesystem::path& models_dir,
                                           DmadMethod method, const PipelineConfig& cfg) {
    std::map<SpectralBand, BandEvaluation> bands;
    std::vector<Trial> train_trials, test_trials;
    for (SpectralBand band : kAllBands) {
        FeatureSet train_set = load_features(features_dir, method, band, Side::Train);
        FeatureSet test_set = load_features(features_dir, method, band, Side::Test);
        if (train_trials.empty()) {
            train_trials = train_set.trials;
            test_trials = test_set.trials;
        }
        BandEvaluation be;
        be.model = load_model(model_path(models_dir, method, band));
        for (const auto& f : train_set.features)
            be.train_scores.push_back(score_feature(be.model, f));
        for (const auto& f : test_set.features)
            be.test_scores.push_back(score_feature(be.model, f));
        bands.emplace(band, std::move(be));
    }
    return assemble_evaluation(method, cfg, std::move(train_trials), std::move(test_trials),
                               std::move(bands));
}

/// Fused-score CSV, one row per test trial:
/// reference_id, trusted_subject, label, S_650..S_WL, F, decision.
inline void write_scores_csv(const MethodEvaluation& eval,
                             const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "reference_id,trusted_subject,label,S_650,S_710,S_770,S_830,S_890,S_950,S_WL,F,"
           "decision\n";
    for (std::size_t i = 0; i < eval.test_trials.size(); ++i) {
        const Trial& trial = eval.test_trials[i];
        out << trial.reference_id << "," << trial.trusted_subject << ","
            << label_name(trial.label);
        double fused = 0.0;
        for (SpectralBand band : kAllBands) {
            const double s = eval.bands.at(band).test_scores[i];
            fused += s;
            out << "," << fmt_fixed(s, 6);
        }
        if (eval.mean_rule) fused /= static_cast<double>(kAllBands.size());
        out << "," << fmt_fixed(fused, 6) << ","
            << decision_name(decide(fused, eval.threshold)) << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
}

/// Parsed fused-score CSV: per-band and fused score sets keyed by the
/// column labels, enough to rebuild reports and DET plots.
struct ScoresTable {
    std::map<SpectralBand, ScoreSet> band_scores;
    ScoreSet fused;
};

inline ScoresTable read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line !=
            "reference_id,trusted_subject,label,S_650,S_710,S_770,S_830,S_890,S_950,S_WL,F,"
            "decision")
        throw ParseError("bad scores CSV header in " + path.string());
    ScoresTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 12) throw ParseError("bad scores row: " + line);
        const auto label = parse_label(cols[2]);
        if (!label) throw ParseError("bad label in scores row: " + line);
        for (std::size_t k = 0; k < kAllBands.size(); ++k) {
            const double s = std::stod(cols[3 + k]);
            auto& set = table.band_scores[kAllBands[k]];
            (*label == Label::Morph ? set.attack : set.bona_fide).push_back(s);
        }
        const double f = std::stod(cols[10]);
        (*label == Label::Morph ? table.fused.attack : table.fused.bona_fide).push_back(f);
    }
    return table;
}

inline EvalReport report_from_scores(const ScoresTable& table, const std::string& morph_type,
                                     const std::string& mad_algorithm, double t5, double t10) {
    EvalReport report;
    report.morph_type = morph_type;
    report.mad_algorithm = mad_algorithm;
    for (SpectralBand band : kAllBands) {
        const ScoreSet& s = table.band_scores.at(band);
        report.rows.push_back({std::string(band_name(band)), 100.0 * d_eer(s),
                               100.0 * bpcer_at_apcer(s, t5), 100.0 * bpcer_at_apcer(s, t10)});
    }
    report.rows.push_back({"fused", 100.0 * d_eer(table.fused),
                           100.0 * bpcer_at_apcer(table.fused, t5),
                           100.0 * bpcer_at_apcer(table.fused, t10)});
    return report;
}

inline std::vector<std::pair<std::string, std::vector<DetPoint>>> det_curves_for(
    const ScoresTable& table) {
    std::vector<std::pair<std::string, std::vector<DetPoint>>> curves;
    for (SpectralBand band : kAllBands)
        curves.emplace_back(std::string(band_name(band)), det_curve(table.band_scores.at(band)));
    curves.emplace_back("fused", det_curve(table.fused));
    return curves;
}

inline std::vector<std::pair<std::string, std::vector<DetPoint>>> det_curves_for(
    const MethodEvaluation& eval) {
    std::vector<std::pair<std::string, std::vector<DetPoint>>> curves;
    for (SpectralBand band : kAllBands) {
        const ScoreSet s =
            detail::scores_by_label(eval.test_trials, eval.bands.at(band).test_scores);
        curves.emplace_back(std::string(band_name(band)), det_curve(s));
    }
    curves.emplace_back("fused", det_curve(eval.fused_test));
    return curves;
}

struct ExperimentResult {
    std::vector<MethodEvaluation> methods;  // DiffFeature, SlerpFeature
    std::filesystem::path report_csv;
    std::filesystem::path report_json;
};

/// Full experiment: resolve the embedding source (generate or load a
/// store, or embed a manifest's images), then run both D-MAD methods and
/// emit scores, reports, and DET plots under out_dir.
inline ExperimentResult run_experiment(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    std::unique_ptr<EmbeddingSource> source;
    if (cfg.manifest_path) {
        ProtocolSplit split;
        const fs::path split_file = cfg.out_dir / "split.json";
        DatasetManifest manifest = load_manifest(*cfg.manifest_path);
        std::set<std::string> subject_set;
        for (const auto& s : manifest.samples)
            if (s.label == Label::BonaFide) subject_set.insert(s.subject_id);
        split = make_disjoint_split(
            std::vector<std::string>(subject_set.begin(), subject_set.end()),
            cfg.synth.train_fraction, cfg.seed);
        save_split(split, split_file);
        log << "embedding " << manifest.samples.size() << " manifest samples\n";
        source = std::make_unique<ManifestEmbeddingSource>(*cfg.manifest_path, split, cfg);
    } else if (cfg.store_dir) {
        log << "loading embedding store " << cfg.store_dir->string() << "\n";
        source = std::make_unique<StoreEmbeddingSource>(load_corpus(*cfg.store_dir), cfg);
    } else {
        log << "generating synthetic corpus (" << cfg.synth.n_subjects << " subjects, D="
            << cfg.synth.dimension << ", seed " << cfg.synth.seed << ")\n";
        SyntheticCorpus corpus = generate_synthetic_corpus(cfg.synth);
        save_corpus(corpus, cfg.out_dir / "store");
        source = std::make_unique<StoreEmbeddingSource>(std::move(corpus), cfg);
    }

    ExperimentResult result;
    fs::create_directories(cfg.out_dir / "report");
    for (DmadMethod method : {DmadMethod::DiffFeature, DmadMethod::SlerpFeature}) {
        log << "running " << method_name(method) << " method\n";
        MethodEvaluation eval = evaluate_method(*source, method, cfg, cfg.out_dir);
        write_scores_csv(eval, cfg.out_dir / "scores" /
                                   ("scores_" + std::string(method_name(method)) + ".csv"));
        emit_det_svg(det_curves_for(eval),
                     cfg.out_dir / "report" /
                         ("det_" + std::string(method_name(method)) + ".svg"));
        result.methods.push_back(std::move(eval));
    }

    std::vector<EvalReport> reports;
    for (const auto& m : result.methods) reports.push_back(m.report);
    fs::create_directories(cfg.out_dir / "report");
    result.report_csv = cfg.out_dir / "report" / "report.csv";
    {
        std::ofstream out(result.report_csv, std::ios::binary);
        if (!out) throw IoError("cannot open " + result.report_csv.string());
        out << reports_to_csv(reports);
    }
    result.report_json = cfg.out_dir / "report" / "report.json";
    {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : reports) arr.push_back(report_to_json(r));
        std::ofstream out(result.report_json, std::ios::binary);
        if (!out) throw IoError("cannot open " + result.report_json.string());
        out << arr.dump(2) << "\n";
    }
    for (const auto& m : result.methods) {
        const auto& fused_row = m.report.rows.back();
        log << method_name(m.method) << ": fused D-EER " << fmt_fixed(fused_row.d_eer_pct, 2)
            << "%\n";
    }
    return result;
}

// ---------------------------------------------------------------------------
// Morph generation over an image manifest
// ---------------------------------------------------------------------------

struct GenMorphsOptions {
    std::filesystem::path manifest_path;
    std::filesystem::path split_path;
    std::filesystem::path out_dir;
    Side side = Side::Train;
    double alpha = 0.5;
    std::optional<std::size_t> max_pairs;
    std::uint64_t seed = 0;
};

/// Generates landmark morphs for every enumerated pair of the chosen split
/// side and writes the extended manifest next to them. Returns the number
/// of morph files written.
inline std::size_t run_gen_morphs(const GenMorphsOptions& opt, std::ostream& log) {
    namespace fs = std::filesystem;
    const DatasetManifest manifest = load_manifest(opt.manifest_path);
    const ProtocolSplit split = load_split(opt.split_path);
    const fs::path base_dir = opt.manifest_path.parent_path();

    // One Session1 bona fide record per subject (first by image_path).
    std::map<std::string, const SampleRecord*> reference;
    for (const auto& s : manifest.samples) {
        if (s.session != SessionId::Session1 || s.label != Label::BonaFide) continue;
        auto& slot = reference[s.subject_id];
        if (!slot || s.image_path < slot->image_path) slot = &s;
    }

    const auto pairs = enumerate_morph_pairs(split, opt.side, opt.max_pairs, opt.seed);
    if (pairs.empty())
        log << "warning: no morph pairs to generate (side too small or cap is 0)\n";

    fs::create_directories(opt.out_dir / "morphs");
    DatasetManifest extended = manifest;
    for (auto& s : extended.samples) {
        // Rebase original relative paths onto the output directory.
        s.image_path = fs::proximate(base_dir / s.image_path, opt.out_dir).generic_string();
        if (s.landmarks_path)
            s.landmarks_path =
                fs::proximate(base_dir / *s.landmarks_path, opt.out_dir).generic_string();
    }

    std::size_t written = 0;
    for (const auto& [subject_a, subject_b] : pairs) {
        for (const auto& subject : {subject_a, subject_b})
            if (!reference.count(subject))
                throw ValidationError("subject '" + subject +
                                      "' has no Session1 bona fide sample");
        const SampleRecord* rec_a = reference.at(subject_a);
        const SampleRecord* rec_b = reference.at(subject_b);
        for (const SampleRecord* rec : {rec_a, rec_b})
            if (!rec->landmarks_path)
                throw ValidationError("sample '" + rec->image_path +
                                      "' has no landmarks_path; cannot morph");

        const Raster img_a = load_png(base_dir / rec_a->image_path);
        const Raster img_b = load_png(base_dir / rec_b->image_path);
        const LandmarkSet lm_a = read_landmarks(base_dir / *rec_a->landmarks_path);
        const LandmarkSet lm_b = read_landmarks(base_dir / *rec_b->landmarks_path);

        MorphSpec spec;
        spec.alpha = opt.alpha;
        const Raster morph = generate_morph(img_a, lm_a, img_b, lm_b, spec);
        const std::string filename = morph_filename(subject_a, subject_b, opt.alpha);
        save_png(morph, opt.out_dir / "morphs" / filename);
        ++written;

        SampleRecord morph_rec;
        morph_rec.subject_id = morph_id(subject_a, subject_b);
        morph_rec.session = SessionId::Session1;
        morph_rec.label = Label::Morph;
        morph_rec.morph_parents = {subject_a, subject_b};
        morph_rec.image_path = "morphs/" + filename;
        extended.samples.push_back(std::move(morph_rec));
    }

    save_manifest(extended, opt.out_dir / "manifest.json");
    log << "wrote " << written << " morph image(s) and the extended manifest to "
        << opt.out_dir.string() << "\n";
    return written;
}

}  // namespace msdmad
