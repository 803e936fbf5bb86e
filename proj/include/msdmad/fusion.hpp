#pragma once

#include <map>
#include <set>

#include "msdmad/bands.hpp"
#include "msdmad/error.hpp"
#include "msdmad/metrics.hpp"
#include "msdmad/text.hpp"

namespace msdmad {

/// Per-band detection scores for one comparison trial. All 7 bands for
/// full fusion; a declared subset for ablations.
struct BandScores {
    std::map<SpectralBand, double> scores;
};

/// Literal sum rule: F = sum of the per-band scores present. Range is
/// [0, |bands|]; no renormalization.
inline double sum_fuse(const BandScores& bands) {
    if (bands.scores.empty()) throw EmptyScores("no band scores to fuse");
    double f = 0.0;
    for (const auto& [band, s] : bands.scores) {
        if (!(s >= 0.0 && s <= 1.0))
            throw ValidationError("score for " + std::string(band_name(band)) +
                                  " outside [0,1]: " + fmt_double(s));
        f += s;
    }
    return f;
}

/// Mean rule (sum / |bands|), for ablations where band subsets of
/// different sizes need comparable fused scores.
inline double mean_fuse(const BandScores& bands) {
    return sum_fuse(bands) / static_cast<double>(bands.scores.size());
}

enum class Decision { BonaFide, Attack };

constexpr std::string_view decision_name(Decision d) {
    return d == Decision::Attack ? "Attack" : "BonaFide";
}

/// Attack iff F >= threshold; the tie goes to Attack.
inline Decision decide(double fused, double threshold) {
    return fused >= threshold ? Decision::Attack : Decision::BonaFide;
}

struct FusionResult {
    double fused = 0.0;
    Decision decision = Decision::BonaFide;
    double threshold = 0.0;
    std::set<SpectralBand> bands_used;
};

inline FusionResult fuse_and_decide(const BandScores& bands, double threshold) {
    FusionResult r;
    r.fused = sum_fuse(bands);
    r.threshold = threshold;
    r.decision = decide(r.fused, threshold);
    for (const auto& [band, s] : bands.scores) r.bands_used.insert(band);
    return r;
}

/// Operating threshold derived on training scores: the threshold where
/// APCER and BPCER cross (the equal-error point). Deriving it on the
/// training split keeps test-set decisions honest.
inline double derive_threshold_eer(const ScoreSet& train_scores) {
    return d_eer_point(train_scores).threshold;
}

}  // namespace msdmad
