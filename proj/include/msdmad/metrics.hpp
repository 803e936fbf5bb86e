#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "msdmad/error.hpp"
#include "msdmad/text.hpp"

#include "json.hpp"

namespace msdmad {

/// Detection scores for one evaluation. Orientation contract: higher
/// means more attack-like; a presentation is decided Attack when its
/// score is >= the operating threshold.
struct ScoreSet {
    std::vector<double> bona_fide;
    std::vector<double> attack;
};

namespace detail {

inline void require_nonempty_attack(const ScoreSet& s) {
    if (s.attack.empty()) throw EmptyClass("no attack scores");
}
inline void require_nonempty_bona(const ScoreSet& s) {
    if (s.bona_fide.empty()) throw EmptyClass("no bona fide scores");
}

/// Pre-sorted view of a ScoreSet for O(log n) per-threshold counting.
struct SortedScores {
    std::vector<double> bona;
    std::vector<double> attack;

    explicit SortedScores(const ScoreSet& s) : bona(s.bona_fide), attack(s.attack) {
        std::sort(bona.begin(), bona.end());
        std::sort(attack.begin(), attack.end());
    }

    // Fraction of attack scores strictly below t (attacks accepted as bona fide).
    double apcer(double t) const {
        const auto n = static_cast<double>(attack.size());
        const auto below = std::lower_bound(attack.begin(), attack.end(), t) - attack.begin();
        return static_cast<double>(below) / n;
    }

    // Fraction of bona fide scores at or above t (bona fide rejected as attacks).
    double bpcer(double t) const {
        const auto n = static_cast<double>(bona.size());
        const auto below = std::lower_bound(bona.begin(), bona.end(), t) - bona.begin();
        return static_cast<double>(bona.size() - static_cast<std::size_t>(below)) / n;
    }

    /// Candidate thresholds: every distinct score value plus +/-inf
    /// sentinels, sorted descending. Error rates only change at score
    /// values, so this sweep is exhaustive.
    std::vector<double> candidate_thresholds() const {
        std::vector<double> t;
        t.reserve(bona.size() + attack.size() + 2);
        t.push_back(std::numeric_limits<double>::infinity());
        t.insert(t.end(), bona.begin(), bona.end());
        t.insert(t.end(), attack.begin(), attack.end());
        t.push_back(-std::numeric_limits<double>::infinity());
        std::sort(t.begin(), t.end(), std::greater<double>());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        return t;
    }
};

}  // namespace detail

inline double apcer_at(const ScoreSet& scores, double threshold) {
    detail::require_nonempty_attack(scores);
    std::size_t below = 0;
    for (double s : scores.attack)
        if (s < threshold) ++below;
    return static_cast<double>(below) / static_cast<double>(scores.attack.size());
}

inline double bpcer_at(const ScoreSet& scores, double threshold) {
    detail::require_nonempty_bona(scores);
    std::size_t at_or_above = 0;
    for (double s : scores.bona_fide)
        if (s >= threshold) ++at_or_above;
    return static_cast<double>(at_or_above) / static_cast<double>(scores.bona_fide.size());
}

struct DetPoint {
    double threshold;
    double apcer;
    double bpcer;
};

/// Full detection error tradeoff: one point per distinct score value plus
/// +/-inf sentinels, ordered by threshold descending. Along that order
/// apcer is non-increasing and bpcer is non-decreasing.
inline std::vector<DetPoint> det_curve(const ScoreSet& scores) {
    detail::require_nonempty_attack(scores);
    detail::require_nonempty_bona(scores);
    detail::SortedScores sorted(scores);
    std::vector<DetPoint> curve;
    for (double t : sorted.candidate_thresholds())
        curve.push_back({t, sorted.apcer(t), sorted.bpcer(t)});
    return curve;
}

struct EerPoint {
    double eer;        // (apcer + bpcer) / 2 at the crossing threshold
    double threshold;  // the threshold realizing it
};

/// Finite-sample D-EER: midpoint of APCER/BPCER at the threshold
/// minimizing |APCER - BPCER|; ties broken toward the lower midpoint,
/// then toward the higher threshold.
inline EerPoint d_eer_point(const ScoreSet& scores) {
    detail::require_nonempty_attack(scores);
    detail::require_nonempty_bona(scores);
    detail::SortedScores sorted(scores);
    EerPoint best{std::numeric_limits<double>::infinity(), 0.0};
    double best_gap = std::numeric_limits<double>::infinity();
    for (double t : sorted.candidate_thresholds()) {
        const double a = sorted.apcer(t);
        const double b = sorted.bpcer(t);
        const double gap = std::abs(a - b);
        const double mid = 0.5 * (a + b);
        if (gap < best_gap || (gap == best_gap && mid < best.eer)) {
            best_gap = gap;
            best = {mid, t};
        }
    }
    return best;
}

inline double d_eer(const ScoreSet& scores) { return d_eer_point(scores).eer; }

struct OperatingPoint {
    double bpcer;
    double apcer;
    double threshold;
    bool attainable;  // false when no threshold reached the APCER target
};

/// BPCER at the most favourable threshold whose APCER does not exceed the
/// target, i.e. the highest threshold with APCER <= target (any lower
/// threshold only raises BPCER). With a nonempty attack list the minimum
/// score always attains APCER = 0, so the target is always reachable; the
/// flag covers the degenerate fallback of reporting the closest APCER.
inline OperatingPoint bpcer_at_apcer_point(const ScoreSet& scores, double target_apcer) {
    detail::require_nonempty_attack(scores);
    detail::require_nonempty_bona(scores);
    if (!(target_apcer > 0.0 && target_apcer < 1.0))
        throw ValidationError("target APCER must lie in (0,1), got " + fmt_double(target_apcer));
    detail::SortedScores sorted(scores);
    double closest_gap = std::numeric_limits<double>::infinity();
    OperatingPoint closest{1.0, 1.0, 0.0, false};
    for (double t : sorted.candidate_thresholds()) {
        const double a = sorted.apcer(t);
        if (a <= target_apcer) return {sorted.bpcer(t), a, t, true};
        if (a - target_apcer < closest_gap) {
            closest_gap = a - target_apcer;
            closest = {sorted.bpcer(t), a, t, false};
        }
    }
    return closest;
}

inline double bpcer_at_apcer(const ScoreSet& scores, double target_apcer) {
    return bpcer_at_apcer_point(scores, target_apcer).bpcer;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One table row: a spectral band (or "fused") with its error percentages.
struct EvalRow {
    std::string band;
    double d_eer_pct;
    double bpcer_at_apcer5_pct;
    double bpcer_at_apcer10_pct;
};

struct EvalReport {
    std::string morph_type;
    std::string mad_algorithm;
    std::vector<EvalRow> rows;
};

inline std::string report_to_csv(const EvalReport& report) {
    std::string out =
        "morph_type,mad_algorithm,band,d_eer_pct,bpcer_at_apcer5_pct,bpcer_at_apcer10_pct\n";
    for (const auto& row : report.rows) {
        out += report.morph_type + "," + report.mad_algorithm + "," + row.band + "," +
               fmt_fixed(row.d_eer_pct, 2) + "," + fmt_fixed(row.bpcer_at_apcer5_pct, 2) + "," +
               fmt_fixed(row.bpcer_at_apcer10_pct, 2) + "\n";
    }
    return out;
}

/// Concatenated CSV for several reports, single header line.
inline std::string reports_to_csv(const std::vector<EvalReport>& reports) {
    std::string out =
        "morph_type,mad_algorithm,band,d_eer_pct,bpcer_at_apcer5_pct,bpcer_at_apcer10_pct\n";
    for (const auto& report : reports)
        for (const auto& row : report.rows)
            out += report.morph_type + "," + report.mad_algorithm + "," + row.band + "," +
                   fmt_fixed(row.d_eer_pct, 2) + "," + fmt_fixed(row.bpcer_at_apcer5_pct, 2) +
                   "," + fmt_fixed(row.bpcer_at_apcer10_pct, 2) + "\n";
    return out;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["morph_type"] = report.morph_type;
    j["mad_algorithm"] = report.mad_algorithm;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json r;
        r["band"] = row.band;
        // Rounded to the 2 decimals the tables use, so CSV and JSON agree.
        r["d_eer_pct"] = std::stod(fmt_fixed(row.d_eer_pct, 2));
        r["bpcer_at_apcer5_pct"] = std::stod(fmt_fixed(row.bpcer_at_apcer5_pct, 2));
        r["bpcer_at_apcer10_pct"] = std::stod(fmt_fixed(row.bpcer_at_apcer10_pct, 2));
        j["rows"].push_back(r);
    }
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    try {
        EvalReport report;
        report.morph_type = j.at("morph_type").get<std::string>();
        report.mad_algorithm = j.at("mad_algorithm").get<std::string>();
        for (const auto& r : j.at("rows")) {
            EvalRow row;
            row.band = r.at("band").get<std::string>();
            row.d_eer_pct = r.at("d_eer_pct").get<double>();
            row.bpcer_at_apcer5_pct = r.at("bpcer_at_apcer5_pct").get<double>();
            row.bpcer_at_apcer10_pct = r.at("bpcer_at_apcer10_pct").get<double>();
            report.rows.push_back(row);
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad report JSON: ") + e.what());
    }
}

enum class ReportFormat { CSV, JSON };

inline void emit_report(const EvalReport& report, ReportFormat format,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    if (format == ReportFormat::CSV)
        out << report_to_csv(report);
    else
        out << report_to_json(report).dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// DET plot (standalone SVG, deterministic bytes)
// ---------------------------------------------------------------------------

namespace detail {

// Maps an error rate to a plot coordinate on a log10 axis spanning
// 0.1% .. 100%. Rates below the axis floor are clamped onto it.
inline double det_axis_pos(double rate) {
    const double pct = std::max(rate * 100.0, 0.1);
    return (std::log10(pct) - std::log10(0.1)) / 3.0;  // 3 decades
}

inline constexpr const char* kDetPalette[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
};

}  // namespace detail

/// Renders DET curves (APCER vs BPCER, both log-scaled 0.1%..100%) into a
/// standalone SVG. Output bytes are a pure function of the input.
inline std::string det_curves_to_svg(
    const std::vector<std::pair<std::string, std::vector<DetPoint>>>& curves) {
    if (curves.empty()) throw ValidationError("no DET curves to plot");
    const double size = 800.0, margin = 80.0;
    const double span = size - 2.0 * margin;
    auto px = [&](double axis01) { return margin + axis01 * span; };
    auto py = [&](double axis01) { return size - margin - axis01 * span; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\" "
           "width=\"800\" height=\"800\">\n";
    svg += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";

    // Grid and tick labels at decade marks.
    const double decades[] = {0.1, 1.0, 10.0, 100.0};
    for (double d : decades) {
        const double a = detail::det_axis_pos(d / 100.0);
        const std::string xs = fmt_fixed(px(a), 2), ys = fmt_fixed(py(a), 2);
        svg += "<line x1=\"" + xs + "\" y1=\"" + fmt_fixed(margin, 2) + "\" x2=\"" + xs +
               "\" y2=\"" + fmt_fixed(size - margin, 2) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<line x1=\"" + fmt_fixed(margin, 2) + "\" y1=\"" + ys + "\" x2=\"" +
               fmt_fixed(size - margin, 2) + "\" y2=\"" + ys + "\" stroke=\"#dddddd\"/>\n";
        const std::string lbl = d < 1.0 ? fmt_fixed(d, 1) : fmt_fixed(d, 0);
        svg += "<text x=\"" + xs + "\" y=\"" + fmt_fixed(size - margin + 24.0, 2) +
               "\" font-size=\"14\" text-anchor=\"middle\">" + lbl + "</text>\n";
        svg += "<text x=\"" + fmt_fixed(margin - 10.0, 2) + "\" y=\"" + ys +
               "\" font-size=\"14\" text-anchor=\"end\" dominant-baseline=\"middle\">" + lbl +
               "</text>\n";
    }
    svg += "<rect x=\"" + fmt_fixed(margin, 2) + "\" y=\"" + fmt_fixed(margin, 2) + "\" width=\"" +
           fmt_fixed(span, 2) + "\" height=\"" + fmt_fixed(span, 2) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<text x=\"400\" y=\"" + fmt_fixed(size - 24.0, 2) +
           "\" font-size=\"16\" text-anchor=\"middle\">APCER (%)</text>\n";
    svg += "<text x=\"24\" y=\"400\" font-size=\"16\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 24 400)\">BPCER (%)</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* color = detail::kDetPalette[i % (sizeof(detail::kDetPalette) /
                                                     sizeof(detail::kDetPalette[0]))];
        std::string pts;
        for (const auto& p : curves[i].second) {
            pts += fmt_fixed(px(detail::det_axis_pos(p.apcer)), 2) + "," +
                   fmt_fixed(py(detail::det_axis_pos(p.bpcer)), 2) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        // Legend entry, in input order.
        const double ly = margin + 20.0 + 22.0 * static_cast<double>(i);
        svg += "<line x1=\"" + fmt_fixed(size - margin - 180.0, 2) + "\" y1=\"" +
               fmt_fixed(ly, 2) + "\" x2=\"" + fmt_fixed(size - margin - 150.0, 2) + "\" y2=\"" +
               fmt_fixed(ly, 2) + "\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"3\"/>\n";
        svg += "<text x=\"" + fmt_fixed(size - margin - 142.0, 2) + "\" y=\"" + fmt_fixed(ly, 2) +
               "\" font-size=\"14\" dominant-baseline=\"middle\">" + curves[i].first +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void emit_det_svg(const std::vector<std::pair<std::string, std::vector<DetPoint>>>& curves,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    out << det_curves_to_svg(curves);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace msdmad
