// Independent reference implementations used to check the library.
// Everything here is deliberately brute force and shares no code with
// the implementations under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

// --------------------------------------------------------------------------
// Exhaustive threshold sweep for detection metrics.
// Decision rule: attack iff score >= threshold.
// --------------------------------------------------------------------------

inline double sweep_apcer(const std::vector<double>& attack, double t) {
    std::size_t miss = 0;
    for (double s : attack)
        if (s < t) ++miss;
    return double(miss) / double(attack.size());
}

inline double sweep_bpcer(const std::vector<double>& bona, double t) {
    std::size_t fa = 0;
    for (double s : bona)
        if (s >= t) ++fa;
    return double(fa) / double(bona.size());
}

inline std::vector<double> sweep_thresholds(const std::vector<double>& bona,
                                            const std::vector<double>& attack) {
    std::vector<double> t;
    t.push_back(std::numeric_limits<double>::infinity());
    t.insert(t.end(), bona.begin(), bona.end());
    t.insert(t.end(), attack.begin(), attack.end());
    t.push_back(-std::numeric_limits<double>::infinity());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::reverse(t.begin(), t.end());
    return t;
}

struct SweepEer {
    double eer;
    double threshold;
};

// Scan every candidate threshold; keep the one minimizing |APCER-BPCER|,
// ties toward the lower midpoint, then the higher threshold.
inline SweepEer sweep_d_eer(const std::vector<double>& bona, const std::vector<double>& attack) {
    SweepEer best{std::numeric_limits<double>::infinity(), 0.0};
    double best_gap = std::numeric_limits<double>::infinity();
    for (double t : sweep_thresholds(bona, attack)) {
        const double a = sweep_apcer(attack, t);
        const double b = sweep_bpcer(bona, t);
        const double gap = std::fabs(a - b);
        const double mid = 0.5 * (a + b);
        if (gap < best_gap || (gap == best_gap && mid < best.eer)) {
            best_gap = gap;
            best = {mid, t};
        }
    }
    return best;
}

// Highest threshold whose APCER is within the target; reports its BPCER.
inline double sweep_bpcer_at_apcer(const std::vector<double>& bona,
                                   const std::vector<double>& attack, double target) {
    for (double t : sweep_thresholds(bona, attack)) {
        if (sweep_apcer(attack, t) <= target) return sweep_bpcer(bona, t);
    }
    return 1.0;
}

// --------------------------------------------------------------------------
// Circumcircle / triangulation checks.
// --------------------------------------------------------------------------

struct Pt {
    double x, y;
};

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a,b,c).
inline double incircle_det(Pt a, Pt b, Pt c, Pt d) {
    const double ax = a.x - d.x, ay = a.y - d.y;
    const double bx = b.x - d.x, by = b.y - d.y;
    const double cx = c.x - d.x, cy = c.y - d.y;
    const double a2 = ax * ax + ay * ay;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
}

inline double orient2d(Pt a, Pt b, Pt c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// Empty-circumcircle property of one triangle against every other point.
inline bool triangle_is_delaunay(const std::vector<Pt>& pts, int i, int j, int k, double tol) {
    Pt a = pts[i], b = pts[j], c = pts[k];
    if (orient2d(a, b, c) < 0) std::swap(b, c);
    for (std::size_t m = 0; m < pts.size(); ++m) {
        if (int(m) == i || int(m) == j || int(m) == k) continue;
        if (incircle_det(a, b, c, pts[m]) > tol) return false;
    }
    return true;
}

// --------------------------------------------------------------------------
// Bilinear sampling reference for warp checks.
// --------------------------------------------------------------------------
inline double bilinear_u8(const std::vector<std::vector<double>>& img, double x, double y) {
    const int h = int(img.size()), w = int(img[0].size());
    const auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    int x0 = int(std::floor(x)), y0 = int(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    x0 = clampi(x0, 0, w - 1);
    y0 = clampi(y0, 0, h - 1);
    const int x1 = clampi(x0 + 1, 0, w - 1), y1 = clampi(y0 + 1, 0, h - 1);
    const double top = img[y0][x0] * (1 - fx) + img[y0][x1] * fx;
    const double bot = img[y1][x0] * (1 - fx) + img[y1][x1] * fx;
    return top * (1 - fy) + bot * fy;
}

}  // namespace oracle
