#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "msdmad/error.hpp"
#include "msdmad/geometry.hpp"

namespace msdmad {

namespace detail {

/// > 0 when d lies strictly inside the circumcircle of (a,b,c), which must
/// be counter-clockwise (cross2 > 0).
inline double incircle_det(Point2d a, Point2d b, Point2d c, Point2d d) {
    const double ax = a.x - d.x, ay = a.y - d.y;
    const double bx = b.x - d.x, by = b.y - d.y;
    const double cx = c.x - d.x, cy = c.y - d.y;
    const double a2 = ax * ax + ay * ay;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
}

/// Cocircularity tolerance a few ulps above the determinant's rounding
/// noise, which scales like length^4.
inline double incircle_tol(Point2d a, Point2d b, Point2d c, Point2d d) {
    const double m = std::max({std::abs(a.x - d.x), std::abs(a.y - d.y), std::abs(b.x - d.x),
                               std::abs(b.y - d.y), std::abs(c.x - d.x), std::abs(c.y - d.y),
                               1.0});
    return 1e-13 * m * m * m * m;
}

struct DTri {
    std::array<int, 3> v;
    bool alive = true;
};

inline std::array<int, 3> sorted_triple(int a, int b, int c) {
    std::array<int, 3> t{a, b, c};
    std::sort(t.begin(), t.end());
    return t;
}

}  // namespace detail

/// Delaunay triangulation via incremental insertion (Bowyer-Watson) with a
/// final canonicalization pass. Deterministic for a given input order:
/// beyond the usual empty-circumcircle property, exact cocircular ties are
/// resolved toward the lexicographically smallest sorted vertex-index
/// triples, so e.g. axis-aligned squares always split along the diagonal
/// through the lowest-indexed corner.
///
/// Exactly coincident points after the first occurrence are skipped; they
/// end up incident to no triangle.
inline std::vector<Triangle> delaunay_triangulate(const std::vector<Point2d>& points) {
    using detail::DTri;
    const int n = static_cast<int>(points.size());
    if (n < 3) throw DegenerateInput("need at least 3 points, got " + std::to_string(n));

    // Super-triangle comfortably enclosing everything.
    double min_x = points[0].x, max_x = points[0].x;
    double min_y = points[0].y, max_y = points[0].y;
    for (const auto& p : points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);
    const double span = std::max({max_x - min_x, max_y - min_y, 1.0});

    std::vector<Point2d> verts(points);
    verts.push_back({cx - 30.0 * span, cy - 20.0 * span});
    verts.push_back({cx + 30.0 * span, cy - 20.0 * span});
    verts.push_back({cx, cy + 30.0 * span});
    const int s0 = n, s1 = n + 1, s2 = n + 2;

    std::vector<DTri> tris;
    tris.push_back({{s0, s1, s2}});

    auto ccw = [&](int i, int j, int k) {
        std::array<int, 3> t{i, j, k};
        if (cross2(verts[t[0]], verts[t[1]], verts[t[2]]) < 0.0) std::swap(t[1], t[2]);
        return t;
    };

    // Conflict test for the cavity. Super vertices act as points at
    // infinity: a triangle with one super vertex conflicts with any point
    // on (or beyond) the line of its real edge, so hull slivers with huge
    // circumcircles are never cut off by the finite scaffolding.
    auto in_conflict = [&](const DTri& tri, int pi) {
        int supers = 0;
        for (int v : tri.v)
            if (v >= n) ++supers;
        if (supers == 1) {
            int sv = -1, ra = -1, rb = -1;
            for (int v : tri.v) {
                if (v >= n)
                    sv = v;
                else if (ra < 0)
                    ra = v;
                else
                    rb = v;
            }
            const double side = cross2(verts[ra], verts[rb], verts[sv]);
            const double s = cross2(verts[ra], verts[rb], verts[pi]);
            return side > 0.0 ? s >= 0.0 : s <= 0.0;
        }
        const auto o = ccw(tri.v[0], tri.v[1], tri.v[2]);
        const double det = detail::incircle_det(verts[o[0]], verts[o[1]], verts[o[2]], verts[pi]);
        return det > detail::incircle_tol(verts[o[0]], verts[o[1]], verts[o[2]], verts[pi]);
    };

    for (int pi = 0; pi < n; ++pi) {
        bool duplicate = false;
        for (int q = 0; q < pi; ++q)
            if (verts[q] == verts[pi]) duplicate = true;
        if (duplicate) continue;

        std::vector<int> cavity;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!tris[t].alive) continue;
            if (in_conflict(tris[t], pi)) cavity.push_back(static_cast<int>(t));
        }
        // Boundary = edges used by exactly one cavity triangle.
        std::map<std::pair<int, int>, int> edge_uses;
        for (int t : cavity) {
            const auto& v = tris[t].v;
            for (int e = 0; e < 3; ++e) {
                const int a = v[e], b = v[(e + 1) % 3];
                ++edge_uses[{std::min(a, b), std::max(a, b)}];
            }
        }
        for (int t : cavity) tris[t].alive = false;
        for (const auto& [edge, uses] : edge_uses) {
            if (uses != 1) continue;
            if (std::abs(cross2(verts[edge.first], verts[edge.second], verts[pi])) == 0.0)
                continue;  // point exactly on the boundary edge line
            tris.push_back({{edge.first, edge.second, pi}});
        }
    }

    // Drop the scaffolding.
    std::vector<DTri> result;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        result.push_back(t);
    }
    if (result.empty()) throw DegenerateInput("all points are collinear");

    // Canonicalization: restore any tolerance-slipped Delaunay edges and
    // break exact cocircular ties toward the smallest index triples.
    const int max_passes = 100 + 4 * n;
    for (int pass = 0;; ++pass) {
        if (pass >= max_passes)
            throw NumericError("triangulation flip pass failed to converge");
        std::map<std::pair<int, int>, std::vector<int>> edges;
        for (std::size_t t = 0; t < result.size(); ++t)
            for (int e = 0; e < 3; ++e) {
                const int a = result[t].v[e], b = result[t].v[(e + 1) % 3];
                edges[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(t));
            }

        bool flipped = false;
        for (const auto& [edge, owners] : edges) {
            if (owners.size() != 2) continue;
            const auto [u, v] = edge;
            auto third = [&](int t) {
                for (int x : result[t].v)
                    if (x != u && x != v) return x;
                return -1;
            };
            const int t1 = owners[0], t2 = owners[1];
            const int p = third(t1), q = third(t2);

            // A flip is only geometrically valid on a strictly convex quad.
            const double sp = cross2(verts[u], verts[v], verts[p]);
            const double sq = cross2(verts[u], verts[v], verts[q]);
            const double su = cross2(verts[p], verts[q], verts[u]);
            const double sv = cross2(verts[p], verts[q], verts[v]);
            if (!(sp * sq < 0.0 && su * sv < 0.0)) continue;

            const auto o = ccw(u, v, p);
            const double det = detail::incircle_det(verts[o[0]], verts[o[1]], verts[o[2]],
                                                    verts[q]);
            const double tol =
                detail::incircle_tol(verts[o[0]], verts[o[1]], verts[o[2]], verts[q]);

            bool do_flip = det > tol;
            if (!do_flip && std::abs(det) <= tol) {
                std::array<std::array<int, 3>, 2> current{detail::sorted_triple(u, v, p),
                                                          detail::sorted_triple(u, v, q)};
                std::array<std::array<int, 3>, 2> after{detail::sorted_triple(p, q, u),
                                                        detail::sorted_triple(p, q, v)};
                std::sort(current.begin(), current.end());
                std::sort(after.begin(), after.end());
                do_flip = after < current;
            }
            if (do_flip) {
                result[t1].v = {p, q, u};
                result[t2].v = {p, q, v};
                flipped = true;
                break;  // edge map is stale now; rebuild
            }
        }
        if (!flipped) break;
    }

    std::vector<Triangle> out;
    out.reserve(result.size());
    for (const auto& t : result) {
        const auto s = detail::sorted_triple(t.v[0], t.v[1], t.v[2]);
        out.push_back({s[0], s[1], s[2]});
    }
    std::sort(out.begin(), out.end(), [](const Triangle& x, const Triangle& y) {
        return std::tie(x.a, x.b, x.c) < std::tie(y.a, y.b, y.c);
    });
    return out;
}

}  // namespace msdmad
