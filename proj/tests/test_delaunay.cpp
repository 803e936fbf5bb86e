#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "msdmad/delaunay.hpp"
#include "msdmad/rng.hpp"
#include "oracles.hpp"

using namespace msdmad;

namespace {

std::vector<oracle::Pt> to_oracle(const std::vector<Point2d>& pts) {
    std::vector<oracle::Pt> o;
    for (const auto& p : pts) o.push_back({p.x, p.y});
    return o;
}

// Convex hull area by monotone chain + shoelace; the triangulation must
// tile exactly this region.
double hull_area(std::vector<Point2d> pts) {
    std::sort(pts.begin(), pts.end(),
              [](Point2d a, Point2d b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
    auto build = [&](bool upper) {
        std::vector<Point2d> h;
        for (std::size_t idx = 0; idx < pts.size(); ++idx) {
            const Point2d p = upper ? pts[pts.size() - 1 - idx] : pts[idx];
            while (h.size() >= 2 && cross2(h[h.size() - 2], h.back(), p) <= 0) h.pop_back();
            h.push_back(p);
        }
        return h;
    };
    auto lo = build(false), hi = build(true);
    lo.pop_back();
    hi.pop_back();
    lo.insert(lo.end(), hi.begin(), hi.end());
    double area = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const auto& p = lo[i];
        const auto& q = lo[(i + 1) % lo.size()];
        area += p.x * q.y - q.x * p.y;
    }
    return std::abs(area) / 2.0;
}

}  // namespace

TEST_CASE("three points give one triangle", "[delaunay]") {
    const auto tris = delaunay_triangulate({{0, 0}, {4, 0}, {2, 3}});
    REQUIRE(tris.size() == 1);
    CHECK(tris[0] == Triangle{0, 1, 2});
}

TEST_CASE("unit square splits along the lowest-index diagonal", "[delaunay]") {
    const std::vector<Point2d> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const auto tris = delaunay_triangulate(square);
    REQUIRE(tris.size() == 2);
    CHECK(tris[0] == Triangle{0, 1, 2});
    CHECK(tris[1] == Triangle{0, 2, 3});

    // Both diagonals satisfy the circumcircle property here (cocircular
    // tie); verify the chosen one does, with the same tolerance class.
    const auto opts = to_oracle(square);
    for (const auto& t : tris)
        CHECK(oracle::triangle_is_delaunay(opts, t.a, t.b, t.c, 1e-9));
}

TEST_CASE("a point strictly inside a triangle fans into three", "[delaunay]") {
    const std::vector<Point2d> pts = {{0, 0}, {10, 0}, {5, 9}, {5, 3}};
    const auto tris = delaunay_triangulate(pts);
    REQUIRE(tris.size() == 3);

    // Brute force: the only valid all-vertex triangulation is the fan
    // around vertex 3, and each fan triangle must pass the circumcircle
    // test against the remaining point.
    std::set<std::array<int, 3>> expected = {{0, 1, 3}, {1, 2, 3}, {0, 2, 3}};
    const auto opts = to_oracle(pts);
    for (const auto& t : tris) {
        CHECK(expected.count({t.a, t.b, t.c}) == 1);
        CHECK(oracle::triangle_is_delaunay(opts, t.a, t.b, t.c, 1e-9));
    }
}

TEST_CASE("collinear and tiny inputs are rejected", "[delaunay]") {
    CHECK_THROWS_AS(delaunay_triangulate({{0, 0}, {1, 1}}), DegenerateInput);
    CHECK_THROWS_AS(delaunay_triangulate({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), DegenerateInput);
}

TEST_CASE("random clouds: Delaunay property, coverage, determinism", "[delaunay]") {
    Rng rng(123);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<Point2d> pts;
        const int n = 10 + static_cast<int>(rng.uniform_index(30));
        for (int i = 0; i < n; ++i)
            pts.push_back({100.0 * rng.uniform(), 100.0 * rng.uniform()});

        const auto tris = delaunay_triangulate(pts);
        const auto opts = to_oracle(pts);

        // Empty circumcircle for every triangle against every other point.
        for (const auto& t : tris)
            CHECK(oracle::triangle_is_delaunay(opts, t.a, t.b, t.c,
                                               1e-6 * 100 * 100 * 100 * 100));

        // Every input point is a vertex of at least one triangle.
        std::set<int> used;
        for (const auto& t : tris) {
            used.insert(t.a);
            used.insert(t.b);
            used.insert(t.c);
        }
        CHECK(used.size() == pts.size());

        // Triangles tile the convex hull: areas sum to the hull area.
        double total = 0.0;
        for (const auto& t : tris)
            total += triangle_area(pts[t.a], pts[t.b], pts[t.c]);
        CHECK_THAT(total, Catch::Matchers::WithinRel(hull_area(pts), 1e-9));

        // Deterministic for identical input.
        const auto again = delaunay_triangulate(pts);
        REQUIRE(again.size() == tris.size());
        for (std::size_t i = 0; i < tris.size(); ++i) CHECK(again[i] == tris[i]);
    }
}

TEST_CASE("triangle interiors are pairwise disjoint (sampled)", "[delaunay]") {
    Rng rng(321);
    std::vector<Point2d> pts;
    for (int i = 0; i < 25; ++i) pts.push_back({50.0 * rng.uniform(), 50.0 * rng.uniform()});
    const auto tris = delaunay_triangulate(pts);

    auto strictly_inside = [&](const Triangle& t, Point2d p) {
        const Point2d a = pts[t.a], b = pts[t.b], c = pts[t.c];
        const double o = cross2(a, b, c);
        const double w0 = cross2(a, b, p) / o;
        const double w1 = cross2(b, c, p) / o;
        const double w2 = cross2(c, a, p) / o;
        return w0 > 1e-9 && w1 > 1e-9 && w2 > 1e-9;
    };

    for (int s = 0; s < 10000; ++s) {
        const Point2d p{50.0 * rng.uniform(), 50.0 * rng.uniform()};
        int hits = 0;
        for (const auto& t : tris)
            if (strictly_inside(t, p)) ++hits;
        CHECK(hits <= 1);
    }
}

TEST_CASE("grid with collinear frame points triangulates cleanly", "[delaunay]") {
    // Shapes like image frames have exactly collinear corner/midpoint runs.
    std::vector<Point2d> pts = {{0, 0},   {99, 0},  {99, 99}, {0, 99},
                                {49.5, 0}, {99, 49.5}, {49.5, 99}, {0, 49.5},
                                {30, 40},  {60, 55},  {47, 22}};
    const auto tris = delaunay_triangulate(pts);
    std::set<int> used;
    for (const auto& t : tris) {
        used.insert(t.a);
        used.insert(t.b);
        used.insert(t.c);
    }
    CHECK(used.size() == pts.size());
    double total = 0.0;
    for (const auto& t : tris) total += triangle_area(pts[t.a], pts[t.b], pts[t.c]);
    CHECK_THAT(total, Catch::Matchers::WithinRel(99.0 * 99.0, 1e-9));
}
