#include <catch2/catch_amalgamated.hpp>

#include "msdmad/geometry.hpp"
#include "msdmad/rng.hpp"

using namespace msdmad;

TEST_CASE("affine from identical triangles is the exact identity", "[geometry]") {
    const std::array<Point2d, 3> tri = {{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
    const auto t = affine_from_triangles(tri, tri);
    CHECK(t.a == 1.0);
    CHECK(t.b == 0.0);
    CHECK(t.c == 0.0);
    CHECK(t.d == 0.0);
    CHECK(t.e == 1.0);
    CHECK(t.f == 0.0);

    const std::array<Point2d, 3> odd = {{{3.5, 7.25}, {129.0, 42.0}, {8.0, 99.5}}};
    const auto u = affine_from_triangles(odd, odd);
    CHECK(u.a == 1.0);
    CHECK(u.b == 0.0);
    CHECK(u.e == 1.0);
}

TEST_CASE("affine recovers pure scale and pure translation", "[geometry]") {
    const std::array<Point2d, 3> src = {{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};

    const std::array<Point2d, 3> scaled = {{{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}}};
    const auto s = affine_from_triangles(src, scaled);
    CHECK(s.a == 2.0);
    CHECK(s.b == 0.0);
    CHECK(s.c == 0.0);
    CHECK(s.d == 0.0);
    CHECK(s.e == 2.0);
    CHECK(s.f == 0.0);

    const std::array<Point2d, 3> shifted = {{{3.0, 4.0}, {4.0, 4.0}, {3.0, 5.0}}};
    const auto t = affine_from_triangles(src, shifted);
    CHECK(t.a == 1.0);
    CHECK(t.b == 0.0);
    CHECK(t.c == 3.0);
    CHECK(t.d == 0.0);
    CHECK(t.e == 1.0);
    CHECK(t.f == 4.0);
}

TEST_CASE("affine maps src vertices onto dst vertices for random triangles", "[geometry]") {
    Rng rng(31);
    int done = 0;
    while (done < 10000) {
        std::array<Point2d, 3> src, dst;
        for (auto& p : src) p = {256.0 * rng.uniform(), 256.0 * rng.uniform()};
        for (auto& p : dst) p = {256.0 * rng.uniform(), 256.0 * rng.uniform()};
        if (triangle_area(src[0], src[1], src[2]) < 50.0) continue;
        const auto t = affine_from_triangles(src, dst);
        for (int i = 0; i < 3; ++i) {
            const Point2d got = t.apply(src[i]);
            CHECK(std::abs(got.x - dst[i].x) < 1e-9);
            CHECK(std::abs(got.y - dst[i].y) < 1e-9);
        }
        ++done;
    }
}

TEST_CASE("degenerate source triangle is rejected", "[geometry]") {
    const std::array<Point2d, 3> line = {{{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}}};
    const std::array<Point2d, 3> ok = {{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
    CHECK_THROWS_AS(affine_from_triangles(line, ok), DegenerateTriangle);
}

TEST_CASE("affine inverse composes to identity", "[geometry]") {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        std::array<Point2d, 3> src, dst;
        for (auto& p : src) p = {100.0 * rng.uniform(), 100.0 * rng.uniform()};
        for (auto& p : dst) p = {100.0 * rng.uniform(), 100.0 * rng.uniform()};
        if (triangle_area(src[0], src[1], src[2]) < 20.0 ||
            triangle_area(dst[0], dst[1], dst[2]) < 20.0) {
            --rep;
            continue;
        }
        const auto t = affine_from_triangles(src, dst);
        const auto inv = t.inverse();
        const Point2d p{37.5, 81.25};
        const Point2d back = inv.apply(t.apply(p));
        CHECK(std::abs(back.x - p.x) < 1e-8);
        CHECK(std::abs(back.y - p.y) < 1e-8);
    }
}
