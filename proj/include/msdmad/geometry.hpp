#pragma once

#include <array>
#include <cmath>

#include "msdmad/error.hpp"
#include "msdmad/text.hpp"

namespace msdmad {

struct Point2d {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(Point2d a, Point2d b) { return a.x == b.x && a.y == b.y; }

/// Triangle as vertex indices into a landmark set.
struct Triangle {
    int a = 0, b = 0, c = 0;
};

inline bool operator==(Triangle s, Triangle t) { return s.a == t.a && s.b == t.b && s.c == t.c; }

/// Twice the signed area of (p, q, r); positive when counter-clockwise
/// in a y-down image coordinate frame is not assumed -- callers only rely
/// on sign consistency and magnitude.
inline double cross2(Point2d p, Point2d q, Point2d r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
}

inline double triangle_area(Point2d p, Point2d q, Point2d r) {
    return 0.5 * std::abs(cross2(p, q, r));
}

/// 2x3 affine map (x, y) -> (a x + b y + c, d x + e y + f).
struct AffineTransform {
    double a = 1.0, b = 0.0, c = 0.0;
    double d = 0.0, e = 1.0, f = 0.0;

    Point2d apply(Point2d p) const {
        return {a * p.x + b * p.y + c, d * p.x + e * p.y + f};
    }

    double det() const { return a * e - b * d; }

    AffineTransform inverse() const {
        const double dd = det();
        if (std::abs(dd) <= 1e-12)
            throw DegenerateTriangle("affine transform is not invertible, |det| = " +
                                     fmt_double(std::abs(dd)));
        AffineTransform inv;
        inv.a = e / dd;
        inv.b = -b / dd;
        inv.d = -d / dd;
        inv.e = a / dd;
        inv.c = -(inv.a * c + inv.b * f);
        inv.f = -(inv.d * c + inv.e * f);
        return inv;
    }

    static AffineTransform identity() { return {}; }
};

/// The unique affine map taking each src vertex onto its dst vertex.
/// Solved by Cramer's rule; exact when the vertices are exactly
/// representable (identity, axis scales, translations come out bit-exact).
inline AffineTransform affine_from_triangles(const std::array<Point2d, 3>& src,
                                             const std::array<Point2d, 3>& dst) {
    const double area2 = cross2(src[0], src[1], src[2]);
    if (std::abs(area2) <= 2e-9)  // area > 1e-9 px^2 required
        throw DegenerateTriangle("source triangle area " + fmt_double(std::abs(area2) / 2.0));

    auto det3 = [](double m00, double m01, double m02, double m10, double m11, double m12,
                   double m20, double m21, double m22) {
        return m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
               m02 * (m10 * m21 - m11 * m20);
    };

    const double x1 = src[0].x, y1 = src[0].y;
    const double x2 = src[1].x, y2 = src[1].y;
    const double x3 = src[2].x, y3 = src[2].y;
    const double den = det3(x1, y1, 1, x2, y2, 1, x3, y3, 1);

    AffineTransform t;
    t.a = det3(dst[0].x, y1, 1, dst[1].x, y2, 1, dst[2].x, y3, 1) / den;
    t.b = det3(x1, dst[0].x, 1, x2, dst[1].x, 1, x3, dst[2].x, 1) / den;
    t.c = det3(x1, y1, dst[0].x, x2, y2, dst[1].x, x3, y3, dst[2].x) / den;
    t.d = det3(dst[0].y, y1, 1, dst[1].y, y2, 1, dst[2].y, y3, 1) / den;
    t.e = det3(x1, dst[0].y, 1, x2, dst[1].y, 1, x3, dst[2].y, 1) / den;
    t.f = det3(x1, y1, dst[0].y, x2, y2, dst[1].y, x3, y3, dst[2].y) / den;
    return t;
}

}  // namespace msdmad
