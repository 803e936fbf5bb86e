#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "msdmad/delaunay.hpp"
#include "msdmad/error.hpp"
#include "msdmad/geometry.hpp"
#include "msdmad/raster.hpp"
#include "msdmad/text.hpp"

namespace msdmad {

/// Facial landmark points in pixel coordinates, origin top-left. The
/// pipeline appends 8 frame points (corners + edge midpoints) before
/// triangulating so the warp covers the whole image.
struct LandmarkSet {
    std::vector<Point2d> points;

    std::size_t size() const { return points.size(); }
};

/// Landmark file: first line N, then N lines "x y".
inline LandmarkSet read_landmarks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open landmark file " + path.string());
    std::size_t n = 0;
    if (!(in >> n)) throw ParseError("landmark file missing point count: " + path.string());
    LandmarkSet lm;
    lm.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> lm.points[i].x >> lm.points[i].y))
            throw ParseError("landmark file truncated at point " + std::to_string(i) + ": " +
                             path.string());
    }
    return lm;
}

inline void write_landmarks(const LandmarkSet& lm, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << lm.points.size() << "\n";
    for (const auto& p : lm.points) out << fmt_double(p.x) << " " << fmt_double(p.y) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

/// Appends the 4 corners and 4 edge midpoints of the image frame, then
/// clamps every point into [0, W-1] x [0, H-1].
inline LandmarkSet augment_with_frame(const LandmarkSet& lm, int width, int height) {
    LandmarkSet out = lm;
    const double w = width - 1.0, h = height - 1.0;
    const Point2d frame[] = {
        {0.0, 0.0},     {w, 0.0},       {w, h},         {0.0, h},
        {w / 2.0, 0.0}, {w, h / 2.0},   {w / 2.0, h},   {0.0, h / 2.0},
    };
    out.points.insert(out.points.end(), std::begin(frame), std::end(frame));
    for (auto& p : out.points) {
        p.x = std::clamp(p.x, 0.0, w);
        p.y = std::clamp(p.y, 0.0, h);
    }
    return out;
}

/// point_i = (1 - alpha) * a_i + alpha * b_i.
inline LandmarkSet average_landmarks(const LandmarkSet& a, const LandmarkSet& b, double alpha) {
    if (a.size() != b.size())
        throw CardinalityMismatch("landmark sets of size " + std::to_string(a.size()) +
                                  " vs " + std::to_string(b.size()));
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError("alpha must lie in [0,1], got " + fmt_double(alpha));
    LandmarkSet mean;
    mean.points.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        mean.points.push_back({(1.0 - alpha) * a.points[i].x + alpha * b.points[i].x,
                               (1.0 - alpha) * a.points[i].y + alpha * b.points[i].y});
    return mean;
}

struct MorphSpec {
    double alpha = 0.5;  // blend weight of parent B
    enum class Interp { Bilinear } interpolation = Interp::Bilinear;
    int width = 0;   // 0: take from the first input image
    int height = 0;
};

namespace detail {

inline std::uint8_t round_half_up_u8(double v) {
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

inline double sample_bilinear(const Raster& img, double x, double y, int c) {
    const auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    x0 = clampi(x0, 0, img.width() - 1);
    y0 = clampi(y0, 0, img.height() - 1);
    const int x1 = clampi(x0 + 1, 0, img.width() - 1);
    const int y1 = clampi(y0 + 1, 0, img.height() - 1);
    const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
    const double bot = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
    return top * (1.0 - fy) + bot * fy;
}

}  // namespace detail

/// Inverse-mapped piecewise-affine warp: every output pixel inside a dst
/// triangle takes the bilinear sample of img at the corresponding src
/// location; pixels outside all triangles stay 0. Triangles whose src or
/// dst shape is degenerate (area <= 1e-9) are skipped. Pixels on shared
/// edges go to the first covering triangle in list order, so the result
/// is a pure function of the inputs.
inline Raster warp_image(const Raster& img, const std::vector<Triangle>& triangles,
                         const LandmarkSet& src_shape, const LandmarkSet& dst_shape,
                         const MorphSpec& spec) {
    if (src_shape.size() != dst_shape.size())
        throw CardinalityMismatch("src and dst shapes differ in size");
    const int out_w = spec.width > 0 ? spec.width : img.width();
    const int out_h = spec.height > 0 ? spec.height : img.height();
    Raster out(out_w, out_h, img.channels(), 0);
    std::vector<std::uint8_t> covered(static_cast<std::size_t>(out_w) * out_h, 0);

    const int n = static_cast<int>(src_shape.size());
    for (const Triangle& tri : triangles) {
        if (tri.a < 0 || tri.b < 0 || tri.c < 0 || tri.a >= n || tri.b >= n || tri.c >= n)
            throw IndexOutOfRange("triangle vertex index outside landmark set");
        const std::array<Point2d, 3> dst = {dst_shape.points[tri.a], dst_shape.points[tri.b],
                                            dst_shape.points[tri.c]};
        const std::array<Point2d, 3> src = {src_shape.points[tri.a], src_shape.points[tri.b],
                                            src_shape.points[tri.c]};
        if (triangle_area(dst[0], dst[1], dst[2]) <= 1e-9 ||
            triangle_area(src[0], src[1], src[2]) <= 1e-9)
            continue;
        const AffineTransform to_src = affine_from_triangles(dst, src);

        const int x_lo = std::max(0, static_cast<int>(std::floor(
                                         std::min({dst[0].x, dst[1].x, dst[2].x}))));
        const int x_hi = std::min(out_w - 1, static_cast<int>(std::ceil(
                                                 std::max({dst[0].x, dst[1].x, dst[2].x}))));
        const int y_lo = std::max(0, static_cast<int>(std::floor(
                                         std::min({dst[0].y, dst[1].y, dst[2].y}))));
        const int y_hi = std::min(out_h - 1, static_cast<int>(std::ceil(
                                                 std::max({dst[0].y, dst[1].y, dst[2].y}))));

        const double orient = cross2(dst[0], dst[1], dst[2]);
        for (int y = y_lo; y <= y_hi; ++y) {
            for (int x = x_lo; x <= x_hi; ++x) {
                if (covered[static_cast<std::size_t>(y) * out_w + x]) continue;
                const Point2d p{static_cast<double>(x), static_cast<double>(y)};
                // Barycentric sign test with a small edge tolerance.
                const double w0 = cross2(dst[0], dst[1], p) / orient;
                const double w1 = cross2(dst[1], dst[2], p) / orient;
                const double w2 = cross2(dst[2], dst[0], p) / orient;
                if (w0 < -1e-9 || w1 < -1e-9 || w2 < -1e-9) continue;
                const Point2d s = to_src.apply(p);
                for (int c = 0; c < img.channels(); ++c)
                    out.at(x, y, c) =
                        detail::round_half_up_u8(detail::sample_bilinear(img, s.x, s.y, c));
                covered[static_cast<std::size_t>(y) * out_w + x] = 1;
            }
        }
    }
    return out;
}

/// out = (1 - alpha) * a + alpha * b per channel, rounded half-up.
inline Raster alpha_blend(const Raster& a, const Raster& b, double alpha) {
    if (!a.same_shape(b)) throw ShapeMismatch("blend inputs differ in shape");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError("alpha must lie in [0,1], got " + fmt_double(alpha));
    Raster out(a.width(), a.height(), a.channels());
    for (std::size_t i = 0; i < a.data().size(); ++i)
        out.data()[i] = detail::round_half_up_u8((1.0 - alpha) * a.data()[i] +
                                                 alpha * b.data()[i]);
    return out;
}

/// Landmark morph: average the (frame-augmented) shapes, triangulate the
/// mean shape, warp both parents onto it, blend.
inline Raster generate_morph(const Raster& img_a, const LandmarkSet& lm_a, const Raster& img_b,
                             const LandmarkSet& lm_b, const MorphSpec& spec) {
    if (lm_a.size() != lm_b.size())
        throw CardinalityMismatch("parent landmark sets differ in size");
    if (!img_a.same_shape(img_b)) throw ShapeMismatch("parent images differ in shape");

    MorphSpec resolved = spec;
    if (resolved.width <= 0) resolved.width = img_a.width();
    if (resolved.height <= 0) resolved.height = img_a.height();

    const LandmarkSet aug_a = augment_with_frame(lm_a, resolved.width, resolved.height);
    const LandmarkSet aug_b = augment_with_frame(lm_b, resolved.width, resolved.height);
    const LandmarkSet mean = average_landmarks(aug_a, aug_b, resolved.alpha);
    const std::vector<Triangle> tris = delaunay_triangulate(mean.points);

    std::size_t degenerate = 0;
    for (const Triangle& t : tris)
        if (triangle_area(mean.points[t.a], mean.points[t.b], mean.points[t.c]) <= 1e-9)
            ++degenerate;
    if (degenerate > 0)
        std::cerr << "warning: dropping " << degenerate
                  << " degenerate mean-shape triangle(s)\n";

    const Raster warped_a = warp_image(img_a, tris, aug_a, mean, resolved);
    const Raster warped_b = warp_image(img_b, tris, aug_b, mean, resolved);
    return alpha_blend(warped_a, warped_b, resolved.alpha);
}

/// Generated morph file naming: morph_<subjectA>_<subjectB>_a<alpha*100>.png
inline std::string morph_filename(const std::string& subject_a, const std::string& subject_b,
                                  double alpha) {
    const int a100 = static_cast<int>(std::lround(alpha * 100.0));
    return "morph_" + subject_a + "_" + subject_b + "_a" + std::to_string(a100) + ".png";
}

}  // namespace msdmad
