#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "msdmad/bands.hpp"
#include "msdmad/error.hpp"
#include "msdmad/raster.hpp"
#include "msdmad/rng.hpp"

namespace msdmad {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

inline std::vector<double> normalized(std::vector<double> v) {
    const double n = norm(v);
    if (n < 1e-12) throw ZeroVector("cannot normalize a (near-)zero vector");
    for (auto& x : v) x /= n;
    return v;
}

/// Face representation vector. Providers hand these out L2-normalized;
/// the cached norm is of the stored values.
struct EmbeddingVector {
    std::vector<double> values;
    double norm = 0.0;

    std::size_t dimension() const { return values.size(); }

    static EmbeddingVector from_unnormalized(std::vector<double> v) {
        EmbeddingVector e;
        e.values = normalized(std::move(v));
        e.norm = 1.0;
        return e;
    }
};

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension())
        throw DimensionMismatch("cosine of " + std::to_string(a.dimension()) + " vs " +
                                std::to_string(b.dimension()));
    if (a.norm < 1e-12 || b.norm < 1e-12) throw ZeroVector("cosine of zero-norm embedding");
    const double c = dot(a.values, b.values) / (a.norm * b.norm);
    return std::clamp(c, -1.0, 1.0);
}

enum class ProviderKind { ModelFile, Synthetic };

/// Where embeddings come from. ModelFile providers wrap a pretrained
/// network in an interchange format and are only available when the build
/// enables MSDMAD_WITH_ONNX; the default build ships the Synthetic
/// provider, which is enough for the whole evaluation pipeline.
struct ProviderDescriptor {
    std::string name;
    int dimension = 512;
    ProviderKind kind = ProviderKind::Synthetic;
    std::optional<std::string> model_path;  // ModelFile only
    std::optional<std::uint64_t> seed;      // Synthetic only

    void validate() const {
        if (dimension <= 0) throw ConfigError("provider '" + name + "' needs dimension > 0");
        if (kind == ProviderKind::ModelFile && !model_path)
            throw ConfigError("provider '" + name + "' is ModelFile but has no model_path");
        if (kind == ProviderKind::Synthetic && !seed)
            throw ConfigError("provider '" + name + "' is Synthetic but has no seed");
    }
};

namespace detail {

inline std::uint64_t hash_bytes(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Householder reflection x -> x - 2 (h.x) h for unit h.
inline void reflect(std::vector<double>& x, const std::vector<double>& h) {
    const double p = 2.0 * dot(x, h);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= p * h[i];
}

/// Seeded random orthogonal map: an index rotation followed by two
/// Householder reflections. O(D) storage and apply.
struct OrthogonalMap {
    std::size_t shift = 0;
    std::vector<double> h1, h2;

    static OrthogonalMap make(Rng rng, std::size_t dim) {
        OrthogonalMap q;
        q.shift = 1 + static_cast<std::size_t>(rng.uniform_index(dim > 1 ? dim - 1 : 1));
        q.h1 = normalized(rng.gaussian_vector(dim));
        q.h2 = normalized(rng.gaussian_vector(dim));
        return q;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[(i + shift) % x.size()];
        reflect(y, h1);
        reflect(y, h2);
        return y;
    }
};

constexpr int kMinModelImageSide = 112;

}  // namespace detail

#ifndef MSDMAD_WITH_ONNX
inline EmbeddingVector embed_model_file(const ProviderDescriptor& provider, const Raster&) {
    throw ModelLoadError("provider '" + provider.name +
                         "' needs a model runtime; this build ships only Synthetic providers");
}
#endif

/// Unit-normalized embedding, a pure function of (descriptor, image bytes).
/// The Synthetic provider derives it from a seeded hash of the pixel
/// buffer, so any change to the image changes the vector.
inline EmbeddingVector embed(const ProviderDescriptor& provider, const Raster& img) {
    provider.validate();
    if (provider.kind == ProviderKind::ModelFile) {
        if (img.width() < detail::kMinModelImageSide ||
            img.height() < detail::kMinModelImageSide)
            throw ImageTooSmall("model providers need at least 112x112 input, got " +
                                std::to_string(img.width()) + "x" +
                                std::to_string(img.height()));
        return embed_model_file(provider, img);
    }
    std::uint64_t h = detail::hash_bytes(img.data());
    h = hash_combine(h, static_cast<std::uint64_t>(img.width()));
    h = hash_combine(h, static_cast<std::uint64_t>(img.height()));
    h = hash_combine(h, static_cast<std::uint64_t>(img.channels()));
    Rng rng = Rng(*provider.seed).derive("image-embed", h);
    return EmbeddingVector::from_unnormalized(
        rng.gaussian_vector(static_cast<std::size_t>(provider.dimension)));
}

/// Synthetic per-(subject, band) embedding: a seeded unit base vector for
/// the subject, rotated by a band-specific orthogonal map, plus isotropic
/// N(0, noise_scale^2 I) Gaussian noise, re-normalized. noise_index
/// selects the draw within the per-(subject, band) stream, so repeated
/// captures are reproducible.
inline EmbeddingVector synthetic_subject_embedding(std::uint64_t seed,
                                                   const std::string& subject_id,
                                                   SpectralBand band, double noise_scale,
                                                   std::size_t dimension,
                                                   std::uint64_t noise_index = 0) {
    if (noise_scale < 0.0) throw ConfigError("noise_scale must be >= 0");
    const Rng root(seed);
    std::vector<double> base =
        normalized(root.derive("subject").derive(subject_id).gaussian_vector(dimension));

    const auto q = detail::OrthogonalMap::make(
        root.derive("band-rotation", static_cast<std::uint64_t>(band_index(band))), dimension);
    std::vector<double> v = q.apply(base);

    if (noise_scale > 0.0) {
        Rng noise = root.derive("noise").derive(subject_id).derive(
            "band", static_cast<std::uint64_t>(band_index(band)));
        Rng draw = noise.derive("sample", noise_index);
        for (auto& x : v) x += noise_scale * draw.gaussian();
    }
    return EmbeddingVector::from_unnormalized(std::move(v));
}

}  // namespace msdmad
