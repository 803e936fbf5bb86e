#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "msdmad/embedding.hpp"

using namespace msdmad;

namespace {

ProviderDescriptor synthetic_provider(int dim = 64, std::uint64_t seed = 7) {
    ProviderDescriptor p;
    p.name = "stub";
    p.dimension = dim;
    p.kind = ProviderKind::Synthetic;
    p.seed = seed;
    return p;
}

Raster noise_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Raster img(w, h, 1);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.uniform_index(256));
    return img;
}

}  // namespace

TEST_CASE("synthetic embed is a pure function of descriptor and image bytes", "[embedding]") {
    const auto provider = synthetic_provider();
    const Raster img = noise_image(16, 16, 3);

    const auto first = embed(provider, img);
    for (int i = 0; i < 100; ++i) {
        const auto again = embed(provider, img);
        CHECK(again.values == first.values);
    }
    CHECK_THAT(norm(first.values), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK(first.dimension() == 64);

    // One-pixel change moves the vector.
    Raster tweaked = img;
    tweaked.at(5, 5) = static_cast<std::uint8_t>(tweaked.at(5, 5) ^ 1);
    CHECK(embed(provider, tweaked).values != first.values);

    // Different provider seed, different space.
    CHECK(embed(synthetic_provider(64, 8), img).values != first.values);
}

TEST_CASE("model-file providers are gated and validated", "[embedding]") {
    ProviderDescriptor p;
    p.name = "net";
    p.kind = ProviderKind::ModelFile;
    p.dimension = 512;
    CHECK_THROWS_AS(embed(p, noise_image(112, 112, 1)), ConfigError);  // missing model_path

    p.model_path = "weights.onnx";
    CHECK_THROWS_AS(embed(p, noise_image(50, 50, 1)), ImageTooSmall);
    CHECK_THROWS_AS(embed(p, noise_image(112, 112, 1)), ModelLoadError);  // default build
}

TEST_CASE("cosine similarity worked examples", "[embedding]") {
    EmbeddingVector a{{1.0, 0.0}, 1.0};
    EmbeddingVector b{{1.0, 0.0}, 1.0};
    CHECK(cosine_similarity(a, b) == 1.0);

    EmbeddingVector c{{0.0, 1.0}, 1.0};
    CHECK(cosine_similarity(a, c) == 0.0);

    EmbeddingVector d{{-1.0, 0.0}, 1.0};
    CHECK(cosine_similarity(a, d) == -1.0);

    EmbeddingVector e{{1.0, 0.0, 0.0}, 1.0};
    CHECK_THROWS_AS(cosine_similarity(a, e), DimensionMismatch);

    EmbeddingVector z{{0.0, 0.0}, 0.0};
    CHECK_THROWS_AS(cosine_similarity(a, z), ZeroVector);
}

TEST_CASE("cosine is symmetric and scale invariant", "[embedding]") {
    Rng rng(12);
    for (int rep = 0; rep < 200; ++rep) {
        EmbeddingVector a, b;
        a.values = rng.gaussian_vector(16);
        b.values = rng.gaussian_vector(16);
        a.norm = norm(a.values);
        b.norm = norm(b.values);
        CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));

        EmbeddingVector scaled = a;
        for (auto& v : scaled.values) v *= 3.5;
        scaled.norm = norm(scaled.values);
        CHECK_THAT(cosine_similarity(scaled, b),
                   Catch::Matchers::WithinAbs(cosine_similarity(a, b), 1e-12));
    }
}

TEST_CASE("subject embeddings are deterministic and unit norm", "[embedding]") {
    const auto a = synthetic_subject_embedding(42, "subj1", SpectralBand::B650, 0.0, 128);
    const auto b = synthetic_subject_embedding(42, "subj1", SpectralBand::B650, 0.0, 128);
    CHECK(a.values == b.values);
    CHECK_THAT(norm(a.values), Catch::Matchers::WithinAbs(1.0, 1e-9));

    // Noise draws are reproducible per sample index and differ across indices.
    const auto n0 = synthetic_subject_embedding(42, "subj1", SpectralBand::B650, 0.1, 128, 0);
    const auto n0b = synthetic_subject_embedding(42, "subj1", SpectralBand::B650, 0.1, 128, 0);
    const auto n1 = synthetic_subject_embedding(42, "subj1", SpectralBand::B650, 0.1, 128, 1);
    CHECK(n0.values == n0b.values);
    CHECK(n0.values != n1.values);

    CHECK_THROWS_AS(synthetic_subject_embedding(42, "s", SpectralBand::WL, -0.5, 16),
                    ConfigError);
}

TEST_CASE("band maps are orthogonal: pairwise cosines survive the rotation", "[embedding]") {
    // dot(Q u, Q v) == dot(u, v) for any orthogonal Q, so the cosine of two
    // subjects must be identical under every band's rotation.
    const auto u1 = synthetic_subject_embedding(9, "alice", SpectralBand::B650, 0.0, 64);
    const auto v1 = synthetic_subject_embedding(9, "bob", SpectralBand::B650, 0.0, 64);
    const double c1 = cosine_similarity(u1, v1);
    for (SpectralBand band : {SpectralBand::B830, SpectralBand::WL}) {
        const auto u = synthetic_subject_embedding(9, "alice", band, 0.0, 64);
        const auto v = synthetic_subject_embedding(9, "bob", band, 0.0, 64);
        CHECK_THAT(cosine_similarity(u, v), Catch::Matchers::WithinAbs(c1, 1e-12));
    }

    // Cross-band cosine of one subject is a fixed deterministic value.
    const auto wl = synthetic_subject_embedding(9, "alice", SpectralBand::WL, 0.0, 64);
    const double cross = cosine_similarity(u1, wl);
    const auto wl2 = synthetic_subject_embedding(9, "alice", SpectralBand::WL, 0.0, 64);
    CHECK(cosine_similarity(u1, wl2) == cross);
    CHECK(std::abs(cross) < 1.0);
}

TEST_CASE("distinct subjects are near-orthogonal at D=512", "[embedding]") {
    // Concentration of independent unit vectors: |cos| < 0.2 is ~9 sigma.
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto a = synthetic_subject_embedding(100, "s" + std::to_string(2 * i),
                                                   SpectralBand::B710, 0.0, 512);
        const auto b = synthetic_subject_embedding(100, "s" + std::to_string(2 * i + 1),
                                                   SpectralBand::B710, 0.0, 512);
        if (std::abs(cosine_similarity(a, b)) >= 0.2) ++violations;
    }
    CHECK(violations <= 10);  // > 99.9% within bound
}
