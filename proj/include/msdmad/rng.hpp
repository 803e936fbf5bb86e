#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace msdmad {

/// splitmix64 finalizer. Used both as a PRNG step and as a mixing
/// function when deriving independent streams from (seed, tag) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

/// FNV-1a over the bytes of a string, folded into an existing seed.
constexpr std::uint64_t hash_str(std::uint64_t seed, std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return hash_combine(seed, h);
}

/// Deterministic random stream. All stochastic behaviour in the toolkit
/// goes through this class so that results depend only on explicit seeds,
/// not on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    /// Independent substream for a named purpose.
    Rng derive(std::string_view tag) const { return Rng(hash_str(state_, tag)); }
    Rng derive(std::string_view tag, std::uint64_t n) const {
        return Rng(hash_combine(hash_str(state_, tag), n));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; caches the spare draw.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::vector<double> gaussian_vector(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = gaussian();
        return v;
    }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    /// Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace msdmad
