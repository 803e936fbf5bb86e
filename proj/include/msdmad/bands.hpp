#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace msdmad {

/// The seven trusted-capture spectral bands. The underlying value is the
/// 1-based band index k used by the score fusion sum.
enum class SpectralBand : std::uint8_t {
    B650 = 1,
    B710 = 2,
    B770 = 3,
    B830 = 4,
    B890 = 5,
    B950 = 6,
    WL = 7,  // WholeLight: captured without a spectral filter
};

inline constexpr std::array<SpectralBand, 7> kAllBands = {
    SpectralBand::B650, SpectralBand::B710, SpectralBand::B770, SpectralBand::B830,
    SpectralBand::B890, SpectralBand::B950, SpectralBand::WL,
};

constexpr int band_index(SpectralBand b) { return static_cast<int>(b); }

constexpr std::string_view band_name(SpectralBand b) {
    switch (b) {
        case SpectralBand::B650: return "B650";
        case SpectralBand::B710: return "B710";
        case SpectralBand::B770: return "B770";
        case SpectralBand::B830: return "B830";
        case SpectralBand::B890: return "B890";
        case SpectralBand::B950: return "B950";
        case SpectralBand::WL: return "WL";
    }
    return "?";
}

inline std::optional<SpectralBand> parse_band(std::string_view s) {
    for (SpectralBand b : kAllBands)
        if (s == band_name(b)) return b;
    return std::nullopt;
}

inline std::optional<SpectralBand> band_from_index(int k) {
    if (k < 1 || k > 7) return std::nullopt;
    return kAllBands[static_cast<std::size_t>(k - 1)];
}

enum class SessionId : std::uint8_t { Session1, Session2, Multispectral };

constexpr std::string_view session_name(SessionId s) {
    switch (s) {
        case SessionId::Session1: return "Session1";
        case SessionId::Session2: return "Session2";
        case SessionId::Multispectral: return "Multispectral";
    }
    return "?";
}

inline std::optional<SessionId> parse_session(std::string_view s) {
    if (s == "Session1") return SessionId::Session1;
    if (s == "Session2") return SessionId::Session2;
    if (s == "Multispectral") return SessionId::Multispectral;
    return std::nullopt;
}

/// Class label. Numeric values are the classifier's training targets.
enum class Label : std::uint8_t { BonaFide = 0, Morph = 1 };

constexpr std::string_view label_name(Label l) {
    return l == Label::BonaFide ? "BonaFide" : "Morph";
}

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "BonaFide") return Label::BonaFide;
    if (s == "Morph") return Label::Morph;
    return std::nullopt;
}

}  // namespace msdmad
