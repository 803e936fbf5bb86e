#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "msdmad/bands.hpp"
#include "msdmad/embedding.hpp"
#include "msdmad/error.hpp"
#include "msdmad/text.hpp"

namespace msdmad {

enum class DmadMethod : std::uint8_t { DiffFeature = 0, SlerpFeature = 1 };

constexpr std::string_view method_name(DmadMethod m) {
    return m == DmadMethod::DiffFeature ? "DiffFeature" : "SlerpFeature";
}

inline std::optional<DmadMethod> parse_method(std::string_view s) {
    if (s == "DiffFeature") return DmadMethod::DiffFeature;
    if (s == "SlerpFeature") return DmadMethod::SlerpFeature;
    return std::nullopt;
}

/// Differential feature for one (reference, trusted) comparison on one
/// spectral band.
struct DmadFeature {
    std::vector<double> values;
    DmadMethod method = DmadMethod::DiffFeature;
    SpectralBand band = SpectralBand::WL;
    std::string reference_id;
    std::string trusted_id;
    bool zero_substituted = false;  // a zero input was canonicalized during fusion
};

/// Signed element-wise difference of the (unit-normalized) embeddings.
/// With absolute set, |ref - trusted| element-wise instead (ablation flag).
inline DmadFeature difference_feature(const EmbeddingVector& ref,
                                      const EmbeddingVector& trusted, SpectralBand band,
                                      const std::string& reference_id,
                                      const std::string& trusted_id, bool absolute = false) {
    if (ref.dimension() != trusted.dimension())
        throw DimensionMismatch("difference of " + std::to_string(ref.dimension()) + " vs " +
                                std::to_string(trusted.dimension()));
    DmadFeature f;
    f.method = DmadMethod::DiffFeature;
    f.band = band;
    f.reference_id = reference_id;
    f.trusted_id = trusted_id;
    f.values.resize(ref.dimension());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double d = ref.values[i] - trusted.values[i];
        f.values[i] = absolute ? std::abs(d) : d;
    }
    return f;
}

struct SlerpParams {
    std::vector<double> t_schedule = {0.5, 0.5, 0.5};  // one t per tree level
    double parallel_epsilon = 1e-7;   // below this angle, fall back to lerp
    double antipodal_epsilon = 1e-7;  // pi - angle below this is an error

    void validate() const {
        for (double t : t_schedule)
            if (!(t >= 0.0 && t <= 1.0))
                throw ConfigError("slerp t must lie in [0,1], got " + fmt_double(t));
        if (t_schedule.size() < 3)
            throw ConfigError("t_schedule needs 3 levels for the 6-input tree");
    }
};

/// Constant-angular-velocity interpolation between unit vectors:
///   out = [sin((1-t) W) v0 + sin(t W) v1] / sin(W),  W = arccos(v0 . v1).
/// Near-parallel inputs fall back to normalized linear interpolation;
/// antipodal inputs have no defined interpolation plane.
inline std::vector<double> slerp(const std::vector<double>& v0, const std::vector<double>& v1,
                                 double t, const SlerpParams& params = {}) {
    if (v0.size() != v1.size())
        throw DimensionMismatch("slerp of " + std::to_string(v0.size()) + " vs " +
                                std::to_string(v1.size()));
    const double c = std::clamp(dot(v0, v1), -1.0, 1.0);
    const double omega = std::acos(c);
    constexpr double kPi = 3.14159265358979323846;
    if (kPi - omega < params.antipodal_epsilon)
        throw AntipodalVectors("angle " + fmt_double(omega) + " rad leaves the plane undefined");

    std::vector<double> out(v0.size());
    if (omega < params.parallel_epsilon) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (1.0 - t) * v0[i] + t * v1[i];
        return normalized(std::move(out));
    }
    const double s = std::sin(omega);
    const double w0 = std::sin((1.0 - t) * omega) / s;
    const double w1 = std::sin(t * omega) / s;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = w0 * v0[i] + w1 * v1[i];
    return out;
}

/// Fuses six per-network difference features over a balanced tree:
/// level 1 pairs (1,2), (3,4), (5,6); level 2 joins the first two results;
/// level 3 joins in the third. Inputs are unit-normalized first; a zero
/// input is replaced by the first canonical basis vector and the
/// substitution is flagged on the result.
inline DmadFeature hierarchical_slerp_fuse(const std::vector<DmadFeature>& features,
                                           const SlerpParams& params = {}) {
    if (features.size() != 6)
        throw WrongArity("hierarchical fusion takes exactly 6 features, got " +
                         std::to_string(features.size()));
    params.validate();
    const std::size_t dim = features[0].values.size();
    bool substituted = false;

    std::array<std::vector<double>, 6> unit;
    for (std::size_t i = 0; i < 6; ++i) {
        if (features[i].values.size() != dim)
            throw DimensionMismatch("fusion input " + std::to_string(i) + " has dimension " +
                                    std::to_string(features[i].values.size()) + ", expected " +
                                    std::to_string(dim));
        if (norm(features[i].values) < 1e-12) {
            unit[i].assign(dim, 0.0);
            unit[i][0] = 1.0;
            substituted = true;
        } else {
            unit[i] = normalized(features[i].values);
        }
    }

    const auto l1a = slerp(unit[0], unit[1], params.t_schedule[0], params);
    const auto l1b = slerp(unit[2], unit[3], params.t_schedule[0], params);
    const auto l1c = slerp(unit[4], unit[5], params.t_schedule[0], params);
    const auto l2 = slerp(l1a, l1b, params.t_schedule[1], params);

    DmadFeature out;
    out.values = slerp(l2, l1c, params.t_schedule[2], params);
    out.method = DmadMethod::SlerpFeature;
    out.band = features[0].band;
    out.reference_id = features[0].reference_id;
    out.trusted_id = features[0].trusted_id;
    out.zero_substituted = substituted;
    return out;
}

// ---------------------------------------------------------------------------
// Binary feature records: magic "DMF1", method byte, band byte (1..7 fusion
// index, 0 for band-less vectors), dimension u32 LE, then dimension f64 LE.
// A .dmf file holds one record; a .dmfs stream holds them back to back.
// ---------------------------------------------------------------------------

struct DmfRecord {
    DmadMethod method = DmadMethod::DiffFeature;
    std::uint8_t band_byte = 0;  // 0 = no band
    std::vector<double> values;
};

namespace detail {

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff),
                           static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

inline void put_f64_le(std::ostream& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

inline std::uint32_t get_u32_le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

inline double get_f64_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

}  // namespace detail

inline void write_dmf_record(std::ostream& out, const DmfRecord& rec) {
    out.write("DMF1", 4);
    out.put(static_cast<char>(rec.method));
    out.put(static_cast<char>(rec.band_byte));
    detail::put_u32_le(out, static_cast<std::uint32_t>(rec.values.size()));
    for (double v : rec.values) detail::put_f64_le(out, v);
    if (!out) throw IoError("feature record write failed");
}

/// Reads one record; returns false at clean end-of-stream.
inline bool read_dmf_record(std::istream& in, DmfRecord& rec) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() == 0 && in.eof()) return false;
    if (in.gcount() != 4 || std::string_view(magic, 4) != "DMF1")
        throw ParseError("bad feature record magic");
    const int method = in.get();
    const int band = in.get();
    if (method < 0 || method > 1 || band < 0 || band > 7)
        throw ParseError("bad feature record header");
    rec.method = static_cast<DmadMethod>(method);
    rec.band_byte = static_cast<std::uint8_t>(band);
    const std::uint32_t dim = detail::get_u32_le(in);
    if (!in || dim == 0 || dim > (1u << 24)) throw ParseError("bad feature record dimension");
    rec.values.resize(dim);
    for (auto& v : rec.values) v = detail::get_f64_le(in);
    if (!in) throw ParseError("truncated feature record");
    return true;
}

inline void write_feature_file(const std::filesystem::path& path, const DmfRecord& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_dmf_record(out, rec);
}

inline DmfRecord read_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    DmfRecord rec;
    if (!read_dmf_record(in, rec)) throw ParseError("empty feature file " + path.string());
    return rec;
}

inline std::vector<DmfRecord> read_feature_stream(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<DmfRecord> records;
    DmfRecord rec;
    while (read_dmf_record(in, rec)) records.push_back(rec);
    return records;
}

/// Sidecar index row for a stored feature. Rows appear in the same order
/// as the records inside their feature file.
struct FeatureIndexRow {
    std::string feature_file;
    std::string reference_id;
    std::string trusted_id;
    SpectralBand band = SpectralBand::WL;
    Label label = Label::BonaFide;
};

inline void write_feature_index(const std::filesystem::path& path,
                                const std::vector<FeatureIndexRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "feature_file,reference_id,trusted_id,band,label\n";
    for (const auto& r : rows)
        out << r.feature_file << "," << r.reference_id << "," << r.trusted_id << ","
            << band_name(r.band) << "," << label_name(r.label) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::vector<FeatureIndexRow> read_feature_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "feature_file,reference_id,trusted_id,band,label")
        throw ParseError("bad feature index header in " + path.string());
    std::vector<FeatureIndexRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 5) throw ParseError("bad feature index row: " + line);
        FeatureIndexRow r;
        r.feature_file = cols[0];
        r.reference_id = cols[1];
        r.trusted_id = cols[2];
        const auto band = parse_band(cols[3]);
        const auto label = parse_label(cols[4]);
        if (!band || !label) throw ParseError("bad feature index row: " + line);
        r.band = *band;
        r.label = *label;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace msdmad
