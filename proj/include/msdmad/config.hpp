#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "msdmad/bands.hpp"
#include "msdmad/classifier.hpp"
#include "msdmad/embedding.hpp"
#include "msdmad/error.hpp"
#include "msdmad/features.hpp"
#include "msdmad/synthetic.hpp"
#include "msdmad/text.hpp"

namespace msdmad {

// ---------------------------------------------------------------------------
// Minimal TOML reader covering what pipeline configs use: [table] headers
// (dotted), key = value with strings, integers, floats, booleans and flat
// arrays, and # comments. Values land in a flat map keyed by the dotted
// path.
// ---------------------------------------------------------------------------

struct TomlValue {
    std::variant<std::string, std::int64_t, double, bool, std::vector<TomlValue>> v;

    const std::string* as_string() const { return std::get_if<std::string>(&v); }
    const bool* as_bool() const { return std::get_if<bool>(&v); }
    std::optional<double> as_double() const {
        if (const auto* d = std::get_if<double>(&v)) return *d;
        if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        return std::nullopt;
    }
    std::optional<std::int64_t> as_int() const {
        if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
        return std::nullopt;
    }
    const std::vector<TomlValue>* as_array() const {
        return std::get_if<std::vector<TomlValue>>(&v);
    }
};

class TomlTable {
public:
    std::map<std::string, TomlValue> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        const auto* s = it->second.as_string();
        if (!s) throw ConfigError("'" + key + "' must be a string");
        return *s;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        const auto d = it->second.as_double();
        if (!d) throw ConfigError("'" + key + "' must be a number");
        return *d;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        const auto i = it->second.as_int();
        if (!i) throw ConfigError("'" + key + "' must be an integer");
        return *i;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        const auto* b = it->second.as_bool();
        if (!b) throw ConfigError("'" + key + "' must be a boolean");
        return *b;
    }

    std::vector<double> get_double_array(const std::string& key,
                                         std::vector<double> fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        const auto* arr = it->second.as_array();
        if (!arr) throw ConfigError("'" + key + "' must be an array");
        std::vector<double> out;
        for (const auto& v : *arr) {
            const auto d = v.as_double();
            if (!d) throw ConfigError("'" + key + "' must hold numbers");
            out.push_back(*d);
        }
        return out;
    }

    std::vector<std::string> get_string_array(const std::string& key,
                                              std::vector<std::string> fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        const auto* arr = it->second.as_array();
        if (!arr) throw ConfigError("'" + key + "' must be an array");
        std::vector<std::string> out;
        for (const auto& v : *arr) {
            const auto* s = v.as_string();
            if (!s) throw ConfigError("'" + key + "' must hold strings");
            out.push_back(*s);
        }
        return out;
    }

    /// Immediate child table names under a dotted prefix.
    std::vector<std::string> subtables(const std::string& prefix) const {
        std::vector<std::string> names;
        const std::string p = prefix + ".";
        for (const auto& [key, value] : values) {
            if (key.rfind(p, 0) != 0) continue;
            const std::string rest = key.substr(p.size());
            const auto dot = rest.find('.');
            if (dot == std::string::npos) continue;
            const std::string name = rest.substr(0, dot);
            if (names.empty() || names.back() != name) names.push_back(name);
        }
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        return names;
    }
};

namespace detail {

inline bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline TomlValue parse_toml_scalar(const std::string& raw, int lineno) {
    const std::string text = trim(raw);
    if (text.empty()) throw ParseError("missing value at line " + std::to_string(lineno));
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            throw ParseError("unterminated string at line " + std::to_string(lineno));
        std::string out;
        for (std::size_t i = 1; i + 1 < text.size(); ++i) {
            if (text[i] == '\\' && i + 2 < text.size() + 1) {
                ++i;
                switch (text[i]) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default:
                        throw ParseError("unsupported escape at line " + std::to_string(lineno));
                }
            } else {
                out.push_back(text[i]);
            }
        }
        return TomlValue{out};
    }
    if (text == "true") return TomlValue{true};
    if (text == "false") return TomlValue{false};

    // Integer, then float.
    try {
        std::size_t used = 0;
        if (text.find_first_of(".eE") == std::string::npos) {
            const std::int64_t i = std::stoll(text, &used);
            if (used == text.size()) return TomlValue{i};
        }
        const double d = std::stod(text, &used);
        if (used == text.size()) return TomlValue{d};
    } catch (const std::exception&) {
    }
    throw ParseError("cannot parse value '" + text + "' at line " + std::to_string(lineno));
}

inline std::string strip_toml_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

}  // namespace detail

inline TomlTable parse_toml(const std::string& text) {
    TomlTable table;
    std::string prefix;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        line = trim(detail::strip_toml_comment(line));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("malformed table header at line " + std::to_string(lineno));
            prefix = trim(line.substr(1, line.size() - 2));
            if (prefix.empty())
                throw ParseError("empty table name at line " + std::to_string(lineno));
            for (char c : prefix)
                if (!detail::is_bare_key_char(c) && c != '.')
                    throw ParseError("bad table name at line " + std::to_string(lineno));
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("empty key at line " + std::to_string(lineno));
        for (char c : key)
            if (!detail::is_bare_key_char(c))
                throw ParseError("bad key '" + key + "' at line " + std::to_string(lineno));

        const std::string raw = trim(line.substr(eq + 1));
        TomlValue value;
        if (!raw.empty() && raw.front() == '[') {
            if (raw.back() != ']')
                throw ParseError("unterminated array at line " + std::to_string(lineno));
            std::vector<TomlValue> items;
            const std::string body = raw.substr(1, raw.size() - 2);
            std::string cur;
            bool in_string = false;
            for (char c : body) {
                if (c == '"') in_string = !in_string;
                if (c == ',' && !in_string) {
                    if (!trim(cur).empty())
                        items.push_back(detail::parse_toml_scalar(cur, lineno));
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            if (!trim(cur).empty()) items.push_back(detail::parse_toml_scalar(cur, lineno));
            value = TomlValue{items};
        } else {
            value = detail::parse_toml_scalar(raw, lineno);
        }

        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (table.values.count(full))
            throw ParseError("duplicate key '" + full + "' at line " + std::to_string(lineno));
        table.values[full] = std::move(value);
    }
    return table;
}

inline TomlTable load_toml(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_toml(text);
}

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

struct PipelineConfig {
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";
    int jobs = 1;

    SynthConfig synth;
    TrainConfig train;

    double morph_alpha = 0.5;
    std::optional<std::size_t> morph_max_pairs;

    bool absolute_diff = false;
    SlerpParams slerp;

    bool mean_rule = false;
    std::vector<double> apcer_targets = {0.05, 0.10};
    std::string morph_type_label = "synthetic";

    std::optional<std::filesystem::path> store_dir;       // reuse an existing store
    std::optional<std::filesystem::path> manifest_path;   // image-mode input

    std::string diff_provider = "arc";
    std::vector<std::string> slerp_providers = {"net1", "net2", "net3",
                                                "net4", "net5", "net6"};
    std::map<std::string, ProviderDescriptor> providers;

    static PipelineConfig defaults() {
        PipelineConfig cfg;
        cfg.providers = default_providers(cfg.synth.dimension);
        return cfg;
    }

    static std::map<std::string, ProviderDescriptor> default_providers(int dimension) {
        std::map<std::string, ProviderDescriptor> p;
        ProviderDescriptor arc{"arc", dimension, ProviderKind::Synthetic, std::nullopt, 1};
        p["arc"] = arc;
        for (int i = 1; i <= 6; ++i) {
            const std::string name = "net" + std::to_string(i);
            p[name] = ProviderDescriptor{name, dimension, ProviderKind::Synthetic,
                                         std::nullopt, static_cast<std::uint64_t>(100 + i)};
        }
        return p;
    }

    void validate() const {
        synth.validate();
        train.validate();
        slerp.validate();
        if (!(morph_alpha >= 0.0 && morph_alpha <= 1.0))
            throw ConfigError("morph alpha must lie in [0,1]");
        if (jobs < 1) throw ConfigError("jobs must be >= 1");
        if (apcer_targets.empty()) throw ConfigError("need at least one APCER target");
        for (double t : apcer_targets)
            if (!(t > 0.0 && t < 1.0))
                throw ConfigError("APCER targets must lie in (0,1), got " + fmt_double(t));
        if (!providers.count(diff_provider))
            throw ConfigError("unknown diff provider '" + diff_provider + "'");
        if (slerp_providers.size() != 6)
            throw ConfigError("the hierarchical method needs exactly 6 providers, got " +
                              std::to_string(slerp_providers.size()));
        for (const auto& name : slerp_providers)
            if (!providers.count(name))
                throw ConfigError("unknown slerp provider '" + name + "'");
        for (const auto& [name, p] : providers) p.validate();
        if (store_dir && !std::filesystem::exists(*store_dir))
            throw ConfigError("store directory does not exist: " + store_dir->string());
        if (manifest_path && !std::filesystem::exists(*manifest_path))
            throw ConfigError("manifest does not exist: " + manifest_path->string());
    }
};

inline PipelineConfig pipeline_config_from_toml(const TomlTable& t) {
    PipelineConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t.get_int("seed", 42));
    cfg.out_dir = t.get_string("out", "out");
    cfg.jobs = static_cast<int>(t.get_int("jobs", 1));

    cfg.synth.n_subjects = static_cast<int>(t.get_int("synthetic.n_subjects", 60));
    cfg.synth.dimension = static_cast<int>(t.get_int("synthetic.dimension", 128));
    cfg.synth.trusted_per_subject =
        static_cast<int>(t.get_int("synthetic.trusted_per_subject", 5));
    cfg.synth.morph_noise = t.get_double("synthetic.morph_noise", cfg.synth.morph_noise);
    cfg.synth.train_fraction =
        t.get_double("synthetic.train_fraction", cfg.synth.train_fraction);
    cfg.synth.seed = static_cast<std::uint64_t>(
        t.get_int("synthetic.seed", static_cast<std::int64_t>(cfg.seed)));
    for (const auto& [key, value] : t.values) {
        constexpr std::string_view prefix = "synthetic.band_noise.";
        if (key.rfind(prefix, 0) != 0) continue;
        const std::string name = key.substr(prefix.size());
        if (!parse_band(name)) throw ConfigError("unknown band name '" + name + "'");
    }
    for (SpectralBand band : kAllBands) {
        const std::string key = "synthetic.band_noise." + std::string(band_name(band));
        cfg.synth.band_noise[band] = t.get_double(key, cfg.synth.band_noise[band]);
    }

    cfg.train.learning_rate = t.get_double("train.learning_rate", cfg.train.learning_rate);
    cfg.train.epochs = static_cast<int>(t.get_int("train.epochs", cfg.train.epochs));
    cfg.train.l2_lambda = t.get_double("train.l2_lambda", cfg.train.l2_lambda);
    cfg.train.convergence_tol =
        t.get_double("train.convergence_tol", cfg.train.convergence_tol);
    cfg.train.seed = cfg.seed;

    cfg.morph_alpha = t.get_double("morph.alpha", cfg.morph_alpha);
    if (t.has("morph.max_pairs")) {
        const auto cap = t.get_int("morph.max_pairs", 0);
        if (cap < 0) throw ConfigError("morph.max_pairs must be >= 0");
        cfg.morph_max_pairs = static_cast<std::size_t>(cap);
    }

    cfg.absolute_diff = t.get_bool("features.absolute_difference", false);
    cfg.slerp.t_schedule = t.get_double_array("features.slerp_t", cfg.slerp.t_schedule);

    const std::string rule = t.get_string("fusion.rule", "sum");
    if (rule != "sum" && rule != "mean")
        throw ConfigError("fusion.rule must be \"sum\" or \"mean\"");
    cfg.mean_rule = rule == "mean";

    cfg.apcer_targets = t.get_double_array("eval.apcer_targets", cfg.apcer_targets);
    cfg.morph_type_label = t.get_string("eval.morph_type", cfg.morph_type_label);

    if (t.has("paths.store")) cfg.store_dir = t.get_string("paths.store", "");
    if (t.has("paths.manifest")) cfg.manifest_path = t.get_string("paths.manifest", "");

    const auto names = t.subtables("providers");
    if (names.empty()) {
        cfg.providers = PipelineConfig::default_providers(cfg.synth.dimension);
    } else {
        for (const auto& name : names) {
            const std::string p = "providers." + name + ".";
            ProviderDescriptor d;
            d.name = name;
            const std::string kind = t.get_string(p + "kind", "synthetic");
            if (kind == "synthetic")
                d.kind = ProviderKind::Synthetic;
            else if (kind == "model_file")
                d.kind = ProviderKind::ModelFile;
            else
                throw ConfigError("provider '" + name + "' has unknown kind '" + kind + "'");
            d.dimension = static_cast<int>(t.get_int(p + "dimension", cfg.synth.dimension));
            if (t.has(p + "model_path")) d.model_path = t.get_string(p + "model_path", "");
            if (t.has(p + "seed"))
                d.seed = static_cast<std::uint64_t>(t.get_int(p + "seed", 0));
            cfg.providers[name] = std::move(d);
        }
    }
    cfg.diff_provider = t.get_string("dmad.diff_provider", cfg.diff_provider);
    cfg.slerp_providers = t.get_string_array("dmad.slerp_providers", cfg.slerp_providers);
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    return pipeline_config_from_toml(load_toml(path));
}

}  // namespace msdmad
