#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "msdmad/error.hpp"
#include "msdmad/rng.hpp"

#include "json.hpp"

namespace msdmad {

/// Disjoint subject partition. Morphs are only ever built within one side,
/// so no identity leaks between training and testing.
struct ProtocolSplit {
    std::vector<std::string> train_subjects;  // sorted, unique
    std::vector<std::string> test_subjects;   // sorted, unique

    bool in_train(const std::string& s) const {
        return std::binary_search(train_subjects.begin(), train_subjects.end(), s);
    }
    bool in_test(const std::string& s) const {
        return std::binary_search(test_subjects.begin(), test_subjects.end(), s);
    }
};

enum class Side { Train, Test };

/// Seeded shuffle + prefix take. |train| = round(train_fraction * n).
inline ProtocolSplit make_disjoint_split(const std::vector<std::string>& subjects,
                                         double train_fraction, std::uint64_t seed) {
    std::vector<std::string> pool(subjects);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (pool.size() < 2) throw EmptyInput("need at least 2 subjects to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_fraction must lie in (0,1)");

    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(pool.size())));

    Rng rng(seed);
    rng.derive("split").shuffle(pool);

    ProtocolSplit split;
    split.train_subjects.assign(pool.begin(), pool.begin() + n_train);
    split.test_subjects.assign(pool.begin() + n_train, pool.end());
    std::sort(split.train_subjects.begin(), split.train_subjects.end());
    std::sort(split.test_subjects.begin(), split.test_subjects.end());
    return split;
}

/// All unordered subject pairs within the chosen side, lexicographic order.
/// With max_pairs set, a seeded uniform subsample of that list (the cap is
/// what reproduces a dataset's published morph counts; there is no other
/// selection heuristic).
inline std::vector<std::pair<std::string, std::string>> enumerate_morph_pairs(
    const ProtocolSplit& split, Side side, std::optional<std::size_t> max_pairs,
    std::uint64_t seed) {
    const auto& subjects =
        side == Side::Train ? split.train_subjects : split.test_subjects;
    if (subjects.empty()) throw EmptyInput("chosen split side has no subjects");

    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(subjects.size() * (subjects.size() - 1) / 2);
    for (std::size_t i = 0; i < subjects.size(); ++i)
        for (std::size_t j = i + 1; j < subjects.size(); ++j)
            pairs.emplace_back(subjects[i], subjects[j]);

    if (max_pairs && *max_pairs < pairs.size()) {
        Rng rng = Rng(seed).derive("morph-pairs");
        // Partial Fisher-Yates: the first max_pairs slots end up holding a
        // uniform sample without replacement.
        for (std::size_t i = 0; i < *max_pairs; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(
                                          rng.uniform_index(pairs.size() - i));
            std::swap(pairs[i], pairs[j]);
        }
        pairs.resize(*max_pairs);
        std::sort(pairs.begin(), pairs.end());
    }
    return pairs;
}

inline nlohmann::ordered_json split_to_json(const ProtocolSplit& split) {
    nlohmann::ordered_json j;
    j["train_subjects"] = split.train_subjects;
    j["test_subjects"] = split.test_subjects;
    return j;
}

inline ProtocolSplit split_from_json(const nlohmann::json& j) {
    ProtocolSplit split;
    try {
        split.train_subjects = j.at("train_subjects").get<std::vector<std::string>>();
        split.test_subjects = j.at("test_subjects").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad split JSON: ") + e.what());
    }
    std::sort(split.train_subjects.begin(), split.train_subjects.end());
    std::sort(split.test_subjects.begin(), split.test_subjects.end());
    std::vector<std::string> overlap;
    std::set_intersection(split.train_subjects.begin(), split.train_subjects.end(),
                          split.test_subjects.begin(), split.test_subjects.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty())
        throw ValidationError("split sides overlap, e.g. subject '" + overlap.front() + "'");
    return split;
}

inline void save_split(const ProtocolSplit& split, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << split_to_json(split).dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

inline ProtocolSplit load_split(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open split file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("split file is not valid JSON: ") + e.what());
    }
    return split_from_json(j);
}

}  // namespace msdmad
