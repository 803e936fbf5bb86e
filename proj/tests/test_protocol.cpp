#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "msdmad/protocol.hpp"
#include "msdmad/rng.hpp"

using namespace msdmad;

namespace {

std::vector<std::string> make_subjects(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("subj" + std::to_string(1000 + i));
    return v;
}

}  // namespace

TEST_CASE("143 subjects at fraction 78/143 split into 78 and 65", "[protocol]") {
    const auto subjects = make_subjects(143);
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 999ULL}) {
        const auto split = make_disjoint_split(subjects, 78.0 / 143.0, seed);
        CHECK(split.train_subjects.size() == 78);
        CHECK(split.test_subjects.size() == 65);
    }
}

TEST_CASE("two subjects at 0.5 give sizes (1,1)", "[protocol]") {
    const auto split = make_disjoint_split({"a", "b"}, 0.5, 7);
    CHECK(split.train_subjects.size() == 1);
    CHECK(split.test_subjects.size() == 1);
    CHECK(split.train_subjects[0] != split.test_subjects[0]);
}

TEST_CASE("split is deterministic per seed and input-order independent", "[protocol]") {
    auto subjects = make_subjects(30);
    const auto a = make_disjoint_split(subjects, 0.6, 5);
    const auto b = make_disjoint_split(subjects, 0.6, 5);
    CHECK(a.train_subjects == b.train_subjects);
    CHECK(a.test_subjects == b.test_subjects);

    std::reverse(subjects.begin(), subjects.end());
    const auto c = make_disjoint_split(subjects, 0.6, 5);
    CHECK(a.train_subjects == c.train_subjects);

    const auto d = make_disjoint_split(subjects, 0.6, 6);
    CHECK(a.train_subjects != d.train_subjects);
}

TEST_CASE("split partitions the input for any seed and fraction", "[protocol]") {
    Rng rng(11);
    const auto subjects = make_subjects(40);
    for (int rep = 0; rep < 200; ++rep) {
        const double frac = 0.05 + 0.9 * rng.uniform();
        const auto split = make_disjoint_split(subjects, frac, rng.next_u64());
        std::set<std::string> all(split.train_subjects.begin(), split.train_subjects.end());
        for (const auto& s : split.test_subjects) CHECK(all.insert(s).second);  // disjoint
        CHECK(all.size() == subjects.size());  // union = input
    }
}

TEST_CASE("split rejects degenerate inputs", "[protocol]") {
    CHECK_THROWS_AS(make_disjoint_split({}, 0.5, 1), EmptyInput);
    CHECK_THROWS_AS(make_disjoint_split({"only"}, 0.5, 1), EmptyInput);
    CHECK_THROWS_AS(make_disjoint_split({"a", "a"}, 0.5, 1), EmptyInput);  // dupes collapse
    CHECK_THROWS_AS(make_disjoint_split(make_subjects(4), 0.0, 1), ValidationError);
    CHECK_THROWS_AS(make_disjoint_split(make_subjects(4), 1.0, 1), ValidationError);
}

TEST_CASE("morph pairs on three subjects form the complete graph", "[protocol]") {
    ProtocolSplit split;
    split.train_subjects = {"A", "B", "C"};
    split.test_subjects = {"D"};
    const auto pairs = enumerate_morph_pairs(split, Side::Train, std::nullopt, 0);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0] == std::pair<std::string, std::string>("A", "B"));
    CHECK(pairs[1] == std::pair<std::string, std::string>("A", "C"));
    CHECK(pairs[2] == std::pair<std::string, std::string>("B", "C"));
}

TEST_CASE("capped enumeration returns exactly the cap from within the side", "[protocol]") {
    const auto split = make_disjoint_split(make_subjects(143), 78.0 / 143.0, 3);
    const auto pairs = enumerate_morph_pairs(split, Side::Test, 472, 9);
    REQUIRE(pairs.size() == 472);
    std::set<std::pair<std::string, std::string>> unique(pairs.begin(), pairs.end());
    CHECK(unique.size() == 472);
    for (const auto& [a, b] : pairs) {
        CHECK(split.in_test(a));
        CHECK(split.in_test(b));
        CHECK(a < b);
    }
    // Same seed, same sample.
    CHECK(pairs == enumerate_morph_pairs(split, Side::Test, 472, 9));
}

TEST_CASE("single-subject side yields no pairs; empty side is an error", "[protocol]") {
    ProtocolSplit split;
    split.train_subjects = {"A"};
    CHECK(enumerate_morph_pairs(split, Side::Train, std::nullopt, 0).empty());
    CHECK_THROWS_AS(enumerate_morph_pairs(split, Side::Test, std::nullopt, 0), EmptyInput);
}

TEST_CASE("pairs never span the split over many random splits", "[protocol]") {
    Rng rng(77);
    const auto subjects = make_subjects(20);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto split = make_disjoint_split(subjects, 0.5, rng.next_u64());
        for (Side side : {Side::Train, Side::Test}) {
            const auto pairs = enumerate_morph_pairs(split, side, 10, rng.next_u64());
            for (const auto& [a, b] : pairs) {
                const bool both_train = split.in_train(a) && split.in_train(b);
                const bool both_test = split.in_test(a) && split.in_test(b);
                CHECK((both_train || both_test));
                CHECK(both_train == (side == Side::Train));
            }
        }
    }
}

TEST_CASE("split JSON round-trip and overlap rejection", "[protocol]") {
    const auto split = make_disjoint_split(make_subjects(12), 0.5, 4);
    const auto tmp = std::filesystem::temp_directory_path() / "msdmad_split_test.json";
    save_split(split, tmp);
    const auto back = load_split(tmp);
    CHECK(back.train_subjects == split.train_subjects);
    CHECK(back.test_subjects == split.test_subjects);
    std::filesystem::remove(tmp);

    nlohmann::json bad = {{"train_subjects", {"a", "b"}}, {"test_subjects", {"b", "c"}}};
    CHECK_THROWS_AS(split_from_json(bad), ValidationError);
    CHECK_THROWS_AS(split_from_json(nlohmann::json::object()), ParseError);
}
