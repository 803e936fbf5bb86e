#include <catch2/catch_amalgamated.hpp>

#include "msdmad/config.hpp"

using namespace msdmad;

TEST_CASE("toml reader handles scalars, arrays, sections, comments", "[config]") {
    const auto t = parse_toml(R"(
# experiment settings
seed = 42
name = "desk run"   # inline comment
ratio = 0.75
flag = true
targets = [0.05, 0.10]
labels = ["a", "b"]

[train]
epochs = 100
rate = 1e-2

[providers.arc]
kind = "synthetic"
seed = 7

[providers.net1]
kind = "synthetic"
)");
    CHECK(t.get_int("seed", 0) == 42);
    CHECK(t.get_string("name", "") == "desk run");
    CHECK(t.get_double("ratio", 0.0) == 0.75);
    CHECK(t.get_bool("flag", false));
    CHECK(t.get_double_array("targets", {}) == std::vector<double>{0.05, 0.10});
    CHECK(t.get_string_array("labels", {}) == std::vector<std::string>{"a", "b"});
    CHECK(t.get_int("train.epochs", 0) == 100);
    CHECK(t.get_double("train.rate", 0.0) == 0.01);
    CHECK(t.subtables("providers") == std::vector<std::string>{"arc", "net1"});

    // fallbacks and type errors
    CHECK(t.get_int("missing", 9) == 9);
    CHECK_THROWS_AS(t.get_int("name", 0), ConfigError);
    CHECK_THROWS_AS(t.get_string("seed", ""), ConfigError);
}

TEST_CASE("toml reader rejects malformed input", "[config]") {
    CHECK_THROWS_AS(parse_toml("key"), ParseError);
    CHECK_THROWS_AS(parse_toml("= 5"), ParseError);
    CHECK_THROWS_AS(parse_toml("x = \"unterminated"), ParseError);
    CHECK_THROWS_AS(parse_toml("[table\nx = 1"), ParseError);
    CHECK_THROWS_AS(parse_toml("x = [1, 2"), ParseError);
    CHECK_THROWS_AS(parse_toml("x = 1\nx = 2"), ParseError);
    CHECK_THROWS_AS(parse_toml("x = what"), ParseError);
    CHECK_THROWS_AS(parse_toml("bad key = 1"), ParseError);
}

TEST_CASE("pipeline config defaults are valid and overridable", "[config]") {
    const PipelineConfig defaults = PipelineConfig::defaults();
    CHECK_NOTHROW(defaults.validate());
    CHECK(defaults.providers.size() == 7);
    CHECK(defaults.synth.n_subjects == 60);
    CHECK(defaults.synth.dimension == 128);
    CHECK(defaults.train.epochs == 500);
    CHECK(defaults.apcer_targets == std::vector<double>{0.05, 0.10});

    const auto cfg = pipeline_config_from_toml(parse_toml(R"(
seed = 7
out = "results"
jobs = 2

[synthetic]
n_subjects = 12
dimension = 16
trusted_per_subject = 2

[synthetic.band_noise]
B650 = 0.02
WL = 0.5

[train]
epochs = 50
learning_rate = 0.2

[fusion]
rule = "mean"

[eval]
apcer_targets = [0.02, 0.2]
morph_type = "landmark"
)"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.out_dir == std::filesystem::path("results"));
    CHECK(cfg.jobs == 2);
    CHECK(cfg.synth.n_subjects == 12);
    CHECK(cfg.synth.dimension == 16);
    CHECK(cfg.synth.band_noise.at(SpectralBand::B650) == 0.02);
    CHECK(cfg.synth.band_noise.at(SpectralBand::WL) == 0.5);
    CHECK(cfg.synth.band_noise.at(SpectralBand::B710) == 0.10);  // untouched default
    CHECK(cfg.train.epochs == 50);
    CHECK(cfg.mean_rule);
    CHECK(cfg.apcer_targets == std::vector<double>{0.02, 0.2});
    CHECK(cfg.morph_type_label == "landmark");
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("provider blocks are parsed and wired", "[config]") {
    const auto cfg = pipeline_config_from_toml(parse_toml(R"(
[synthetic]
dimension = 8

[providers.main]
kind = "synthetic"
dimension = 8
seed = 5

[providers.n1]
kind = "synthetic"
dimension = 8
seed = 11

[providers.n2]
kind = "synthetic"
dimension = 8
seed = 12

[providers.n3]
kind = "synthetic"
dimension = 8
seed = 13

[providers.n4]
kind = "synthetic"
dimension = 8
seed = 14

[providers.n5]
kind = "synthetic"
dimension = 8
seed = 15

[providers.n6]
kind = "synthetic"
dimension = 8
seed = 16

[dmad]
diff_provider = "main"
slerp_providers = ["n1", "n2", "n3", "n4", "n5", "n6"]
)"));
    CHECK(cfg.providers.size() == 7);
    CHECK(cfg.diff_provider == "main");
    CHECK(cfg.providers.at("n3").seed == 13);
    CHECK_NOTHROW(cfg.validate());

    // A model_file provider parses; validation requires model_path.
    CHECK_THROWS_AS(pipeline_config_from_toml(parse_toml(R"(
[providers.bad]
kind = "model_file"
)"))
                        .validate(),
                    ConfigError);
    CHECK_THROWS_AS(pipeline_config_from_toml(parse_toml(R"(
[providers.bad]
kind = "mystery"
)")),
                    ConfigError);
}

TEST_CASE("config validation catches bad values", "[config]") {
    CHECK_THROWS_AS(pipeline_config_from_toml(parse_toml(R"(
[synthetic.band_noise]
B999 = 0.1
)")),
                    ConfigError);
    CHECK_THROWS_AS(pipeline_config_from_toml(parse_toml("[fusion]\nrule = \"max\"")),
                    ConfigError);

    auto cfg = PipelineConfig::defaults();
    cfg.apcer_targets = {1.5};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = PipelineConfig::defaults();
    cfg.slerp_providers.pop_back();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = PipelineConfig::defaults();
    cfg.diff_provider = "nope";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = PipelineConfig::defaults();
    cfg.store_dir = "/nonexistent/msdmad/store";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    CHECK_THROWS_AS(load_pipeline_config("/nonexistent/msdmad.toml"), ConfigError);
}
