// msdmad: batch toolkit for multispectral differential morphing-attack
// detection experiments. See README.md for the workflow.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "msdmad/msdmad.hpp"

namespace fs = std::filesystem;
using namespace msdmad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct GlobalOptions {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out_dir;
};

PipelineConfig resolve_config(const GlobalOptions& g) {
    PipelineConfig cfg =
        g.config_path ? load_pipeline_config(*g.config_path) : PipelineConfig::defaults();
    if (g.seed) {
        cfg.seed = *g.seed;
        cfg.synth.seed = *g.seed;
        cfg.train.seed = *g.seed;
    }
    if (g.jobs) cfg.jobs = *g.jobs;
    if (g.out_dir) cfg.out_dir = *g.out_dir;
    return cfg;
}

int classify_error(const std::exception& e) {
    if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const Error*>(&e)) return kExitData;
    return kExitData;
}

int run_eval_stage(const PipelineConfig& cfg, const fs::path& features_dir,
                   const fs::path& models_dir) {
    std::vector<EvalReport> reports;
    for (DmadMethod method : {DmadMethod::DiffFeature, DmadMethod::SlerpFeature}) {
        MethodEvaluation eval = evaluate_from_disk(features_dir, models_dir, method, cfg);
        write_scores_csv(eval, cfg.out_dir / "scores" /
                                   ("scores_" + std::string(method_name(method)) + ".csv"));
        fs::create_directories(cfg.out_dir / "report");
        emit_det_svg(det_curves_for(eval),
                     cfg.out_dir / "report" /
                         ("det_" + std::string(method_name(method)) + ".svg"));
        reports.push_back(eval.report);
        std::cout << method_name(method) << ": fused D-EER "
                  << fmt_fixed(eval.report.rows.back().d_eer_pct, 2) << "%\n";
    }
    std::ofstream out(cfg.out_dir / "report" / "report.csv", std::ios::binary);
    out << reports_to_csv(reports);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    std::ofstream jout(cfg.out_dir / "report" / "report.json", std::ios::binary);
    jout << arr.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multispectral differential morphing-attack detection toolkit"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "Pipeline configuration file (TOML)");
    app.add_option("--seed", global.seed, "Master seed override");
    app.add_option("--jobs", global.jobs, "Worker threads for per-band tasks");
    app.add_option("--out", global.out_dir, "Output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic embedding store");
    std::optional<int> synth_subjects, synth_dim, synth_trusted;
    std::optional<double> synth_morph_noise, synth_fraction;
    synth->add_option("--n-subjects", synth_subjects, "Number of subjects (>= 4)");
    synth->add_option("--dimension", synth_dim, "Embedding dimension");
    synth->add_option("--trusted-per-subject", synth_trusted, "Trusted captures per subject");
    synth->add_option("--morph-noise", synth_morph_noise, "Morph embedding noise");
    synth->add_option("--train-fraction", synth_fraction, "Train split fraction in (0,1)");

    // gen-morphs
    auto* gen = app.add_subcommand("gen-morphs", "Generate landmark morphs from a manifest");
    GenMorphsOptions gen_opt;
    std::string gen_side = "train";
    gen->add_option("--manifest", gen_opt.manifest_path, "Dataset manifest (JSON)")
        ->required();
    gen->add_option("--split", gen_opt.split_path, "Protocol split file (JSON)")->required();
    gen->add_option("--side", gen_side, "Split side: train|test")
        ->check(CLI::IsMember({"train", "test"}));
    gen->add_option("--alpha", gen_opt.alpha, "Blend weight of parent B in [0,1]");
    std::optional<std::size_t> gen_max_pairs;
    gen->add_option("--max-pairs", gen_max_pairs, "Cap on generated pairs");

    // extract
    auto* extract = app.add_subcommand("extract", "Compute differential features");
    std::optional<std::string> extract_store;
    extract->add_option("--store", extract_store, "Embedding store directory");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train per-band classifiers");
    std::string train_features;
    train_cmd->add_option("--features", train_features, "Feature directory from extract")
        ->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Score, fuse, and report");
    std::string eval_features, eval_models;
    eval_cmd->add_option("--features", eval_features, "Feature directory")->required();
    eval_cmd->add_option("--models", eval_models, "Model directory")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Rebuild reports from score CSVs");
    std::string report_scores;
    report_cmd->add_option("--scores", report_scores, "Directory holding scores_*.csv")
        ->required();

    // run
    app.add_subcommand("run", "Full pipeline: data, features, training, evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        PipelineConfig cfg = resolve_config(global);

        if (synth->parsed()) {
            if (synth_subjects) cfg.synth.n_subjects = *synth_subjects;
            if (synth_dim) cfg.synth.dimension = *synth_dim;
            if (synth_trusted) cfg.synth.trusted_per_subject = *synth_trusted;
            if (synth_morph_noise) cfg.synth.morph_noise = *synth_morph_noise;
            if (synth_fraction) cfg.synth.train_fraction = *synth_fraction;
            const SyntheticCorpus corpus = generate_synthetic_corpus(cfg.synth);
            save_corpus(corpus, cfg.out_dir / "store");
            std::cout << "wrote store with " << corpus.subjects.size() << " subjects, "
                      << corpus.references.size() << " references, " << corpus.trusted.size()
                      << " trusted embeddings to " << (cfg.out_dir / "store").string() << "\n";
            return kExitOk;
        }

        if (gen->parsed()) {
            try {
                gen_opt.side = gen_side == "train" ? Side::Train : Side::Test;
                gen_opt.max_pairs = gen_max_pairs;
                gen_opt.seed = cfg.seed;
                gen_opt.out_dir = cfg.out_dir;
                run_gen_morphs(gen_opt, std::cout);
                return kExitOk;
            } catch (const std::exception& e) {
                // This command reports every module failure uniformly.
                std::cerr << "error: " << e.what() << "\n";
                return kExitConfig;
            }
        }

        if (extract->parsed()) {
            if (extract_store) cfg.store_dir = *extract_store;
            std::unique_ptr<EmbeddingSource> source;
            if (cfg.manifest_path) {
                cfg.validate();
                DatasetManifest manifest = load_manifest(*cfg.manifest_path);
                std::set<std::string> subjects;
                for (const auto& s : manifest.samples)
                    if (s.label == Label::BonaFide) subjects.insert(s.subject_id);
                const ProtocolSplit split = make_disjoint_split(
                    std::vector<std::string>(subjects.begin(), subjects.end()),
                    cfg.synth.train_fraction, cfg.seed);
                save_split(split, cfg.out_dir / "split.json");
                source =
                    std::make_unique<ManifestEmbeddingSource>(*cfg.manifest_path, split, cfg);
            } else if (cfg.store_dir) {
                cfg.validate();
                source = std::make_unique<StoreEmbeddingSource>(load_corpus(*cfg.store_dir),
                                                                cfg);
            } else {
                throw ConfigError("extract needs --store or a configured manifest");
            }
            for (DmadMethod method : {DmadMethod::DiffFeature, DmadMethod::SlerpFeature}) {
                parallel_for(kAllBands.size(), cfg.jobs, [&](std::size_t bi) {
                    const SpectralBand band = kAllBands[bi];
                    for (Side side : {Side::Train, Side::Test}) {
                        const FeatureSet set = extract_features(
                            *source, side, band, method, cfg.slerp, cfg.absolute_diff);
                        persist_features(cfg.out_dir / "features", method, band, side, set);
                    }
                });
            }
            std::cout << "wrote feature streams to "
                      << (cfg.out_dir / "features").string() << "\n";
            return kExitOk;
        }

        if (train_cmd->parsed()) {
            cfg.validate();
            fs::create_directories(cfg.out_dir / "models");
            for (DmadMethod method : {DmadMethod::DiffFeature, DmadMethod::SlerpFeature}) {
                parallel_for(kAllBands.size(), cfg.jobs, [&](std::size_t bi) {
                    const SpectralBand band = kAllBands[bi];
                    const FeatureSet set =
                        load_features(train_features, method, band, Side::Train);
                    const LinearModel model =
                        train_logistic(set.features, set.labels, cfg.train);
                    save_model(model, model_path(cfg.out_dir / "models", method, band));
                });
            }
            std::cout << "wrote models to " << (cfg.out_dir / "models").string() << "\n";
            return kExitOk;
        }

        if (eval_cmd->parsed()) {
            cfg.validate();
            return run_eval_stage(cfg, eval_features, eval_models);
        }

        if (report_cmd->parsed()) {
            cfg.validate();
            const double t5 = cfg.apcer_targets.size() > 0 ? cfg.apcer_targets[0] : 0.05;
            const double t10 = cfg.apcer_targets.size() > 1 ? cfg.apcer_targets[1] : 0.10;
            std::vector<EvalReport> reports;
            fs::create_directories(cfg.out_dir / "report");
            for (DmadMethod method : {DmadMethod::DiffFeature, DmadMethod::SlerpFeature}) {
                const fs::path csv = fs::path(report_scores) /
                                     ("scores_" + std::string(method_name(method)) + ".csv");
                const ScoresTable table = read_scores_csv(csv);
                reports.push_back(report_from_scores(table, cfg.morph_type_label,
                                                     std::string(method_name(method)), t5,
                                                     t10));
                emit_det_svg(det_curves_for(table),
                             cfg.out_dir / "report" /
                                 ("det_" + std::string(method_name(method)) + ".svg"));
            }
            std::ofstream out(cfg.out_dir / "report" / "report.csv", std::ios::binary);
            out << reports_to_csv(reports);
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& r : reports) arr.push_back(report_to_json(r));
            std::ofstream jout(cfg.out_dir / "report" / "report.json", std::ios::binary);
            jout << arr.dump(2) << "\n";
            std::cout << "wrote report to " << (cfg.out_dir / "report").string() << "\n";
            return kExitOk;
        }

        // run
        run_experiment(cfg, std::cout);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_error(e);
    }
}
