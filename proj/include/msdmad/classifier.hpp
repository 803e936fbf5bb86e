#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "msdmad/bands.hpp"
#include "msdmad/error.hpp"
#include "msdmad/features.hpp"
#include "msdmad/text.hpp"

#include "json.hpp"

namespace msdmad {

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2_lambda = 1e-4;
    std::uint64_t seed = 0;
    double convergence_tol = 1e-8;  // on loss delta

    void validate() const {
        if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
        if (epochs <= 0) throw ConfigError("epochs must be positive");
        if (l2_lambda < 0.0) throw ConfigError("l2_lambda must be >= 0");
    }
};

struct TrainMeta {
    int epochs_run = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
};

/// Logistic scorer for one (band, method) slot. Orientation contract:
/// score 1 = morph-like.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    SpectralBand band = SpectralBand::WL;
    DmadMethod method = DmadMethod::DiffFeature;
    TrainMeta train_meta;

    std::size_t dimension() const { return weights.size(); }
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// L2-regularized mean logistic loss. The bias is not regularized, so
/// label-symmetric data keeps it at zero.
inline double logistic_loss(const std::vector<DmadFeature>& features,
                            const std::vector<Label>& labels, const std::vector<double>& w,
                            double bias, double l2_lambda) {
    const double n = static_cast<double>(features.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double z = dot(w, features[i].values) + bias;
        const double y = labels[i] == Label::Morph ? 1.0 : 0.0;
        // softplus(z) - y z, evaluated without overflow
        const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += softplus - y * z;
    }
    loss /= n;
    loss += 0.5 * l2_lambda * dot(w, w);
    return loss;
}

/// Analytic gradient of logistic_loss with respect to (w, bias).
inline void logistic_gradient(const std::vector<DmadFeature>& features,
                              const std::vector<Label>& labels, const std::vector<double>& w,
                              double bias, double l2_lambda, std::vector<double>& grad_w,
                              double& grad_b) {
    const double n = static_cast<double>(features.size());
    grad_w.assign(w.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double z = dot(w, features[i].values) + bias;
        const double y = labels[i] == Label::Morph ? 1.0 : 0.0;
        const double r = sigmoid(z) - y;
        const auto& x = features[i].values;
        for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] += r * x[j];
        grad_b += r;
    }
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] = grad_w[j] / n + l2_lambda * w[j];
    grad_b /= n;
}

/// Full-batch gradient descent from zero initialization. Deterministic:
/// fixed iteration order, no stochastic element (the seed is only recorded
/// in train_meta). The convex loss must not increase at the configured
/// learning rate; if it does, the run fails loudly rather than returning a
/// silently diverged model.
inline LinearModel train_logistic(const std::vector<DmadFeature>& features,
                                  const std::vector<Label>& labels, const TrainConfig& config) {
    config.validate();
    if (features.empty() || features.size() != labels.size())
        throw ValidationError("features and labels must be nonempty and aligned");
    bool has_bona = false, has_morph = false;
    for (Label l : labels) (l == Label::Morph ? has_morph : has_bona) = true;
    if (!has_bona || !has_morph)
        throw SingleClassInput("training needs at least one example of each class");
    const std::size_t dim = features[0].values.size();
    for (const auto& f : features)
        if (f.values.size() != dim)
            throw DimensionMismatch("feature dimension " + std::to_string(f.values.size()) +
                                    " != " + std::to_string(dim));

    LinearModel model;
    model.weights.assign(dim, 0.0);
    model.bias = 0.0;
    model.band = features[0].band;
    model.method = features[0].method;
    model.train_meta.seed = config.seed;

    std::vector<double> grad_w;
    double grad_b = 0.0;
    double prev_loss = logistic_loss(features, labels, model.weights, model.bias,
                                     config.l2_lambda);
    int epoch = 0;
    for (; epoch < config.epochs; ++epoch) {
        logistic_gradient(features, labels, model.weights, model.bias, config.l2_lambda,
                          grad_w, grad_b);
        for (std::size_t j = 0; j < dim; ++j)
            model.weights[j] -= config.learning_rate * grad_w[j];
        model.bias -= config.learning_rate * grad_b;

        const double loss = logistic_loss(features, labels, model.weights, model.bias,
                                          config.l2_lambda);
        if (loss > prev_loss + 1e-12 * (1.0 + std::abs(prev_loss)))
            throw NumericError("loss increased from " + fmt_double(prev_loss) + " to " +
                               fmt_double(loss) + " at epoch " + std::to_string(epoch) +
                               "; lower the learning rate");
        const double delta = prev_loss - loss;
        prev_loss = loss;
        if (delta < config.convergence_tol) {
            ++epoch;
            break;
        }
    }
    model.train_meta.epochs_run = epoch;
    model.train_meta.final_loss = prev_loss;
    return model;
}

/// sigmoid(w . x + b); 1 = morph-like.
inline double score_feature(const LinearModel& model, const DmadFeature& feature) {
    if (feature.values.size() != model.dimension())
        throw DimensionMismatch("feature dimension " + std::to_string(feature.values.size()) +
                                " does not match model dimension " +
                                std::to_string(model.dimension()));
    return sigmoid(dot(model.weights, feature.values) + model.bias);
}

inline constexpr int kModelFileVersion = 1;

inline nlohmann::ordered_json model_to_json(const LinearModel& model) {
    nlohmann::ordered_json j;
    j["version"] = kModelFileVersion;
    j["band"] = std::string(band_name(model.band));
    j["method"] = std::string(method_name(model.method));
    j["dimension"] = model.dimension();
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["train_meta"] = {{"epochs_run", model.train_meta.epochs_run},
                       {"final_loss", model.train_meta.final_loss},
                       {"seed", model.train_meta.seed}};
    return j;
}

inline void save_model(const LinearModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << model_to_json(model).dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

inline LinearModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("version"))
        throw ParseError("model file missing version: " + path.string());
    if (j["version"].get<int>() != kModelFileVersion)
        throw VersionMismatch("model file version " + j["version"].dump() + ", expected " +
                              std::to_string(kModelFileVersion));
    LinearModel model;
    try {
        const auto band = parse_band(j.at("band").get<std::string>());
        const auto method = parse_method(j.at("method").get<std::string>());
        if (!band || !method) throw ParseError("bad band/method in " + path.string());
        model.band = *band;
        model.method = *method;
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<double>();
        if (model.weights.size() != j.at("dimension").get<std::size_t>())
            throw ParseError("dimension field disagrees with weights in " + path.string());
        const auto& meta = j.at("train_meta");
        model.train_meta.epochs_run = meta.at("epochs_run").get<int>();
        model.train_meta.final_loss = meta.at("final_loss").get<double>();
        model.train_meta.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
    return model;
}

}  // namespace msdmad
