// Copyright 2026 The qepi Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file harness.hpp
 * Experiment sweeps over (model, PCA dimension, sample size, epochs).
 *
 * Each grid cell runs the full pipeline: stratified subsample, stratified
 * train/test split, transforms fitted on the training partition only, model
 * training and test-set evaluation. Cells are independent: the data draw is
 * seeded from (seed, sample size) and the model from the per-cell seed
 * derive_seed(seed, {model, dim, n, epochs}), so the result of a cell does
 * not depend on which other cells run or in what order.
 *
 * Output directory layout:
 *
 *     results.csv     one row per cell (schema below), appended as cells
 *                     finish and rewritten in grid order at the end
 *     details.csv     hard-label AUC, train metrics and split sizes per cell
 *     errors.log      one line per failed cell
 *     config.json     the resolved configuration
 *     cells/*.json    fitted scaler, PCA and model for each cell
 *
 * A rerun over an existing directory skips every cell that already has a
 * successful row in results.csv.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dataio.hpp"
#include "encode.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "optim.hpp"
#include "prep.hpp"
#include "qkernel.hpp"
#include "rng.hpp"
#include "svm.hpp"
#include "types.hpp"
#include "vqc.hpp"

namespace qepi {

enum class ModelKind { Qsvm, Vqc, RbfSvm };

inline std::string to_string(ModelKind m) {
    switch (m) {
    case ModelKind::Qsvm:
        return "QSVM";
    case ModelKind::Vqc:
        return "VQC";
    case ModelKind::RbfSvm:
        return "RBF_SVM";
    }
    return "QSVM";
}

inline ModelKind parse_model_kind(const std::string &s) {
    if (s == "QSVM" || s == "qsvm") {
        return ModelKind::Qsvm;
    }
    if (s == "VQC" || s == "vqc") {
        return ModelKind::Vqc;
    }
    if (s == "RBF_SVM" || s == "rbf_svm" || s == "rbf") {
        return ModelKind::RbfSvm;
    }
    throw ParseError("unknown model '" + s + "'");
}

enum class PipelineOrder { PcaThenScale, ScaleThenPca };

inline std::string to_string(PipelineOrder p) {
    return p == PipelineOrder::PcaThenScale ? "PCA_THEN_SCALE" : "SCALE_THEN_PCA";
}

inline PipelineOrder parse_pipeline_order(const std::string &s) {
    if (s == "PCA_THEN_SCALE") {
        return PipelineOrder::PcaThenScale;
    }
    if (s == "SCALE_THEN_PCA") {
        return PipelineOrder::ScaleThenPca;
    }
    throw ParseError("unknown pipeline order '" + s + "'");
}

struct SyntheticSpec {
    std::size_t n{200};
    std::size_t d{10};
    double pos_fraction{0.73};
    double separation{0.0};
    std::uint64_t seed{0};
};

struct ExperimentConfig {
    std::variant<std::string, SyntheticSpec> dataset{SyntheticSpec{}};
    std::vector<ModelKind> models{ModelKind::Qsvm};
    std::vector<std::size_t> pca_dims{2};
    std::vector<std::size_t> sample_sizes{100};
    std::vector<std::uint64_t> epochs_list{10};
    KernelMode kernel_mode{KernelMode::exact()};
    OptimizerConfig optimizer{OptimizerConfig::gradient_descent(0.2)};
    double C{1.0};
    double test_fraction{0.25};
    PipelineOrder pipeline_order{PipelineOrder::PcaThenScale};
    std::uint64_t seed{0};
    std::string output_dir{"results"};

    // Settings beyond the core grid.
    bool restandardize{false};  // re-standardize components under SCALE_THEN_PCA
    double feature_scale{1.0};  // multiplies every feature before encoding
    bool stratified_subsample{true};
    std::size_t vqc_layers{2};
    Entangler vqc_entangler{Entangler::LinearChain};
    ScoreAggregation vqc_aggregation{ScoreAggregation::MeanZ};
    double vqc_threshold{0.0};
    bool qsvm_entangling{true};
    std::size_t qsvm_repetitions{1};
    std::optional<double> rbf_gamma;  // default 1 / dim
    double svm_tol{1e-4};
    std::size_t threads{1};
    bool save_models{true};
};

inline constexpr std::uint64_t default_shots = 1024;

inline ExperimentConfig config_from_json(const nlohmann::json &j) {
    ExperimentConfig c;
    if (j.contains("dataset")) {
        const auto &d = j.at("dataset");
        if (d.is_string()) {
            c.dataset = d.get<std::string>();
        } else if (d.contains("path")) {
            c.dataset = d.at("path").get<std::string>();
        } else {
            const auto &s = d.contains("synthetic") ? d.at("synthetic") : d;
            SyntheticSpec sp;
            sp.n = s.value("n", sp.n);
            sp.d = s.value("d", sp.d);
            sp.pos_fraction = s.value("pos_fraction", sp.pos_fraction);
            sp.separation = s.value("separation", sp.separation);
            sp.seed = s.value("seed", sp.seed);
            c.dataset = sp;
        }
    }
    if (j.contains("models")) {
        c.models.clear();
        for (const auto &m : j.at("models")) {
            c.models.push_back(parse_model_kind(m.get<std::string>()));
        }
    }
    c.pca_dims = j.value("pca_dims", c.pca_dims);
    c.sample_sizes = j.value("sample_sizes", c.sample_sizes);
    c.epochs_list = j.value("epochs_list", c.epochs_list);
    if (j.contains("kernel_mode")) {
        const auto &k = j.at("kernel_mode");
        if (k.is_string()) {
            c.kernel_mode = parse_kernel_mode(k.get<std::string>(),
                                              j.value("shots", default_shots));
        } else {
            c.kernel_mode = parse_kernel_mode(k.value("kind", std::string("exact")),
                                              k.value("shots", default_shots));
        }
    }
    if (j.contains("optimizer")) {
        const auto &o = j.at("optimizer");
        auto &opt = c.optimizer;
        opt.kind = parse_optimizer_kind(o.value("kind", std::string("gd")));
        if (opt.kind == OptimizerKind::Spsa) {
            opt = OptimizerConfig::spsa();
        }
        opt.step = o.value("step", opt.step);
        opt.perturb = o.value("perturb", opt.perturb);
        opt.alpha_exp = o.value("alpha_exp", opt.alpha_exp);
        opt.gamma_exp = o.value("gamma_exp", opt.gamma_exp);
        opt.rng_seed = o.value("rng_seed", opt.rng_seed);
    }
    c.C = j.value("C", c.C);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    if (j.contains("pipeline_order")) {
        c.pipeline_order = parse_pipeline_order(j.at("pipeline_order").get<std::string>());
    }
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.restandardize = j.value("restandardize", c.restandardize);
    c.feature_scale = j.value("feature_scale", c.feature_scale);
    c.stratified_subsample = j.value("stratified_subsample", c.stratified_subsample);
    c.vqc_layers = j.value("vqc_layers", c.vqc_layers);
    if (j.contains("vqc_entangler")) {
        c.vqc_entangler = parse_entangler(j.at("vqc_entangler").get<std::string>());
    }
    if (j.contains("vqc_aggregation")) {
        const auto a = j.at("vqc_aggregation").get<std::string>();
        if (a != "mean" && a != "qubit0") {
            throw ParseError("vqc_aggregation must be 'mean' or 'qubit0'");
        }
        c.vqc_aggregation = a == "mean" ? ScoreAggregation::MeanZ : ScoreAggregation::FirstQubitZ;
    }
    c.vqc_threshold = j.value("vqc_threshold", c.vqc_threshold);
    c.qsvm_entangling = j.value("qsvm_entangling", c.qsvm_entangling);
    c.qsvm_repetitions = j.value("qsvm_repetitions", c.qsvm_repetitions);
    if (j.contains("rbf_gamma") && !j.at("rbf_gamma").is_null()) {
        c.rbf_gamma = j.at("rbf_gamma").get<double>();
    }
    c.svm_tol = j.value("svm_tol", c.svm_tol);
    c.threads = j.value("threads", c.threads);
    c.save_models = j.value("save_models", c.save_models);
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    if (const auto *p = std::get_if<std::string>(&c.dataset)) {
        j["dataset"] = {{"path", *p}};
    } else {
        const auto &s = std::get<SyntheticSpec>(c.dataset);
        j["dataset"] = {{"synthetic",
                         {{"n", s.n},
                          {"d", s.d},
                          {"pos_fraction", s.pos_fraction},
                          {"separation", s.separation},
                          {"seed", s.seed}}}};
    }
    auto models = nlohmann::json::array();
    for (auto m : c.models) {
        models.push_back(to_string(m));
    }
    j["models"] = models;
    j["pca_dims"] = c.pca_dims;
    j["sample_sizes"] = c.sample_sizes;
    j["epochs_list"] = c.epochs_list;
    j["kernel_mode"] = c.kernel_mode.is_exact()
                           ? nlohmann::json{{"kind", "exact"}}
                           : nlohmann::json{{"kind", "shots"}, {"shots", c.kernel_mode.shots}};
    j["optimizer"] = {{"kind", to_string(c.optimizer.kind)},
                      {"step", c.optimizer.step},
                      {"perturb", c.optimizer.perturb},
                      {"alpha_exp", c.optimizer.alpha_exp},
                      {"gamma_exp", c.optimizer.gamma_exp},
                      {"rng_seed", c.optimizer.rng_seed}};
    j["C"] = c.C;
    j["test_fraction"] = c.test_fraction;
    j["pipeline_order"] = to_string(c.pipeline_order);
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["restandardize"] = c.restandardize;
    j["feature_scale"] = c.feature_scale;
    j["stratified_subsample"] = c.stratified_subsample;
    j["vqc_layers"] = c.vqc_layers;
    j["vqc_entangler"] = to_string(c.vqc_entangler);
    j["vqc_aggregation"] = c.vqc_aggregation == ScoreAggregation::MeanZ ? "mean" : "qubit0";
    j["vqc_threshold"] = c.vqc_threshold;
    j["qsvm_entangling"] = c.qsvm_entangling;
    j["qsvm_repetitions"] = c.qsvm_repetitions;
    j["rbf_gamma"] = c.rbf_gamma ? nlohmann::json(*c.rbf_gamma) : nlohmann::json(nullptr);
    j["svm_tol"] = c.svm_tol;
    j["threads"] = c.threads;
    j["save_models"] = c.save_models;
    return j;
}

inline ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(path + ": " + e.what());
    }
    return config_from_json(j);
}

inline Dataset load_dataset(const ExperimentConfig &c, std::ostream *log = nullptr) {
    if (const auto *p = std::get_if<std::string>(&c.dataset)) {
        return load_csv(*p, log);
    }
    const auto &s = std::get<SyntheticSpec>(c.dataset);
    return generate_synthetic(s.n, s.d, s.pos_fraction, s.separation, s.seed);
}

// ---------------------------------------------------------------------------
// Grid cells

struct CellKey {
    ModelKind model{ModelKind::Qsvm};
    std::size_t dim{0};
    std::size_t n_samples{0};
    std::uint64_t epochs{0};  // 0 for the SVM models

    friend auto operator<=>(const CellKey &, const CellKey &) = default;

    [[nodiscard]] std::string slug() const {
        return to_string(model) + "_d" + std::to_string(dim) + "_n" + std::to_string(n_samples) +
               "_e" + std::to_string(epochs);
    }
};

/// All cells of a config in canonical order: models, dims, sizes, epochs.
inline std::vector<CellKey> enumerate_cells(const ExperimentConfig &c) {
    std::vector<CellKey> cells;
    for (auto m : c.models) {
        for (auto d : c.pca_dims) {
            for (auto n : c.sample_sizes) {
                if (m == ModelKind::Vqc) {
                    for (auto e : c.epochs_list) {
                        cells.push_back({m, d, n, e});
                    }
                } else {
                    cells.push_back({m, d, n, 0});
                }
            }
        }
    }
    return cells;
}

inline std::uint64_t cell_seed(std::uint64_t seed, const CellKey &k) {
    return derive_seed(seed, {hash_tag(to_string(k.model)), k.dim, k.n_samples, k.epochs});
}

/// Seed for the subsample and split; shared by every cell with the same size.
inline std::uint64_t data_seed(std::uint64_t seed, std::size_t n_samples) {
    return derive_seed(seed, {hash_tag("data"), n_samples});
}

struct ResultRecord {
    std::string model;
    std::size_t dim{0};
    std::size_t n_samples{0};
    std::uint64_t epochs{0};
    double acc{0.0};
    double auc{0.0};
    double mcc{0.0};
    double wall_ms{0.0};
    std::uint64_t eval_count{0};
    std::uint64_t seed{0};
    std::string pipeline_order;
    std::string kernel_mode;
    std::string optimizer;
    std::string error;  // nonempty for failed cells; not a results.csv column

    [[nodiscard]] bool ok() const { return error.empty(); }
};

inline const char *results_header =
    "model,dim,n_samples,epochs,acc,auc,mcc,wall_ms,eval_count,seed,pipeline_order,kernel_mode,"
    "optimizer";

/**
 * Preprocessing fitted on a training partition.
 *
 * PCA_THEN_SCALE: PCA to `dim` components, then z-score the components.
 * SCALE_THEN_PCA: z-score the inputs, then PCA; optionally z-score again.
 */
class FittedPipeline {
  public:
    FittedPipeline(const Matrix &X_train, std::size_t dim, PipelineOrder order,
                   bool restandardize, double feature_scale)
        : order_(order), feature_scale_(feature_scale) {
        if (order == PipelineOrder::PcaThenScale) {
            pca_ = fit_pca(X_train, dim);
            post_scaler_ = fit_scaler(pca_transform(X_train, pca_));
        } else {
            pre_scaler_ = fit_scaler(X_train);
            pca_ = fit_pca(apply_scaler(X_train, *pre_scaler_), dim);
            if (restandardize) {
                post_scaler_ =
                    fit_scaler(pca_transform(apply_scaler(X_train, *pre_scaler_), pca_));
            }
        }
    }

    [[nodiscard]] Matrix transform(const Matrix &X) const {
        Matrix Z = pre_scaler_ ? apply_scaler(X, *pre_scaler_) : X;
        Z = pca_transform(Z, pca_);
        if (post_scaler_) {
            Z = apply_scaler(Z, *post_scaler_);
        }
        if (feature_scale_ != 1.0) {
            Z *= feature_scale_;
        }
        return Z;
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["order"] = qepi::to_string(order_);
        j["pca"] = qepi::to_json(pca_);
        if (pre_scaler_) {
            j["scaler_before_pca"] = qepi::to_json(*pre_scaler_);
        }
        if (post_scaler_) {
            j["scaler_after_pca"] = qepi::to_json(*post_scaler_);
        }
        j["feature_scale"] = feature_scale_;
        return j;
    }

  private:
    PipelineOrder order_;
    double feature_scale_;
    PcaModel pca_;
    std::optional<ScalerParams> pre_scaler_;
    std::optional<ScalerParams> post_scaler_;
};

struct CellDetail {
    double auc_hard{0.0};  // AUC of the thresholded predictions
    MetricsReport train;
    std::size_t n_train{0};
    std::size_t n_test{0};
    bool converged{true};
};

struct CellOutcome {
    ResultRecord record;
    CellDetail detail;
    nlohmann::json artifacts;
};

namespace detail {

inline std::string smo_label(const ExperimentConfig &c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "smo(C=%g;tol=%g)", c.C, c.svm_tol);
    return buf;
}

inline double rbf_gamma_for(const ExperimentConfig &c, std::size_t dim) {
    return c.rbf_gamma ? *c.rbf_gamma : 1.0 / static_cast<double>(dim);
}

inline std::string rbf_label(double gamma) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "rbf(gamma=%g)", gamma);
    return buf;
}

inline Labels threshold_labels(std::span<const double> s, double threshold) {
    Labels out;
    out.reserve(s.size());
    for (double v : s) {
        out.push_back(v >= threshold ? 1 : -1);
    }
    return out;
}

inline std::vector<double> as_scores(std::span<const int> labels) {
    return {labels.begin(), labels.end()};
}

} // namespace detail

/// Runs one grid cell on an already loaded dataset. Throws on failure.
inline CellOutcome run_cell(const ExperimentConfig &c, const Dataset &ds, const CellKey &key) {
    const auto t0 = std::chrono::steady_clock::now();
    CellOutcome out;
    auto &rec = out.record;
    rec.model = to_string(key.model);
    rec.dim = key.dim;
    rec.n_samples = key.n_samples;
    rec.epochs = key.epochs;
    rec.seed = cell_seed(c.seed, key);
    rec.pipeline_order = to_string(c.pipeline_order);

    if (key.dim > ds.n_features()) {
        throw DomainError("PCA dimension " + std::to_string(key.dim) + " exceeds the " +
                          std::to_string(ds.n_features()) + " dataset features");
    }
    const auto dseed = data_seed(c.seed, key.n_samples);
    const auto sub = subsample(ds.features, ds.labels, key.n_samples, derive_seed(dseed, {1}),
                               c.stratified_subsample);
    const auto split = stratified_split(sub.X, sub.y, c.test_fraction, derive_seed(dseed, {2}));
    const FittedPipeline pipe(split.X_train, key.dim, c.pipeline_order, c.restandardize,
                              c.feature_scale);
    const Matrix Xtr = pipe.transform(split.X_train);
    const Matrix Xte = pipe.transform(split.X_test);
    const auto n_tr = static_cast<std::uint64_t>(Xtr.rows());
    const auto n_te = static_cast<std::uint64_t>(Xte.rows());
    const auto model_seed = derive_seed(rec.seed, {3});

    std::vector<double> test_scores;
    std::vector<double> train_scores;
    double threshold = 0.0;
    nlohmann::json model_json;
    switch (key.model) {
    case ModelKind::Qsvm:
    case ModelKind::RbfSvm: {
        Matrix K;
        Matrix Kx;
        if (key.model == ModelKind::Qsvm) {
            const FeatureMapSpec fmap{key.dim, c.qsvm_entangling, c.qsvm_repetitions};
            auto km = kernel_matrix(Xtr, fmap, c.kernel_mode, model_seed);
            K = std::move(km.values);
            Kx = gram_cross(Xte, Xtr, fmap, c.kernel_mode, model_seed);
            rec.kernel_mode = c.kernel_mode.str();
            rec.eval_count = km.eval_count + n_te * n_tr;
        } else {
            const double gamma = detail::rbf_gamma_for(c, key.dim);
            K = rbf_kernel(Xtr, Xtr, gamma);
            Kx = rbf_kernel(Xte, Xtr, gamma);
            rec.kernel_mode = detail::rbf_label(gamma);
            rec.eval_count = n_tr * (n_tr - 1) / 2 + n_te * n_tr;
        }
        SvmOptions opt;
        opt.C = c.C;
        opt.tol = c.svm_tol;
        auto model = train_svm(K, split.y_train, opt);
        model.training_ref = key.slug();
        rec.optimizer = detail::smo_label(c);
        out.detail.converged = model.converged;
        test_scores = decision_values(model, Kx);
        train_scores = decision_values(model, K);
        model_json = to_json(model);
        break;
    }
    case ModelKind::Vqc: {
        VqcConfig vc{AnsatzSpec{key.dim, c.vqc_layers, c.vqc_entangler},
                     FeatureMapSpec::classifier_default(key.dim), c.vqc_aggregation};
        auto model = train_vqc(Xtr, split.y_train, vc, c.optimizer, key.epochs, model_seed);
        model.threshold = c.vqc_threshold;
        threshold = model.threshold;
        rec.kernel_mode = "statevector";
        rec.optimizer = model.optimizer;
        // Circuit executions: initial loss, per-epoch update and loss, test scoring.
        const std::uint64_t per_epoch = c.optimizer.kind == OptimizerKind::GradientDescent
                                            ? 2 * vc.ansatz.parameter_count() + 2
                                            : 3;
        rec.eval_count = n_tr + key.epochs * per_epoch * n_tr + n_te;
        test_scores = forward_batch(Xte, model);
        train_scores = forward_batch(Xtr, model);
        model_json = to_json(model);
        break;
    }
    }

    const auto pred = detail::threshold_labels(test_scores, threshold);
    const auto m = evaluate(split.y_test, pred, test_scores);
    rec.acc = m.acc;
    rec.auc = m.auc;
    rec.mcc = m.mcc;
    out.detail.auc_hard = roc_auc(split.y_test, detail::as_scores(pred));
    const auto train_pred = detail::threshold_labels(train_scores, threshold);
    out.detail.train = evaluate(split.y_train, train_pred, train_scores);
    out.detail.n_train = static_cast<std::size_t>(n_tr);
    out.detail.n_test = static_cast<std::size_t>(n_te);

    out.artifacts = {{"cell", key.slug()},
                     {"seed", rec.seed},
                     {"dataset", ds.source},
                     {"test_fraction", c.test_fraction},
                     {"pipeline", pipe.to_json()},
                     {"model", model_json}};
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ---------------------------------------------------------------------------
// results.csv I/O

inline std::string format_record(const ResultRecord &r) {
    auto num = [&](double v) { return r.ok() ? detail::format_double(v) : std::string(); };
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    std::ostringstream s;
    s << r.model << ',' << r.dim << ',' << r.n_samples << ',' << r.epochs << ',' << num(r.acc)
      << ',' << num(r.auc) << ',' << num(r.mcc) << ',' << wall << ',' << r.eval_count << ','
      << r.seed << ',' << r.pipeline_order << ',' << r.kernel_mode << ',' << r.optimizer;
    return s.str();
}

/// Parses results.csv rows. Rows with empty metric fields come back as failed records.
inline std::vector<ResultRecord> read_results(std::istream &in, const std::string &source) {
    std::string line;
    if (!std::getline(in, line)) {
        return {};
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != results_header) {
        throw ParseError(source + ": unexpected results header");
    }
    std::vector<ResultRecord> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 13) {
            throw ParseError(source + ": row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " fields, expected 13");
        }
        auto num = [&](std::size_t i) {
            double v = 0.0;
            if (!detail::parse_double(cells[i], v)) {
                throw ParseError(source + ": bad number '" + std::string(cells[i]) +
                                 "' at row " + std::to_string(row));
            }
            return v;
        };
        ResultRecord r;
        r.model = std::string(cells[0]);
        r.dim = static_cast<std::size_t>(num(1));
        r.n_samples = static_cast<std::size_t>(num(2));
        r.epochs = static_cast<std::uint64_t>(num(3));
        if (cells[4].empty()) {
            r.error = "failed";
        } else {
            r.acc = num(4);
            r.auc = num(5);
            r.mcc = num(6);
        }
        r.wall_ms = num(7);
        r.eval_count = static_cast<std::uint64_t>(num(8));
        r.seed = std::stoull(std::string(cells[9]));
        r.pipeline_order = std::string(cells[10]);
        r.kernel_mode = std::string(cells[11]);
        r.optimizer = std::string(cells[12]);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<ResultRecord> read_results(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return read_results(in, path);
}

inline void write_results(std::ostream &out, const std::vector<ResultRecord> &records) {
    out << results_header << '\n';
    for (const auto &r : records) {
        out << format_record(r) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Sweep driver

struct RunSummary {
    std::vector<ResultRecord> records;  // every cell, canonical order
    std::size_t computed{0};
    std::size_t skipped{0};
    std::size_t failed{0};
};

namespace detail {

inline std::tuple<std::string, std::size_t, std::size_t, std::uint64_t>
record_key(const ResultRecord &r) {
    return {r.model, r.dim, r.n_samples, r.epochs};
}

inline std::string format_detail(const CellKey &k, const CellOutcome &o) {
    std::ostringstream s;
    const auto &d = o.detail;
    s << to_string(k.model) << ',' << k.dim << ',' << k.n_samples << ',' << k.epochs << ','
      << format_double(d.auc_hard) << ',' << format_double(d.train.acc) << ','
      << format_double(d.train.auc) << ',' << format_double(d.train.mcc) << ',' << d.n_train
      << ',' << d.n_test << ',' << (d.converged ? 1 : 0);
    return s.str();
}

inline const char *details_header =
    "model,dim,n_samples,epochs,auc_hard_labels,train_acc,train_auc,train_mcc,n_train,n_test,"
    "converged";

} // namespace detail

/**
 * Runs every pending cell of the grid and returns all records, including
 * those recovered from a previous run in the same output directory.
 */
inline RunSummary run_experiment(const ExperimentConfig &c, std::ostream *log = nullptr) {
    namespace fs = std::filesystem;
    if (c.models.empty() || c.pca_dims.empty() || c.sample_sizes.empty()) {
        throw DomainError("config needs at least one model, PCA dimension and sample size");
    }
    if (std::find(c.models.begin(), c.models.end(), ModelKind::Vqc) != c.models.end() &&
        c.epochs_list.empty()) {
        throw DomainError("VQC cells need a nonempty epochs_list");
    }
    for (auto d : c.pca_dims) {
        if (d < 2 || d > 10) {
            throw DomainError("PCA dimensions must lie in [2, 10], got " + std::to_string(d));
        }
    }
    for (auto e : c.epochs_list) {
        if (e < 1) {
            throw DomainError("epochs must be positive");
        }
    }
    c.optimizer.validate();

    const Dataset ds = load_dataset(c, log);
    for (auto d : c.pca_dims) {
        if (d > ds.n_features()) {
            throw DomainError("PCA dimension " + std::to_string(d) + " exceeds the " +
                              std::to_string(ds.n_features()) + " dataset features");
        }
    }

    const fs::path dir(c.output_dir);
    fs::create_directories(dir);
    if (c.save_models) {
        fs::create_directories(dir / "cells");
    }
    {
        std::ofstream cfg(dir / "config.json");
        auto j = to_json(c);
        j["dataset_source"] = ds.source;
        cfg << j.dump(2) << '\n';
    }

    const fs::path results_path = dir / "results.csv";
    const fs::path details_path = dir / "details.csv";
    std::map<std::tuple<std::string, std::size_t, std::size_t, std::uint64_t>, ResultRecord>
        done;
    std::map<std::tuple<std::string, std::size_t, std::size_t, std::uint64_t>, std::string>
        detail_rows;
    if (fs::exists(results_path)) {
        for (auto &r : read_results(results_path.string())) {
            if (r.ok()) {
                done[detail::record_key(r)] = r;
            }
        }
    }
    if (fs::exists(details_path)) {
        std::ifstream in(details_path);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            const auto cells = detail::split_csv_line(line);
            if (cells.size() < 4) {
                continue;
            }
            detail_rows[{std::string(cells[0]), std::stoull(std::string(cells[1])),
                         std::stoull(std::string(cells[2])), std::stoull(std::string(cells[3]))}] =
                line;
        }
    }

    const auto cells = enumerate_cells(c);
    std::vector<CellKey> pending;
    for (const auto &k : cells) {
        const auto key = std::make_tuple(to_string(k.model), k.dim, k.n_samples, k.epochs);
        const auto it = done.find(key);
        if (it == done.end() || it->second.seed != cell_seed(c.seed, k)) {
            pending.push_back(k);
        }
    }

    RunSummary summary;
    summary.skipped = cells.size() - pending.size();

    std::mutex io_mutex;
    {
        const bool fresh = !fs::exists(results_path) || fs::file_size(results_path) == 0;
        std::ofstream out(results_path, std::ios::app);
        if (fresh) {
            out << results_header << '\n';
        }
    }
    std::ofstream errors(dir / "errors.log", std::ios::app);

    auto process = [&](const CellKey &k) {
        CellOutcome o;
        std::string err;
        try {
            o = run_cell(c, ds, k);
        } catch (const std::exception &e) {
            err = e.what();
        }
        if (!err.empty()) {
            o.record.model = to_string(k.model);
            o.record.dim = k.dim;
            o.record.n_samples = k.n_samples;
            o.record.epochs = k.epochs;
            o.record.seed = cell_seed(c.seed, k);
            o.record.pipeline_order = to_string(c.pipeline_order);
            o.record.error = err;
        }
        const auto key = std::make_tuple(o.record.model, k.dim, k.n_samples, k.epochs);
        std::lock_guard lock(io_mutex);
        {
            std::ofstream out(results_path, std::ios::app);
            out << format_record(o.record) << '\n';
        }
        if (err.empty()) {
            detail_rows[key] = detail::format_detail(k, o);
            if (c.save_models) {
                std::ofstream a(dir / "cells" / (k.slug() + ".json"));
                a << o.artifacts.dump(1) << '\n';
            }
            ++summary.computed;
        } else {
            errors << k.slug() << ": " << err << '\n';
            ++summary.failed;
        }
        if (log != nullptr) {
            *log << k.slug() << (err.empty() ? " done" : " FAILED: " + err) << '\n';
        }
        done[key] = o.record;
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(c.threads, pending.size()));
    if (n_threads <= 1) {
        for (const auto &k : pending) {
            process(k);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < pending.size(); i = next++) {
                    process(pending[i]);
                }
            });
        }
        for (auto &w : workers) {
            w.join();
        }
    }

    // Canonical rewrite: grid order, one row per cell.
    for (const auto &k : cells) {
        summary.records.push_back(done.at({to_string(k.model), k.dim, k.n_samples, k.epochs}));
    }
    {
        std::ofstream out(results_path, std::ios::trunc);
        write_results(out, summary.records);
    }
    {
        std::ofstream out(details_path, std::ios::trunc);
        out << detail::details_header << '\n';
        for (const auto &k : cells) {
            const auto it = detail_rows.find({to_string(k.model), k.dim, k.n_samples, k.epochs});
            if (it != detail_rows.end()) {
                out << it->second << '\n';
            }
        }
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Tables and plot data

enum class Metric { Acc, Auc, Mcc };

inline Metric parse_metric(const std::string &s) {
    if (s == "ACC" || s == "acc") {
        return Metric::Acc;
    }
    if (s == "AUC" || s == "auc") {
        return Metric::Auc;
    }
    if (s == "MCC" || s == "mcc") {
        return Metric::Mcc;
    }
    throw ParseError("unknown metric '" + s + "'");
}

inline std::string to_string(Metric m) {
    return m == Metric::Acc ? "ACC" : (m == Metric::Auc ? "AUC" : "MCC");
}

inline double metric_value(const ResultRecord &r, Metric m) {
    return m == Metric::Acc ? r.acc : (m == Metric::Auc ? r.auc : r.mcc);
}

/// Successful records of one model (and, if given, one epoch count).
inline std::vector<ResultRecord> select_records(const std::vector<ResultRecord> &records,
                                                const std::string &model,
                                                std::optional<std::uint64_t> epochs) {
    std::vector<ResultRecord> out;
    for (const auto &r : records) {
        if (r.ok() && r.model == model && (!epochs || r.epochs == *epochs)) {
            out.push_back(r);
        }
    }
    return out;
}

/**
 * Markdown table of one metric: PCA dimensions as rows, sample sizes as
 * columns, both ascending. Values carry 4 decimals; every cell equal to the
 * maximum is bolded; missing cells show an em dash.
 */
inline std::string render_table(const std::vector<ResultRecord> &records, Metric metric,
                                const std::string &model,
                                std::optional<std::uint64_t> epochs = std::nullopt) {
    const auto sel = select_records(records, model, epochs);
    if (sel.empty()) {
        throw DomainError("no " + model + " records" +
                          (epochs ? " at " + std::to_string(*epochs) + " epochs" : "") +
                          " to tabulate");
    }
    std::set<std::size_t> dims;
    std::set<std::size_t> sizes;
    std::map<std::pair<std::size_t, std::size_t>, double> cell;
    for (const auto &r : sel) {
        dims.insert(r.dim);
        sizes.insert(r.n_samples);
        cell[{r.dim, r.n_samples}] = metric_value(r, metric);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto &[k, v] : cell) {
        best = std::max(best, v);
    }
    std::ostringstream s;
    s << "| dim |";
    for (auto n : sizes) {
        s << " n=" << n << " |";
    }
    s << "\n|---|";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        s << "---|";
    }
    s << '\n';
    for (auto d : dims) {
        s << "| " << d << " |";
        for (auto n : sizes) {
            const auto it = cell.find({d, n});
            if (it == cell.end()) {
                s << " — |";
                continue;
            }
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", it->second);
            if (it->second == best) {
                s << " **" << buf << "** |";
            } else {
                s << ' ' << buf << " |";
            }
        }
        s << '\n';
    }
    return s.str();
}

/**
 * Writes acc_vs_dim.csv (dim, one column per sample size) and
 * auc_vs_samples.csv (n, one column per dim) for records of a single
 * (model, epochs) group. Missing cells are left empty.
 */
inline void emit_plot_data(const std::vector<ResultRecord> &records,
                           const std::string &output_dir) {
    namespace fs = std::filesystem;
    std::set<std::size_t> dims;
    std::set<std::size_t> sizes;
    std::map<std::pair<std::size_t, std::size_t>, const ResultRecord *> cell;
    for (const auto &r : records) {
        if (!r.ok()) {
            continue;
        }
        if (!cell.empty()) {
            const auto &first = *cell.begin()->second;
            if (first.model != r.model || first.epochs != r.epochs) {
                throw DomainError("plot data expects records of a single model/epochs group");
            }
        }
        dims.insert(r.dim);
        sizes.insert(r.n_samples);
        cell[{r.dim, r.n_samples}] = &r;
    }
    fs::create_directories(output_dir);
    auto value = [&](std::size_t d, std::size_t n, Metric m) {
        const auto it = cell.find({d, n});
        return it == cell.end() ? std::string()
                                : detail::format_double(metric_value(*it->second, m));
    };
    {
        std::ofstream out(fs::path(output_dir) / "acc_vs_dim.csv");
        out << "dim";
        for (auto n : sizes) {
            out << ",n=" << n;
        }
        out << '\n';
        for (auto d : dims) {
            out << d;
            for (auto n : sizes) {
                out << ',' << value(d, n, Metric::Acc);
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(fs::path(output_dir) / "auc_vs_samples.csv");
        out << "n";
        for (auto d : dims) {
            out << ",dim=" << d;
        }
        out << '\n';
        for (auto n : sizes) {
            out << n;
            for (auto d : dims) {
                out << ',' << value(d, n, Metric::Auc);
            }
            out << '\n';
        }
    }
}

/// Plot data for every (model, epochs) group, one subdirectory each.
inline std::vector<std::string> emit_plot_data_grouped(const std::vector<ResultRecord> &records,
                                                       const std::string &output_dir) {
    std::map<std::pair<std::string, std::uint64_t>, std::vector<ResultRecord>> groups;
    for (const auto &r : records) {
        if (r.ok()) {
            groups[{r.model, r.epochs}].push_back(r);
        }
    }
    std::vector<std::string> dirs;
    for (const auto &[key, recs] : groups) {
        const std::string name =
            key.first + (key.first == "VQC" ? "_e" + std::to_string(key.second) : "");
        const auto path = (std::filesystem::path(output_dir) / name).string();
        emit_plot_data(recs, path);
        dirs.push_back(path);
    }
    return dirs;
}

// ---------------------------------------------------------------------------
// Gram matrix cache files: square, header-less, row-major CSV.

inline void write_gram_csv(const Matrix &K, std::ostream &out) {
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            out << (j ? "," : "") << detail::format_double(K(i, j));
        }
        out << '\n';
    }
}

inline void write_gram_csv(const Matrix &K, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    write_gram_csv(K, out);
}

inline Matrix read_gram_csv(std::istream &in, const std::string &source) {
    std::vector<double> values;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (rows == 0) {
            width = cells.size();
        } else if (cells.size() != width) {
            throw ParseError(source + ": ragged Gram matrix at row " + std::to_string(rows + 1));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v)) {
                throw ParseError(source + ": cannot parse '" + std::string(cells[c]) +
                                 "' at row " + std::to_string(rows + 1) + ", column " +
                                 std::to_string(c + 1));
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0 || rows != width) {
        throw ParseError(source + ": Gram matrix must be square and nonempty");
    }
    return Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(width));
}

inline Matrix read_gram_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return read_gram_csv(in, path);
}

} // namespace qepi
