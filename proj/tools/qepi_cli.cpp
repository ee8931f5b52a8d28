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

// Command-line front end: experiment sweeps, synthetic data, tables, plot
// data and Gram matrix export/import.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qepi.hpp"

namespace {

int cmd_run(const std::string &config_path, std::optional<std::string> output_dir,
            std::optional<std::size_t> threads, bool quiet) {
    auto cfg = qepi::load_config(config_path);
    if (output_dir) {
        cfg.output_dir = *output_dir;
    }
    if (threads) {
        cfg.threads = *threads;
    }
    const auto summary = qepi::run_experiment(cfg, quiet ? nullptr : &std::cerr);
    std::cerr << summary.records.size() << " cells: " << summary.computed << " computed, "
              << summary.skipped << " resumed, " << summary.failed << " failed -> "
              << cfg.output_dir << "/results.csv\n";
    return summary.failed == 0 ? 0 : 2;
}

int cmd_synth(std::size_t n, std::size_t d, double pos_frac, double separation,
              std::uint64_t seed, const std::string &out) {
    const auto ds = qepi::generate_synthetic(n, d, pos_frac, separation, seed);
    if (out == "-") {
        qepi::write_csv(std::cout, ds);
    } else {
        qepi::save_csv(ds, out);
    }
    const auto cc = qepi::class_counts(ds);
    std::cerr << ds.source << ": " << cc.n_pos << " positive, " << cc.n_neg << " negative\n";
    return 0;
}

int cmd_table(const std::string &results, const std::string &metric, const std::string &model,
              std::optional<std::uint64_t> epochs) {
    const auto records = qepi::read_results(results);
    std::cout << qepi::render_table(records, qepi::parse_metric(metric), model, epochs);
    return 0;
}

int cmd_plot_data(const std::string &results, const std::string &out_dir) {
    const auto records = qepi::read_results(results);
    for (const auto &dir : qepi::emit_plot_data_grouped(records, out_dir)) {
        std::cerr << "wrote " << dir << '\n';
    }
    return 0;
}

struct KernelArgs {
    std::string data;
    std::size_t dim{2};
    std::string mode{"exact"};
    std::uint64_t shots{qepi::default_shots};
    std::uint64_t seed{0};
    std::string order{"PCA_THEN_SCALE"};
    bool entangling{true};
    std::size_t repetitions{1};
    std::string out;
    std::string import_path;
    double C{1.0};
};

qepi::Matrix reduce(const qepi::Dataset &ds, const KernelArgs &a) {
    if (a.dim > ds.n_features()) {
        throw qepi::DomainError("--dim " + std::to_string(a.dim) + " exceeds the " +
                                std::to_string(ds.n_features()) + " dataset features");
    }
    const qepi::FittedPipeline pipe(ds.features, a.dim, qepi::parse_pipeline_order(a.order),
                                    false, 1.0);
    return pipe.transform(ds.features);
}

int cmd_kernel(const KernelArgs &a) {
    const auto ds = qepi::load_csv(a.data, &std::cerr);
    if (!a.import_path.empty()) {
        const auto K = qepi::read_gram_csv(a.import_path);
        if (static_cast<std::size_t>(K.rows()) != ds.size()) {
            throw qepi::DimensionError("Gram matrix has " + std::to_string(K.rows()) +
                                       " rows, dataset has " + std::to_string(ds.size()));
        }
        const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
        qepi::SvmOptions opt;
        opt.C = a.C;
        const auto model = qepi::train_svm(K, ds.labels, opt);
        const auto scores = qepi::decision_values(model, K);
        const auto pred = qepi::detail::threshold_labels(scores, 0.0);
        const auto m = qepi::evaluate(ds.labels, pred, scores);
        std::cout << "rows=" << K.rows() << " max_asymmetry=" << asym
                  << " support_vectors=" << model.support_indices.size()
                  << " train_acc=" << m.acc << " train_auc=" << m.auc << " train_mcc=" << m.mcc
                  << '\n';
        return 0;
    }
    if (a.out.empty()) {
        throw qepi::DomainError("kernel export needs --out");
    }
    const auto X = reduce(ds, a);
    const qepi::FeatureMapSpec fmap{a.dim, a.entangling, a.repetitions};
    const auto mode = qepi::parse_kernel_mode(a.mode, a.shots);
    const auto km = qepi::kernel_matrix(X, fmap, mode, a.seed);
    qepi::write_gram_csv(km.values, a.out);
    std::cerr << "wrote " << km.values.rows() << "x" << km.values.cols() << " Gram matrix ("
              << mode.str() << ", " << km.eval_count << " evaluations) to " << a.out << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum kernel and variational classifier experiments"};
    app.require_subcommand(1);

    auto *run = app.add_subcommand("run", "Run an experiment sweep from a JSON config");
    std::string config_path;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> threads;
    bool quiet = false;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--output-dir", output_dir, "Override output_dir from the config");
    run->add_option("--threads", threads, "Override worker thread count");
    run->add_flag("--quiet", quiet, "Suppress per-cell progress");

    auto *synth = app.add_subcommand("synth", "Write a two-cluster Gaussian dataset as CSV");
    std::size_t n = 200;
    std::size_t d = 10;
    double pos_frac = 0.73;
    double separation = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    synth->add_option("--n", n, "Number of samples")->capture_default_str();
    synth->add_option("--d", d, "Number of features")->capture_default_str();
    synth->add_option("--pos-frac", pos_frac, "Fraction of positive labels")
        ->capture_default_str();
    synth->add_option("--separation", separation, "Distance between class means")
        ->capture_default_str();
    synth->add_option("--seed", seed, "Random seed")->capture_default_str();
    synth->add_option("--out", out, "Output CSV path, or - for stdout")->required();

    auto *table = app.add_subcommand("table", "Render a Markdown table from results.csv");
    std::string results;
    std::string metric = "ACC";
    std::string model;
    std::optional<std::uint64_t> epochs;
    table->add_option("--results", results, "results.csv path")->required();
    table->add_option("--metric", metric, "ACC, AUC or MCC")->capture_default_str();
    table->add_option("--model", model, "QSVM, VQC or RBF_SVM")->required();
    table->add_option("--epochs", epochs, "Epoch count to select (VQC)");

    auto *plot = app.add_subcommand("plot-data", "Write plot-ready CSVs per model group");
    std::string plot_results;
    std::string out_dir;
    plot->add_option("--results", plot_results, "results.csv path")->required();
    plot->add_option("--out-dir", out_dir, "Output directory")->required();

    auto *kernel = app.add_subcommand("kernel", "Export or import a fidelity Gram matrix");
    KernelArgs ka;
    kernel->add_option("--data", ka.data, "Dataset CSV with a label column")->required();
    kernel->add_option("--dim", ka.dim, "PCA dimension = qubit count")->capture_default_str();
    kernel->add_option("--mode", ka.mode, "exact or shots")->capture_default_str();
    kernel->add_option("--shots", ka.shots, "Shots per entry in shots mode")
        ->capture_default_str();
    kernel->add_option("--seed", ka.seed, "Seed for shot sampling")->capture_default_str();
    kernel->add_option("--order", ka.order, "PCA_THEN_SCALE or SCALE_THEN_PCA")
        ->capture_default_str();
    kernel->add_option("--entangling", ka.entangling, "CX chain in the feature map")
        ->capture_default_str();
    kernel->add_option("--reps", ka.repetitions, "Feature map repetitions")
        ->capture_default_str();
    kernel->add_option("--out", ka.out, "Gram matrix CSV to write");
    kernel->add_option("--import", ka.import_path,
                       "Read a Gram matrix CSV and fit an SVM on it instead");
    kernel->add_option("--C", ka.C, "SVM box constraint for --import")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(config_path, output_dir, threads, quiet);
        }
        if (*synth) {
            return cmd_synth(n, d, pos_frac, separation, seed, out);
        }
        if (*table) {
            return cmd_table(results, metric, model, epochs);
        }
        if (*plot) {
            return cmd_plot_data(plot_results, out_dir);
        }
        if (*kernel) {
            return cmd_kernel(ka);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
