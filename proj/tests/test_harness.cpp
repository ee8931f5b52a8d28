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

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qepi/harness.hpp"

using namespace qepi;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
    const auto p = fs::temp_directory_path() / ("qepi_harness_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        out.push_back(line);
    }
    return out;
}

// results.csv with the wall_ms column blanked.
std::string without_wall(const fs::path &p) {
    std::string out;
    for (const auto &line : lines_of(slurp(p))) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() > 7) {
            cells[7] = "";
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out += (i ? "," : "") + cells[i];
        }
        out += '\n';
    }
    return out;
}

ExperimentConfig small_config(const fs::path &dir) {
    ExperimentConfig c;
    c.dataset = SyntheticSpec{80, 4, 0.6, 2.0, 3};
    c.models = {ModelKind::Qsvm, ModelKind::RbfSvm, ModelKind::Vqc};
    c.pca_dims = {2, 3};
    c.sample_sizes = {24, 40};
    c.epochs_list = {2};
    c.seed = 17;
    c.output_dir = dir.string();
    c.vqc_layers = 1;
    return c;
}

ResultRecord record(std::string model, std::size_t dim, std::size_t n, double acc,
                    std::uint64_t epochs = 0) {
    ResultRecord r;
    r.model = std::move(model);
    r.dim = dim;
    r.n_samples = n;
    r.epochs = epochs;
    r.acc = acc;
    r.auc = acc / 2;
    r.mcc = acc - 0.5;
    r.pipeline_order = "PCA_THEN_SCALE";
    r.kernel_mode = "exact";
    r.optimizer = "smo(C=1;tol=0.0001)";
    return r;
}

std::vector<ResultRecord> table5_shape() {
    std::vector<ResultRecord> recs;
    for (std::size_t d = 2; d <= 10; ++d) {
        for (std::size_t n : {20, 100, 500, 1000}) {
            recs.push_back(record("VQC", d, n, 0.5 + 0.01 * static_cast<double>(d) -
                                                   0.0001 * static_cast<double>(n), 10));
        }
    }
    return recs;
}

} // namespace

TEST(harness, grid_counts) {
    ExperimentConfig c;
    c.models = {ModelKind::Qsvm};
    c.pca_dims = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    c.sample_sizes = {20, 100};
    EXPECT_EQ(enumerate_cells(c).size(), 18u);

    c.models = {ModelKind::Vqc};
    c.sample_sizes = {20, 100, 500, 1000};
    c.epochs_list = {10, 100, 150};
    EXPECT_EQ(enumerate_cells(c).size(), 108u);

    c.models = {ModelKind::Qsvm, ModelKind::Vqc, ModelKind::RbfSvm};
    EXPECT_EQ(enumerate_cells(c).size(), 9u * 4 * (1 + 3 + 1));

    const auto cells = enumerate_cells(c);
    EXPECT_EQ(cells.front(), (CellKey{ModelKind::Qsvm, 2, 20, 0}));
    EXPECT_EQ(cells[36], (CellKey{ModelKind::Vqc, 2, 20, 10}));
}

TEST(harness, cell_seeds_are_distinct_and_stable) {
    std::set<std::uint64_t> seen;
    ExperimentConfig c;
    c.models = {ModelKind::Qsvm, ModelKind::Vqc, ModelKind::RbfSvm};
    c.pca_dims = {2, 3, 4};
    c.sample_sizes = {20, 100};
    c.epochs_list = {10, 100};
    for (const auto &k : enumerate_cells(c)) {
        EXPECT_TRUE(seen.insert(cell_seed(5, k)).second);
        EXPECT_EQ(cell_seed(5, k), cell_seed(5, k));
        EXPECT_NE(cell_seed(5, k), cell_seed(6, k));
    }
}

TEST(harness, config_json_round_trip) {
    auto c = small_config("out");
    c.kernel_mode = KernelMode::with_shots(256);
    c.optimizer = OptimizerConfig::spsa(9);
    c.pipeline_order = PipelineOrder::ScaleThenPca;
    c.rbf_gamma = 0.7;
    c.vqc_entangler = Entangler::Ring;
    const auto back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.kernel_mode.shots, 256u);
    EXPECT_EQ(back.optimizer.kind, OptimizerKind::Spsa);

    const auto minimal = config_from_json(nlohmann::json::parse(
        R"({"dataset": "data.csv", "models": ["QSVM", "VQC"], "kernel_mode": "shots"})"));
    EXPECT_EQ(std::get<std::string>(minimal.dataset), "data.csv");
    EXPECT_EQ(minimal.kernel_mode.shots, default_shots);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"models": ["LSTM"]})")), ParseError);
}

TEST(harness, results_header_and_round_trip) {
    EXPECT_STREQ(results_header, "model,dim,n_samples,epochs,acc,auc,mcc,wall_ms,eval_count,seed,"
                                 "pipeline_order,kernel_mode,optimizer");
    auto recs = table5_shape();
    recs[3].error = "boom";
    std::stringstream io;
    write_results(io, recs);
    const auto back = read_results(io, "mem");
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].ok(), recs[i].ok());
        if (recs[i].ok()) {
            EXPECT_EQ(back[i].acc, recs[i].acc);
            EXPECT_EQ(back[i].mcc, recs[i].mcc);
        }
        EXPECT_EQ(back[i].optimizer, recs[i].optimizer);
    }
    std::istringstream bad("model,dim\n");
    EXPECT_THROW(read_results(bad, "mem"), ParseError);
}

TEST(harness, single_cell_and_resume) {
    const auto dir = fresh_dir("resume");
    auto c = small_config(dir);
    c.models = {ModelKind::Qsvm};
    c.pca_dims = {2};
    c.sample_sizes = {24};
    const auto first = run_experiment(c);
    ASSERT_EQ(first.records.size(), 1u);
    EXPECT_EQ(first.computed, 1u);
    EXPECT_TRUE(first.records[0].ok());
    const auto before = slurp(dir / "results.csv");

    const auto second = run_experiment(c);
    EXPECT_EQ(second.computed, 0u);
    EXPECT_EQ(second.skipped, 1u);
    EXPECT_EQ(slurp(dir / "results.csv"), before);

    // Extending the grid computes only the new cell.
    c.sample_sizes = {24, 40};
    const auto third = run_experiment(c);
    EXPECT_EQ(third.computed, 1u);
    EXPECT_EQ(third.records.size(), 2u);
    EXPECT_TRUE(fs::exists(dir / "config.json"));
    EXPECT_TRUE(fs::exists(dir / "details.csv"));
    EXPECT_TRUE(fs::exists(dir / "cells" / "QSVM_d2_n24_e0.json"));
    fs::remove_all(dir);
}

TEST(harness, full_grid_is_deterministic_and_parallel_safe) {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    auto ca = small_config(a);
    auto cb = small_config(b);
    cb.threads = 3;
    const auto ra = run_experiment(ca);
    const auto rb = run_experiment(cb);
    ASSERT_EQ(ra.records.size(), 12u);
    EXPECT_EQ(ra.failed, 0u);
    EXPECT_EQ(without_wall(a / "results.csv"), without_wall(b / "results.csv"));
    EXPECT_EQ(slurp(a / "details.csv"), slurp(b / "details.csv"));

    const auto lines = lines_of(slurp(a / "results.csv"));
    ASSERT_EQ(lines.size(), 13u);
    EXPECT_EQ(lines[0], results_header);
    for (const auto &r : ra.records) {
        EXPECT_GE(r.acc, 0.0);
        EXPECT_LE(r.acc, 1.0);
        EXPECT_GE(r.mcc, -1.0);
        EXPECT_LE(r.mcc, 1.0);
        EXPECT_GE(r.wall_ms, 0.0);
        EXPECT_GT(r.eval_count, 0u);
        EXPECT_EQ(r.pipeline_order, "PCA_THEN_SCALE");
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(harness, eval_counts_follow_model_cost) {
    const auto dir = fresh_dir("evals");
    auto c = small_config(dir);
    c.pca_dims = {2};
    c.sample_sizes = {40};
    c.save_models = false;
    const auto r = run_experiment(c).records;
    // 40 samples, 60% positive: 24 pos (6 test), 16 neg (4 test) -> 30 train, 10 test.
    const std::uint64_t tr = 30;
    const std::uint64_t te = 10;
    EXPECT_EQ(r[0].model, "QSVM");
    EXPECT_EQ(r[0].eval_count, tr * (tr - 1) / 2 + te * tr);
    EXPECT_EQ(r[0].kernel_mode, "exact");
    EXPECT_EQ(r[1].model, "RBF_SVM");
    EXPECT_EQ(r[1].eval_count, tr * (tr - 1) / 2 + te * tr);
    EXPECT_EQ(r[2].model, "VQC");
    const std::uint64_t params = 2 * 2;
    EXPECT_EQ(r[2].eval_count, tr + 2 * (2 * params + 2) * tr + te);
    EXPECT_EQ(r[2].kernel_mode, "statevector");
    fs::remove_all(dir);
}

TEST(harness, failed_cells_become_error_rows) {
    const auto dir = fresh_dir("errors");
    auto c = small_config(dir);
    c.models = {ModelKind::RbfSvm};
    c.pca_dims = {2};
    c.sample_sizes = {24, 500};  // 500 exceeds the 80-row dataset
    const auto s = run_experiment(c);
    EXPECT_EQ(s.failed, 1u);
    EXPECT_EQ(s.computed, 1u);
    ASSERT_EQ(s.records.size(), 2u);
    EXPECT_TRUE(s.records[0].ok());
    EXPECT_FALSE(s.records[1].ok());
    const auto lines = lines_of(slurp(dir / "results.csv"));
    EXPECT_NE(lines[2].find("RBF_SVM,2,500,0,,,,"), std::string::npos);
    EXPECT_NE(slurp(dir / "errors.log").find("RBF_SVM_d2_n500_e0"), std::string::npos);

    // Failed cells are retried on resume; completed ones are not.
    const auto again = run_experiment(c);
    EXPECT_EQ(again.computed, 0u);
    EXPECT_EQ(again.failed, 1u);
    EXPECT_EQ(again.skipped, 1u);
    fs::remove_all(dir);
}

TEST(harness, rejects_invalid_configs) {
    auto c = small_config(fresh_dir("invalid"));
    c.pca_dims = {1};
    EXPECT_THROW(run_experiment(c), DomainError);
    c.pca_dims = {5};  // dataset has 4 features
    EXPECT_THROW(run_experiment(c), DomainError);
    c.pca_dims = {2};
    c.models.clear();
    EXPECT_THROW(run_experiment(c), DomainError);
    fs::remove_all(c.output_dir);
}

TEST(harness, leakage_guard) {
    const auto ds = generate_synthetic(60, 5, 0.5, 1.0, 4);
    const auto split = stratified_split(ds.features, ds.labels, 0.25, 9);
    for (auto order : {PipelineOrder::PcaThenScale, PipelineOrder::ScaleThenPca}) {
        const FittedPipeline pipe(split.X_train, 3, order, true, 1.0);
        const Matrix all = pipe.transform(split.X_test);
        Matrix perturbed = split.X_test;
        perturbed.bottomRows(perturbed.rows() - 1).array() += 50.0;
        const Matrix moved = pipe.transform(perturbed);
        for (Eigen::Index i = 0; i < all.rows(); ++i) {
            const Matrix one = pipe.transform(split.X_test.row(i));
            EXPECT_LT((one - all.row(i)).norm(), 1e-12);
        }
        EXPECT_LT((moved.row(0) - all.row(0)).norm(), 1e-12);
        // The train partition alone determines the fit.
        const FittedPipeline same(split.X_train, 3, order, true, 1.0);
        EXPECT_EQ(same.to_json(), pipe.to_json());
    }
}

TEST(harness, pipeline_orders_standardize_as_documented) {
    const auto ds = generate_synthetic(200, 6, 0.5, 1.0, 8);
    const FittedPipeline pts(ds.features, 3, PipelineOrder::PcaThenScale, false, 1.0);
    const Matrix Z = pts.transform(ds.features);
    for (Eigen::Index c = 0; c < Z.cols(); ++c) {
        EXPECT_NEAR(Z.col(c).mean(), 0.0, 1e-10);
        EXPECT_NEAR(std::sqrt((Z.col(c).array() - Z.col(c).mean()).square().mean()), 1.0, 1e-10);
    }
    const FittedPipeline stp(ds.features, 3, PipelineOrder::ScaleThenPca, false, 2.0);
    const Matrix W = stp.transform(ds.features);
    EXPECT_EQ(W.cols(), 3);
    EXPECT_NEAR(W.col(0).mean(), 0.0, 1e-10);
    EXPECT_FALSE(stp.to_json().contains("scaler_after_pca"));
}

TEST(harness, render_table_single_record) {
    const auto t = render_table({record("QSVM", 4, 20, 0.7)}, Metric::Acc, "QSVM");
    EXPECT_EQ(t, "| dim | n=20 |\n|---|---|\n| 4 | **0.7000** |\n");
    EXPECT_THROW(render_table({record("QSVM", 4, 20, 0.7)}, Metric::Acc, "VQC"), DomainError);
}

TEST(harness, render_table_shape_ties_and_gaps) {
    auto recs = table5_shape();
    const auto t = render_table(recs, Metric::Acc, "VQC", 10);
    const auto lines = lines_of(t);
    ASSERT_EQ(lines.size(), 2u + 9u);
    EXPECT_EQ(lines[0], "| dim | n=20 | n=100 | n=500 | n=1000 |");
    for (std::size_t i = 2; i < lines.size(); ++i) {
        EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), '|'), 6);
        EXPECT_TRUE(std::regex_search(lines[i], std::regex(R"(\d\.\d{4})")));
    }
    EXPECT_NE(lines.back().find("**"), std::string::npos);

    std::vector<ResultRecord> tie{record("QSVM", 2, 20, 0.9), record("QSVM", 2, 100, 0.5),
                                  record("QSVM", 3, 20, 0.9)};
    const auto tt = render_table(tie, Metric::Acc, "QSVM");
    EXPECT_EQ(tt, "| dim | n=20 | n=100 |\n|---|---|---|\n| 2 | **0.9000** | 0.5000 |\n"
                  "| 3 | **0.9000** | — |\n");
    const auto auc = render_table(tie, Metric::Auc, "QSVM");
    EXPECT_NE(auc.find("**0.4500**"), std::string::npos);
}

TEST(harness, plot_data_files) {
    const auto dir = fresh_dir("plots");
    emit_plot_data({}, (dir / "empty").string());
    EXPECT_EQ(slurp(dir / "empty" / "acc_vs_dim.csv"), "dim\n");
    EXPECT_EQ(slurp(dir / "empty" / "auc_vs_samples.csv"), "n\n");

    emit_plot_data({record("QSVM", 4, 20, 0.75)}, (dir / "one").string());
    EXPECT_EQ(slurp(dir / "one" / "acc_vs_dim.csv"), "dim,n=20\n4,0.75\n");
    EXPECT_EQ(slurp(dir / "one" / "auc_vs_samples.csv"), "n,dim=4\n20,0.375\n");

    emit_plot_data(table5_shape(), (dir / "t5").string());
    const auto acc = lines_of(slurp(dir / "t5" / "acc_vs_dim.csv"));
    ASSERT_EQ(acc.size(), 10u);
    for (const auto &l : acc) {
        EXPECT_EQ(std::count(l.begin(), l.end(), ','), 4);
    }
    EXPECT_EQ(lines_of(slurp(dir / "t5" / "auc_vs_samples.csv")).size(), 5u);

    auto mixed = table5_shape();
    mixed.push_back(record("QSVM", 2, 20, 0.6));
    EXPECT_THROW(emit_plot_data(mixed, (dir / "mixed").string()), DomainError);
    const auto dirs = emit_plot_data_grouped(mixed, (dir / "grouped").string());
    EXPECT_EQ(dirs.size(), 2u);
    EXPECT_TRUE(fs::exists(dir / "grouped" / "VQC_e10" / "acc_vs_dim.csv"));
    EXPECT_TRUE(fs::exists(dir / "grouped" / "QSVM" / "auc_vs_samples.csv"));
    fs::remove_all(dir);
}

TEST(harness, gram_csv_round_trip) {
    const auto ds = generate_synthetic(6, 2, 0.5, 1.0, 2);
    const auto km = kernel_matrix(ds.features, FeatureMapSpec::kernel_default(2),
                                  KernelMode::exact(), 0);
    std::stringstream io;
    write_gram_csv(km.values, io);
    EXPECT_EQ(read_gram_csv(io, "mem"), km.values);
    std::istringstream ragged("1,2\n3\n");
    EXPECT_THROW(read_gram_csv(ragged, "mem"), ParseError);
    std::istringstream rect("1,2\n3,4\n5,6\n");
    EXPECT_THROW(read_gram_csv(rect, "mem"), ParseError);
}
