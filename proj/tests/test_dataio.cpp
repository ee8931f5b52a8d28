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

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "qepi/dataio.hpp"

using namespace qepi;

namespace {

Dataset parse(const std::string &text) {
    std::istringstream in(text);
    return parse_csv(in, "mem");
}

std::string parse_error(const std::string &text) {
    try {
        parse(text);
    } catch (const ParseError &e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(dataio, label_mapping) {
    const auto ds = parse("a,b,label\n1,2,1\n3,4,0\n5,6,1\n");
    EXPECT_EQ(ds.labels, (Labels{1, -1, 1}));
    EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(ds.features(1, 1), 4.0);

    const auto pm = parse("label,x\n-1,0.5\n1,-2e3\n");
    EXPECT_EQ(pm.labels, (Labels{-1, 1}));
    EXPECT_EQ(pm.features(1, 0), -2000.0);
}

TEST(dataio, ten_feature_header) {
    std::string text;
    for (int c = 0; c < 10; ++c) {
        text += "d" + std::to_string(c) + ",";
    }
    text += "label\n";
    for (int c = 0; c < 10; ++c) {
        text += std::to_string(c) + ",";
    }
    text += "1\n";
    const auto ds = parse("\xEF\xBB\xBF" + text);
    EXPECT_EQ(ds.n_features(), 10u);
    EXPECT_EQ(ds.feature_names.front(), "d0");
    EXPECT_EQ(ds.feature_names.back(), "d9");
}

TEST(dataio, parse_errors) {
    const auto msg = parse_error("a,b,label\n1,2,1\n3,abc,0\n");
    EXPECT_NE(msg.find("abc"), std::string::npos);
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    EXPECT_NE(msg.find("'b'"), std::string::npos);

    EXPECT_NE(parse_error("a,b\n1,2\n").find("label"), std::string::npos);
    EXPECT_NE(parse_error("").find("empty"), std::string::npos);
    EXPECT_NE(parse_error("a,label\n1,0\n2,-1\n").find("mixed"), std::string::npos);
    EXPECT_FALSE(parse_error("a,label\n1,2\n").empty());
    EXPECT_FALSE(parse_error("a,label\n1\n").empty());
    EXPECT_FALSE(parse_error("a,label\n").empty());
    EXPECT_FALSE(parse_error("a,label\nnan,1\n").empty());
    EXPECT_THROW(load_csv("/nonexistent/file.csv"), Error);
}

TEST(dataio, logs_counts) {
    std::istringstream in("x,label\n1,1\n2,0\n3,1\n");
    std::ostringstream log;
    parse_csv(in, "mem", &log);
    EXPECT_EQ(log.str(), "mem: 3 rows, 1 features, 2 positive, 1 negative\n");
}

TEST(dataio, class_counts_examples) {
    Dataset ds;
    ds.labels = {1, 1, -1};
    EXPECT_EQ(class_counts(ds).n_pos, 2u);
    EXPECT_EQ(class_counts(ds).n_neg, 1u);
    ds.labels = {1, 1, 1, 1};
    EXPECT_EQ(class_counts(ds).n_pos, 4u);
    EXPECT_EQ(class_counts(ds).n_neg, 0u);
}

TEST(dataio, round_trip_is_bit_identical) {
    auto ds = generate_synthetic(50, 4, 0.3, 2.0, 17);
    ds.features(0, 0) = 0.1;
    ds.features(1, 1) = 1e-300;
    ds.features(2, 2) = -123456789.125;
    ds.features(3, 3) = std::numeric_limits<double>::denorm_min();
    std::ostringstream out;
    write_csv(out, ds);
    std::istringstream in(out.str());
    const auto back = parse_csv(in, "mem");
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(back.labels, ds.labels);
    EXPECT_EQ(back.feature_names, ds.feature_names);

    const auto path = std::filesystem::temp_directory_path() / "qepi_dataio_rt.csv";
    save_csv(ds, path.string());
    EXPECT_EQ(load_csv(path.string()).features, ds.features);
    std::filesystem::remove(path);
}

TEST(dataio, synthetic_counts_and_determinism) {
    const auto ds = generate_synthetic(100, 10, 0.73, 1.0, 5);
    EXPECT_EQ(class_counts(ds).n_pos, 73u);
    EXPECT_EQ(ds.n_features(), 10u);
    const auto again = generate_synthetic(100, 10, 0.73, 1.0, 5);
    EXPECT_EQ(again.features, ds.features);
    EXPECT_EQ(again.labels, ds.labels);
    EXPECT_NE(generate_synthetic(100, 10, 0.73, 1.0, 6).features, ds.features);
    EXPECT_THROW(generate_synthetic(1, 2, 0.5, 1.0, 1), DomainError);
    EXPECT_THROW(generate_synthetic(10, 2, 1.0, 1.0, 1), DomainError);
    EXPECT_THROW(generate_synthetic(10, 2, 0.5, -1.0, 1), DomainError);
}

TEST(dataio, synthetic_cluster_geometry) {
    const auto ds = generate_synthetic(20000, 3, 0.5, 4.0, 9);
    Eigen::RowVectorXd mp = Eigen::RowVectorXd::Zero(3);
    Eigen::RowVectorXd mn = Eigen::RowVectorXd::Zero(3);
    const auto cc = class_counts(ds);
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        (ds.labels[static_cast<std::size_t>(i)] == 1 ? mp : mn) += ds.features.row(i);
    }
    mp /= static_cast<double>(cc.n_pos);
    mn /= static_cast<double>(cc.n_neg);
    EXPECT_NEAR((mp - mn).norm(), 4.0, 0.08);
    double var = 0.0;
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        if (ds.labels[static_cast<std::size_t>(i)] == 1) {
            var += std::pow(ds.features(i, 1) - mp[1], 2);
        }
    }
    EXPECT_NEAR(var / static_cast<double>(cc.n_pos), 1.0, 0.05);
}

TEST(dataio, wide_separation_has_margin) {
    const auto ds = generate_synthetic(200, 2, 0.5, 10.0, 1);
    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < 200; ++i) {
        for (Eigen::Index j = 0; j < 200; ++j) {
            if (ds.labels[static_cast<std::size_t>(i)] == 1 &&
                ds.labels[static_cast<std::size_t>(j)] == -1) {
                min_gap = std::min(min_gap, (ds.features.row(i) - ds.features.row(j)).norm());
            }
        }
    }
    EXPECT_GT(min_gap, 4.0);
}

TEST(dataio, zero_separation_carries_no_signal) {
    const auto ds = generate_synthetic(20000, 2, 0.5, 0.0, 3);
    double mp = 0, mn = 0;
    const auto cc = class_counts(ds);
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        (ds.labels[static_cast<std::size_t>(i)] == 1 ? mp : mn) += ds.features(i, 0);
    }
    EXPECT_NEAR(mp / cc.n_pos - mn / cc.n_neg, 0.0, 0.06);
    EXPECT_NE(ds.source.find("separation=0"), std::string::npos);
}
