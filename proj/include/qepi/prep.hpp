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
 * @file prep.hpp
 * Preprocessing: z-score standardization, PCA, stratified splitting and
 * subsampling.
 *
 * Conventions: the scaler uses the population (1/n) standard deviation, PCA
 * the sample (1/(n-1)) covariance. Columns whose standard deviation is below
 * 1e-12 standardize to zero.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "labels.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace qepi {

inline constexpr double degenerate_stddev = 1e-12;

struct ScalerParams {
    Vector means;
    Vector stddevs;
};

inline ScalerParams fit_scaler(const Matrix &X) {
    if (X.rows() < 1 || X.cols() < 1) {
        throw DimensionError("cannot fit a scaler to an empty matrix");
    }
    ScalerParams p;
    p.means = X.colwise().mean().transpose();
    p.stddevs.resize(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double var = (X.col(c).array() - p.means[c]).square().mean();
        p.stddevs[c] = std::sqrt(var);
    }
    return p;
}

inline Matrix apply_scaler(const Matrix &X, const ScalerParams &p) {
    if (X.cols() != p.means.size()) {
        throw DimensionError("scaler fitted on " + std::to_string(p.means.size()) +
                             " columns, got " + std::to_string(X.cols()));
    }
    Matrix out(X.rows(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        if (p.stddevs[c] < degenerate_stddev) {
            out.col(c).setZero();
        } else {
            out.col(c) = (X.col(c).array() - p.means[c]) / p.stddevs[c];
        }
    }
    return out;
}

struct PcaModel {
    Matrix components;  // k x d, orthonormal rows
    Vector explained_variance;
    Vector center;

    [[nodiscard]] Eigen::Index k() const { return components.rows(); }
};

/**
 * Top-k eigenvectors of the sample covariance, by descending eigenvalue.
 * Each component is oriented so that its largest-magnitude entry (the first
 * one, on ties) is nonnegative.
 */
inline PcaModel fit_pca(const Matrix &X, std::size_t k) {
    const auto n = X.rows();
    const auto d = X.cols();
    if (n < 2) {
        throw DomainError("PCA needs at least two samples");
    }
    if (k < 1 || k > static_cast<std::size_t>(std::min(n, d))) {
        throw DomainError("PCA component count " + std::to_string(k) + " outside [1, " +
                          std::to_string(std::min(n, d)) + "]");
    }
    PcaModel m;
    m.center = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - m.center.transpose();
    const Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) {
        throw Error("covariance eigendecomposition failed");
    }
    const auto kk = static_cast<Eigen::Index>(k);
    m.components.resize(kk, d);
    m.explained_variance.resize(kk);
    for (Eigen::Index r = 0; r < kk; ++r) {
        const Eigen::Index src = d - 1 - r;  // eigenvalues come ascending
        Eigen::VectorXd v = es.eigenvectors().col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index c = 1; c < d; ++c) {
            if (std::abs(v[c]) > std::abs(v[arg])) {
                arg = c;
            }
        }
        if (v[arg] < 0) {
            v = -v;
        }
        m.components.row(r) = v.transpose();
        m.explained_variance[r] = es.eigenvalues()[src];
    }
    return m;
}

inline Matrix pca_transform(const Matrix &X, const PcaModel &m) {
    if (X.cols() != m.center.size()) {
        throw DimensionError("PCA fitted on " + std::to_string(m.center.size()) +
                             " columns, got " + std::to_string(X.cols()));
    }
    return (X.rowwise() - m.center.transpose()) * m.components.transpose();
}

/// Maps component coordinates back to the input space.
inline Matrix pca_inverse_transform(const Matrix &Z, const PcaModel &m) {
    if (Z.cols() != m.k()) {
        throw DimensionError("expected " + std::to_string(m.k()) + " component columns");
    }
    Matrix out = Z * m.components;
    out.rowwise() += m.center.transpose();
    return out;
}

struct Split {
    Matrix X_train;
    Labels y_train;
    Matrix X_test;
    Labels y_test;
    std::vector<std::size_t> train_index;
    std::vector<std::size_t> test_index;
};

namespace detail {

inline Matrix take_rows(const Matrix &X, std::span<const std::size_t> idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
    }
    return out;
}

inline Labels take(std::span<const int> y, std::span<const std::size_t> idx) {
    Labels out;
    out.reserve(idx.size());
    for (auto i : idx) {
        out.push_back(y[i]);
    }
    return out;
}

inline void partition_classes(std::span<const int> y, std::vector<std::size_t> &pos,
                              std::vector<std::size_t> &neg) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] == 1 ? pos : neg).push_back(i);
    }
}

inline std::size_t round_half_up(double v) {
    return static_cast<std::size_t>(std::floor(v + 0.5));
}

} // namespace detail

/**
 * Per-class split: each class is shuffled (positives first, then negatives,
 * from one Rng(rng_seed) stream) and its first round(count * test_fraction)
 * members, rounding halves up, go to the test set. Both sides keep the
 * original row order.
 */
inline Split stratified_split(const Matrix &X, std::span<const int> y, double test_fraction,
                              std::uint64_t rng_seed) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw DimensionError("feature rows and labels differ in count");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw DomainError("test fraction must lie in (0, 1)");
    }
    check_labels(y);
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    detail::partition_classes(y, pos, neg);
    if (pos.size() < 2 || neg.size() < 2) {
        throw DomainError("each class needs at least 2 members to split (have " +
                          std::to_string(pos.size()) + " positive, " +
                          std::to_string(neg.size()) + " negative)");
    }
    Rng rng(rng_seed);
    Split s;
    for (auto *cls : {&pos, &neg}) {
        rng.shuffle(*cls);
        const auto n_test = std::min(
            cls->size(), detail::round_half_up(static_cast<double>(cls->size()) * test_fraction));
        s.test_index.insert(s.test_index.end(), cls->begin(),
                            cls->begin() + static_cast<std::ptrdiff_t>(n_test));
        s.train_index.insert(s.train_index.end(),
                             cls->begin() + static_cast<std::ptrdiff_t>(n_test), cls->end());
    }
    std::sort(s.train_index.begin(), s.train_index.end());
    std::sort(s.test_index.begin(), s.test_index.end());
    s.X_train = detail::take_rows(X, s.train_index);
    s.y_train = detail::take(y, s.train_index);
    s.X_test = detail::take_rows(X, s.test_index);
    s.y_test = detail::take(y, s.test_index);
    return s;
}

struct Subsample {
    Matrix X;
    Labels y;
    std::vector<std::size_t> index;
};

/**
 * Draws n rows without replacement, in shuffled order. Stratified draws take
 * round(n * n_pos / N) positives (halves up), the rest negatives.
 */
inline Subsample subsample(const Matrix &X, std::span<const int> y, std::size_t n,
                           std::uint64_t rng_seed, bool stratified) {
    const std::size_t N = y.size();
    if (static_cast<std::size_t>(X.rows()) != N) {
        throw DimensionError("feature rows and labels differ in count");
    }
    if (n < 1 || n > N) {
        throw DomainError("subsample size " + std::to_string(n) + " outside [1, " +
                          std::to_string(N) + "]");
    }
    check_labels(y);
    Rng rng(rng_seed);
    Subsample out;
    if (stratified) {
        std::vector<std::size_t> pos;
        std::vector<std::size_t> neg;
        detail::partition_classes(y, pos, neg);
        std::size_t n_pos = (2 * n * pos.size() + N) / (2 * N);
        n_pos = std::min(n_pos, pos.size());
        if (n - n_pos > neg.size()) {
            n_pos = n - neg.size();
        }
        rng.shuffle(pos);
        rng.shuffle(neg);
        out.index.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_pos));
        out.index.insert(out.index.end(), neg.begin(),
                         neg.begin() + static_cast<std::ptrdiff_t>(n - n_pos));
    } else {
        std::vector<std::size_t> all(N);
        for (std::size_t i = 0; i < N; ++i) {
            all[i] = i;
        }
        rng.shuffle(all);
        out.index.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    }
    rng.shuffle(out.index);
    out.X = detail::take_rows(X, out.index);
    out.y = detail::take(y, out.index);
    return out;
}

namespace detail {

inline nlohmann::json vec_json(const Eigen::Ref<const Eigen::VectorXd> &v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector json_vec(const nlohmann::json &j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace detail

inline nlohmann::json to_json(const ScalerParams &p) {
    return {{"means", detail::vec_json(p.means)}, {"stddevs", detail::vec_json(p.stddevs)}};
}

inline ScalerParams scaler_from_json(const nlohmann::json &j) {
    ScalerParams p{detail::json_vec(j.at("means")), detail::json_vec(j.at("stddevs"))};
    if (p.means.size() != p.stddevs.size()) {
        throw ParseError("scaler: means and stddevs differ in length");
    }
    return p;
}

inline nlohmann::json to_json(const PcaModel &m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.components.rows(); ++r) {
        rows.push_back(detail::vec_json(m.components.row(r).transpose()));
    }
    return {{"components", rows},
            {"explained_variance", detail::vec_json(m.explained_variance)},
            {"center", detail::vec_json(m.center)}};
}

inline PcaModel pca_from_json(const nlohmann::json &j) {
    PcaModel m;
    m.center = detail::json_vec(j.at("center"));
    m.explained_variance = detail::json_vec(j.at("explained_variance"));
    const auto &rows = j.at("components");
    m.components.resize(static_cast<Eigen::Index>(rows.size()), m.center.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Vector v = detail::json_vec(rows[r]);
        if (v.size() != m.center.size()) {
            throw ParseError("pca: component width differs from center width");
        }
        m.components.row(static_cast<Eigen::Index>(r)) = v.transpose();
    }
    return m;
}

} // namespace qepi
