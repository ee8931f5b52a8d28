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
 * @file metrics.hpp
 * Binary classification metrics. +1 is the positive class.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "labels.hpp"

namespace qepi {

struct ConfusionMatrix {
    std::uint64_t tp{0};
    std::uint64_t tn{0};
    std::uint64_t fp{0};
    std::uint64_t fn{0};

    [[nodiscard]] std::uint64_t total() const { return tp + tn + fp + fn; }

    friend bool operator==(const ConfusionMatrix &, const ConfusionMatrix &) = default;
};

struct MetricsReport {
    double acc{0.0};
    double auc{0.0};
    double mcc{0.0};
    ConfusionMatrix confusion;
};

namespace detail {

inline void check_pair(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.empty()) {
        throw DomainError("metrics need at least one sample");
    }
    if (y_true.size() != y_pred.size()) {
        throw DimensionError("truth has " + std::to_string(y_true.size()) +
                             " labels, prediction has " + std::to_string(y_pred.size()));
    }
    check_labels(y_true, "y_true");
    check_labels(y_pred, "y_pred");
}

} // namespace detail

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    detail::check_pair(y_true, y_pred);
    ConfusionMatrix c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] == 1;
        const bool p = y_pred[i] == 1;
        if (t && p) {
            ++c.tp;
        } else if (!t && !p) {
            ++c.tn;
        } else if (p) {
            ++c.fp;
        } else {
            ++c.fn;
        }
    }
    return c;
}

inline double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
    const auto c = confusion(y_true, y_pred);
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// Matthews correlation; 0 when any marginal of the confusion matrix is empty.
inline double mcc(const ConfusionMatrix &c) {
    const double tp = static_cast<double>(c.tp);
    const double tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den == 0.0) {
        return 0.0;
    }
    return (tp * tn - fp * fn) / std::sqrt(den);
}

inline double mcc(std::span<const int> y_true, std::span<const int> y_pred) {
    return mcc(confusion(y_true, y_pred));
}

/**
 * ROC AUC as the Mann-Whitney statistic: the probability that a random
 * positive outscores a random negative, ties counting one half. Computed
 * from midranks in O(n log n).
 */
inline double roc_auc(std::span<const int> y_true, std::span<const double> scores) {
    if (y_true.size() != scores.size()) {
        throw DimensionError("labels and scores differ in length");
    }
    check_labels(y_true);
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw DomainError("AUC scores must be finite");
        }
    }
    const std::size_t n = y_true.size();
    std::uint64_t n_pos = 0;
    for (int v : y_true) {
        n_pos += v == 1 ? 1 : 0;
    }
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw DomainError("AUC is undefined unless both classes are present");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Sum of doubled midranks of the positives keeps everything integral.
    std::uint64_t rank2_sum = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const std::uint64_t rank2 = (i + 1) + (j + 1);  // 2 * average of ranks i+1..j+1
        for (std::size_t t = i; t <= j; ++t) {
            if (y_true[order[t]] == 1) {
                rank2_sum += rank2;
            }
        }
        i = j + 1;
    }
    // U = sum(ranks of positives) - n_pos (n_pos + 1) / 2, here doubled.
    const double u2 = static_cast<double>(rank2_sum) - static_cast<double>(n_pos * (n_pos + 1));
    return u2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                              std::span<const double> scores) {
    MetricsReport r;
    r.confusion = confusion(y_true, y_pred);
    r.acc = static_cast<double>(r.confusion.tp + r.confusion.tn) /
            static_cast<double>(r.confusion.total());
    r.mcc = mcc(r.confusion);
    r.auc = roc_auc(y_true, scores);
    return r;
}

} // namespace qepi
