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
#include <vector>

#include <gtest/gtest.h>

#include "qepi/metrics.hpp"
#include "qepi/rng.hpp"

using namespace qepi;

namespace {

Labels from_bits(unsigned bits, std::size_t n) {
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = (bits >> i) & 1U ? 1 : -1;
    }
    return y;
}

// Definitions straight from counts, no shared code with the library.
double ref_mcc(const Labels &t, const Labels &p) {
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tp += t[i] == 1 && p[i] == 1;
        tn += t[i] == -1 && p[i] == -1;
        fp += t[i] == -1 && p[i] == 1;
        fn += t[i] == 1 && p[i] == -1;
    }
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    return den == 0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
}

double ref_auc(const Labels &y, const std::vector<double> &s) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[i] == 1 && y[j] == -1) {
                pairs += 1;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
        }
    }
    return wins / pairs;
}

Labels flip(Labels y) {
    for (int &v : y) {
        v = -v;
    }
    return y;
}

} // namespace

TEST(metrics, accuracy_examples) {
    const Labels a{1, -1, 1, 1, -1, -1, 1, -1, 1, 1};
    EXPECT_EQ(accuracy(a, a), 1.0);
    EXPECT_EQ(accuracy(a, flip(a)), 0.0);
    Labels b = a;
    b[0] = -b[0];
    b[3] = -b[3];
    b[7] = -b[7];
    EXPECT_DOUBLE_EQ(accuracy(a, b), 0.7);
    EXPECT_THROW(accuracy(Labels{}, Labels{}), DomainError);
    EXPECT_THROW(accuracy(Labels{1}, Labels{1, 1}), DimensionError);
    EXPECT_THROW(accuracy(Labels{1}, Labels{0}), DomainError);
}

TEST(metrics, auc_examples) {
    EXPECT_EQ(roc_auc(Labels{1, -1}, std::vector<double>{0.9, 0.1}), 1.0);
    EXPECT_EQ(roc_auc(Labels{1, -1, 1, -1}, std::vector<double>(4, 0.3)), 0.5);
    EXPECT_EQ(roc_auc(Labels{1, 1, -1}, std::vector<double>{0.8, 0.4, 0.6}), 0.5);
    EXPECT_THROW(roc_auc(Labels{1, 1}, std::vector<double>{0.1, 0.2}), DomainError);
    EXPECT_THROW(roc_auc(Labels{1, -1}, std::vector<double>{0.1, NAN}), DomainError);
    EXPECT_THROW(roc_auc(Labels{1, -1}, std::vector<double>{0.1}), DimensionError);
}

TEST(metrics, mcc_examples) {
    const Labels t{1, -1, 1, -1};
    EXPECT_EQ(mcc(t, t), 1.0);
    EXPECT_EQ(mcc(t, Labels{1, 1, 1, 1}), 0.0);
    EXPECT_NEAR(mcc(ConfusionMatrix{2, 1, 1, 0}), 2.0 / std::sqrt(12.0), 1e-15);
    EXPECT_THROW(mcc(Labels{}, Labels{}), DomainError);
}

TEST(metrics, confusion_examples) {
    EXPECT_EQ(confusion(Labels{1}, Labels{1}), (ConfusionMatrix{1, 0, 0, 0}));
    EXPECT_EQ(confusion(Labels{-1}, Labels{1}), (ConfusionMatrix{0, 0, 1, 0}));
    EXPECT_EQ(confusion(Labels{1, -1, 1, -1}, Labels{1, -1, -1, 1}),
              (ConfusionMatrix{1, 1, 1, 1}));
    EXPECT_THROW(confusion(Labels{1}, Labels{1, -1}), DimensionError);
}

TEST(metrics, exhaustive_accuracy_and_mcc) {
    for (std::size_t n = 1; n <= 6; ++n) {
        for (unsigned tb = 0; tb < (1U << n); ++tb) {
            for (unsigned pb = 0; pb < (1U << n); ++pb) {
                const auto t = from_bits(tb, n);
                const auto p = from_bits(pb, n);
                std::size_t hit = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    hit += t[i] == p[i];
                }
                ASSERT_EQ(accuracy(t, p), static_cast<double>(hit) / static_cast<double>(n));
                ASSERT_NEAR(mcc(t, p), ref_mcc(t, p), 1e-15);
                ASSERT_EQ(confusion(t, p).total(), n);
                ASSERT_NEAR(mcc(flip(t), flip(p)), mcc(t, p), 1e-15);
            }
        }
    }
}

TEST(metrics, auc_matches_pair_counting) {
    Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + rng.below(7);
        Labels y(n);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.below(2) == 0 ? 1 : -1;
            s[i] = static_cast<double>(rng.below(5)) / 4.0;  // coarse grid forces ties
        }
        y[0] = 1;
        y[1] = -1;
        ASSERT_EQ(roc_auc(y, s), ref_auc(y, s));
    }
}

TEST(metrics, auc_symmetries) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + rng.below(30);
        Labels y(n);
        std::vector<double> s(n);
        std::vector<double> neg(n);
        std::vector<double> mono(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = i % 2 == 0 ? 1 : -1;
            s[i] = rng.uniform(-3.0, 3.0);
            neg[i] = -s[i];
            mono[i] = std::exp(2.0 * s[i]) + 5.0;
        }
        EXPECT_NEAR(roc_auc(y, s) + roc_auc(y, neg), 1.0, 1e-12);
        EXPECT_EQ(roc_auc(y, s), roc_auc(y, mono));
    }
}

TEST(metrics, evaluate_bundles_metrics) {
    const Labels t{1, 1, -1, -1, 1};
    const Labels p{1, -1, -1, 1, 1};
    const std::vector<double> s{0.9, -0.2, -0.5, 0.3, 0.4};
    const auto r = evaluate(t, p, s);
    EXPECT_EQ(r.acc, accuracy(t, p));
    EXPECT_EQ(r.mcc, mcc(t, p));
    EXPECT_EQ(r.auc, roc_auc(t, s));
    EXPECT_EQ(r.confusion, confusion(t, p));
}
