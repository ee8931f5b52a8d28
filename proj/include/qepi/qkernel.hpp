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
 * @file qkernel.hpp
 * Fidelity kernels K(a, b) = |<phi(a)|phi(b)>|^2 over angle-encoded states.
 *
 * Two estimators are provided. EXACT reads the overlap off the simulated
 * statevectors. SHOTS runs the compute-uncompute circuit U(a) U(b)^dagger on
 * |0...0>, samples it, and reports the frequency of the all-zero outcome,
 * which has probability exactly K(a, b).
 *
 * Gram matrices evaluate each unordered off-diagonal pair once and mirror
 * it; the diagonal is set to 1 without evaluation. In SHOTS mode the pair
 * (i, j) draws from a stream seeded by derive_seed(seed, {i, j}), so the
 * matrix does not depend on evaluation order.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "encode.hpp"
#include "errors.hpp"
#include "qstate.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace qepi {

struct KernelMode {
    enum class Kind { Exact, Shots };
    Kind kind{Kind::Exact};
    std::uint64_t shots{0};

    static KernelMode exact() { return {Kind::Exact, 0}; }
    static KernelMode with_shots(std::uint64_t shots) { return {Kind::Shots, shots}; }

    [[nodiscard]] bool is_exact() const { return kind == Kind::Exact; }

    /// "exact" or "shots:<count>"; the form used in result files.
    [[nodiscard]] std::string str() const {
        return is_exact() ? std::string("exact") : "shots:" + std::to_string(shots);
    }

    friend bool operator==(const KernelMode &, const KernelMode &) = default;
};

/// Parses the output of KernelMode::str(); also accepts "shots" with a separate count.
inline KernelMode parse_kernel_mode(const std::string &s,
                                    std::optional<std::uint64_t> shots = std::nullopt) {
    if (s == "exact" || s == "EXACT") {
        return KernelMode::exact();
    }
    if (s == "shots" || s == "SHOTS") {
        if (!shots || *shots == 0) {
            throw DomainError("SHOTS kernel mode requires a positive shot count");
        }
        return KernelMode::with_shots(*shots);
    }
    if (s.rfind("shots:", 0) == 0) {
        const auto n = std::stoull(s.substr(6));
        if (n == 0) {
            throw DomainError("SHOTS kernel mode requires a positive shot count");
        }
        return KernelMode::with_shots(n);
    }
    throw ParseError("unknown kernel mode '" + s + "'");
}

struct KernelMatrix {
    Matrix values;
    KernelMode mode;
    FeatureMapSpec feature_map;
    std::uint64_t eval_count{0};
};

namespace detail {

inline std::span<const double> row_span(const Matrix &m, Eigen::Index i) {
    return {m.row(i).data(), static_cast<std::size_t>(m.cols())};
}

inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

inline void check_width(std::span<const double> x, const FeatureMapSpec &spec) {
    if (x.size() != spec.n_features) {
        throw DimensionError("kernel input has " + std::to_string(x.size()) +
                             " features, feature map expects " +
                             std::to_string(spec.n_features));
    }
}

inline void check_width(const Matrix &X, const FeatureMapSpec &spec, const char *what) {
    if (static_cast<std::size_t>(X.cols()) != spec.n_features) {
        throw DimensionError(std::string(what) + " has " + std::to_string(X.cols()) +
                             " columns, feature map expects " +
                             std::to_string(spec.n_features));
    }
}

inline double fidelity(const StateVector &a, const StateVector &b) {
    return clamp_unit(std::norm(inner_product(a, b)));
}

// Seed-stream domain for test-vs-train entries, kept apart from Gram pairs.
inline constexpr std::uint64_t cross_domain_tag = 0x43524f5353ULL;

} // namespace detail

inline double kernel_entry_exact(std::span<const double> xi, std::span<const double> xj,
                                 const FeatureMapSpec &spec) {
    detail::check_width(xi, spec);
    detail::check_width(xj, spec);
    return detail::fidelity(encode(xi, spec), encode(xj, spec));
}

/// Compute-uncompute circuit U(xi) followed by U(xj)^dagger.
inline Circuit inversion_test_circuit(std::span<const double> xi, std::span<const double> xj,
                                      const FeatureMapSpec &spec) {
    detail::check_width(xi, spec);
    detail::check_width(xj, spec);
    Circuit c = build_feature_map(xi, spec);
    c.append(build_feature_map(xj, spec).inverse());
    return c;
}

inline double kernel_entry_shots(std::span<const double> xi, std::span<const double> xj,
                                 const FeatureMapSpec &spec, std::uint64_t shots,
                                 std::uint64_t rng_seed) {
    if (shots < 1) {
        throw DomainError("shots must be at least 1");
    }
    const Circuit c = inversion_test_circuit(xi, xj, spec);
    StateVector s(spec.n_features);
    s.apply_inplace(c);
    const auto h = sample_counts(s, shots, rng_seed);
    const auto zeros = h.count(std::string(spec.n_features, '0'));
    return static_cast<double>(zeros) / static_cast<double>(shots);
}

inline KernelMatrix kernel_matrix(const Matrix &X, const FeatureMapSpec &spec,
                                  const KernelMode &mode, std::uint64_t rng_seed = 0) {
    spec.validate();
    if (X.rows() < 1) {
        throw DimensionError("kernel matrix needs at least one row");
    }
    detail::check_width(X, spec, "data matrix");
    if (!mode.is_exact() && mode.shots < 1) {
        throw DomainError("SHOTS kernel mode requires a positive shot count");
    }
    const auto n = X.rows();
    KernelMatrix K{Matrix::Identity(n, n), mode, spec, 0};

    std::vector<StateVector> states;
    if (mode.is_exact()) {
        states.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            states.push_back(encode(detail::row_span(X, i), spec));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v;
            if (mode.is_exact()) {
                v = detail::fidelity(states[static_cast<std::size_t>(i)],
                                     states[static_cast<std::size_t>(j)]);
            } else {
                const auto seed = derive_seed(rng_seed, {static_cast<std::uint64_t>(i),
                                                         static_cast<std::uint64_t>(j)});
                v = kernel_entry_shots(detail::row_span(X, i), detail::row_span(X, j), spec,
                                       mode.shots, seed);
            }
            K.values(i, j) = v;
            K.values(j, i) = v;
            ++K.eval_count;
        }
    }
    return K;
}

/// Rectangular kernel block: entry (i, j) pairs test row i with train row j.
inline Matrix gram_cross(const Matrix &X_test, const Matrix &X_train, const FeatureMapSpec &spec,
                         const KernelMode &mode, std::uint64_t rng_seed = 0) {
    spec.validate();
    detail::check_width(X_test, spec, "test matrix");
    detail::check_width(X_train, spec, "train matrix");
    const auto m = X_test.rows();
    const auto n = X_train.rows();
    Matrix out(m, n);
    if (mode.is_exact()) {
        std::vector<StateVector> train;
        train.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            train.push_back(encode(detail::row_span(X_train, j), spec));
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto si = encode(detail::row_span(X_test, i), spec);
            for (Eigen::Index j = 0; j < n; ++j) {
                out(i, j) = detail::fidelity(si, train[static_cast<std::size_t>(j)]);
            }
        }
        return out;
    }
    if (mode.shots < 1) {
        throw DomainError("SHOTS kernel mode requires a positive shot count");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto seed =
                derive_seed(rng_seed, {detail::cross_domain_tag, static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(j)});
            out(i, j) = kernel_entry_shots(detail::row_span(X_test, i),
                                           detail::row_span(X_train, j), spec, mode.shots, seed);
        }
    }
    return out;
}

} // namespace qepi
