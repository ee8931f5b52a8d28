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
 * @file encode.hpp
 * Angle-encoding feature maps: one qubit per feature, feature x_i used as the
 * RY rotation angle on qubit i, optionally followed by a CX chain. A block of
 * rotations (plus chain) can be repeated.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "errors.hpp"
#include "qstate.hpp"

namespace qepi {

struct FeatureMapSpec {
    std::size_t n_features{1};
    bool entangling{true};
    std::size_t repetitions{1};

    void validate() const {
        if (n_features < 1 || n_features > max_qubits) {
            throw CapacityError("feature map width must be in [1, 20], got " +
                                std::to_string(n_features));
        }
        if (repetitions < 1 || repetitions > 4) {
            throw DomainError("feature map repetitions must be in [1, 4], got " +
                              std::to_string(repetitions));
        }
    }

    /// QSVM default: rotations followed by a CX chain.
    static FeatureMapSpec kernel_default(std::size_t n) { return {n, true, 1}; }
    /// VQC input layer: rotations only; the ansatz supplies entanglement.
    static FeatureMapSpec classifier_default(std::size_t n) { return {n, false, 1}; }

    friend bool operator==(const FeatureMapSpec &, const FeatureMapSpec &) = default;
};

inline Circuit build_feature_map(std::span<const double> x, const FeatureMapSpec &spec) {
    spec.validate();
    if (x.size() != spec.n_features) {
        throw DimensionError("feature vector has " + std::to_string(x.size()) +
                             " entries, feature map expects " +
                             std::to_string(spec.n_features));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            throw DomainError("non-finite feature value at index " + std::to_string(i));
        }
    }
    const std::size_t n = spec.n_features;
    Circuit c(n);
    for (std::size_t r = 0; r < spec.repetitions; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            c.add(Gate::ry(i, x[i]));
        }
        if (spec.entangling) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                c.add(Gate::cx(i, i + 1));
            }
        }
    }
    return c;
}

/// |x> = U(x)|0...0>.
inline StateVector encode(std::span<const double> x, const FeatureMapSpec &spec) {
    const Circuit c = build_feature_map(x, spec);
    StateVector s(spec.n_features);
    s.apply_inplace(c);
    return s;
}

} // namespace qepi
