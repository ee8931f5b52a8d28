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

#pragma once

#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace qepi {

/// Binary class labels, each +1 or -1.
using Labels = std::vector<int>;

inline void check_labels(std::span<const int> y, const char *what = "labels") {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 1 && y[i] != -1) {
            throw DomainError(std::string(what) + "[" + std::to_string(i) +
                              "] = " + std::to_string(y[i]) + " is not +1/-1");
        }
    }
}

inline void check_both_classes(std::span<const int> y) {
    bool pos = false;
    bool neg = false;
    for (int v : y) {
        pos = pos || v == 1;
        neg = neg || v == -1;
    }
    if (!pos || !neg) {
        throw DomainError("both classes must be present");
    }
}

} // namespace qepi
