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

#include <stdexcept>
#include <string>

namespace qepi {

// Error hierarchy. Everything the library throws derives from qepi::Error.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Qubit count outside the simulator's capacity.
struct CapacityError : Error {
    using Error::Error;
};

/// Qubit, parameter or row index out of range.
struct IndexError : Error {
    using Error::Error;
};

/// Mismatched vector/matrix/state sizes.
struct DimensionError : Error {
    using Error::Error;
};

/// Input violates a documented precondition (non-finite value, bad label set, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Malformed external input (CSV cells, config documents).
struct ParseError : Error {
    using Error::Error;
};

} // namespace qepi
