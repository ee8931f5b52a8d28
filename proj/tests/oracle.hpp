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

// Test-only reference implementations. Nothing here calls into the
// statevector kernels it is used to check.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qepi/qstate.hpp"

namespace qepi::oracle {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline CMatrix single_qubit_matrix(const Gate &g) {
    CMatrix m(2, 2);
    using c = std::complex<double>;
    switch (g.kind) {
    case GateKind::RY:
        m << std::cos(g.angle / 2), -std::sin(g.angle / 2), std::sin(g.angle / 2),
            std::cos(g.angle / 2);
        break;
    case GateKind::RZ:
        m << std::exp(c(0, -g.angle / 2)), 0, 0, std::exp(c(0, g.angle / 2));
        break;
    case GateKind::H:
        m << 1, 1, 1, -1;
        m /= std::sqrt(2.0);
        break;
    default:
        break;
    }
    return m;
}

/// Full 2^n x 2^n unitary of one gate; qubit 0 is the least-significant bit,
/// so the Kronecker product runs from qubit n-1 (left) down to qubit 0.
inline CMatrix gate_unitary(const Gate &g, std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    if (g.kind == GateKind::CX) {
        CMatrix u = CMatrix::Zero(dim, dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            const bool ctrl = (static_cast<std::size_t>(k) >> g.control) & 1U;
            const Eigen::Index dst =
                ctrl ? (k ^ static_cast<Eigen::Index>(std::size_t{1} << g.target)) : k;
            u(dst, k) = 1.0;
        }
        return u;
    }
    CMatrix u = CMatrix::Identity(1, 1);
    for (std::size_t q = n; q-- > 0;) {
        u = kron(u, q == g.target ? single_qubit_matrix(g) : CMatrix::Identity(2, 2));
    }
    return u;
}

inline CMatrix circuit_unitary(const Circuit &c) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << c.n_qubits());
    CMatrix u = CMatrix::Identity(dim, dim);
    for (const auto &g : c.gates()) {
        u = gate_unitary(g, c.n_qubits()) * u;
    }
    return u;
}

inline CVector zero_vector(std::size_t n) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
    v[0] = 1.0;
    return v;
}

inline CVector run(const Circuit &c) { return circuit_unitary(c) * zero_vector(c.n_qubits()); }

inline double fidelity(const CVector &a, const CVector &b) { return std::norm(a.dot(b)); }

} // namespace qepi::oracle
