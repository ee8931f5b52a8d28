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
 * @file qstate.hpp
 * Dense statevector simulator over the gate alphabet {RY, RZ, H, CX}.
 *
 * Qubit 0 is the least-significant bit of the amplitude index: basis state
 * |q_{n-1} ... q_1 q_0> lives at index sum_q q * 2^q. Bitstrings printed in
 * outcome histograms follow the same order, most-significant qubit first, so
 * the string for index k is its ordinary binary representation.
 *
 * The free functions are pure and return new states. The `*_inplace` member
 * operations exist for the hot loops in kernel and classifier evaluation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace qepi {

using complex_t = std::complex<double>;

inline constexpr std::size_t max_qubits = 20;

enum class GateKind { RY, RZ, H, CX };

struct Gate {
    GateKind kind{GateKind::H};
    double angle{0.0};  // radians; RY/RZ only
    std::size_t target{0};
    std::size_t control{0};  // CX only

    static Gate ry(std::size_t q, double theta) { return {GateKind::RY, theta, q, 0}; }
    static Gate rz(std::size_t q, double theta) { return {GateKind::RZ, theta, q, 0}; }
    static Gate h(std::size_t q) { return {GateKind::H, 0.0, q, 0}; }
    static Gate cx(std::size_t control, std::size_t target) {
        return {GateKind::CX, 0.0, target, control};
    }

    [[nodiscard]] bool is_parametric() const {
        return kind == GateKind::RY || kind == GateKind::RZ;
    }

    /// Adjoint gate. H and CX are self-inverse; rotations negate the angle.
    [[nodiscard]] Gate inverse() const {
        Gate g = *this;
        if (is_parametric()) {
            g.angle = -g.angle;
        }
        return g;
    }

    friend bool operator==(const Gate &, const Gate &) = default;
};

inline void check_gate_indices(const Gate &g, std::size_t n_qubits) {
    if (g.target >= n_qubits) {
        throw IndexError("gate target " + std::to_string(g.target) + " out of range for " +
                         std::to_string(n_qubits) + " qubits");
    }
    if (g.kind == GateKind::CX) {
        if (g.control >= n_qubits) {
            throw IndexError("gate control " + std::to_string(g.control) +
                             " out of range for " + std::to_string(n_qubits) + " qubits");
        }
        if (g.control == g.target) {
            throw IndexError("CX control and target must differ");
        }
    }
}

/// Ordered gate list on a fixed register width.
class Circuit {
  public:
    explicit Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > max_qubits) {
            throw CapacityError("circuit width must be in [1, " + std::to_string(max_qubits) +
                                "], got " + std::to_string(n_qubits));
        }
    }

    Circuit &add(const Gate &g) {
        check_gate_indices(g, n_qubits_);
        gates_.push_back(g);
        return *this;
    }

    Circuit &append(const Circuit &other) {
        if (other.n_qubits_ != n_qubits_) {
            throw DimensionError("cannot append circuits of different widths");
        }
        gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
        return *this;
    }

    /// Gate-wise inverse: reversed order, each gate replaced by its adjoint.
    [[nodiscard]] Circuit inverse() const {
        Circuit inv(n_qubits_);
        inv.gates_.reserve(gates_.size());
        for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
            inv.gates_.push_back(it->inverse());
        }
        return inv;
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] const std::vector<Gate> &gates() const { return gates_; }
    [[nodiscard]] std::size_t size() const { return gates_.size(); }

    [[nodiscard]] std::size_t count(GateKind kind) const {
        std::size_t c = 0;
        for (const auto &g : gates_) {
            c += g.kind == kind ? 1 : 0;
        }
        return c;
    }

    friend bool operator==(const Circuit &, const Circuit &) = default;

  private:
    std::size_t n_qubits_;
    std::vector<Gate> gates_;
};

/// Measurement outcome counts keyed by bitstring (most-significant qubit first).
struct OutcomeHistogram {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t shots{0};

    [[nodiscard]] std::uint64_t count(const std::string &bits) const {
        auto it = counts.find(bits);
        return it == counts.end() ? 0 : it->second;
    }
};

inline std::string basis_bitstring(std::size_t index, std::size_t n_qubits) {
    std::string s(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if ((index >> q) & 1U) {
            s[n_qubits - 1 - q] = '1';
        }
    }
    return s;
}

class StateVector {
  public:
    /// |0...0> on n qubits.
    explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > max_qubits) {
            throw CapacityError("qubit count must be in [1, " + std::to_string(max_qubits) +
                                "], got " + std::to_string(n_qubits));
        }
        amps_.assign(std::size_t{1} << n_qubits, complex_t{0.0, 0.0});
        amps_[0] = 1.0;
    }

    /// Wraps raw amplitudes; the length must be a power of two. No renormalization.
    StateVector(std::size_t n_qubits, std::vector<complex_t> amps)
        : StateVector(n_qubits) {
        if (amps.size() != amps_.size()) {
            throw DimensionError("expected " + std::to_string(amps_.size()) +
                                 " amplitudes, got " + std::to_string(amps.size()));
        }
        amps_ = std::move(amps);
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const { return amps_.size(); }
    [[nodiscard]] std::span<const complex_t> amplitudes() const { return amps_; }
    [[nodiscard]] const complex_t &operator[](std::size_t k) const { return amps_[k]; }

    [[nodiscard]] double norm() const {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }

    void apply_inplace(const Gate &g) {
        check_gate_indices(g, n_qubits_);
        const std::size_t tbit = std::size_t{1} << g.target;
        const std::size_t dim = amps_.size();
        switch (g.kind) {
        case GateKind::RY: {
            const double c = std::cos(0.5 * g.angle);
            const double s = std::sin(0.5 * g.angle);
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & tbit) {
                    continue;
                }
                const complex_t a0 = amps_[i];
                const complex_t a1 = amps_[i | tbit];
                amps_[i] = c * a0 - s * a1;
                amps_[i | tbit] = s * a0 + c * a1;
            }
            break;
        }
        case GateKind::RZ: {
            const complex_t p0 = std::polar(1.0, -0.5 * g.angle);
            const complex_t p1 = std::polar(1.0, 0.5 * g.angle);
            for (std::size_t i = 0; i < dim; ++i) {
                amps_[i] *= (i & tbit) ? p1 : p0;
            }
            break;
        }
        case GateKind::H: {
            const double r = 1.0 / std::sqrt(2.0);
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & tbit) {
                    continue;
                }
                const complex_t a0 = amps_[i];
                const complex_t a1 = amps_[i | tbit];
                amps_[i] = r * (a0 + a1);
                amps_[i | tbit] = r * (a0 - a1);
            }
            break;
        }
        case GateKind::CX: {
            const std::size_t cbit = std::size_t{1} << g.control;
            for (std::size_t i = 0; i < dim; ++i) {
                if ((i & cbit) && !(i & tbit)) {
                    std::swap(amps_[i], amps_[i | tbit]);
                }
            }
            break;
        }
        }
    }

    void apply_inplace(const Circuit &c) {
        if (c.n_qubits() != n_qubits_) {
            throw DimensionError("circuit acts on " + std::to_string(c.n_qubits()) +
                                 " qubits, state has " + std::to_string(n_qubits_));
        }
        for (const auto &g : c.gates()) {
            apply_inplace(g);
        }
    }

    friend bool operator==(const StateVector &, const StateVector &) = default;

  private:
    std::size_t n_qubits_;
    std::vector<complex_t> amps_;
};

inline StateVector new_zero_state(std::size_t n_qubits) { return StateVector(n_qubits); }

inline StateVector apply_gate(StateVector state, const Gate &gate) {
    state.apply_inplace(gate);
    return state;
}

inline StateVector apply_circuit(StateVector state, const Circuit &circuit) {
    state.apply_inplace(circuit);
    return state;
}

inline std::vector<double> probabilities(const StateVector &state) {
    std::vector<double> p;
    p.reserve(state.dim());
    for (const auto &a : state.amplitudes()) {
        p.push_back(std::norm(a));
    }
    return p;
}

/**
 * Draws `shots` computational-basis outcomes.
 *
 * Each shot takes one uniform variate u from Rng(rng_seed) and selects the
 * first basis index whose cumulative probability exceeds u * total, where
 * total is the summed probability (1 up to round-off).
 */
inline OutcomeHistogram sample_counts(const StateVector &state, std::uint64_t shots,
                                      std::uint64_t rng_seed) {
    if (shots < 1) {
        throw DomainError("shots must be at least 1");
    }
    const auto p = probabilities(state);
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p[k];
        cdf[k] = acc;
    }
    std::vector<std::uint64_t> tally(p.size(), 0);
    Rng rng(rng_seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        auto k = static_cast<std::size_t>(it - cdf.begin());
        if (k >= p.size()) {
            k = p.size() - 1;
        }
        // Never report an outcome whose probability is exactly zero.
        while (p[k] == 0.0 && k > 0) {
            --k;
        }
        ++tally[k];
    }
    OutcomeHistogram h;
    h.shots = shots;
    for (std::size_t k = 0; k < tally.size(); ++k) {
        if (tally[k] > 0) {
            h.counts.emplace(basis_bitstring(k, state.n_qubits()), tally[k]);
        }
    }
    return h;
}

/// <a|b> = sum_k conj(a_k) b_k.
inline complex_t inner_product(const StateVector &a, const StateVector &b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw DimensionError("inner product of " + std::to_string(a.n_qubits()) + "- and " +
                             std::to_string(b.n_qubits()) + "-qubit states");
    }
    complex_t s{0.0, 0.0};
    const auto aa = a.amplitudes();
    const auto bb = b.amplitudes();
    for (std::size_t k = 0; k < aa.size(); ++k) {
        s += std::conj(aa[k]) * bb[k];
    }
    return s;
}

/// <Z_q> = sum_k |a_k|^2 * (+1 if bit q of k is 0 else -1).
inline double expectation_z(const StateVector &state, std::size_t qubit) {
    if (qubit >= state.n_qubits()) {
        throw IndexError("qubit " + std::to_string(qubit) + " out of range for " +
                         std::to_string(state.n_qubits()) + " qubits");
    }
    const std::size_t bit = std::size_t{1} << qubit;
    double e = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t k = 0; k < amps.size(); ++k) {
        const double p = std::norm(amps[k]);
        e += (k & bit) ? -p : p;
    }
    return e;
}

} // namespace qepi
