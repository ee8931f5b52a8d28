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
 * @file vqc.hpp
 * Variational quantum classifier.
 *
 * A sample x is angle-encoded, the trainable ansatz is applied, and the score
 * is the mean Pauli-Z expectation over all qubits (or qubit 0 alone), which
 * lies in [-1, 1]. The predicted label is +1 when score >= threshold.
 * Training minimizes the mean squared error between score and label, with
 * exact gradients from the two-point parameter-shift rule.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "encode.hpp"
#include "errors.hpp"
#include "labels.hpp"
#include "optim.hpp"
#include "qstate.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace qepi {

enum class Entangler { LinearChain, Ring, None };

inline std::string to_string(Entangler e) {
    switch (e) {
    case Entangler::LinearChain:
        return "linear";
    case Entangler::Ring:
        return "ring";
    case Entangler::None:
        return "none";
    }
    return "linear";
}

inline Entangler parse_entangler(const std::string &s) {
    if (s == "linear" || s == "LINEAR_CHAIN") {
        return Entangler::LinearChain;
    }
    if (s == "ring" || s == "RING") {
        return Entangler::Ring;
    }
    if (s == "none" || s == "NONE") {
        return Entangler::None;
    }
    throw ParseError("unknown entangler '" + s + "'");
}

struct AnsatzSpec {
    std::size_t n_qubits{1};
    std::size_t layers{2};
    Entangler entangler{Entangler::LinearChain};

    /// One RY column before each entangling layer and one after the last.
    [[nodiscard]] std::size_t parameter_count() const { return n_qubits * (layers + 1); }

    friend bool operator==(const AnsatzSpec &, const AnsatzSpec &) = default;
};

enum class ScoreAggregation { MeanZ, FirstQubitZ };

struct VqcModel {
    std::vector<double> theta;
    AnsatzSpec ansatz;
    FeatureMapSpec feature_map;
    double threshold{0.0};
    ScoreAggregation aggregation{ScoreAggregation::MeanZ};
    std::vector<std::pair<std::uint64_t, double>> training_log;
    std::string optimizer;
};

inline Circuit build_ansatz(std::span<const double> theta, const AnsatzSpec &spec) {
    if (spec.layers < 1) {
        throw DomainError("ansatz needs at least one layer");
    }
    if (theta.size() != spec.parameter_count()) {
        throw DimensionError("ansatz expects " + std::to_string(spec.parameter_count()) +
                             " parameters, got " + std::to_string(theta.size()));
    }
    const std::size_t n = spec.n_qubits;
    Circuit c(n);
    std::size_t p = 0;
    for (std::size_t layer = 0; layer < spec.layers; ++layer) {
        for (std::size_t q = 0; q < n; ++q) {
            c.add(Gate::ry(q, theta[p++]));
        }
        if (spec.entangler == Entangler::None) {
            continue;
        }
        for (std::size_t q = 0; q + 1 < n; ++q) {
            c.add(Gate::cx(q, q + 1));
        }
        if (spec.entangler == Entangler::Ring && n >= 3) {
            c.add(Gate::cx(n - 1, 0));
        }
    }
    for (std::size_t q = 0; q < n; ++q) {
        c.add(Gate::ry(q, theta[p++]));
    }
    return c;
}

/// Everything about a classifier except its trained parameters.
struct VqcConfig {
    AnsatzSpec ansatz;
    FeatureMapSpec feature_map;
    ScoreAggregation aggregation{ScoreAggregation::MeanZ};

    void validate() const {
        feature_map.validate();
        if (feature_map.n_features != ansatz.n_qubits) {
            throw DimensionError("feature map width " + std::to_string(feature_map.n_features) +
                                 " differs from ansatz width " +
                                 std::to_string(ansatz.n_qubits));
        }
    }

    static VqcConfig of(const VqcModel &m) { return {m.ansatz, m.feature_map, m.aggregation}; }
};

inline double aggregate_z(const StateVector &s, ScoreAggregation agg) {
    if (agg == ScoreAggregation::FirstQubitZ) {
        return expectation_z(s, 0);
    }
    double sum = 0.0;
    for (std::size_t q = 0; q < s.n_qubits(); ++q) {
        sum += expectation_z(s, q);
    }
    return sum / static_cast<double>(s.n_qubits());
}

/**
 * A labelled dataset pre-encoded under a fixed classifier configuration.
 *
 * Encoded states are computed once, so repeated loss and gradient
 * evaluations only replay the ansatz.
 */
class VqcProblem {
  public:
    VqcProblem(const Matrix &X, std::span<const int> y, VqcConfig cfg)
        : cfg_(std::move(cfg)), y_(y.begin(), y.end()) {
        cfg_.validate();
        if (X.rows() < 1) {
            throw DomainError("empty dataset");
        }
        if (static_cast<std::size_t>(X.rows()) != y.size()) {
            throw DimensionError("feature rows and labels differ in count");
        }
        check_labels(y);
        encoded_.reserve(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            encoded_.push_back(
                encode({X.row(i).data(), static_cast<std::size_t>(X.cols())}, cfg_.feature_map));
        }
    }

    [[nodiscard]] std::size_t size() const { return encoded_.size(); }

    [[nodiscard]] double score(std::size_t i, std::span<const double> theta) const {
        StateVector s = encoded_[i];
        s.apply_inplace(build_ansatz(theta, cfg_.ansatz));
        return aggregate_z(s, cfg_.aggregation);
    }

    [[nodiscard]] std::vector<double> scores(std::span<const double> theta) const {
        const Circuit ansatz = build_ansatz(theta, cfg_.ansatz);
        std::vector<double> out;
        out.reserve(size());
        for (const auto &e : encoded_) {
            StateVector s = e;
            s.apply_inplace(ansatz);
            out.push_back(aggregate_z(s, cfg_.aggregation));
        }
        return out;
    }

    /// Mean squared error between scores and labels.
    [[nodiscard]] double loss(std::span<const double> theta) const {
        const auto s = scores(theta);
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double r = s[i] - y_[i];
            acc += r * r;
        }
        return acc / static_cast<double>(s.size());
    }

    /**
     * d loss / d theta_k = (2/m) sum_i (f_i - y_i) * d f_i / d theta_k, with
     * d f / d theta_k = [f(theta + pi/2 e_k) - f(theta - pi/2 e_k)] / 2.
     * The rule is exact because every parameter drives exactly one RY gate.
     */
    [[nodiscard]] std::vector<double> gradient(std::span<const double> theta) const {
        const std::size_t P = theta.size();
        if (P != cfg_.ansatz.parameter_count()) {
            throw DimensionError("ansatz expects " +
                                 std::to_string(cfg_.ansatz.parameter_count()) +
                                 " parameters, got " + std::to_string(P));
        }
        const double shift = std::numbers::pi / 2.0;
        const Circuit base = build_ansatz(theta, cfg_.ansatz);
        // Gate position of each parameter inside the ansatz circuit.
        std::vector<std::size_t> gate_of_param;
        gate_of_param.reserve(P);
        for (std::size_t g = 0; g < base.size(); ++g) {
            if (base.gates()[g].kind == GateKind::RY) {
                gate_of_param.push_back(g);
            }
        }

        std::vector<double> grad(P, 0.0);
        const auto &gates = base.gates();
        for (std::size_t i = 0; i < encoded_.size(); ++i) {
            StateVector full = encoded_[i];
            full.apply_inplace(base);
            const double residual = aggregate_z(full, cfg_.aggregation) - y_[i];

            // Prefix state advances gate by gate; each shifted evaluation
            // only replays the suffix from the shifted gate onward.
            StateVector prefix = encoded_[i];
            std::size_t applied = 0;
            for (std::size_t k = 0; k < P; ++k) {
                const std::size_t gk = gate_of_param[k];
                for (; applied < gk; ++applied) {
                    prefix.apply_inplace(gates[applied]);
                }
                double f[2];
                for (int side = 0; side < 2; ++side) {
                    StateVector s = prefix;
                    Gate shifted = gates[gk];
                    shifted.angle += side == 0 ? shift : -shift;
                    s.apply_inplace(shifted);
                    for (std::size_t g = gk + 1; g < gates.size(); ++g) {
                        s.apply_inplace(gates[g]);
                    }
                    f[side] = aggregate_z(s, cfg_.aggregation);
                }
                grad[k] += residual * 0.5 * (f[0] - f[1]);
            }
        }
        const double scale = 2.0 / static_cast<double>(encoded_.size());
        for (auto &g : grad) {
            g *= scale;
        }
        return grad;
    }

    [[nodiscard]] const VqcConfig &config() const { return cfg_; }

  private:
    VqcConfig cfg_;
    Labels y_;
    std::vector<StateVector> encoded_;
};

/// Exact score in [-1, 1].
inline double forward(std::span<const double> x, const VqcModel &model) {
    const VqcConfig cfg = VqcConfig::of(model);
    cfg.validate();
    StateVector s = encode(x, cfg.feature_map);
    s.apply_inplace(build_ansatz(model.theta, cfg.ansatz));
    return aggregate_z(s, cfg.aggregation);
}

/// Score with each <Z_q> estimated from `shots` sampled measurements.
inline double forward_shots(std::span<const double> x, const VqcModel &model,
                            std::uint64_t shots, std::uint64_t rng_seed) {
    const VqcConfig cfg = VqcConfig::of(model);
    cfg.validate();
    StateVector s = encode(x, cfg.feature_map);
    s.apply_inplace(build_ansatz(model.theta, cfg.ansatz));
    const auto h = sample_counts(s, shots, rng_seed);
    const std::size_t n = s.n_qubits();
    const std::size_t last = cfg.aggregation == ScoreAggregation::FirstQubitZ ? 1 : n;
    double total = 0.0;
    for (std::size_t q = 0; q < last; ++q) {
        double z = 0.0;
        for (const auto &[bits, c] : h.counts) {
            z += bits[n - 1 - q] == '0' ? static_cast<double>(c) : -static_cast<double>(c);
        }
        total += z / static_cast<double>(shots);
    }
    return total / static_cast<double>(last);
}

inline int predict_label(double score, double threshold) { return score >= threshold ? 1 : -1; }

inline int predict(const VqcModel &model, std::span<const double> x) {
    return predict_label(forward(x, model), model.threshold);
}

inline std::vector<double> forward_batch(const Matrix &X, const VqcModel &model) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out.push_back(forward({X.row(i).data(), static_cast<std::size_t>(X.cols())}, model));
    }
    return out;
}

inline double loss(std::span<const double> theta, const Matrix &X, std::span<const int> y,
                   const VqcConfig &cfg) {
    return VqcProblem(X, y, cfg).loss(theta);
}

inline std::vector<double> parameter_shift_gradient(std::span<const double> theta,
                                                    const Matrix &X, std::span<const int> y,
                                                    const VqcConfig &cfg) {
    return VqcProblem(X, y, cfg).gradient(theta);
}

/**
 * Trains theta from a uniform (-pi, pi) start drawn from rng_seed. One epoch
 * is one optimizer iteration over the full batch. The returned model holds
 * the iterate with the lowest recorded training loss.
 */
inline VqcModel train_vqc(const Matrix &X, std::span<const int> y, const VqcConfig &cfg,
                          OptimizerConfig opt, std::uint64_t epochs, std::uint64_t rng_seed) {
    if (epochs < 1) {
        throw DomainError("epochs must be at least 1");
    }
    check_labels(y);
    check_both_classes(y);
    const VqcProblem problem(X, y, cfg);

    Rng init(rng_seed);
    std::vector<double> theta0(cfg.ansatz.parameter_count());
    for (auto &t : theta0) {
        t = init.uniform(-std::numbers::pi, std::numbers::pi);
    }
    opt.rng_seed = derive_seed(rng_seed, {opt.rng_seed});

    const auto res = minimize([&](std::span<const double> t) { return problem.loss(t); }, theta0,
                              opt, epochs,
                              [&](std::span<const double> t) { return problem.gradient(t); });

    VqcModel model;
    model.theta = res.theta_best;
    model.ansatz = cfg.ansatz;
    model.feature_map = cfg.feature_map;
    model.aggregation = cfg.aggregation;
    model.optimizer = opt.str();
    for (std::size_t e = 0; e < res.loss_trace.size(); ++e) {
        model.training_log.emplace_back(e + 1, res.loss_trace[e]);
    }
    return model;
}

inline nlohmann::json to_json(const VqcModel &m) {
    nlohmann::json j;
    j["theta"] = m.theta;
    j["ansatz"] = {{"n_qubits", m.ansatz.n_qubits},
                   {"layers", m.ansatz.layers},
                   {"entangler", to_string(m.ansatz.entangler)}};
    j["feature_map"] = {{"n_features", m.feature_map.n_features},
                        {"entangling", m.feature_map.entangling},
                        {"repetitions", m.feature_map.repetitions}};
    j["threshold"] = m.threshold;
    j["aggregation"] = m.aggregation == ScoreAggregation::MeanZ ? "mean" : "qubit0";
    j["optimizer"] = m.optimizer;
    auto log = nlohmann::json::array();
    for (const auto &[epoch, l] : m.training_log) {
        log.push_back({{"epoch", epoch}, {"loss", l}});
    }
    j["training_log"] = log;
    return j;
}

inline VqcModel vqc_model_from_json(const nlohmann::json &j) {
    VqcModel m;
    m.theta = j.at("theta").get<std::vector<double>>();
    const auto &a = j.at("ansatz");
    m.ansatz = {a.at("n_qubits").get<std::size_t>(), a.at("layers").get<std::size_t>(),
                parse_entangler(a.at("entangler").get<std::string>())};
    const auto &f = j.at("feature_map");
    m.feature_map = {f.at("n_features").get<std::size_t>(), f.at("entangling").get<bool>(),
                     f.at("repetitions").get<std::size_t>()};
    m.threshold = j.value("threshold", 0.0);
    m.aggregation = j.value("aggregation", std::string("mean")) == "qubit0"
                        ? ScoreAggregation::FirstQubitZ
                        : ScoreAggregation::MeanZ;
    m.optimizer = j.value("optimizer", std::string{});
    for (const auto &e : j.value("training_log", nlohmann::json::array())) {
        m.training_log.emplace_back(e.at("epoch").get<std::uint64_t>(),
                                    e.at("loss").get<double>());
    }
    if (m.theta.size() != m.ansatz.parameter_count()) {
        throw ParseError("vqc model: theta length does not match the ansatz");
    }
    return m;
}

} // namespace qepi
