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
 * @file optim.hpp
 * Classical optimizers for variational training: SPSA and plain gradient
 * descent.
 */
#pragma once

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace qepi {

enum class OptimizerKind { Spsa, GradientDescent };

inline std::string to_string(OptimizerKind k) {
    return k == OptimizerKind::Spsa ? "spsa" : "gd";
}

inline OptimizerKind parse_optimizer_kind(const std::string &s) {
    if (s == "spsa" || s == "SPSA") {
        return OptimizerKind::Spsa;
    }
    if (s == "gd" || s == "GD" || s == "gradient_descent" || s == "GRADIENT_DESCENT") {
        return OptimizerKind::GradientDescent;
    }
    throw ParseError("unknown optimizer '" + s + "'");
}

struct OptimizerConfig {
    OptimizerKind kind{OptimizerKind::GradientDescent};
    double step{0.2};       // SPSA a, or the gradient-descent learning rate
    double perturb{0.1};    // SPSA c
    double alpha_exp{0.602};
    double gamma_exp{0.101};
    std::uint64_t rng_seed{0};

    static OptimizerConfig spsa(std::uint64_t seed = 0) {
        return {OptimizerKind::Spsa, 0.2, 0.1, 0.602, 0.101, seed};
    }
    static OptimizerConfig gradient_descent(double learning_rate) {
        return {OptimizerKind::GradientDescent, learning_rate, 0.1, 0.602, 0.101, 0};
    }

    void validate() const {
        if (!(step > 0.0) || !(perturb > 0.0)) {
            throw DomainError("optimizer step and perturb must be positive");
        }
        if (kind == OptimizerKind::Spsa &&
            !(alpha_exp > 0.0 && alpha_exp <= 1.0 && gamma_exp > 0.0 && gamma_exp <= 1.0)) {
            throw DomainError("SPSA decay exponents must lie in (0, 1]");
        }
    }

    /// Compact identifier written to result files, e.g. "gd(step=0.1)".
    [[nodiscard]] std::string str() const {
        auto num = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", v);
            return std::string(buf);
        };
        if (kind == OptimizerKind::GradientDescent) {
            return "gd(step=" + num(step) + ")";
        }
        return "spsa(a=" + num(step) + ";c=" + num(perturb) + ";alpha=" + num(alpha_exp) +
               ";gamma=" + num(gamma_exp) + ")";
    }
};

using ObjectiveFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

namespace detail {

inline double checked(double v) {
    if (!std::isfinite(v)) {
        throw DomainError("objective returned a non-finite value");
    }
    return v;
}

} // namespace detail

/// One SPSA update with an explicit perturbation vector (entries +1/-1).
inline std::vector<double> spsa_step(std::span<const double> theta, const ObjectiveFn &objective,
                                     std::uint64_t k, const OptimizerConfig &cfg,
                                     std::span<const int> delta) {
    if (k < 1) {
        throw DomainError("SPSA iteration index starts at 1");
    }
    if (delta.size() != theta.size()) {
        throw DimensionError("SPSA perturbation length differs from theta");
    }
    const double kk = static_cast<double>(k);
    const double ak = cfg.step / std::pow(kk, cfg.alpha_exp);
    const double ck = cfg.perturb / std::pow(kk, cfg.gamma_exp);

    std::vector<double> plus(theta.begin(), theta.end());
    std::vector<double> minus(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        plus[i] += ck * delta[i];
        minus[i] -= ck * delta[i];
    }
    const double fp = detail::checked(objective(plus));
    const double fm = detail::checked(objective(minus));
    const double scale = (fp - fm) / (2.0 * ck);

    std::vector<double> out(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        // 1/delta_i == delta_i for Rademacher entries.
        out[i] -= ak * scale * delta[i];
    }
    return out;
}

/// One SPSA update drawing its Rademacher perturbation from `rng`.
inline std::vector<double> spsa_step(std::span<const double> theta, const ObjectiveFn &objective,
                                     std::uint64_t k, const OptimizerConfig &cfg, Rng &rng) {
    std::vector<int> delta(theta.size());
    for (auto &d : delta) {
        d = rng.rademacher();
    }
    return spsa_step(theta, objective, k, cfg, delta);
}

inline std::vector<double> gd_step(std::span<const double> theta,
                                   std::span<const double> gradient, double step) {
    if (theta.size() != gradient.size()) {
        throw DimensionError("gradient length " + std::to_string(gradient.size()) +
                             " differs from theta length " + std::to_string(theta.size()));
    }
    std::vector<double> out(theta.begin(), theta.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= step * gradient[i];
    }
    return out;
}

struct MinimizeResult {
    std::vector<double> theta_best;
    double loss_best{0.0};
    std::vector<double> loss_trace;  // objective at the iterate after each step
};

/**
 * Runs `iterations` optimizer steps from theta0.
 *
 * Each iteration takes one step and then evaluates the objective at the new
 * iterate; that value is appended to the trace. The returned theta is the
 * best iterate seen, theta0 included. Gradient descent needs `gradient`;
 * SPSA ignores it and seeds its perturbations from cfg.rng_seed.
 */
inline MinimizeResult minimize(const ObjectiveFn &objective, std::span<const double> theta0,
                               const OptimizerConfig &cfg, std::uint64_t iterations,
                               const GradientFn &gradient = {}) {
    cfg.validate();
    if (iterations < 1) {
        throw DomainError("minimize needs at least one iteration");
    }
    if (cfg.kind == OptimizerKind::GradientDescent && !gradient) {
        throw DomainError("gradient descent requires a gradient function");
    }
    MinimizeResult res;
    std::vector<double> theta(theta0.begin(), theta0.end());
    res.theta_best = theta;
    res.loss_best = detail::checked(objective(theta));
    res.loss_trace.reserve(iterations);

    Rng rng(cfg.rng_seed);
    for (std::uint64_t k = 1; k <= iterations; ++k) {
        if (cfg.kind == OptimizerKind::Spsa) {
            theta = spsa_step(theta, objective, k, cfg, rng);
        } else {
            const auto g = gradient(theta);
            theta = gd_step(theta, g, cfg.step);
        }
        const double f = detail::checked(objective(theta));
        res.loss_trace.push_back(f);
        if (f < res.loss_best) {
            res.loss_best = f;
            res.theta_best = theta;
        }
    }
    return res;
}

} // namespace qepi
