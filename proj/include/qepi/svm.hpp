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
 * @file svm.hpp
 * Soft-margin SVM over a precomputed kernel matrix.
 *
 * The dual
 *
 *     max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
 *     s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
 *
 * is solved by SMO with second-order working-pair selection. The solver
 * works on the equivalent minimization with gradient G = Q a - 1,
 * Q_ij = y_i y_j K_ij, and stops once the maximal KKT violation
 *
 *     max_{t in I_up} -y_t G_t  -  min_{t in I_low} -y_t G_t
 *
 * drops to `tol`, or the pair-update cap is reached (the model is then
 * returned with `converged == false`).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "labels.hpp"
#include "types.hpp"

namespace qepi {

struct SvmOptions {
    double C{1.0};
    double tol{1e-4};
    std::uint64_t max_iterations{100000};
    // Added to the kernel diagonal before solving; guards shot-estimated
    // kernels that are slightly indefinite.
    double diag_eps{1e-8};
    double support_tol{1e-8};
};

struct SvmModel {
    Vector alphas;
    double bias{0.0};
    Labels labels;
    std::vector<std::size_t> support_indices;
    double C{1.0};
    std::string training_ref;
    bool converged{true};
    std::uint64_t iterations{0};
    double objective{0.0};  // dual objective at exit

    [[nodiscard]] std::size_t n_train() const { return labels.size(); }
};

/// State reported to an observer after every pair update.
struct SmoProgress {
    std::uint64_t iteration;
    std::span<const double> alphas;
    double objective;
    double violation;
};

using SmoObserver = std::function<void(const SmoProgress &)>;

/// Dual objective sum(a) - 1/2 a^T Q a for the plain kernel matrix K.
inline double svm_dual_objective(const Matrix &K, std::span<const int> y,
                                 std::span<const double> alphas) {
    const auto n = static_cast<Eigen::Index>(y.size());
    double lin = 0.0;
    double quad = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        lin += alphas[ui];
        if (alphas[ui] == 0.0) {
            continue;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            quad += alphas[ui] * alphas[uj] * y[ui] * y[uj] * K(i, j);
        }
    }
    return lin - 0.5 * quad;
}

namespace detail {

inline void check_square_symmetric(const Matrix &K, double tol) {
    if (K.rows() != K.cols()) {
        throw DimensionError("kernel matrix is " + std::to_string(K.rows()) + "x" +
                             std::to_string(K.cols()) + ", expected square");
    }
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < K.cols(); ++j) {
            if (std::abs(K(i, j) - K(j, i)) > tol) {
                throw DomainError("kernel matrix is not symmetric at (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")");
            }
        }
    }
}

} // namespace detail

inline SvmModel train_svm(const Matrix &K, std::span<const int> y, const SvmOptions &opt = {},
                          const SmoObserver &observer = {}) {
    detail::check_square_symmetric(K, 1e-8);
    if (static_cast<std::size_t>(K.rows()) != y.size()) {
        throw DimensionError("kernel has " + std::to_string(K.rows()) + " rows but " +
                             std::to_string(y.size()) + " labels");
    }
    check_labels(y);
    check_both_classes(y);
    if (!(opt.C > 0.0) || !(opt.tol > 0.0)) {
        throw DomainError("C and tol must be positive");
    }

    const auto n = K.rows();
    const double C = opt.C;
    constexpr double tau = 1e-12;
    auto Kd = [&](Eigen::Index i, Eigen::Index j) {
        return K(i, j) + (i == j ? opt.diag_eps : 0.0);
    };
    auto yi = [&](Eigen::Index i) { return static_cast<double>(y[static_cast<std::size_t>(i)]); };

    std::vector<double> a(static_cast<std::size_t>(n), 0.0);
    std::vector<double> G(static_cast<std::size_t>(n), -1.0);
    auto A = [&](Eigen::Index i) -> double & { return a[static_cast<std::size_t>(i)]; };
    auto Gr = [&](Eigen::Index i) -> double & { return G[static_cast<std::size_t>(i)]; };
    auto in_up = [&](Eigen::Index t) {
        return (yi(t) > 0 && A(t) < C) || (yi(t) < 0 && A(t) > 0);
    };
    auto in_low = [&](Eigen::Index t) {
        return (yi(t) > 0 && A(t) > 0) || (yi(t) < 0 && A(t) < C);
    };
    // Objective from the maintained gradient: 1/2 sum a_i (1 - G_i).
    auto objective = [&] {
        double s = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) {
            s += A(t) * (1.0 - Gr(t));
        }
        return 0.5 * s;
    };

    SvmModel model;
    model.C = C;
    model.labels.assign(y.begin(), y.end());
    model.converged = false;

    std::uint64_t iter = 0;
    double gmax = 0.0;
    double gmin = 0.0;
    for (;;) {
        gmax = -std::numeric_limits<double>::infinity();
        gmin = std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -yi(t) * Gr(t);
            if (in_up(t) && v >= gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t)) {
                gmin = std::min(gmin, v);
            }
        }
        if (i < 0 || gmax - gmin <= opt.tol) {
            model.converged = true;
            break;
        }
        if (iter >= opt.max_iterations) {
            break;
        }

        Eigen::Index j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            if (!in_low(t)) {
                continue;
            }
            const double b = gmax + yi(t) * Gr(t);
            if (b <= 0.0) {
                continue;
            }
            double curv = Kd(i, i) + Kd(t, t) - 2.0 * Kd(i, t);
            if (curv <= 0.0) {
                curv = tau;
            }
            const double score = -(b * b) / curv;
            if (score <= best) {
                best = score;
                j = t;
            }
        }
        if (j < 0) {
            model.converged = true;
            break;
        }

        const double old_ai = A(i);
        const double old_aj = A(j);
        double quad = Kd(i, i) + Kd(j, j) - 2.0 * Kd(i, j);
        if (quad <= 0.0) {
            quad = tau;
        }
        if (yi(i) != yi(j)) {
            const double delta = (-Gr(i) - Gr(j)) / quad;
            const double diff = A(i) - A(j);
            A(i) += delta;
            A(j) += delta;
            if (diff > 0) {
                if (A(j) < 0) {
                    A(j) = 0;
                    A(i) = diff;
                }
            } else if (A(i) < 0) {
                A(i) = 0;
                A(j) = -diff;
            }
            if (diff > 0) {
                if (A(i) > C) {
                    A(i) = C;
                    A(j) = C - diff;
                }
            } else if (A(j) > C) {
                A(j) = C;
                A(i) = C + diff;
            }
        } else {
            const double delta = (Gr(i) - Gr(j)) / quad;
            const double sum = A(i) + A(j);
            A(i) -= delta;
            A(j) += delta;
            if (sum > C) {
                if (A(i) > C) {
                    A(i) = C;
                    A(j) = sum - C;
                }
            } else if (A(j) < 0) {
                A(j) = 0;
                A(i) = sum;
            }
            if (sum > C) {
                if (A(j) > C) {
                    A(j) = C;
                    A(i) = sum - C;
                }
            } else if (A(i) < 0) {
                A(i) = 0;
                A(j) = sum;
            }
        }

        const double dai = A(i) - old_ai;
        const double daj = A(j) - old_aj;
        for (Eigen::Index t = 0; t < n; ++t) {
            Gr(t) += yi(t) * (yi(i) * Kd(t, i) * dai + yi(j) * Kd(t, j) * daj);
        }
        ++iter;
        if (observer) {
            observer(SmoProgress{iter, a, objective(), gmax - gmin});
        }
    }

    // Bias: mean of -y_t G_t over free vectors; midpoint of the feasible
    // interval when every vector sits at a bound.
    double sum_free = 0.0;
    std::size_t n_free = 0;
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
        const double v = -yi(t) * Gr(t);
        if (A(t) > 0.0 && A(t) < C) {
            sum_free += v;
            ++n_free;
        } else if ((yi(t) > 0 && A(t) >= C) || (yi(t) < 0 && A(t) <= 0.0)) {
            lb = std::max(lb, v);
        } else {
            ub = std::min(ub, v);
        }
    }
    if (n_free > 0) {
        model.bias = sum_free / static_cast<double>(n_free);
    } else if (std::isfinite(ub) && std::isfinite(lb)) {
        model.bias = 0.5 * (ub + lb);
    } else {
        model.bias = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
    }

    model.alphas = Eigen::Map<const Vector>(a.data(), n);
    for (Eigen::Index t = 0; t < n; ++t) {
        if (A(t) > opt.support_tol) {
            model.support_indices.push_back(static_cast<std::size_t>(t));
        }
    }
    model.iterations = iter;
    model.objective = objective();
    return model;
}

inline double decision_function(const SvmModel &model, std::span<const double> k_row) {
    if (k_row.size() != model.n_train()) {
        throw DimensionError("kernel row has " + std::to_string(k_row.size()) +
                             " entries, model was trained on " +
                             std::to_string(model.n_train()));
    }
    double f = model.bias;
    for (std::size_t i = 0; i < k_row.size(); ++i) {
        f += model.alphas[static_cast<Eigen::Index>(i)] * model.labels[i] * k_row[i];
    }
    return f;
}

/// Decision values for each row of a test-vs-train kernel block.
inline std::vector<double> decision_values(const SvmModel &model, const Matrix &k_rows) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_rows.rows()));
    for (Eigen::Index r = 0; r < k_rows.rows(); ++r) {
        out.push_back(decision_function(
            model, {k_rows.row(r).data(), static_cast<std::size_t>(k_rows.cols())}));
    }
    return out;
}

/// Sign of the decision value; an exact zero maps to +1.
inline int sign_label(double decision) { return decision >= 0.0 ? 1 : -1; }

inline Labels predict(const SvmModel &model, const Matrix &k_rows) {
    Labels out;
    for (double f : decision_values(model, k_rows)) {
        out.push_back(sign_label(f));
    }
    return out;
}

/// exp(-gamma * |a - b|^2) for every row pair.
inline Matrix rbf_kernel(const Matrix &X, const Matrix &X2, double gamma) {
    if (X.cols() != X2.cols()) {
        throw DimensionError("rbf kernel inputs have " + std::to_string(X.cols()) + " and " +
                             std::to_string(X2.cols()) + " columns");
    }
    if (!(gamma > 0.0)) {
        throw DomainError("rbf gamma must be positive");
    }
    Matrix out(X.rows(), X2.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X2.rows(); ++j) {
            out(i, j) = std::exp(-gamma * (X.row(i) - X2.row(j)).squaredNorm());
        }
    }
    return out;
}

inline nlohmann::json to_json(const SvmModel &m) {
    nlohmann::json j;
    j["alphas"] = std::vector<double>(m.alphas.data(), m.alphas.data() + m.alphas.size());
    j["bias"] = m.bias;
    j["labels"] = m.labels;
    j["support_indices"] = m.support_indices;
    j["C"] = m.C;
    j["training_ref"] = m.training_ref;
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    j["objective"] = m.objective;
    return j;
}

inline SvmModel svm_model_from_json(const nlohmann::json &j) {
    SvmModel m;
    const auto alphas = j.at("alphas").get<std::vector<double>>();
    m.alphas = Eigen::Map<const Vector>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
    m.bias = j.at("bias").get<double>();
    m.labels = j.at("labels").get<Labels>();
    m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
    m.C = j.at("C").get<double>();
    m.training_ref = j.value("training_ref", std::string{});
    m.converged = j.value("converged", true);
    m.iterations = j.value("iterations", std::uint64_t{0});
    m.objective = j.value("objective", 0.0);
    if (m.labels.size() != alphas.size()) {
        throw ParseError("svm model: alphas and labels differ in length");
    }
    check_labels(m.labels);
    return m;
}

} // namespace qepi
