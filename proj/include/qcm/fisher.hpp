// Copyright 2026 The qcm Authors.

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
 * @file
 * Classical Fisher information (scalar and matrix), pure-state quantum
 * Fisher information and Cramer-Rao bounds.
 *
 * Derivatives are central finite differences. Models are any callable
 * mapping the parameter(s) to a list of outcome probabilities.
 */
#pragma once

#include <cmath>
#include <concepts>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "qudit_state.hpp"

namespace qcm {

inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr double kNegligibleProbability = 1e-12;

class SingularFisherError : public Error {
  public:
    SingularFisherError(const std::string &what, Eigen::VectorXd null_direction)
        : Error(what), null_direction_(std::move(null_direction)) {}

    [[nodiscard]] const Eigen::VectorXd &null_direction() const noexcept {
        return null_direction_;
    }

  private:
    Eigen::VectorXd null_direction_;
};

template <class Model>
concept ScalarProbabilityModel = requires(const Model &model, double x) {
    { model(x) } -> std::convertible_to<std::vector<double>>;
};

template <class Model>
concept VectorProbabilityModel =
    requires(const Model &model, const std::vector<double> &x) {
        { model(x) } -> std::convertible_to<std::vector<double>>;
    };

namespace detail {

inline void check_step(double step) {
    if (!(step > 0.0 && step <= 1e-3)) {
        throw InvalidArgument("finite-difference step must lie in (0, 1e-3]");
    }
}

inline void check_distribution(const std::vector<double> &p, double at) {
    double total = 0.0;
    for (double v : p) {
        if (v < -kProbabilityTolerance) {
            std::ostringstream msg;
            msg << "probability " << v << " negative inside the stencil at x = "
                << at;
            throw Error(msg.str());
        }
        total += v;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        std::ostringstream msg;
        msg << "model probabilities sum to " << total << " at x = " << at;
        throw Error(msg.str());
    }
}

inline void check_same_size(const std::vector<double> &a,
                            const std::vector<double> &b) {
    if (a.size() != b.size()) {
        throw DimensionError("model changed its outcome count across stencil");
    }
}

} // namespace detail

/// sum_k (dp_k/dx)^2 / p_k over outcomes with p_k >= 1e-12.
template <ScalarProbabilityModel Model>
[[nodiscard]] double classical_fisher(const Model &model, double x,
                                      double step = kDefaultFdStep) {
    detail::check_step(step);
    const std::vector<double> p0 = model(x);
    const std::vector<double> plus = model(x + step);
    const std::vector<double> minus = model(x - step);
    detail::check_distribution(p0, x);
    detail::check_distribution(plus, x + step);
    detail::check_distribution(minus, x - step);
    detail::check_same_size(p0, plus);
    detail::check_same_size(p0, minus);

    double fi = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        if (p0[i] < kNegligibleProbability) {
            continue;
        }
        const double derivative = (plus[i] - minus[i]) / (2.0 * step);
        fi += derivative * derivative / p0[i];
    }
    return fi;
}

/**
 * F_ab = sum_i p_i (d_a ln p_i)(d_b ln p_i), symmetrized as (F + F^T)/2.
 */
template <VectorProbabilityModel Model>
[[nodiscard]] Eigen::MatrixXd fisher_matrix(const Model &model,
                                            const std::vector<double> &x,
                                            double step = kDefaultFdStep) {
    detail::check_step(step);
    const std::size_t m = x.size();
    if (m == 0) {
        throw InvalidArgument("fisher_matrix needs at least one parameter");
    }
    const std::vector<double> p0 = model(x);
    detail::check_distribution(p0, x.front());

    std::vector<std::vector<double>> grads(m, std::vector<double>(p0.size()));
    for (std::size_t a = 0; a < m; ++a) {
        std::vector<double> xp = x;
        std::vector<double> xm = x;
        xp[a] += step;
        xm[a] -= step;
        const auto plus = model(xp);
        const auto minus = model(xm);
        detail::check_distribution(plus, xp[a]);
        detail::check_distribution(minus, xm[a]);
        detail::check_same_size(p0, plus);
        detail::check_same_size(p0, minus);
        for (std::size_t i = 0; i < p0.size(); ++i) {
            grads[a][i] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }

    Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < p0.size(); ++i) {
        if (p0[i] < kNegligibleProbability) {
            continue;
        }
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                fim(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                    grads[a][i] * grads[b][i] / p0[i];
            }
        }
    }
    return 0.5 * (fim + fim.transpose());
}

/**
 * Pure-state QFI 4[<d psi|d psi> - |<d psi|psi>|^2] with a central
 * difference derivative of the amplitudes.
 */
template <class StateFn>
    requires std::invocable<const StateFn &, double>
[[nodiscard]] double qfi_pure(const StateFn &state_fn, double x,
                              double step = kDefaultFdStep) {
    detail::check_step(step);
    const StateVector psi = state_fn(x);
    const StateVector plus = state_fn(x + step);
    const StateVector minus = state_fn(x - step);
    if (plus.dim() != psi.dim() || minus.dim() != psi.dim()) {
        throw DimensionError("state dimension changed across the stencil");
    }
    for (const StateVector *s : {&psi, &plus, &minus}) {
        if (std::abs(s->amps().squaredNorm() - 1.0) > 1e-8) {
            throw Error("state normalization drifts across the stencil");
        }
    }
    const Amplitudes derivative = (plus.amps() - minus.amps()) / (2.0 * step);
    const double overlap = std::norm(derivative.dot(psi.amps()));
    return 4.0 * (derivative.squaredNorm() - overlap);
}

/// delta x = 1 / sqrt(nu * FI).
[[nodiscard]] inline double cramer_rao(double fisher_information, double nu) {
    if (!(fisher_information > 0.0)) {
        throw SingularFisherError("Fisher information is not positive",
                                  Eigen::VectorXd::Ones(1));
    }
    if (!(nu > 0.0)) {
        throw InvalidArgument("repetition count must be positive");
    }
    return 1.0 / std::sqrt(nu * fisher_information);
}

/// delta x_j = sqrt((F^{-1})_jj / nu); throws on singular F.
[[nodiscard]] inline std::vector<double>
cramer_rao(const Eigen::MatrixXd &fisher, double nu) {
    if (fisher.rows() != fisher.cols() || fisher.rows() == 0) {
        throw DimensionError("Fisher matrix must be square and non-empty");
    }
    if (!(nu > 0.0)) {
        throw InvalidArgument("repetition count must be positive");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(fisher);
    const auto &evals = solver.eigenvalues();
    const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
    if (evals.minCoeff() <= 1e-12 * scale) {
        Eigen::VectorXd null_dir = solver.eigenvectors().col(0);
        std::ostringstream msg;
        msg << "singular Fisher matrix (smallest eigenvalue " << evals(0)
            << "), null direction [";
        for (Eigen::Index i = 0; i < null_dir.size(); ++i) {
            msg << (i ? ", " : "") << null_dir(i);
        }
        msg << "]";
        throw SingularFisherError(msg.str(), std::move(null_dir));
    }
    const Eigen::MatrixXd inverse = fisher.inverse();
    std::vector<double> bounds(static_cast<std::size_t>(fisher.rows()));
    for (Eigen::Index j = 0; j < fisher.rows(); ++j) {
        bounds[static_cast<std::size_t>(j)] = std::sqrt(inverse(j, j) / nu);
    }
    return bounds;
}

} // namespace qcm
