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
 * Pure qudit states, POVMs, Born-rule probabilities and outcome sampling.
 *
 * Level indices are 1-based at every public entry point (|1>..|d>) and
 * converted to 0-based storage offsets internally.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qcm {

using cplx = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kCompletenessTolerance = 1e-10;
inline constexpr double kProbabilityTolerance = 1e-10;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Raised by a finite draw stream once it has no values left.
class StreamExhausted : public Error {
  public:
    StreamExhausted() : Error("random draw stream exhausted") {}
};

enum class Sign : int { plus = 1, minus = -1 };

[[nodiscard]] inline double to_double(Sign s) noexcept {
    return static_cast<double>(static_cast<int>(s));
}

[[nodiscard]] inline char to_char(Sign s) noexcept {
    return s == Sign::plus ? '+' : '-';
}

/// Ordered pair of distinct 1-based levels with j < k.
struct LevelPair {
    int j{1};
    int k{2};

    friend bool operator==(const LevelPair &, const LevelPair &) = default;
};

/// Throws unless 1 <= j < k <= dim.
inline void validate_pair(int dim, LevelPair pair) {
    if (pair.j == pair.k) {
        throw InvalidArgument("level pair must have j != k, got j = k = " +
                              std::to_string(pair.j));
    }
    if (pair.j < 1 || pair.k < 1 || pair.j > dim || pair.k > dim) {
        throw InvalidArgument("level pair (" + std::to_string(pair.j) + "," +
                              std::to_string(pair.k) + ") outside 1.." +
                              std::to_string(dim));
    }
    if (pair.j > pair.k) {
        throw InvalidArgument("level pair must be ordered j < k");
    }
}

/// Number of unordered level pairs of a d-level system.
[[nodiscard]] inline std::size_t pair_count(int dim) {
    return static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim - 1) /
           2;
}

/// Lexicographic enumeration of all pairs j<k; index in [0, pair_count).
[[nodiscard]] inline LevelPair pair_from_index(int dim, std::size_t index) {
    for (int j = 1; j < dim; ++j) {
        const auto row = static_cast<std::size_t>(dim - j);
        if (index < row) {
            return {j, j + 1 + static_cast<int>(index)};
        }
        index -= row;
    }
    throw InvalidArgument("pair index out of range");
}

[[nodiscard]] inline std::vector<LevelPair> all_pairs(int dim) {
    std::vector<LevelPair> pairs;
    pairs.reserve(pair_count(dim));
    for (int j = 1; j <= dim; ++j) {
        for (int k = j + 1; k <= dim; ++k) {
            pairs.push_back({j, k});
        }
    }
    return pairs;
}

/**
 * Normalized pure state over `dim` basis levels.
 */
class StateVector {
  public:
    explicit StateVector(Amplitudes amps) : amps_(std::move(amps)) {
        if (amps_.size() < 2) {
            throw DimensionError("state dimension must be at least 2");
        }
        const double norm2 = amps_.squaredNorm();
        if (std::abs(norm2 - 1.0) > kNormTolerance) {
            throw InvalidArgument("state is not normalized (|psi|^2 = " +
                                  std::to_string(norm2) + ")");
        }
    }

    /// Rescales `amps` to unit norm before construction.
    [[nodiscard]] static StateVector normalized(Amplitudes amps) {
        const double norm = amps.norm();
        if (norm == 0.0) {
            throw InvalidArgument("cannot normalize the zero vector");
        }
        amps /= norm;
        return StateVector(std::move(amps));
    }

    /// Computational basis state |level>, 1-based.
    [[nodiscard]] static StateVector basis(int dim, int level) {
        if (level < 1 || level > dim) {
            throw InvalidArgument("basis level out of range");
        }
        Amplitudes amps = Amplitudes::Zero(dim);
        amps(level - 1) = 1.0;
        return StateVector(std::move(amps));
    }

    [[nodiscard]] int dim() const noexcept {
        return static_cast<int>(amps_.size());
    }
    [[nodiscard]] const Amplitudes &amps() const noexcept { return amps_; }

    /// Amplitude of the 1-based level.
    [[nodiscard]] cplx amplitude(int level) const { return amps_(level - 1); }

    [[nodiscard]] double norm() const { return amps_.norm(); }

    [[nodiscard]] cplx inner(const StateVector &other) const {
        if (other.dim() != dim()) {
            throw DimensionError("inner product dimension mismatch");
        }
        return amps_.dot(other.amps_);
    }

  private:
    Amplitudes amps_;
};

/**
 * One Hermitian PSD measurement operator with a printable outcome label.
 *
 * Rank-1 elements `scale * |v><v|` also keep the factor so Born
 * probabilities can be evaluated as `scale * |<v|psi>|^2`.
 */
class PovmElement {
  public:
    PovmElement(Matrix matrix, std::string label)
        : matrix_(std::move(matrix)), label_(std::move(label)) {
        validate();
    }

    /// Builds `scale * |v><v|`.
    [[nodiscard]] static PovmElement rank_one(const Amplitudes &v, double scale,
                                              std::string label) {
        PovmElement element(scale * v * v.adjoint(), std::move(label));
        element.factor_ = v;
        element.scale_ = scale;
        return element;
    }

    [[nodiscard]] const Matrix &matrix() const noexcept { return matrix_; }
    [[nodiscard]] const std::string &label() const noexcept { return label_; }
    [[nodiscard]] int dim() const noexcept {
        return static_cast<int>(matrix_.rows());
    }

    /// Unclamped <psi|E|psi>.
    [[nodiscard]] double expectation(const Amplitudes &psi) const {
        if (factor_) {
            return scale_ * std::norm(factor_->dot(psi));
        }
        return (psi.adjoint() * matrix_ * psi)(0, 0).real();
    }

  private:
    void validate() const {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 2) {
            throw DimensionError("POVM element '" + label_ +
                                 "' must be square with dim >= 2");
        }
        if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() >
            kHermitianTolerance) {
            throw InvalidArgument("POVM element '" + label_ +
                                  "' is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_,
                                                     Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -kPsdTolerance) {
            throw InvalidArgument("POVM element '" + label_ +
                                  "' is not positive semidefinite");
        }
    }

    Matrix matrix_;
    std::string label_;
    std::optional<Amplitudes> factor_;
    double scale_{1.0};
};

/**
 * Ordered collection of POVM elements; completeness is checked on
 * construction.
 */
class Povm {
  public:
    explicit Povm(std::vector<PovmElement> elements)
        : elements_(std::move(elements)) {
        if (elements_.empty()) {
            throw InvalidArgument("POVM must have at least one element");
        }
        const int d = elements_.front().dim();
        Matrix total = Matrix::Zero(d, d);
        for (const auto &e : elements_) {
            if (e.dim() != d) {
                throw DimensionError("POVM elements differ in dimension");
            }
            total += e.matrix();
        }
        const double deviation =
            (total - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
        if (deviation > kCompletenessTolerance) {
            throw InvalidArgument(
                "POVM elements do not sum to identity (max deviation " +
                std::to_string(deviation) + ")");
        }
    }

    [[nodiscard]] int dim() const noexcept { return elements_.front().dim(); }
    [[nodiscard]] std::size_t size() const noexcept { return elements_.size(); }
    [[nodiscard]] const PovmElement &operator[](std::size_t i) const {
        return elements_.at(i);
    }
    [[nodiscard]] const std::vector<PovmElement> &elements() const noexcept {
        return elements_;
    }
    [[nodiscard]] const std::string &label(std::size_t i) const {
        return elements_.at(i).label();
    }

    /// Sum of all elements; equals the identity up to tolerance.
    [[nodiscard]] Matrix sum() const {
        Matrix total = Matrix::Zero(dim(), dim());
        for (const auto &e : elements_) {
            total += e.matrix();
        }
        return total;
    }

  private:
    std::vector<PovmElement> elements_;
};

/// Prepared probe (|j> + sign |k>)/sqrt(2) of a d >= 3 level system.
[[nodiscard]] inline StateVector make_pair_superposition(int dim,
                                                         LevelPair pair,
                                                         Sign sign) {
    if (dim < 3) {
        throw DimensionError("protocol probes need d >= 3, got d = " +
                             std::to_string(dim));
    }
    validate_pair(dim, pair);
    Amplitudes amps = Amplitudes::Zero(dim);
    amps(pair.j - 1) = M_SQRT1_2;
    amps(pair.k - 1) = to_double(sign) * M_SQRT1_2;
    return StateVector(std::move(amps));
}

/// (1/sqrt(d)) sum_i |i>.
[[nodiscard]] inline StateVector make_uniform_superposition(int dim) {
    return StateVector::normalized(Amplitudes::Ones(dim));
}

/// p_i = <psi|E_i|psi>, clamped to [0, 1].
[[nodiscard]] inline std::vector<double>
born_probabilities(const StateVector &state, const Povm &povm) {
    if (state.dim() != povm.dim()) {
        throw DimensionError("state dimension " + std::to_string(state.dim()) +
                             " does not match POVM dimension " +
                             std::to_string(povm.dim()));
    }
    std::vector<double> probs;
    probs.reserve(povm.size());
    double total = 0.0;
    for (const auto &element : povm.elements()) {
        const double p = element.expectation(state.amps());
        if (p < -kProbabilityTolerance || p > 1.0 + kProbabilityTolerance) {
            throw Error("Born probability " + std::to_string(p) +
                        " for outcome '" + element.label() +
                        "' outside [0,1]");
        }
        total += p;
        probs.push_back(std::clamp(p, 0.0, 1.0));
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw Error("Born probabilities sum to " + std::to_string(total));
    }
    return probs;
}

/**
 * Uniform random bit generator that replays a fixed list of words and
 * throws StreamExhausted when it runs dry.
 */
class ReplayStream {
  public:
    using result_type = std::uint64_t;

    explicit ReplayStream(std::vector<result_type> words)
        : words_(std::move(words)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        if (next_ >= words_.size()) {
            throw StreamExhausted();
        }
        return words_[next_++];
    }

    [[nodiscard]] std::size_t remaining() const {
        return words_.size() - next_;
    }

  private:
    std::vector<result_type> words_;
    std::size_t next_{0};
};

/// Inverse-CDF draw of an outcome index from a probability list.
template <class Rng>
[[nodiscard]] std::size_t sample_index(std::span<const double> probs,
                                       Rng &rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    double cumulative = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) {
            last_nonzero = i;
        }
        cumulative += probs[i];
        if (u < cumulative) {
            return i;
        }
    }
    return last_nonzero;
}

/// Samples an outcome index; `povm.label(i)` gives the outcome label.
template <class Rng>
[[nodiscard]] std::size_t sample_outcome(const StateVector &state,
                                         const Povm &povm, Rng &rng) {
    const auto probs = born_probabilities(state, povm);
    return sample_index(probs, rng);
}

/// amps[i] <- exp(i theta_i) amps[i].
[[nodiscard]] inline StateVector
apply_diagonal_phases(const StateVector &state, std::span<const double> phases) {
    if (phases.size() != static_cast<std::size_t>(state.dim())) {
        throw DimensionError("expected " + std::to_string(state.dim()) +
                             " phases, got " + std::to_string(phases.size()));
    }
    Amplitudes amps = state.amps();
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        amps(i) *= std::polar(1.0, phases[static_cast<std::size_t>(i)]);
    }
    return StateVector(std::move(amps));
}

} // namespace qcm
