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
 * Eavesdropper strategies. Every attack sees only the in-flight quantum
 * state and its own random stream; it never learns the prepared pair,
 * the sign bit or the measurement Bob will be told to use.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qudit_state.hpp"

namespace qcm {

enum class AttackKind {
    none,
    gaussian_phase,
    fixed_phase,
    resend_random_pair,
    resend_uniform,
    projective_resend,
    superposition_resend,
    pairwise_povm_resend,
};

[[nodiscard]] inline std::string to_string(AttackKind kind) {
    switch (kind) {
    case AttackKind::none:
        return "none";
    case AttackKind::gaussian_phase:
        return "gaussian_phase";
    case AttackKind::fixed_phase:
        return "fixed_phase";
    case AttackKind::resend_random_pair:
        return "resend_random_pair";
    case AttackKind::resend_uniform:
        return "resend_uniform";
    case AttackKind::projective_resend:
        return "projective_resend";
    case AttackKind::superposition_resend:
        return "superposition_resend";
    case AttackKind::pairwise_povm_resend:
        return "pairwise_povm_resend";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<AttackKind>
attack_kind_from_string(const std::string &name) {
    for (AttackKind kind :
         {AttackKind::none, AttackKind::gaussian_phase, AttackKind::fixed_phase,
          AttackKind::resend_random_pair, AttackKind::resend_uniform,
          AttackKind::projective_resend, AttackKind::superposition_resend,
          AttackKind::pairwise_povm_resend}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

/// Kinds whose activity is gated per round by `fraction`.
[[nodiscard]] inline bool uses_fraction(AttackKind kind) noexcept {
    return kind == AttackKind::projective_resend ||
           kind == AttackKind::pairwise_povm_resend;
}

struct AttackSpec {
    AttackKind kind{AttackKind::none};
    /// Width of the induced pairwise phase shift (gaussian_phase).
    double delta{0.0};
    /// Phase shift of Eve's fixed channel on `target` (fixed_phase).
    double shift{0.0};
    LevelPair target{1, 2};
    /// Share of rounds Eve intercepts (projective and pairwise kinds).
    double fraction{1.0};
    /// Intercept exactly round(fraction * nu) rounds instead of a coin per
    /// round.
    bool exact_count{false};
    std::uint64_t seed_offset{0};

    void validate() const {
        if (!(delta >= 0.0)) {
            throw InvalidArgument("attack delta must be >= 0");
        }
        if (!(fraction >= 0.0 && fraction <= 1.0)) {
            throw InvalidArgument("attack fraction must lie in [0, 1]");
        }
        if (!std::isfinite(shift)) {
            throw InvalidArgument("attack shift must be finite");
        }
    }
};

struct EveRecord {
    std::int64_t round{0};
    bool acted{false};
    std::optional<std::string> outcome;
    std::optional<StateVector> substituted;
};

/// Eve's per-round measurement P_jk = (|j>+|k>)(<j|+<k|)/(2d-2), P0 = rest.
[[nodiscard]] inline Povm pairwise_povm(int dim) {
    if (dim < 3) {
        throw DimensionError("pairwise POVM needs d >= 3");
    }
    std::vector<PovmElement> elements;
    elements.reserve(pair_count(dim) + 1);
    const double scale = 1.0 / (2.0 * dim - 2.0);
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto &pair : all_pairs(dim)) {
        Amplitudes v = Amplitudes::Zero(dim);
        v(pair.j - 1) = 1.0;
        v(pair.k - 1) = 1.0;
        auto element = PovmElement::rank_one(
            v, scale, "P" + std::to_string(pair.j) + "_" + std::to_string(pair.k));
        sum += element.matrix();
        elements.push_back(std::move(element));
    }
    Matrix rest = Matrix::Identity(dim, dim) - sum;
    rest = 0.5 * (rest + rest.adjoint()).eval();
    elements.emplace_back(std::move(rest), "P0");
    return Povm(std::move(elements));
}

/// Per-level phases theta_i ~ Normal(0, delta^2/2), so theta_k - theta_j has
/// variance delta^2 and is antisymmetric in (j, k).
template <class Rng>
[[nodiscard]] std::vector<double> draw_gaussian_level_phases(int dim,
                                                             double delta,
                                                             Rng &rng) {
    std::vector<double> phases(static_cast<std::size_t>(dim), 0.0);
    if (delta == 0.0) {
        return phases;
    }
    std::normal_distribution<double> normal(0.0, delta * M_SQRT1_2);
    for (auto &theta : phases) {
        theta = normal(rng);
    }
    return phases;
}

template <class Rng>
[[nodiscard]] StateVector gaussian_phase_attack(double delta,
                                                const StateVector &in,
                                                Rng &rng) {
    if (!(delta >= 0.0)) {
        throw InvalidArgument("delta must be >= 0");
    }
    const auto phases = draw_gaussian_level_phases(in.dim(), delta, rng);
    return apply_diagonal_phases(in, phases);
}

/// Diagonal channel that shifts the relative phase of `target` by `shift`.
[[nodiscard]] inline std::vector<double>
fixed_channel_phases(int dim, LevelPair target, double shift) {
    std::vector<double> phases(static_cast<std::size_t>(dim), 0.0);
    if (target.j >= 1 && target.j <= dim) {
        phases[static_cast<std::size_t>(target.j - 1)] = -0.5 * shift;
    }
    if (target.k >= 1 && target.k <= dim) {
        phases[static_cast<std::size_t>(target.k - 1)] = 0.5 * shift;
    }
    return phases;
}

/// Computational-basis measurement; returns the 1-based level.
template <class Rng>
[[nodiscard]] int projective_measure(const StateVector &in, Rng &rng) {
    std::vector<double> probs(static_cast<std::size_t>(in.dim()));
    for (int i = 0; i < in.dim(); ++i) {
        probs[static_cast<std::size_t>(i)] = std::norm(in.amps()(i));
    }
    return static_cast<int>(sample_index(probs, rng)) + 1;
}

template <class Rng>
[[nodiscard]] StateVector resend_random_pair(int dim, Rng &rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pair_count(dim) - 1);
    const LevelPair pair = pair_from_index(dim, pick(rng));
    const Sign sign = std::bernoulli_distribution(0.5)(rng) ? Sign::plus
                                                            : Sign::minus;
    return make_pair_superposition(dim, pair, sign);
}

[[nodiscard]] inline StateVector resend_uniform(int dim) {
    return make_uniform_superposition(dim);
}

/// (|measured> + exp(i theta)|other>)/sqrt(2), theta ~ U[0, 2pi), other
/// uniform over the remaining levels.
template <class Rng>
[[nodiscard]] StateVector superposition_resend(int dim, int measured,
                                               Rng &rng) {
    if (measured < 1 || measured > dim) {
        throw InvalidArgument("superposition resend needs a prior projective "
                              "outcome in 1..d");
    }
    std::uniform_int_distribution<int> pick(1, dim - 1);
    int other = pick(rng);
    if (other >= measured) {
        ++other;
    }
    const double theta =
        std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
    Amplitudes amps = Amplitudes::Zero(dim);
    amps(measured - 1) = M_SQRT1_2;
    amps(other - 1) = M_SQRT1_2 * std::polar(1.0, theta);
    return StateVector(std::move(amps));
}

struct PairwiseOutcome {
    StateVector state;
    std::string outcome;
};

/// Measures Eve's pairwise POVM; P_jk -> resend (|j>+|k>)/sqrt(2),
/// P0 -> resend a uniformly random pair superposition.
template <class Rng>
[[nodiscard]] PairwiseOutcome pairwise_povm_attack(const Povm &eve_povm,
                                                   const StateVector &in,
                                                   Rng &rng) {
    const int dim = in.dim();
    const std::size_t idx = sample_outcome(in, eve_povm, rng);
    if (idx + 1 == eve_povm.size()) {
        return {resend_random_pair(dim, rng), eve_povm.label(idx)};
    }
    return {make_pair_superposition(dim, pair_from_index(dim, idx), Sign::plus),
            eve_povm.label(idx)};
}

enum class Activation { by_fraction, forced, skipped };

struct Interception {
    StateVector state;
    EveRecord record;
};

/**
 * Eve sitting on the quantum channel of one protocol run. Holds the attack
 * settings and any measurement she reuses across rounds.
 */
class Adversary {
  public:
    Adversary(AttackSpec spec, int dim) : spec_(spec), dim_(dim) {
        spec_.validate();
        if (spec_.kind == AttackKind::pairwise_povm_resend) {
            eve_povm_.emplace(pairwise_povm(dim_));
        }
    }

    [[nodiscard]] const AttackSpec &spec() const noexcept { return spec_; }

    template <class Rng>
    [[nodiscard]] Interception
    intercept(const StateVector &in, Rng &rng, std::int64_t round = 0,
              Activation activation = Activation::by_fraction) const {
        if (in.dim() != dim_) {
            throw DimensionError("adversary configured for d = " +
                                 std::to_string(dim_));
        }
        EveRecord record;
        record.round = round;
        if (spec_.kind == AttackKind::none || activation == Activation::skipped) {
            return {in, std::move(record)};
        }
        if (activation == Activation::by_fraction && uses_fraction(spec_.kind)) {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            if (!(u < spec_.fraction)) {
                return {in, std::move(record)};
            }
        }
        record.acted = true;

        switch (spec_.kind) {
        case AttackKind::gaussian_phase:
            return {gaussian_phase_attack(spec_.delta, in, rng),
                    std::move(record)};
        case AttackKind::fixed_phase:
            return {apply_diagonal_phases(
                        in, fixed_channel_phases(dim_, spec_.target, spec_.shift)),
                    std::move(record)};
        case AttackKind::resend_random_pair:
            return substitute(resend_random_pair(dim_, rng), std::move(record));
        case AttackKind::resend_uniform:
            return substitute(resend_uniform(dim_), std::move(record));
        case AttackKind::projective_resend: {
            const int level = projective_measure(in, rng);
            record.outcome = "k" + std::to_string(level);
            return substitute(StateVector::basis(dim_, level), std::move(record));
        }
        case AttackKind::superposition_resend: {
            const int level = projective_measure(in, rng);
            record.outcome = "k" + std::to_string(level);
            return substitute(superposition_resend(dim_, level, rng),
                              std::move(record));
        }
        case AttackKind::pairwise_povm_resend: {
            auto result = pairwise_povm_attack(*eve_povm_, in, rng);
            record.outcome = std::move(result.outcome);
            return substitute(std::move(result.state), std::move(record));
        }
        case AttackKind::none:
            break;
        }
        throw InvalidArgument("unknown attack kind");
    }

  private:
    static Interception substitute(StateVector state, EveRecord record) {
        record.substituted = state;
        return {std::move(state), std::move(record)};
    }

    AttackSpec spec_;
    int dim_;
    std::optional<Povm> eve_povm_;
};

/// One-shot form of Adversary::intercept.
template <class Rng>
[[nodiscard]] Interception attack(const AttackSpec &spec, const StateVector &in,
                                  Rng &rng) {
    return Adversary(spec, in.dim()).intercept(in, rng);
}

} // namespace qcm
