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
 * Alice/Bob protocol engine: random probe preparation, encoding, the
 * in-flight adversary, the announced measurement, abort handling and the
 * deferred reveal of the prepared states.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "adversary.hpp"
#include "encoding.hpp"
#include "qudit_state.hpp"

namespace qcm {

/// Bob's measurement family. `both` draws standard or rotated per round.
enum class Basis { standard, rotated, both };
enum class Mode { strict, survey };
/// Coefficient on |k0> in the multi-parameter measurement vectors.
enum class MultiparamCoefficient { inverse_sqrt_m, inverse_sqrt_n };

[[nodiscard]] inline std::string to_string(Basis b) {
    switch (b) {
    case Basis::standard:
        return "standard";
    case Basis::rotated:
        return "rotated";
    case Basis::both:
        return "both";
    }
    return "unknown";
}

[[nodiscard]] inline std::string to_string(Mode m) {
    return m == Mode::strict ? "strict" : "survey";
}

[[nodiscard]] inline std::string to_string(MultiparamCoefficient c) {
    return c == MultiparamCoefficient::inverse_sqrt_m ? "inv_sqrt_m"
                                                      : "inv_sqrt_n";
}

/// Independent engine for (seed, stream id); distinct ids never share state.
[[nodiscard]] inline std::mt19937_64 make_stream(std::uint64_t seed,
                                                 std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    return std::mt19937_64(seq);
}

/// 64-bit seed derived from (seed, index); used for per-trial seeds.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed,
                                               std::uint64_t index) {
    auto stream = make_stream(seed ^ 0x9e3779b97f4a7c15ULL, index);
    return stream();
}

struct ProtocolConfig {
    int d{3};
    int n{1};
    std::int64_t nu{1};
    Strategy strategy{Strategy::sequential};
    int m{1};
    std::vector<double> true_phases{0.0};
    AttackSpec attack{};
    Basis basis{Basis::standard};
    Mode mode{Mode::strict};
    MultiparamCoefficient coefficient{MultiparamCoefficient::inverse_sqrt_m};
    std::uint64_t seed{0};
    /// Keep every classical message in the transcript.
    bool record_messages{false};

    [[nodiscard]] int parameter_count() const noexcept {
        return strategy == Strategy::multiparam ? m : 1;
    }

    void validate() const {
        if (d < 3) {
            throw InvalidArgument("d must be >= 3");
        }
        if (n < 1) {
            throw InvalidArgument("n must be >= 1");
        }
        if (nu < 0) {
            throw InvalidArgument("nu must be >= 0");
        }
        attack.validate();
        if (strategy == Strategy::multiparam) {
            if (m < 1) {
                throw InvalidArgument("m must be >= 1");
            }
            if (d <= m + 1) {
                throw InvalidArgument("multiparam requires d > m+1");
            }
            if (basis != Basis::standard) {
                throw InvalidArgument("multiparam supports only the standard "
                                      "basis");
            }
            if (coefficient == MultiparamCoefficient::inverse_sqrt_n && n < m) {
                throw InvalidArgument("coefficient 1/sqrt(n) gives a valid "
                                      "measurement only when n >= m");
            }
        }
        if (static_cast<int>(true_phases.size()) != parameter_count()) {
            throw InvalidArgument("expected " +
                                  std::to_string(parameter_count()) +
                                  " true phase(s)");
        }
        if (strategy == Strategy::parallel) {
            switch (attack.kind) {
            case AttackKind::none:
            case AttackKind::gaussian_phase:
            case AttackKind::fixed_phase:
            case AttackKind::projective_resend:
                break;
            default:
                throw InvalidArgument("attack '" + to_string(attack.kind) +
                                      "' is not defined for the parallel "
                                      "strategy");
            }
        }
    }
};

/// What Alice announces: enough for Bob to build the measurement.
struct PovmDescriptor {
    Strategy strategy{Strategy::sequential};
    Basis basis{Basis::standard};
    std::vector<int> levels;
    int n{1};
    MultiparamCoefficient coefficient{MultiparamCoefficient::inverse_sqrt_m};
};

[[nodiscard]] inline double multiparam_coefficient(MultiparamCoefficient c,
                                                   int m, int n) {
    return c == MultiparamCoefficient::inverse_sqrt_m
               ? 1.0 / std::sqrt(static_cast<double>(m))
               : 1.0 / std::sqrt(static_cast<double>(n));
}

namespace detail {

inline Povm pair_povm(int dim, int j, int k, Basis basis) {
    Amplitudes plus = Amplitudes::Zero(dim);
    Amplitudes minus = Amplitudes::Zero(dim);
    std::string prefix = "E";
    if (basis == Basis::rotated) {
        const cplx a = std::polar(1.0, -M_PI / 4.0);
        const cplx b = std::polar(1.0, M_PI / 4.0);
        plus(j - 1) = a;
        plus(k - 1) = b;
        minus(j - 1) = a;
        minus(k - 1) = -b;
        prefix = "R";
    } else {
        plus(j - 1) = 1.0;
        plus(k - 1) = 1.0;
        minus(j - 1) = 1.0;
        minus(k - 1) = -1.0;
    }
    std::vector<PovmElement> elements;
    elements.push_back(PovmElement::rank_one(plus, 0.5, prefix + "1"));
    elements.push_back(PovmElement::rank_one(minus, 0.5, prefix + "2"));
    Matrix rest = Matrix::Identity(dim, dim);
    rest(j - 1, j - 1) = 0.0;
    rest(k - 1, k - 1) = 0.0;
    elements.emplace_back(std::move(rest), prefix + "3");
    return Povm(std::move(elements));
}

} // namespace detail

/**
 * Bob's announced measurement.
 *
 * Single parameter: {E1, E2, E3} on the pair, or the rotated {R1, R2, R3}
 * whose vectors carry exp(-/+ i pi/4). The parallel strategy uses the same
 * elements on the two-dimensional branch space, where the complement
 * element is zero. Multi-parameter: rank-one E_{a+/-} from
 * (c|k0> +/- |k_a>)/sqrt(2) plus the completing element.
 */
[[nodiscard]] inline Povm build_bob_povm(const PovmDescriptor &desc, int dim) {
    switch (desc.strategy) {
    case Strategy::sequential:
        if (desc.levels.size() != 2) {
            throw InvalidArgument("single-parameter POVM needs a level pair");
        }
        validate_pair(dim, {desc.levels[0], desc.levels[1]});
        return detail::pair_povm(dim, desc.levels[0], desc.levels[1],
                                 desc.basis);
    case Strategy::parallel:
        return detail::pair_povm(2, 1, 2, desc.basis);
    case Strategy::multiparam: {
        validate_multiparam_levels(dim, desc.levels);
        if (desc.basis != Basis::standard) {
            throw InvalidArgument("multiparam supports only the standard basis");
        }
        const int m = static_cast<int>(desc.levels.size()) - 1;
        const double c = multiparam_coefficient(desc.coefficient, m, desc.n);
        std::vector<PovmElement> elements;
        Matrix sum = Matrix::Zero(dim, dim);
        for (int a = 1; a <= m; ++a) {
            for (int s : {1, -1}) {
                Amplitudes v = Amplitudes::Zero(dim);
                v(desc.levels[0] - 1) = c;
                v(desc.levels[static_cast<std::size_t>(a)] - 1) =
                    static_cast<double>(s);
                auto e = PovmElement::rank_one(
                    v, 0.5, "E" + std::to_string(a) + (s > 0 ? "+" : "-"));
                sum += e.matrix();
                elements.push_back(std::move(e));
            }
        }
        Matrix rest = Matrix::Identity(dim, dim) - sum;
        rest = 0.5 * (rest + rest.adjoint()).eval();
        elements.emplace_back(std::move(rest), "E" + std::to_string(m + 1));
        return Povm(std::move(elements));
    }
    }
    throw InvalidArgument("unknown strategy");
}

struct EncodedStateSent {
    std::int64_t round;
};
struct ReceiptAck {
    std::int64_t round;
};
struct PovmAnnouncement {
    std::int64_t round;
    PovmDescriptor povm;
};
struct OutcomeReport {
    std::int64_t round;
    std::string label;
};
struct Abort {
    std::int64_t round;
};

/// Alice's prepared levels and signs for one round, in round order.
struct Preparation {
    std::vector<int> levels;
    std::vector<Sign> signs;
};

struct FinalReveal {
    std::vector<Preparation> preparations;
};

using ClassicalMessage = std::variant<EncodedStateSent, ReceiptAck,
                                      PovmAnnouncement, OutcomeReport, Abort,
                                      FinalReveal>;

struct RoundRecord {
    std::int64_t round{0};
    Preparation prepared;
    /// Basis used this round (never `both`).
    Basis basis{Basis::standard};
    EveRecord eve;
    std::size_t bob_outcome{0};
    std::string bob_label;
    bool abort{false};
};

struct Transcript {
    ProtocolConfig config;
    std::vector<RoundRecord> rounds;
    std::optional<FinalReveal> reveal;
    std::vector<ClassicalMessage> messages;

    [[nodiscard]] bool aborted() const {
        return std::any_of(rounds.begin(), rounds.end(),
                           [](const RoundRecord &r) { return r.abort; });
    }

    [[nodiscard]] std::optional<std::int64_t> first_abort_round() const {
        for (const auto &r : rounds) {
            if (r.abort) {
                return r.round;
            }
        }
        return std::nullopt;
    }

    [[nodiscard]] std::int64_t abort_count() const {
        return std::count_if(rounds.begin(), rounds.end(),
                             [](const RoundRecord &r) { return r.abort; });
    }
};

/// Index of the aborting outcome in Bob's measurement.
[[nodiscard]] inline std::size_t abort_outcome_index(const ProtocolConfig &cfg) {
    return cfg.strategy == Strategy::multiparam
               ? static_cast<std::size_t>(2 * cfg.m)
               : 2;
}

/**
 * One run of the protocol. Alice, Eve and Bob each draw from their own
 * stream derived from the config seed.
 */
class ProtocolSession {
  public:
    explicit ProtocolSession(ProtocolConfig config)
        : config_(std::move(config)), adversary_(init_adversary(config_)),
          alice_rng_(make_stream(config_.seed, 1)),
          eve_rng_(make_stream(config_.seed, 2 + config_.attack.seed_offset)),
          bob_rng_(make_stream(config_.seed, 0x0b0b)) {
        if (config_.attack.exact_count && uses_fraction(config_.attack.kind)) {
            schedule_exact_interceptions();
        }
    }

    [[nodiscard]] const ProtocolConfig &config() const noexcept {
        return config_;
    }

    /// Steps 1-4 for one round: prepare, encode, transmit, announce, measure.
    RoundRecord run_round(std::int64_t index,
                          std::vector<ClassicalMessage> *log = nullptr) {
        if (index < 0 || index >= config_.nu) {
            throw InvalidArgument("round index out of range");
        }
        RoundRecord record;
        record.round = index;
        record.prepared = alice_prepare();
        record.basis = alice_pick_basis();

        StateVector encoded = alice_encode(record.prepared);
        post(log, EncodedStateSent{index});

        Interception in_flight = adversary_.intercept(
            encoded, eve_rng_, index, activation_for(index));
        record.eve = std::move(in_flight.record);
        const StateVector &received = in_flight.state;
        post(log, ReceiptAck{index});

        PovmDescriptor desc{config_.strategy, record.basis,
                            record.prepared.levels, config_.n,
                            config_.coefficient};
        const Povm &povm = bob_povm(desc);
        if (log) {
            post(log, PovmAnnouncement{index, desc});
        }

        record.bob_outcome = sample_outcome(received, povm, bob_rng_);
        record.bob_label = povm.label(record.bob_outcome);
        post(log, OutcomeReport{index, record.bob_label});

        record.abort = record.bob_outcome == abort_outcome_index(config_);
        if (record.abort) {
            post(log, Abort{index});
        }
        return record;
    }

    /// Steps 5-6: repeat, then reveal the preparations if nothing aborted.
    Transcript run() {
        Transcript transcript;
        transcript.config = config_;
        auto *log = config_.record_messages ? &transcript.messages : nullptr;
        transcript.rounds.reserve(static_cast<std::size_t>(config_.nu));
        bool aborted = false;
        for (std::int64_t i = 0; i < config_.nu; ++i) {
            transcript.rounds.push_back(run_round(i, log));
            if (transcript.rounds.back().abort) {
                aborted = true;
                if (config_.mode == Mode::strict) {
                    break;
                }
            }
        }
        if (!aborted && config_.nu > 0) {
            FinalReveal reveal;
            reveal.preparations.reserve(transcript.rounds.size());
            for (const auto &r : transcript.rounds) {
                reveal.preparations.push_back(r.prepared);
            }
            if (log) {
                log->push_back(reveal);
            }
            transcript.reveal = std::move(reveal);
        }
        return transcript;
    }

  private:
    static Adversary init_adversary(const ProtocolConfig &cfg) {
        cfg.validate();
        const int dim = cfg.strategy == Strategy::parallel ? 2 : cfg.d;
        return Adversary(cfg.attack, dim);
    }

    template <class Message>
    static void post(std::vector<ClassicalMessage> *log, Message msg) {
        if (log) {
            log->emplace_back(std::move(msg));
        }
    }

    Preparation alice_prepare() {
        Preparation prep;
        if (config_.strategy == Strategy::multiparam) {
            std::vector<int> levels(static_cast<std::size_t>(config_.d));
            std::iota(levels.begin(), levels.end(), 1);
            // partial Fisher-Yates for the m+1 ordered levels
            for (int a = 0; a <= config_.m; ++a) {
                std::uniform_int_distribution<int> pick(a, config_.d - 1);
                std::swap(levels[static_cast<std::size_t>(a)],
                          levels[static_cast<std::size_t>(pick(alice_rng_))]);
            }
            levels.resize(static_cast<std::size_t>(config_.m + 1));
            prep.levels = std::move(levels);
            for (int a = 0; a < config_.m; ++a) {
                prep.signs.push_back(draw_sign());
            }
            return prep;
        }
        std::uniform_int_distribution<std::size_t> pick(
            0, pair_count(config_.d) - 1);
        const LevelPair pair = pair_from_index(config_.d, pick(alice_rng_));
        prep.levels = {pair.j, pair.k};
        prep.signs = {draw_sign()};
        return prep;
    }

    Sign draw_sign() {
        return std::bernoulli_distribution(0.5)(alice_rng_) ? Sign::plus
                                                            : Sign::minus;
    }

    Basis alice_pick_basis() {
        if (config_.basis != Basis::both) {
            return config_.basis;
        }
        return std::bernoulli_distribution(0.5)(alice_rng_) ? Basis::standard
                                                            : Basis::rotated;
    }

    StateVector alice_encode(const Preparation &prep) const {
        switch (config_.strategy) {
        case Strategy::sequential: {
            const LevelPair pair{prep.levels[0], prep.levels[1]};
            return encode_sequential(
                make_pair_superposition(config_.d, pair, prep.signs[0]),
                config_.true_phases[0], config_.n, pair);
        }
        case Strategy::parallel:
            return encode_parallel(config_.n, config_.true_phases[0],
                                   {prep.levels[0], prep.levels[1]},
                                   prep.signs[0])
                .as_state();
        case Strategy::multiparam:
            return encode_multiparam(config_.d, prep.levels, prep.signs,
                                     config_.true_phases, config_.n);
        }
        throw InvalidArgument("unknown strategy");
    }

    const Povm &bob_povm(const PovmDescriptor &desc) {
        auto key = desc.levels;
        key.push_back(desc.basis == Basis::rotated ? 1 : 0);
        auto it = povm_cache_.find(key);
        if (it == povm_cache_.end()) {
            it = povm_cache_.emplace(key, build_bob_povm(desc, config_.d)).first;
        }
        return it->second;
    }

    Activation activation_for(std::int64_t index) const {
        if (exact_schedule_.empty()) {
            return Activation::by_fraction;
        }
        return exact_schedule_[static_cast<std::size_t>(index)]
                   ? Activation::forced
                   : Activation::skipped;
    }

    void schedule_exact_interceptions() {
        const auto total = static_cast<std::size_t>(config_.nu);
        const auto hits = static_cast<std::size_t>(
            std::llround(config_.attack.fraction * static_cast<double>(total)));
        std::vector<std::size_t> indices(total);
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        std::vector<std::size_t> chosen;
        chosen.reserve(hits);
        std::sample(indices.begin(), indices.end(), std::back_inserter(chosen),
                    hits, eve_rng_);
        exact_schedule_.assign(total, false);
        for (auto i : chosen) {
            exact_schedule_[i] = true;
        }
    }

    ProtocolConfig config_;
    Adversary adversary_;
    std::mt19937_64 alice_rng_;
    std::mt19937_64 eve_rng_;
    std::mt19937_64 bob_rng_;
    std::map<std::vector<int>, Povm> povm_cache_;
    std::vector<bool> exact_schedule_;
};

[[nodiscard]] inline Transcript run_protocol(const ProtocolConfig &config) {
    return ProtocolSession(config).run();
}

} // namespace qcm
