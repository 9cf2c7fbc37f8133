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
 * Bob's estimators, Monte Carlo experiments and detection statistics, plus
 * the channel-averaged outcome distributions that serve as exhaustive
 * enumeration oracles for them.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "adversary.hpp"
#include "closed_forms.hpp"
#include "encoding.hpp"
#include "fisher.hpp"
#include "parallel.hpp"
#include "protocol.hpp"

namespace qcm {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Channel-averaged outcome distributions
// ---------------------------------------------------------------------------

/// Phase-encoded probe for one preparation, before the channel.
[[nodiscard]] inline StateVector encoded_state(const ProtocolConfig &cfg,
                                               const Preparation &prep,
                                               std::span<const double> phases) {
    switch (cfg.strategy) {
    case Strategy::sequential: {
        const LevelPair pair{prep.levels[0], prep.levels[1]};
        return encode_sequential(make_pair_superposition(cfg.d, pair,
                                                         prep.signs[0]),
                                 phases[0], cfg.n, pair);
    }
    case Strategy::parallel:
        return encode_parallel(cfg.n, phases[0],
                               {prep.levels[0], prep.levels[1]}, prep.signs[0])
            .as_state();
    case Strategy::multiparam:
        return encode_multiparam(cfg.d, prep.levels, prep.signs, phases, cfg.n);
    }
    throw InvalidArgument("unknown strategy");
}

/// Weighted states Bob may receive; weights sum to one.
using Ensemble = std::vector<std::pair<double, StateVector>>;

namespace detail {

inline void add_all_pair_states(Ensemble &out, int dim, double weight) {
    const auto pairs = all_pairs(dim);
    const double w = weight / (2.0 * static_cast<double>(pairs.size()));
    for (const auto &pair : pairs) {
        out.emplace_back(w, make_pair_superposition(dim, pair, Sign::plus));
        out.emplace_back(w, make_pair_superposition(dim, pair, Sign::minus));
    }
}

/// Composite Gauss-Legendre average of f(x) against Normal(0, sigma^2).
template <class F>
void for_each_gaussian_node(double sigma, F &&f) {
    using rule = boost::math::quadrature::gauss<double, 20>;
    const double half_width = 9.0 * sigma;
    const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * half_width)));
    const double panel = 2.0 * half_width / panels;
    const auto &x = rule::abscissa();
    const auto &w = rule::weights();
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    for (int p = 0; p < panels; ++p) {
        const double centre = -half_width + (p + 0.5) * panel;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double sgn : {1.0, -1.0}) {
                if (i == 0 && x[0] == 0.0 && sgn < 0.0) {
                    continue;
                }
                const double node = centre + sgn * x[i] * 0.5 * panel;
                const double weight = w[i] * 0.5 * panel * norm *
                                      std::exp(-0.5 * node * node /
                                               (sigma * sigma));
                f(node, weight);
            }
        }
    }
}

} // namespace detail

/**
 * Exact ensemble after the attack, averaging over every random choice Eve
 * makes: discrete choices are enumerated, the Gaussian shift is integrated
 * by quadrature and the resend phase by a 16-point periodic rule (exact for
 * the trigonometric terms that occur).
 */
[[nodiscard]] inline Ensemble received_ensemble(const AttackSpec &attack,
                                                const StateVector &clean) {
    const int dim = clean.dim();
    Ensemble out;
    const double f = uses_fraction(attack.kind) ? attack.fraction : 1.0;
    if (attack.kind == AttackKind::none || f < 1.0) {
        out.emplace_back(attack.kind == AttackKind::none ? 1.0 : 1.0 - f, clean);
    }
    switch (attack.kind) {
    case AttackKind::none:
        break;
    case AttackKind::gaussian_phase: {
        if (attack.delta == 0.0) {
            out.emplace_back(1.0, clean);
            break;
        }
        std::vector<int> support;
        for (int i = 0; i < dim; ++i) {
            if (std::abs(clean.amps()(i)) > kNormTolerance) {
                support.push_back(i);
            }
        }
        if (support.size() != 2) {
            throw InvalidArgument("Gaussian-attack averaging is implemented for "
                                  "two-level probes only");
        }
        detail::for_each_gaussian_node(attack.delta, [&](double shift,
                                                         double weight) {
            std::vector<double> phases(static_cast<std::size_t>(dim), 0.0);
            phases[static_cast<std::size_t>(support[0])] = -0.5 * shift;
            phases[static_cast<std::size_t>(support[1])] = 0.5 * shift;
            out.emplace_back(weight, apply_diagonal_phases(clean, phases));
        });
        break;
    }
    case AttackKind::fixed_phase:
        out.emplace_back(1.0, apply_diagonal_phases(
                                  clean, fixed_channel_phases(dim, attack.target,
                                                              attack.shift)));
        break;
    case AttackKind::resend_random_pair:
        detail::add_all_pair_states(out, dim, 1.0);
        break;
    case AttackKind::resend_uniform:
        out.emplace_back(1.0, make_uniform_superposition(dim));
        break;
    case AttackKind::projective_resend:
        for (int i = 1; i <= dim; ++i) {
            const double p = std::norm(clean.amplitude(i));
            if (p > 0.0) {
                out.emplace_back(f * p, StateVector::basis(dim, i));
            }
        }
        break;
    case AttackKind::superposition_resend: {
        constexpr int kPhaseNodes = 16;
        for (int i = 1; i <= dim; ++i) {
            const double p = std::norm(clean.amplitude(i));
            if (p == 0.0) {
                continue;
            }
            const double w = p / ((dim - 1.0) * kPhaseNodes);
            for (int other = 1; other <= dim; ++other) {
                if (other == i) {
                    continue;
                }
                for (int t = 0; t < kPhaseNodes; ++t) {
                    Amplitudes amps = Amplitudes::Zero(dim);
                    amps(i - 1) = M_SQRT1_2;
                    amps(other - 1) =
                        M_SQRT1_2 * std::polar(1.0, 2.0 * M_PI * t / kPhaseNodes);
                    out.emplace_back(w, StateVector(std::move(amps)));
                }
            }
        }
        break;
    }
    case AttackKind::pairwise_povm_resend: {
        const Povm eve = pairwise_povm(dim);
        const auto probs = born_probabilities(clean, eve);
        for (std::size_t o = 0; o + 1 < eve.size(); ++o) {
            if (probs[o] > 0.0) {
                out.emplace_back(f * probs[o],
                                 make_pair_superposition(
                                     dim, pair_from_index(dim, o), Sign::plus));
            }
        }
        if (probs.back() > 0.0) {
            detail::add_all_pair_states(out, dim, f * probs.back());
        }
        break;
    }
    }
    return out;
}

/// Bob's outcome distribution for one preparation, averaged over Eve.
[[nodiscard]] inline std::vector<double>
expected_bob_distribution(const ProtocolConfig &cfg, const Preparation &prep,
                          Basis basis, std::span<const double> phases) {
    const StateVector clean = encoded_state(cfg, prep, phases);
    const Povm povm = build_bob_povm(
        {cfg.strategy, basis, prep.levels, cfg.n, cfg.coefficient}, cfg.d);
    std::vector<double> dist(povm.size(), 0.0);
    for (const auto &[weight, state] : received_ensemble(cfg.attack, clean)) {
        const auto p = born_probabilities(state, povm);
        for (std::size_t i = 0; i < dist.size(); ++i) {
            dist[i] += weight * p[i];
        }
    }
    return dist;
}

/// Every preparation Alice may choose, each equally likely.
[[nodiscard]] inline std::vector<Preparation>
enumerate_preparations(const ProtocolConfig &cfg) {
    std::vector<Preparation> preps;
    if (cfg.strategy != Strategy::multiparam) {
        const auto pairs = cfg.strategy == Strategy::parallel
                               ? std::vector<LevelPair>{{1, 2}}
                               : all_pairs(cfg.d);
        for (const auto &pair : pairs) {
            for (Sign s : {Sign::plus, Sign::minus}) {
                preps.push_back({{pair.j, pair.k}, {s}});
            }
        }
        return preps;
    }
    // Statistics depend on the chosen levels only through a fixed-phase
    // channel; otherwise one level tuple represents them all.
    std::vector<std::vector<int>> tuples;
    if (cfg.attack.kind == AttackKind::fixed_phase) {
        std::vector<int> current;
        std::vector<bool> used(static_cast<std::size_t>(cfg.d) + 1, false);
        auto rec = [&](auto &&self) -> void {
            if (static_cast<int>(current.size()) == cfg.m + 1) {
                tuples.push_back(current);
                return;
            }
            for (int l = 1; l <= cfg.d; ++l) {
                if (!used[static_cast<std::size_t>(l)]) {
                    used[static_cast<std::size_t>(l)] = true;
                    current.push_back(l);
                    self(self);
                    current.pop_back();
                    used[static_cast<std::size_t>(l)] = false;
                }
            }
        };
        rec(rec);
    } else {
        std::vector<int> t(static_cast<std::size_t>(cfg.m + 1));
        std::iota(t.begin(), t.end(), 1);
        tuples.push_back(std::move(t));
    }
    for (const auto &t : tuples) {
        for (unsigned mask = 0; mask < (1u << cfg.m); ++mask) {
            Preparation prep{t, {}};
            for (int a = 0; a < cfg.m; ++a) {
                prep.signs.push_back((mask >> a) & 1u ? Sign::minus
                                                      : Sign::plus);
            }
            preps.push_back(std::move(prep));
        }
    }
    return preps;
}

[[nodiscard]] inline std::vector<Basis> bases_used(Basis basis) {
    if (basis == Basis::both) {
        return {Basis::standard, Basis::rotated};
    }
    return {basis};
}

/// Per-round probability that Bob's outcome does not abort, averaged over
/// Alice's choices (exhaustive enumeration).
[[nodiscard]] inline double concealment_oracle(const ProtocolConfig &cfg) {
    const auto preps = enumerate_preparations(cfg);
    const auto bases = bases_used(cfg.basis);
    const std::size_t abort_idx = abort_outcome_index(cfg);
    double total = 0.0;
    for (const auto &prep : preps) {
        for (Basis b : bases) {
            total += 1.0 - expected_bob_distribution(cfg, prep, b,
                                                     cfg.true_phases)[abort_idx];
        }
    }
    return total / static_cast<double>(preps.size() * bases.size());
}

/// Probability that Bob's outcome agrees with the revealed sign, given the
/// round is not aborted; averaged over Alice's choices.
[[nodiscard]] inline double match_probability_oracle(const ProtocolConfig &cfg,
                                                     Basis basis) {
    if (cfg.strategy == Strategy::multiparam) {
        throw InvalidArgument("use the multi-parameter model for multiparam");
    }
    const auto preps = enumerate_preparations(cfg);
    double total = 0.0;
    for (const auto &prep : preps) {
        const auto p = expected_bob_distribution(cfg, prep, basis,
                                                 cfg.true_phases);
        const double match = prep.signs[0] == Sign::plus ? p[0] : p[1];
        total += match / (p[0] + p[1]);
    }
    return total / static_cast<double>(preps.size());
}

/// Per-round Fisher information about phi, averaged over the revealed
/// preparations and the bases in use.
[[nodiscard]] inline double round_fisher(const ProtocolConfig &cfg,
                                         double phi) {
    if (cfg.strategy == Strategy::multiparam) {
        throw InvalidArgument("use round_fisher_matrix for multiparam");
    }
    const auto preps = enumerate_preparations(cfg);
    const auto bases = bases_used(cfg.basis);
    double total = 0.0;
    for (const auto &prep : preps) {
        for (Basis b : bases) {
            auto model = [&](double x) {
                const double ph[1] = {x};
                return expected_bob_distribution(cfg, prep, b, ph);
            };
            total += classical_fisher(model, phi);
        }
    }
    return total / static_cast<double>(preps.size() * bases.size());
}

[[nodiscard]] inline Eigen::MatrixXd
round_fisher_matrix(const ProtocolConfig &cfg, const std::vector<double> &phi) {
    const auto preps = enumerate_preparations(cfg);
    Eigen::MatrixXd total =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(phi.size()),
                              static_cast<Eigen::Index>(phi.size()));
    for (const auto &prep : preps) {
        auto model = [&](const std::vector<double> &x) {
            if (cfg.strategy == Strategy::multiparam) {
                return expected_bob_distribution(cfg, prep, Basis::standard, x);
            }
            return expected_bob_distribution(cfg, prep, cfg.basis, x);
        };
        total += fisher_matrix(model, phi);
    }
    return total / static_cast<double>(preps.size());
}

/// Eve's per-round Fisher information about phi from her pairwise-POVM
/// outcomes, once the preparations have been revealed.
[[nodiscard]] inline double eve_pairwise_fisher(int d, int n, double phi) {
    ProtocolConfig cfg;
    cfg.d = d;
    cfg.n = n;
    const Povm eve = pairwise_povm(d);
    const auto preps = enumerate_preparations(cfg);
    double total = 0.0;
    for (const auto &prep : preps) {
        auto model = [&](double x) {
            const double ph[1] = {x};
            return born_probabilities(encoded_state(cfg, prep, ph), eve);
        };
        total += classical_fisher(model, phi);
    }
    return total / static_cast<double>(preps.size());
}

// ---------------------------------------------------------------------------
// Statistics helpers
// ---------------------------------------------------------------------------

struct Interval {
    double low{0.0};
    double high{1.0};
};

/// Wilson score interval for a binomial proportion (z = 1.96 for 95%).
[[nodiscard]] inline Interval wilson_interval(std::int64_t successes,
                                              std::int64_t trials,
                                              double z = 1.959963984540054) {
    if (trials <= 0) {
        return {0.0, 1.0};
    }
    const double nt = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nt;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nt)) / (1.0 + z2 / nt);
    const double half = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) /
                        (1.0 + z2 / nt);
    // At p = 0 or 1 the exact bound is 0 or 1; rounding must not cut it off.
    const double low = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double high = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return {low, high};
}

/// p-value of the one-degree-of-freedom chi-square test for a fair split.
[[nodiscard]] inline double balance_p_value(std::int64_t a, std::int64_t b) {
    const double total = static_cast<double>(a + b);
    if (total == 0.0) {
        return 1.0;
    }
    const double diff = static_cast<double>(a - b);
    const double chi2 = diff * diff / total;
    return std::erfc(std::sqrt(0.5 * chi2));
}

/// Bob gives up the result when E1/E2 look like fair coin flips.
inline constexpr double kUniformitySignificance = 1e-3;

/// Wrap an angle to (-pi, pi].
[[nodiscard]] inline double wrap_angle(double x) {
    double r = std::remainder(x, 2.0 * M_PI);
    if (r <= -M_PI) {
        r += 2.0 * M_PI;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

struct BasisTally {
    std::int64_t match{0};
    std::int64_t mismatch{0};
    std::int64_t aborted{0};

    [[nodiscard]] std::int64_t usable() const { return match + mismatch; }
};

struct OutcomeTally {
    BasisTally standard;
    BasisTally rotated;
};

/// Sign-corrected counts: "match" means the outcome agrees with the
/// revealed sign (E1 for +, E2 for -).
[[nodiscard]] inline OutcomeTally tally_outcomes(const Transcript &t) {
    if (!t.reveal) {
        throw Error("outcomes cannot be interpreted before the preparations "
                    "are revealed");
    }
    OutcomeTally tally;
    const auto &preps = t.reveal->preparations;
    for (std::size_t i = 0; i < t.rounds.size(); ++i) {
        const auto &r = t.rounds[i];
        BasisTally &b = r.basis == Basis::rotated ? tally.rotated : tally.standard;
        if (r.bob_outcome == 2) {
            ++b.aborted;
            continue;
        }
        const bool plus = preps[i].signs.at(0) == Sign::plus;
        if ((r.bob_outcome == 0) == plus) {
            ++b.match;
        } else {
            ++b.mismatch;
        }
    }
    return tally;
}

struct EstimatorOptions {
    /// Contrast of the match probability, e.g. exp(-delta^2/2) under the
    /// Gaussian attack; used only when a single basis is available.
    double visibility{1.0};
    /// Coarse phase used to pick the branch of a rotated-only estimate.
    std::optional<double> branch_hint;
};

/**
 * Phase from match frequencies. Standard basis: arccos on [0, pi/n].
 * Rotated only: arcsin branch nearest the hint. Both: atan2 on [0, 2pi/n).
 */
[[nodiscard]] inline double
phase_from_frequencies(std::optional<double> p_standard,
                       std::optional<double> p_rotated, int n,
                       const EstimatorOptions &opts = {}) {
    if (!p_standard && !p_rotated) {
        throw Error("no usable rounds for phase estimation");
    }
    const double v = opts.visibility > 1e-12 ? opts.visibility : 1.0;
    const double nd = static_cast<double>(n);
    if (p_standard && p_rotated) {
        const double c = std::clamp(2.0 * *p_standard - 1.0, -1.0, 1.0);
        const double s = std::clamp(2.0 * *p_rotated - 1.0, -1.0, 1.0);
        double theta = std::atan2(s, c);
        if (theta < 0.0) {
            theta += 2.0 * M_PI;
        }
        return theta / nd;
    }
    if (p_standard) {
        const double c = std::clamp((2.0 * *p_standard - 1.0) / v, -1.0, 1.0);
        return std::acos(c) / nd;
    }
    const double s = std::clamp((2.0 * *p_rotated - 1.0) / v, -1.0, 1.0);
    const double first = std::asin(s);
    double theta = first;
    if (opts.branch_hint) {
        const double target = nd * *opts.branch_hint;
        const double second = M_PI - first;
        theta = std::abs(wrap_angle(first - target)) <=
                        std::abs(wrap_angle(second - target))
                    ? first
                    : second;
    }
    theta = std::fmod(theta, 2.0 * M_PI);
    if (theta < 0.0) {
        theta += 2.0 * M_PI;
    }
    return theta / nd;
}

[[nodiscard]] inline double estimate_phase(const Transcript &t, int n,
                                           const EstimatorOptions &opts = {}) {
    const auto tally = tally_outcomes(t);
    auto freq = [](const BasisTally &b) -> std::optional<double> {
        if (b.usable() == 0) {
            return std::nullopt;
        }
        return static_cast<double>(b.match) / static_cast<double>(b.usable());
    };
    return phase_from_frequencies(freq(tally.standard), freq(tally.rotated), n,
                                  opts);
}

/// Per-parameter sign-corrected counts for the multi-parameter protocol.
[[nodiscard]] inline std::vector<BasisTally>
tally_multiparam(const Transcript &t, int m) {
    if (!t.reveal) {
        throw Error("outcomes cannot be interpreted before the preparations "
                    "are revealed");
    }
    std::vector<BasisTally> tally(static_cast<std::size_t>(m));
    const auto &preps = t.reveal->preparations;
    for (std::size_t i = 0; i < t.rounds.size(); ++i) {
        const auto o = t.rounds[i].bob_outcome;
        if (o >= static_cast<std::size_t>(2 * m)) {
            continue;
        }
        const std::size_t a = o / 2;
        const bool plus_outcome = (o % 2) == 0;
        const bool plus_sign = preps[i].signs.at(a) == Sign::plus;
        if (plus_outcome == plus_sign) {
            ++tally[a].match;
        } else {
            ++tally[a].mismatch;
        }
    }
    return tally;
}

/**
 * Inverts P(match | parameter a) = 1/2 + V cos(n phi_a)/2 with
 * V = 2c/(1+c^2) times any channel contrast, on [0, pi/n].
 */
[[nodiscard]] inline std::vector<double>
estimate_multiparam(const Transcript &t, int n, int m, double coefficient,
                    double channel_visibility = 1.0) {
    const auto tally = tally_multiparam(t, m);
    const double v = 2.0 * coefficient / (1.0 + coefficient * coefficient) *
                     (channel_visibility > 1e-12 ? channel_visibility : 1.0);
    std::vector<double> out;
    for (int a = 0; a < m; ++a) {
        const auto &b = tally[static_cast<std::size_t>(a)];
        if (b.usable() == 0) {
            throw Error("no E" + std::to_string(a + 1) +
                        "+/- counts for parameter " + std::to_string(a + 1));
        }
        const double p =
            static_cast<double>(b.match) / static_cast<double>(b.usable());
        const double c = std::clamp((2.0 * p - 1.0) / v, -1.0, 1.0);
        out.push_back(std::acos(c) / n);
    }
    return out;
}

/// Contrast Bob assumes for a known attack model.
[[nodiscard]] inline double assumed_visibility(const AttackSpec &attack) {
    switch (attack.kind) {
    case AttackKind::gaussian_phase:
        return std::exp(-0.5 * attack.delta * attack.delta);
    case AttackKind::projective_resend:
        return 1.0 - attack.fraction;
    default:
        return 1.0;
    }
}

/// True when n * phi_hat lies within 0.1 rad of a multiple of pi.
[[nodiscard]] inline bool needs_rotated_rerun(double phi_hat, int n) {
    const double x = n * phi_hat;
    return std::abs(x - M_PI * std::round(x / M_PI)) <= 0.1;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class Verdict { match, mismatch, known_mismatch, singular_point };

[[nodiscard]] inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::match:
        return "match";
    case Verdict::mismatch:
        return "mismatch";
    case Verdict::known_mismatch:
        return "known-mismatch";
    case Verdict::singular_point:
        return "singular-point";
    }
    return "unknown";
}

/// Relative comparison; non-finite values give singular-point.
[[nodiscard]] inline Verdict compare_values(double computed, double published,
                                            double rel_tol, bool known) {
    if (!std::isfinite(computed) || !std::isfinite(published)) {
        return Verdict::singular_point;
    }
    const double scale = std::max(1.0, std::abs(computed));
    if (std::abs(computed - published) <= rel_tol * scale) {
        return Verdict::match;
    }
    return known ? Verdict::known_mismatch : Verdict::mismatch;
}

/// Every trial saw an abort, so no preparations were revealed.
class AllTrialsAborted : public Error {
  public:
    explicit AllTrialsAborted(int trials)
        : Error("all " + std::to_string(trials) +
                " trials aborted; no preparations were revealed") {}
};

struct ExperimentOptions {
    int trials{2};
    unsigned threads{1};
    /// Divide out the assumed channel contrast before inverting.
    bool correct_visibility{true};
    /// Rerun with the rotated measurement when the first estimate is near
    /// a multiple of pi/n.
    bool rotated_rerun{false};
    /// Coarse prior phase that picks the arcsin branch when only rotated
    /// statistics are available; any value within pi/(2n) of the truth
    /// selects the right branch.
    std::optional<double> branch_hint;
};

struct PrecisionReport {
    ProtocolConfig config;
    int trials{0};
    int completed{0};
    int reruns{0};
    std::map<std::string, std::int64_t> outcome_counts;
    OutcomeTally tally;
    std::vector<std::vector<double>> estimates;
    std::vector<double> mean_estimate;
    std::vector<double> rmse;
    std::vector<double> bias;
    std::vector<double> standard_error;
    std::vector<double> fisher;
    std::vector<double> crb;
    std::string formula_id{"-"};
    std::vector<double> paper_value;
    std::vector<Verdict> verdict;
    /// Chi-square p-value of match vs mismatch being a fair split.
    double uniformity_p_value{1.0};
    /// Standard-basis outcomes indistinguishable from coin flips; Bob
    /// discards such a result.
    bool uniform_outcomes{false};
};

/// Closed form the report is compared with, by configuration.
[[nodiscard]] inline std::pair<std::string, std::vector<double>>
published_prediction(const ProtocolConfig &cfg, Basis basis) {
    const double nu = static_cast<double>(cfg.nu);
    if (cfg.strategy == Strategy::multiparam) {
        std::vector<double> out;
        for (int a = 0; a < cfg.m; ++a) {
            out.push_back(closed_form::multiparam_precision(
                cfg.m, cfg.n, cfg.true_phases[static_cast<std::size_t>(a)], nu));
        }
        return {"multiparam_crb", out};
    }
    const double phi = cfg.true_phases[0];
    const auto &atk = cfg.attack;
    if (basis == Basis::rotated && (atk.kind == AttackKind::none ||
                                    atk.kind == AttackKind::gaussian_phase)) {
        return {"rotated_crb",
                {closed_form::rotated_gaussian_precision(cfg.n, atk.delta, nu)}};
    }
    if (basis != Basis::standard) {
        return {"-", {kNaN}};
    }
    switch (atk.kind) {
    case AttackKind::none:
        return {"clean_crb", {closed_form::heisenberg_precision(cfg.n, nu)}};
    case AttackKind::gaussian_phase:
        return {"gaussian_crb",
                {closed_form::gaussian_precision(cfg.n, phi, atk.delta, nu)}};
    case AttackKind::projective_resend:
        return {"partial_projective_crb",
                {closed_form::partial_projective_precision(
                    cfg.n, phi, nu, atk.fraction * nu)}};
    default:
        return {"-", {kNaN}};
    }
}

/// Formula ids whose published value is known to differ from the oracle.
[[nodiscard]] inline bool is_known_discrepancy(const std::string &id) {
    static const std::vector<std::string> known = {
        "rotated_crb",          "partial_projective_crb",
        "superposition_concealment", "pairwise_concealment",
        "pairwise_eve_fi",      "multiparam_prob",
        "multiparam_crb"};
    return std::find(known.begin(), known.end(), id) != known.end();
}

namespace detail {

struct TrialResult {
    bool completed{false};
    bool rerun{false};
    std::vector<double> estimate;
    std::map<std::string, std::int64_t> counts;
    OutcomeTally tally;
};

inline void add_tally(BasisTally &into, const BasisTally &from) {
    into.match += from.match;
    into.mismatch += from.mismatch;
    into.aborted += from.aborted;
}

inline TrialResult run_trial(const ProtocolConfig &base, std::size_t index,
                             const ExperimentOptions &opts) {
    TrialResult out;
    ProtocolConfig cfg = base;
    cfg.seed = derive_seed(base.seed, index);
    const Transcript t = run_protocol(cfg);
    for (const auto &r : t.rounds) {
        ++out.counts[r.bob_label];
    }
    if (!t.reveal) {
        return out;
    }
    out.completed = true;
    const double v = opts.correct_visibility ? assumed_visibility(cfg.attack)
                                             : 1.0;
    if (cfg.strategy == Strategy::multiparam) {
        const auto tm = tally_multiparam(t, cfg.m);
        for (const auto &b : tm) {
            add_tally(out.tally.standard, b);
        }
        out.estimate = estimate_multiparam(
            t, cfg.n, cfg.m, multiparam_coefficient(cfg.coefficient, cfg.m, cfg.n),
            v);
        return out;
    }
    out.tally = tally_outcomes(t);
    EstimatorOptions eo{v, opts.branch_hint};
    double phi_hat = estimate_phase(t, cfg.n, eo);
    if (opts.rotated_rerun && cfg.basis == Basis::standard &&
        needs_rotated_rerun(phi_hat, cfg.n)) {
        ProtocolConfig second = cfg;
        second.basis = Basis::rotated;
        second.seed = derive_seed(cfg.seed, 0x5e7u);
        const Transcript t2 = run_protocol(second);
        for (const auto &r : t2.rounds) {
            ++out.counts[r.bob_label];
        }
        if (!t2.reveal) {
            out.completed = false;
            return out;
        }
        out.rerun = true;
        add_tally(out.tally.rotated, tally_outcomes(t2).rotated);
        eo.branch_hint = phi_hat;
        phi_hat = estimate_phase(t2, cfg.n, eo);
    }
    out.estimate = {phi_hat};
    return out;
}

} // namespace detail

/**
 * Repeats run_protocol + estimation over `trials` derived seeds and
 * summarizes RMSE against the truth, the Fisher-information bound and the
 * published closed form.
 */
[[nodiscard]] inline PrecisionReport
run_experiment(const ProtocolConfig &cfg, const ExperimentOptions &opts) {
    cfg.validate();
    if (opts.trials < 2) {
        throw InvalidArgument("an experiment needs at least 2 trials");
    }
    std::vector<detail::TrialResult> results(
        static_cast<std::size_t>(opts.trials));
    parallel_for(results.size(), opts.threads, [&](std::size_t i) {
        results[i] = detail::run_trial(cfg, i, opts);
    });

    PrecisionReport report;
    report.config = cfg;
    report.trials = opts.trials;
    const auto params = static_cast<std::size_t>(cfg.parameter_count());
    std::vector<double> sum_err(params, 0.0);
    std::vector<double> sum_sq(params, 0.0);
    for (const auto &r : results) {
        for (const auto &[label, count] : r.counts) {
            report.outcome_counts[label] += count;
        }
        detail::add_tally(report.tally.standard, r.tally.standard);
        detail::add_tally(report.tally.rotated, r.tally.rotated);
        if (!r.completed) {
            continue;
        }
        ++report.completed;
        report.reruns += r.rerun ? 1 : 0;
        report.estimates.push_back(r.estimate);
        for (std::size_t a = 0; a < params; ++a) {
            const double err =
                wrap_angle(cfg.n * (r.estimate[a] - cfg.true_phases[a])) / cfg.n;
            sum_err[a] += err;
            sum_sq[a] += err * err;
        }
    }
    if (report.completed == 0) {
        throw AllTrialsAborted(opts.trials);
    }
    const double k = report.completed;
    for (std::size_t a = 0; a < params; ++a) {
        const double mean_err = sum_err[a] / k;
        const double var = std::max(0.0, sum_sq[a] / k - mean_err * mean_err);
        report.bias.push_back(mean_err);
        report.mean_estimate.push_back(cfg.true_phases[a] + mean_err);
        report.rmse.push_back(std::sqrt(sum_sq[a] / k));
        report.standard_error.push_back(
            report.completed > 1 ? std::sqrt(var * k / (k - 1.0)) / std::sqrt(k)
                                 : kNaN);
    }
    report.uniformity_p_value =
        balance_p_value(report.tally.standard.match, report.tally.standard.mismatch);
    report.uniform_outcomes = report.uniformity_p_value > kUniformitySignificance &&
                     cfg.strategy != Strategy::multiparam &&
                     report.tally.standard.usable() > 0;

    const Basis analysis_basis =
        (opts.rotated_rerun && report.reruns == report.completed)
            ? Basis::rotated
            : cfg.basis;
    ProtocolConfig analysis_cfg = cfg;
    analysis_cfg.basis = analysis_basis;
    try {
        if (cfg.strategy == Strategy::multiparam) {
            const Eigen::MatrixXd fim =
                round_fisher_matrix(analysis_cfg, cfg.true_phases);
            for (Eigen::Index a = 0; a < fim.rows(); ++a) {
                report.fisher.push_back(fim(a, a));
            }
            try {
                report.crb = cramer_rao(fim, static_cast<double>(cfg.nu));
            } catch (const SingularFisherError &) {
                report.crb.assign(params, kInf);
            }
        } else {
            const double fi = round_fisher(analysis_cfg, cfg.true_phases[0]);
            report.fisher = {fi};
            report.crb = {fi > 0.0 ? cramer_rao(fi, static_cast<double>(cfg.nu))
                                   : kInf};
        }
    } catch (const InvalidArgument &) {
        report.fisher.assign(params, kNaN);
        report.crb.assign(params, kNaN);
    }

    auto [id, values] = published_prediction(cfg, analysis_basis);
    report.formula_id = id;
    report.paper_value = values;
    for (std::size_t a = 0; a < params; ++a) {
        if (id == "-") {
            report.verdict.push_back(Verdict::singular_point);
            continue;
        }
        report.verdict.push_back(compare_values(report.crb[a], values[a], 1e-6,
                                                is_known_discrepancy(id)));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Detection statistics
// ---------------------------------------------------------------------------

struct DetectionReport {
    std::string claim;
    std::int64_t rounds{0};
    std::int64_t aborts{0};
    double empirical{0.0};
    Interval interval;
    double paper_value{kNaN};
    double oracle{kNaN};
};

/// Runs the protocol in survey mode and tallies non-aborting rounds.
[[nodiscard]] inline DetectionReport
measure_detection(const ProtocolConfig &cfg, std::string claim,
                  double paper_value) {
    ProtocolConfig survey = cfg;
    survey.mode = Mode::survey;
    const Transcript t = run_protocol(survey);
    DetectionReport report;
    report.claim = std::move(claim);
    report.rounds = static_cast<std::int64_t>(t.rounds.size());
    report.aborts = t.abort_count();
    const std::int64_t kept = report.rounds - report.aborts;
    report.empirical = report.rounds > 0 ? static_cast<double>(kept) /
                                               static_cast<double>(report.rounds)
                                         : kNaN;
    report.interval = wilson_interval(kept, report.rounds);
    report.paper_value = paper_value;
    report.oracle = concealment_oracle(survey);
    return report;
}

} // namespace qcm
