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

#include "catch_amalgamated.hpp"

#include "qcm/analysis.hpp"

using namespace qcm;
using Catch::Approx;

namespace {

ProtocolConfig single(int d, int n, double phi, std::int64_t nu,
                      AttackKind kind = AttackKind::none) {
    ProtocolConfig cfg;
    cfg.d = d;
    cfg.n = n;
    cfg.nu = nu;
    cfg.true_phases = {phi};
    cfg.attack.kind = kind;
    cfg.mode = Mode::survey;
    return cfg;
}

Transcript fake_transcript(const std::vector<std::pair<Sign, std::size_t>> &rows,
                           Basis basis = Basis::standard) {
    Transcript t;
    FinalReveal reveal;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        RoundRecord r;
        r.round = static_cast<std::int64_t>(i);
        r.prepared = {{1, 2}, {rows[i].first}};
        r.basis = basis;
        r.bob_outcome = rows[i].second;
        t.rounds.push_back(r);
        reveal.preparations.push_back(r.prepared);
    }
    t.reveal = reveal;
    return t;
}

// Hand-derived per-round quantities (frozen oracles).
double gaussian_standard_fi(int n, double phi, double delta) {
    const double v2 = std::exp(-delta * delta);
    const double s = std::sin(n * phi), c = std::cos(n * phi);
    return n * n * s * s * v2 / (1.0 - c * c * v2);
}

double gaussian_rotated_fi(int n, double phi, double delta) {
    const double v2 = std::exp(-delta * delta);
    const double s = std::sin(n * phi), c = std::cos(n * phi);
    return n * n * c * c * v2 / (1.0 - s * s * v2);
}

double eve_pairwise_fi(int d, int n, double phi) {
    const double c2 = std::pow(std::cos(0.5 * n * phi), 2);
    const double s2 = 1.0 - c2;
    const double sn2 = std::pow(std::sin(n * phi), 2);
    const double plus = n * n * s2 / (d - 1.0) +
                        n * n * sn2 / (2.0 * (d - 1.0) * (d - 2.0 * c2));
    const double minus = n * n * c2 / (d - 1.0) +
                         n * n * sn2 / (2.0 * (d - 1.0) * (d - 2.0 * s2));
    return 0.5 * (plus + minus);
}

} // namespace

TEST_CASE("estimate_phase: all E1 in the standard basis gives phi = 0") {
    const auto t = fake_transcript({{Sign::plus, 0}, {Sign::minus, 1},
                                    {Sign::plus, 0}});
    CHECK(estimate_phase(t, 3) == Approx(0.0).margin(1e-12));
}

TEST_CASE("estimate_phase: p_std = 0.5 and p_rot = 1 with n = 2 give pi/4") {
    CHECK(phase_from_frequencies(0.5, 1.0, 2) == Approx(M_PI / 4));
    // from a transcript with both bases
    auto t = fake_transcript({{Sign::plus, 0}, {Sign::plus, 1}});
    const auto r = fake_transcript({{Sign::plus, 0}, {Sign::minus, 1}},
                                   Basis::rotated);
    for (const auto &rr : r.rounds) {
        t.rounds.push_back(rr);
        t.reveal->preparations.push_back(rr.prepared);
    }
    CHECK(estimate_phase(t, 2) == Approx(M_PI / 4));
}

TEST_CASE("estimate_phase errors") {
    Transcript t = fake_transcript({{Sign::plus, 0}});
    t.reveal.reset();
    CHECK_THROWS_AS(estimate_phase(t, 1), Error);
    const auto only_abort = fake_transcript({{Sign::plus, 2}});
    CHECK_THROWS_AS(estimate_phase(only_abort, 1), Error);
}

TEST_CASE("visibility correction and clamping") {
    // p = (1 + V cos(theta))/2 inverts to theta with the known V
    const double v = std::exp(-0.32);
    const double p = 0.5 * (1 + v * std::cos(1.2));
    CHECK(phase_from_frequencies(p, std::nullopt, 3, {v, std::nullopt}) ==
          Approx(0.4));
    CHECK(phase_from_frequencies(1.0, std::nullopt, 1, {0.5, std::nullopt}) ==
          Approx(0.0));
}

TEST_CASE("rotated-only estimate picks the arcsin branch nearest the hint") {
    const double theta = M_PI - 0.2; // n phi near pi
    const double p = 0.5 * (1 + std::sin(theta));
    EstimatorOptions near_pi{1.0, (M_PI - 0.1) / 2.0};
    CHECK(phase_from_frequencies(std::nullopt, p, 2, near_pi) ==
          Approx(theta / 2.0));
    EstimatorOptions near_zero{1.0, 0.05};
    CHECK(phase_from_frequencies(std::nullopt, p, 2, near_zero) ==
          Approx(0.1));
}

TEST_CASE("rotated rerun trigger: within 0.1/n of a multiple of pi/n") {
    CHECK(needs_rotated_rerun(M_PI / 3 + 0.03, 3));
    CHECK(needs_rotated_rerun(0.01, 3));
    CHECK_FALSE(needs_rotated_rerun(M_PI / 6, 3));
    CHECK_FALSE(needs_rotated_rerun(0.06, 2));
}

TEST_CASE("oracle: match probability under the attacks") {
    auto cfg = single(3, 3, 0.4, 1, AttackKind::gaussian_phase);
    cfg.attack.delta = 0.8;
    CHECK(match_probability_oracle(cfg, Basis::standard) ==
          Approx(0.5 * (1 + std::cos(1.2) * std::exp(-0.32))).margin(1e-9));
    auto g1 = single(4, 2, 0.0, 1, AttackKind::gaussian_phase);
    g1.attack.delta = 1.0;
    CHECK(match_probability_oracle(g1, Basis::standard) ==
          Approx(0.80327).margin(1e-5));
    for (double f : {0.0, 0.2, 0.5, 1.0}) {
        auto p = single(4, 2, 0.35, 1, AttackKind::projective_resend);
        p.attack.fraction = f;
        CHECK(match_probability_oracle(p, Basis::standard) ==
              Approx(0.5 * (1 + (1 - f) * std::cos(0.7))).margin(1e-12));
    }
}

TEST_CASE("oracle: concealment values") {
    for (int d = 3; d <= 8; ++d) {
        CHECK(concealment_oracle(single(d, 1, 0.7, 1,
                                        AttackKind::resend_random_pair)) ==
              Approx(2.0 / d).margin(1e-12));
        CHECK(concealment_oracle(single(d, 1, 0.7, 1,
                                        AttackKind::resend_uniform)) ==
              Approx(2.0 / d).margin(1e-12));
        CHECK(concealment_oracle(single(d, 1, 0.7, 1,
                                        AttackKind::superposition_resend)) ==
              Approx(d / (2.0 * (d - 1))).margin(1e-12));
        CHECK(concealment_oracle(single(d, 1, 0.7, 1,
                                        AttackKind::pairwise_povm_resend)) ==
              Approx(d / (4.0 * (d - 1)) + 1.0 / d).margin(1e-12));
        CHECK(concealment_oracle(single(d, 1, 0.7, 1,
                                        AttackKind::projective_resend)) ==
              Approx(1.0).margin(1e-12));
    }
    // frozen spot values
    CHECK(concealment_oracle(single(5, 2, 0.1, 1, AttackKind::resend_uniform)) ==
          Approx(0.4).margin(1e-12));
    CHECK(concealment_oracle(single(3, 1, 0.7, 1,
                                    AttackKind::superposition_resend)) ==
          Approx(0.75).margin(1e-12));
    CHECK(concealment_oracle(single(3, 1, 0.7, 1,
                                    AttackKind::pairwise_povm_resend)) ==
          Approx(0.7083333333).margin(1e-9));
}

TEST_CASE("oracle: per-round Fisher information") {
    // clean: n^2, any strategy, either basis
    for (Strategy s : {Strategy::sequential, Strategy::parallel}) {
        auto cfg = single(4, 4, M_PI / 8 + 0.05, 1);
        cfg.strategy = s;
        CHECK(round_fisher(cfg, cfg.true_phases[0]) == Approx(16.0).epsilon(1e-6));
    }
    for (double delta : {0.5, 0.8}) {
        auto cfg = single(3, 3, 0.4, 1, AttackKind::gaussian_phase);
        cfg.attack.delta = delta;
        CHECK(round_fisher(cfg, 0.4) ==
              Approx(gaussian_standard_fi(3, 0.4, delta)).epsilon(1e-6));
        cfg.basis = Basis::rotated;
        CHECK(round_fisher(cfg, 0.4) ==
              Approx(gaussian_rotated_fi(3, 0.4, delta)).epsilon(1e-6));
        // at n phi = pi the rotated basis gives 1/CRB^2 = nu n^2 e^{-delta^2}
        CHECK(round_fisher(cfg, M_PI / 3) ==
              Approx(9.0 * std::exp(-delta * delta)).epsilon(1e-6));
        cfg.basis = Basis::standard;
        CHECK(round_fisher(cfg, M_PI / 3) < 1e-8);
    }
    auto proj = single(3, 2, 0.35, 1, AttackKind::projective_resend);
    proj.attack.fraction = 0.2;
    const double k = 0.8, s = std::sin(0.7), c = std::cos(0.7);
    CHECK(round_fisher(proj, 0.35) ==
          Approx(4 * k * k * s * s / (1 - k * k * c * c)).epsilon(1e-6));
    proj.attack.fraction = 1.0;
    CHECK(round_fisher(proj, 0.35) < 1e-8);
}

TEST_CASE("oracle: Eve's pairwise-POVM Fisher information") {
    for (int d : {3, 5, 8}) {
        for (double phi : {0.3, 0.7, 1.3}) {
            CHECK(eve_pairwise_fisher(d, 1, phi) ==
                  Approx(eve_pairwise_fi(d, 1, phi)).epsilon(1e-6));
        }
    }
    CHECK(eve_pairwise_fisher(3, 1, 0.7) == Approx(0.310763).epsilon(1e-5));
    double prev = 1e9;
    for (int d = 3; d <= 12; ++d) {
        const double f = eve_pairwise_fisher(d, 2, 0.4);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("oracle: multi-parameter probabilities and bound") {
    ProtocolConfig cfg;
    cfg.strategy = Strategy::multiparam;
    cfg.m = 2;
    cfg.d = 4;
    cfg.n = 2;
    cfg.true_phases = {0.3, 0.5};
    const Preparation prep{{1, 2, 3}, {Sign::plus, Sign::minus}};
    const auto p = expected_bob_distribution(cfg, prep, Basis::standard,
                                             cfg.true_phases);
    const double a = (0.5 + 1.0) / 6.0, b = (2.0 / std::sqrt(2.0)) / 6.0;
    CHECK(p[0] == Approx(a + b * std::cos(0.6)).margin(1e-12));
    CHECK(p[1] == Approx(a - b * std::cos(0.6)).margin(1e-12));
    CHECK(p[2] == Approx(a - b * std::cos(1.0)).margin(1e-12));
    CHECK(p[3] == Approx(a + b * std::cos(1.0)).margin(1e-12));
    CHECK(p[4] == Approx(0.0).margin(1e-12));

    const auto fim = round_fisher_matrix(cfg, cfg.true_phases);
    CHECK(std::abs(fim(0, 1)) < 1e-8);
    const double nu = 1e5;
    const auto crb = cramer_rao(fim, nu);
    for (int i = 0; i < 2; ++i) {
        const double c = std::cos(2 * cfg.true_phases[i]);
        const double s = std::sin(2 * cfg.true_phases[i]);
        const double expected =
            std::sqrt((9.0 - 8.0 * c * c) / (4.0 * nu * 4.0 * s * s));
        CHECK(crb[i] == Approx(expected).epsilon(1e-6));
    }
    CHECK(crb[0] == Approx(0.0026383).epsilon(1e-4));
}

TEST_CASE("Wilson interval contains the point estimate") {
    for (auto [k, n] : std::vector<std::pair<int, int>>{{0, 10}, {5, 10},
                                                        {10, 10}, {37, 1000}}) {
        const auto ci = wilson_interval(k, n);
        const double p = double(k) / n;
        CHECK(ci.low <= p);
        CHECK(ci.high >= p);
        CHECK(ci.low >= 0.0);
        CHECK(ci.high <= 1.0);
    }
}

TEST_CASE("property: Wilson intervals cover the oracle in >= 93% of 100 runs") {
    auto cfg = single(4, 1, 0.7, 2000, AttackKind::resend_random_pair);
    const double oracle = concealment_oracle(cfg);
    int covered = 0;
    for (int rep = 0; rep < 100; ++rep) {
        cfg.seed = derive_seed(77, rep);
        const auto det = measure_detection(cfg, "random_pair_concealment", 0.5);
        covered += (det.interval.low <= oracle && oracle <= det.interval.high);
    }
    CHECK(covered >= 93);
}

TEST_CASE("run_experiment: clean RMSE tracks the bound") {
    auto cfg = single(3, 2, 0.4, 20000);
    cfg.seed = 1;
    ExperimentOptions opts;
    opts.trials = 100;
    const auto r = run_experiment(cfg, opts);
    CHECK(r.completed == 100);
    CHECK(r.formula_id == "clean_crb");
    CHECK(r.crb[0] == Approx(1.0 / (2.0 * std::sqrt(20000.0))).epsilon(1e-6));
    CHECK(r.verdict[0] == Verdict::match);
    CHECK(r.rmse[0] == Approx(r.crb[0]).epsilon(0.25));
    CHECK(r.rmse[0] >= 0.0);
    CHECK_THROWS_AS(run_experiment(cfg, {1, 1, true, false, std::nullopt}), InvalidArgument);
}

TEST_CASE("property: estimator consistency, RMSE shrinks as 1/sqrt(nu)") {
    ExperimentOptions opts;
    opts.trials = 100;
    auto small = single(3, 2, 0.4, 1000);
    small.seed = 5;
    auto large = small;
    large.nu = 100000;
    const double r_small = run_experiment(small, opts).rmse[0];
    const double r_large = run_experiment(large, opts).rmse[0];
    CHECK(r_large < r_small * 0.1 * 1.3);
}

TEST_CASE("property: Gaussian attack estimate is unbiased with known visibility") {
    auto cfg = single(3, 3, 0.4, 20000, AttackKind::gaussian_phase);
    cfg.attack.delta = 0.8;
    cfg.seed = 9;
    ExperimentOptions opts;
    opts.trials = 100;
    const auto r = run_experiment(cfg, opts);
    CHECK(std::abs(r.bias[0]) < 3.0 * r.rmse[0] / std::sqrt(100.0));
    CHECK(r.formula_id == "gaussian_crb");
    CHECK(r.verdict[0] == Verdict::match);
}

TEST_CASE("run_experiment: all trials aborted is an error") {
    auto cfg = single(4, 1, 0.3, 200, AttackKind::resend_uniform);
    cfg.mode = Mode::strict;
    CHECK_THROWS_AS(run_experiment(cfg, {4, 1, true, false, std::nullopt}), AllTrialsAborted);
}

TEST_CASE("full projective interception is flagged as coin flips") {
    auto cfg = single(3, 3, 0.2, 20000, AttackKind::projective_resend);
    cfg.attack.fraction = 1.0;
    ExperimentOptions opts;
    opts.trials = 4;
    const auto r = run_experiment(cfg, opts);
    CHECK(r.uniform_outcomes);
    CHECK(r.outcome_counts.count("E3") == 0);
    CHECK(r.fisher[0] < 1e-8);
    CHECK(std::isinf(r.crb[0]));
    CHECK(r.verdict[0] == Verdict::singular_point);
}

TEST_CASE("run_experiment is independent of the thread count") {
    auto cfg = single(3, 2, 0.4, 3000, AttackKind::gaussian_phase);
    cfg.attack.delta = 0.5;
    cfg.seed = 3;
    ExperimentOptions one{8, 1, true, false, std::nullopt};
    ExperimentOptions four{8, 4, true, false, std::nullopt};
    const auto a = run_experiment(cfg, one);
    const auto b = run_experiment(cfg, four);
    CHECK(a.rmse[0] == b.rmse[0]);
    CHECK(a.estimates == b.estimates);
    CHECK(a.outcome_counts == b.outcome_counts);
}

TEST_CASE("multi-parameter estimates: m = 1 matches the single-parameter estimator") {
    ProtocolConfig mp;
    mp.strategy = Strategy::multiparam;
    mp.m = 1;
    mp.d = 3;
    mp.n = 1;
    mp.nu = 20000;
    mp.true_phases = {0.6};
    mp.seed = 4;
    const auto t = run_protocol(mp);
    const auto est = estimate_multiparam(t, 1, 1, 1.0, 1.0);
    CHECK(est[0] == Approx(0.6).margin(0.03));
    mp.true_phases = {0.0};
    const auto t0 = run_protocol(mp);
    CHECK(estimate_multiparam(t0, 1, 1, 1.0, 1.0)[0] == Approx(0.0).margin(0.03));
}

TEST_CASE("verdicts") {
    CHECK(compare_values(1.0, 1.0 + 1e-9, 1e-6, false) == Verdict::match);
    CHECK(compare_values(1.0, 1.1, 1e-6, false) == Verdict::mismatch);
    CHECK(compare_values(1.0, 1.1, 1e-6, true) == Verdict::known_mismatch);
    CHECK(compare_values(kInf, 1.0, 1e-6, false) == Verdict::singular_point);
    CHECK(to_string(Verdict::known_mismatch) == "known-mismatch");
    CHECK(to_string(Verdict::singular_point) == "singular-point");
}
