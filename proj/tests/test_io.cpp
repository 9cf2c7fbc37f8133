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

#include <cmath>
#include <sstream>

#include "qcm/io.hpp"
#include "qcm/studies.hpp"

using namespace qcm;

namespace {

std::string error_of(const std::string &json) {
    try {
        (void)parse_run_config(json);
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("format_exact round-trips doubles") {
    for (double x : {0.1, 1.0 / 3.0, M_PI, 1e-300, -2.5e17, 0.0,
                     std::nextafter(1.0, 2.0)}) {
        CHECK(parse_number(format_exact(x)) == x);
    }
    CHECK(format_exact(kInf) == "inf");
    CHECK(format_exact(-kInf) == "-inf");
    CHECK(std::isnan(parse_number(format_exact(kNaN))));
    CHECK(format_number(0.25) == "0.25");
    CHECK_THROWS_AS(parse_number("1.5x"), FormatError);
    CHECK_THROWS_AS(parse_integer("3.5"), FormatError);
}

TEST_CASE("split and join") {
    CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(join(std::vector<int>{1, 2, 3}, ';',
               [](int x) { return std::to_string(x); }) == "1;2;3");
}

TEST_CASE("config parsing: defaults and values") {
    const auto run = parse_run_config(R"({"version": 1, "d": 5, "n": 3,
        "nu": 500, "phases": [0.25], "attack": {"kind": "gaussian_phase",
        "delta": 0.4}, "basis": "both", "trials": 7, "seed": 42})");
    CHECK(run.protocol.d == 5);
    CHECK(run.protocol.n == 3);
    CHECK(run.protocol.nu == 500);
    CHECK(run.protocol.true_phases == std::vector<double>{0.25});
    CHECK(run.protocol.attack.kind == AttackKind::gaussian_phase);
    CHECK(run.protocol.attack.delta == 0.4);
    CHECK(run.protocol.basis == Basis::both);
    CHECK(run.trials == 7);
    CHECK(run.protocol.seed == 42);
    CHECK_FALSE(run.branch_hint.has_value());
    CHECK(parse_run_config(R"({"version": 1, "branch_hint": 1.1})").branch_hint ==
          1.1);
    // the JSON form parses back to the same configuration
    const auto again = parse_run_config(config_to_json(run).dump());
    CHECK(config_to_json(again) == config_to_json(run));
}

TEST_CASE("config errors name the offending key") {
    CHECK(error_of(R"({"d": 3})").find("'version'") != std::string::npos);
    CHECK(error_of(R"({"version": 2})").find("'version'") != std::string::npos);
    CHECK(error_of(R"({"version": 1, "dim": 3})").find("'dim'") !=
          std::string::npos);
    CHECK(error_of(R"({"version": 1, "attack": {"kind": "none", "foo": 1}})")
              .find("'attack.foo'") != std::string::npos);
    CHECK(error_of(R"({"version": 1, "d": "three"})").find("'d'") !=
          std::string::npos);
    CHECK(error_of(R"({"version": 1, "strategy": "magic"})").find("'strategy'") !=
          std::string::npos);
    CHECK(error_of(R"({"version": 1, "trials": 1})").find("'trials'") !=
          std::string::npos);
    CHECK_FALSE(error_of(R"({"version": 1, "d": 2})").empty());
    CHECK_FALSE(error_of("not json").empty());
}

TEST_CASE("transcript write/read round trip") {
    ProtocolConfig cfg;
    cfg.d = 4;
    cfg.n = 2;
    cfg.nu = 60;
    cfg.true_phases = {0.3};
    cfg.attack.kind = AttackKind::resend_random_pair;
    cfg.mode = Mode::survey;
    cfg.basis = Basis::both;
    cfg.seed = 17;
    const auto t = run_protocol(cfg);
    std::stringstream first;
    write_transcript(first, t);
    const auto back = read_transcript(first);
    std::stringstream second;
    write_transcript(second, back);
    CHECK(first.str() == second.str());
    REQUIRE(back.rounds.size() == t.rounds.size());
    CHECK(back.abort_count() == t.abort_count());
    // aborted runs are never revealed
    CHECK(back.reveal.has_value() == t.reveal.has_value());

    cfg.attack.kind = AttackKind::none;
    const auto clean = run_protocol(cfg);
    std::stringstream s;
    write_transcript(s, clean);
    const auto clean_back = read_transcript(s);
    REQUIRE(clean_back.reveal.has_value());
    CHECK(estimate_phase(clean_back, 2) == estimate_phase(clean, 2));
}

TEST_CASE("transcript reader rejects malformed input") {
    std::stringstream bad("# format=qcm-transcript-1\nround,levels\n1,2\n");
    CHECK_THROWS_AS(read_transcript(bad), FormatError);
}

TEST_CASE("claims table round trip") {
    std::vector<ClaimRow> rows = {
        {"clean_crb", "d=3 n=2", 0.0025, 0.00251, 0.0024, 0.0026, 0.0025,
         Verdict::match},
        {"rotated_crb", "d=4 n=1", 0.1, kNaN, kNaN, kNaN, kInf,
         Verdict::singular_point},
        {"pairwise_eve_fi", "d=5", 0.138461, kNaN, kNaN, kNaN, 0.2,
         Verdict::known_mismatch},
    };
    std::stringstream s;
    write_claims_csv(s, rows);
    const auto back = read_claims_csv(s);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].formula_id == rows[i].formula_id);
        CHECK(back[i].params == rows[i].params);
        CHECK(back[i].oracle == rows[i].oracle);
        CHECK(back[i].verdict == rows[i].verdict);
        CHECK((back[i].paper_value == rows[i].paper_value ||
               (std::isnan(back[i].paper_value) && std::isnan(rows[i].paper_value))));
    }
}

TEST_CASE("fisher summary for a clean configuration") {
    ProtocolConfig cfg;
    cfg.d = 3;
    cfg.n = 4;
    cfg.nu = 10000;
    cfg.true_phases = {M_PI / 8 + 0.1};
    const auto rows = fisher_summary(cfg);
    auto value = [&](const std::string &q) {
        for (const auto &r : rows) {
            if (r.quantity == q) {
                return r.value;
            }
        }
        return kNaN;
    };
    CHECK(value("qfi") == Catch::Approx(16.0).epsilon(1e-5));
    CHECK(value("fisher") == Catch::Approx(16.0).epsilon(1e-5));
    CHECK(value("crb") == Catch::Approx(0.0025).epsilon(1e-5));
    CHECK(value("paper_value") == Catch::Approx(0.0025).epsilon(1e-12));
}

TEST_CASE("sweep over n halves the bound per doubling") {
    RunConfig run;
    run.protocol.d = 3;
    run.protocol.nu = 2000;
    run.protocol.true_phases = {0.1};
    run.trials = 2;
    const auto result = run_sweep(run, SweepAxis::n, {1, 2, 4}, 1);
    CHECK(result.points.size() == 3);
    CHECK(result.flags.crb_halves_per_doubling);
    CHECK_THROWS_AS(run_sweep(run, SweepAxis::n, {}, 1), InvalidArgument);
    CHECK_THROWS_AS(run_sweep(run, SweepAxis::n, {1.5}, 1), InvalidArgument);
    CHECK_THROWS_AS(sweep_axis_from_string("theta"), InvalidArgument);
}

TEST_CASE("sweep over the intercepted fraction") {
    RunConfig run;
    run.protocol.d = 3;
    run.protocol.n = 2;
    run.protocol.nu = 3000;
    run.protocol.true_phases = {0.35};
    run.protocol.attack.kind = AttackKind::projective_resend;
    run.protocol.mode = Mode::survey;
    run.trials = 20;
    const auto result = run_sweep(run, SweepAxis::fraction, {0.0, 0.5, 1.0}, 1);
    CHECK(result.flags.crb_nondecreasing);
    CHECK(result.flags.fisher_zero_at_full_fraction);
    std::stringstream s;
    write_sweep_csv(s, result);
    std::string header;
    std::getline(s, header);
    CHECK(header == kSweepColumns);
}
