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

#include <random>

#include "catch_amalgamated.hpp"

#include "qcm/encoding.hpp"
#include "qcm/protocol.hpp"

using namespace qcm;
using Catch::Approx;

TEST_CASE("sequential encoding applies exp(-+ i n phi / 2) on the pair") {
    const auto s0 = make_pair_superposition(3, {1, 2}, Sign::plus);
    const auto s = encode_sequential(s0, 0.3, 4, {1, 2});
    CHECK(std::arg(s.amplitude(1)) == Approx(-0.6));
    CHECK(std::arg(s.amplitude(2)) == Approx(0.6));
    CHECK(std::abs(s.amplitude(3)) == 0.0);
}

TEST_CASE("n = 0 encoding is the identity") {
    const auto s0 = make_pair_superposition(4, {2, 4}, Sign::minus);
    const auto s = encode_sequential(s0, 1.1, 0, {2, 4});
    CHECK((s.amps() - s0.amps()).norm() < 1e-15);
}

TEST_CASE("sequential encoding rejects support outside the pair") {
    CHECK_THROWS_AS(
        encode_sequential(make_uniform_superposition(3), 0.1, 1, {1, 2}),
        InvalidArgument);
    CHECK_THROWS_AS(encode_sequential(StateVector::basis(3, 1), 0.1, -1, {1, 2}),
                    InvalidArgument);
}

TEST_CASE("property: n sequential encodings compose as one with n phi") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int t = 0; t < 100; ++t) {
        const double phi = u(rng);
        const int n = 1 + static_cast<int>(rng() % 8);
        const LevelPair pair{1, 3};
        auto s = make_pair_superposition(4, pair, Sign::plus);
        const auto direct = encode_sequential(s, phi, n, pair);
        for (int i = 0; i < n; ++i) {
            s = encode_sequential(s, phi, 1, pair);
        }
        CHECK((s.amps() - direct.amps()).norm() < 1e-12);
    }
}

TEST_CASE("parallel branches carry the n-fold phase") {
    const auto e = encode_parallel(3, 0.2, {1, 2}, Sign::minus);
    CHECK(std::arg(e.branch_amps[0]) == Approx(-0.3));
    CHECK(std::arg(-e.branch_amps[1]) == Approx(0.3));
    CHECK(e.branch_label(0) == "|1>^3");
    CHECK(e.branch_label(1) == "|2>^3");
    CHECK(e.as_state().dim() == 2);
    CHECK_THROWS_AS(encode_parallel(0, 0.2, {1, 2}, Sign::plus), InvalidArgument);
}

TEST_CASE("property: parallel and sequential give identical Bob statistics") {
    for (int n = 1; n <= 8; ++n) {
        for (int t = 0; t < 64; ++t) {
            const double phi = 2.0 * M_PI * t / 64.0;
            for (Sign sign : {Sign::plus, Sign::minus}) {
                for (Basis b : {Basis::standard, Basis::rotated}) {
                    const auto seq = encode_sequential(
                        make_pair_superposition(3, {1, 2}, sign), phi, n, {1, 2});
                    const auto par = encode_parallel(n, phi, {1, 2}, sign);
                    const auto ps = born_probabilities(
                        seq, build_bob_povm({Strategy::sequential, b, {1, 2}, n,
                                             MultiparamCoefficient::inverse_sqrt_m},
                                            3));
                    const auto pp = born_probabilities(
                        par.as_state(),
                        build_bob_povm({Strategy::parallel, b, {1, 2}, n,
                                        MultiparamCoefficient::inverse_sqrt_m},
                                       2));
                    for (int i = 0; i < 3; ++i) {
                        CHECK(std::abs(ps[i] - pp[i]) < 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("multi-parameter encoding") {
    const std::vector<int> levels{1, 2, 3};
    const std::vector<Sign> signs{Sign::plus, Sign::minus};
    const std::vector<double> phases{0.3, 0.5};
    const auto s = encode_multiparam(4, levels, signs, phases, 2);
    CHECK(std::abs(s.amplitude(1)) == Approx(1.0 / std::sqrt(3.0)));
    CHECK(std::arg(s.amplitude(2)) == Approx(0.6));
    CHECK(std::arg(-s.amplitude(3)) == Approx(1.0));
    CHECK(std::abs(s.amplitude(4)) == 0.0);
}

TEST_CASE("multi-parameter level validation") {
    const std::vector<int> ok{1, 2, 3};
    CHECK_THROWS_AS(validate_multiparam_levels(3, ok), DimensionError);
    CHECK_NOTHROW(validate_multiparam_levels(4, ok));
    const std::vector<int> dup{1, 2, 2};
    CHECK_THROWS_AS(validate_multiparam_levels(5, dup), InvalidArgument);
    const std::vector<int> out{1, 2, 9};
    CHECK_THROWS_AS(validate_multiparam_levels(5, out), InvalidArgument);
    const std::vector<int> one{1};
    CHECK_THROWS_AS(validate_multiparam_levels(5, one), InvalidArgument);
}
