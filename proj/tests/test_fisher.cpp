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
#include "qcm/fisher.hpp"

using namespace qcm;
using Catch::Approx;

namespace {

std::vector<double> coin(double x) {
    const double p = 0.5 * (1.0 + std::cos(x));
    return {p, 1.0 - p};
}

} // namespace

TEST_CASE("classical FI of the cosine coin is 1") {
    // p = (1+cos x)/2 gives FI = sin^2/(sin^2) = 1 away from the edges.
    for (double x : {0.3, 0.9, 1.5, 2.4}) {
        CHECK(classical_fisher(coin, x) == Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("QFI of the sequential probe is n^2") {
    for (int n : {1, 2, 4, 8}) {
        auto state = [n](double x) {
            return encode_sequential(make_pair_superposition(3, {1, 2}, Sign::plus),
                                     x, n, {1, 2});
        };
        CHECK(qfi_pure(state, 0.3) == Approx(n * n).epsilon(1e-5));
    }
}

TEST_CASE("Cramer-Rao: 1/(n sqrt(nu))") {
    CHECK(cramer_rao(16.0, 1e4) == Approx(0.0025).epsilon(1e-15));
    CHECK_THROWS_AS(cramer_rao(0.0, 1e4), SingularFisherError);
    CHECK_THROWS_AS(cramer_rao(1.0, 0.0), InvalidArgument);
}

TEST_CASE("property: FI estimate converges as the step shrinks") {
    auto model = [](double x) {
        const double p = 0.5 * (1.0 + 0.7 * std::cos(3.0 * x));
        return std::vector<double>{p, 1.0 - p};
    };
    const double x = 0.4;
    const double s = std::sin(3 * x), c = std::cos(3 * x);
    const double exact = 9.0 * 0.49 * s * s / (1.0 - 0.49 * c * c);
    double prev_err = 1.0;
    for (double h : {1e-3, 3e-4, 1e-4}) {
        const double err = std::abs(classical_fisher(model, x, h) - exact);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-6);
}

TEST_CASE("property: QFI bounds classical FI for random measurements") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
    for (int t = 0; t < 50; ++t) {
        const double x = u(rng);
        const double alpha = u(rng);
        const int n = 1 + static_cast<int>(rng() % 4);
        auto state = [n](double y) {
            return encode_sequential(make_pair_superposition(3, {1, 3}, Sign::plus),
                                     y, n, {1, 3});
        };
        auto model = [&](double y) {
            const auto s = state(y);
            const cplx a = s.amplitude(1), b = s.amplitude(3);
            const cplx proj = (a + std::polar(1.0, alpha) * b) * M_SQRT1_2;
            const double p = std::norm(proj);
            return std::vector<double>{p, 1.0 - p};
        };
        CHECK(classical_fisher(model, x) <= qfi_pure(state, x) + 1e-6);
    }
}

TEST_CASE("FI input validation") {
    CHECK_THROWS_AS(classical_fisher(coin, 0.3, 0.0), InvalidArgument);
    CHECK_THROWS_AS(classical_fisher(coin, 0.3, 0.1), InvalidArgument);
    auto bad = [](double) { return std::vector<double>{0.7, 0.7}; };
    CHECK_THROWS_AS(classical_fisher(bad, 0.3), Error);
    auto neg = [](double) { return std::vector<double>{1.2, -0.2}; };
    CHECK_THROWS_AS(classical_fisher(neg, 0.3), Error);
}

TEST_CASE("Fisher matrix of independent coins is diagonal") {
    auto model = [](const std::vector<double> &x) {
        const double p = 0.5 * (1 + std::cos(x[0]));
        const double q = 0.5 * (1 + std::cos(2 * x[1]));
        return std::vector<double>{p * q, p * (1 - q), (1 - p) * q,
                                   (1 - p) * (1 - q)};
    };
    const auto f = fisher_matrix(model, {0.4, 0.7});
    CHECK(f(0, 0) == Approx(1.0).epsilon(1e-7));
    CHECK(f(1, 1) == Approx(4.0).epsilon(1e-7));
    CHECK(std::abs(f(0, 1)) < 1e-7);
    const auto crb = cramer_rao(f, 100.0);
    CHECK(crb[0] == Approx(0.1).epsilon(1e-6));
    CHECK(crb[1] == Approx(0.05).epsilon(1e-6));
}

TEST_CASE("singular Fisher matrix names the null direction") {
    auto model = [](const std::vector<double> &x) {
        const double p = 0.5 * (1 + std::cos(x[0] + x[1]));
        return std::vector<double>{p, 1 - p};
    };
    const auto f = fisher_matrix(model, {0.4, 0.3});
    try {
        (void)cramer_rao(f, 10.0);
        FAIL("expected SingularFisherError");
    } catch (const SingularFisherError &e) {
        const auto &v = e.null_direction();
        CHECK(std::abs(std::abs(v(0)) - M_SQRT1_2) < 1e-6);
        CHECK(std::abs(v(0) + v(1)) < 1e-6);
    }
}
