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

#include <algorithm>
#include <map>

#include "qcm/verification.hpp"

using namespace qcm;

namespace {

std::vector<ClaimRow> rows_for(const std::string &id, std::int64_t nu = 20000) {
    VerifyOptions opts;
    opts.claims = {id};
    opts.d_min = 3;
    opts.d_max = 5;
    opts.nu = nu;
    return verify_closed_forms(opts);
}

/// Every row matches, apart from rows at a documented singular point.
bool all_match(const std::vector<ClaimRow> &rows) {
    return !rows.empty() &&
           std::all_of(rows.begin(), rows.end(), [](const ClaimRow &r) {
               return r.verdict == Verdict::match ||
                      r.verdict == Verdict::singular_point;
           }) &&
           std::any_of(rows.begin(), rows.end(), [](const ClaimRow &r) {
               return r.verdict == Verdict::match;
           });
}

} // namespace

TEST_CASE("claim ids are unique and complete") {
    const auto &ids = claim_ids();
    CHECK(ids.size() == 18);
    auto sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("closed forms that hold are reported as match") {
    for (const char *id :
         {"qfi_scaling", "clean_crb", "parallel_equivalence", "gaussian_prob",
          "gaussian_crb", "partial_projective_prob", "random_pair_concealment",
          "uniform_concealment", "pairwise_completeness",
          "multiparam_completeness"}) {
        INFO(id);
        CHECK(all_match(rows_for(id)));
    }
}

TEST_CASE("documented discrepancies are reported as known mismatches") {
    for (const char *id : {"superposition_concealment", "pairwise_concealment",
                           "pairwise_eve_fi", "partial_projective_crb"}) {
        INFO(id);
        const auto rows = rows_for(id);
        CHECK(std::any_of(rows.begin(), rows.end(), [](const ClaimRow &r) {
            return r.verdict == Verdict::known_mismatch;
        }));
        CHECK_FALSE(has_unexpected_mismatch(rows));
    }
}

TEST_CASE("oracle values carried in the claim table") {
    for (const auto &r : rows_for("pairwise_concealment")) {
        if (r.params.find("d=3") != std::string::npos) {
            CHECK(r.oracle == Catch::Approx(0.7083333333).margin(1e-9));
        }
        if (r.params.find("d=5") != std::string::npos) {
            CHECK(r.oracle == Catch::Approx(0.5125).margin(1e-9));
        }
    }
    for (const auto &r : rows_for("superposition_concealment")) {
        if (r.params.find("d=3") != std::string::npos) {
            CHECK(r.oracle == Catch::Approx(0.75).margin(1e-9));
        }
    }
}

TEST_CASE("Monte Carlo intervals bracket the oracle for concealment claims") {
    for (const auto &r : rows_for("random_pair_concealment", 50000)) {
        INFO(r.params);
        CHECK(r.ci_low <= r.empirical);
        CHECK(r.empirical <= r.ci_high);
        CHECK(std::abs(r.empirical - r.oracle) < 0.02);
    }
}

TEST_CASE("no row of the full table is an unexpected mismatch") {
    VerifyOptions opts;
    opts.nu = 20000;
    opts.d_max = 5;
    const auto rows = verify_closed_forms(opts);
    CHECK_FALSE(has_unexpected_mismatch(rows));
    std::map<std::string, int> per_id;
    for (const auto &r : rows) {
        ++per_id[r.formula_id];
    }
    CHECK(per_id.size() == claim_ids().size());
}

TEST_CASE("claim table is independent of thread count") {
    VerifyOptions a;
    a.claims = {"gaussian_prob", "uniform_concealment"};
    a.nu = 5000;
    a.d_max = 4;
    auto b = a;
    b.threads = 3;
    const auto ra = verify_closed_forms(a);
    const auto rb = verify_closed_forms(b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].params == rb[i].params);
        CHECK(ra[i].empirical == rb[i].empirical);
    }
}

TEST_CASE("verify argument validation") {
    VerifyOptions bad;
    bad.claims = {"no_such_claim"};
    CHECK_THROWS_AS(verify_closed_forms(bad), UnknownClaim);
    VerifyOptions range;
    range.d_min = 2;
    CHECK_THROWS_AS(verify_closed_forms(range), InvalidArgument);
    range.d_min = 6;
    range.d_max = 5;
    CHECK_THROWS_AS(verify_closed_forms(range), InvalidArgument);
    VerifyOptions nu;
    nu.nu = 0;
    CHECK_THROWS_AS(verify_closed_forms(nu), InvalidArgument);
}
