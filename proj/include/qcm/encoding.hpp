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
 * Phase-encoding maps for the sequential, parallel-entangled and
 * multi-parameter strategies.
 */
#pragma once

#include <array>
#include <string>
#include <vector>

#include "qudit_state.hpp"

namespace qcm {

enum class Strategy { sequential, parallel, multiparam };

[[nodiscard]] inline std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::sequential:
        return "sequential";
    case Strategy::parallel:
        return "parallel";
    case Strategy::multiparam:
        return "multiparam";
    }
    return "unknown";
}

/**
 * Applies U(phi)^n on the (j,k) subspace: amplitude at j picks up
 * exp(-i n phi / 2), amplitude at k picks up exp(+i n phi / 2).
 */
[[nodiscard]] inline StateVector encode_sequential(const StateVector &state,
                                                   double phi, int n,
                                                   LevelPair pair) {
    if (n < 0) {
        throw InvalidArgument("encoding count must be non-negative");
    }
    validate_pair(state.dim(), pair);
    Amplitudes amps = state.amps();
    for (int level = 1; level <= state.dim(); ++level) {
        if (level != pair.j && level != pair.k &&
            std::abs(amps(level - 1)) > kNormTolerance) {
            throw InvalidArgument("state has support on level " +
                                  std::to_string(level) +
                                  " outside the encoding pair");
        }
    }
    const double half = 0.5 * static_cast<double>(n) * phi;
    amps(pair.j - 1) *= std::polar(1.0, -half);
    amps(pair.k - 1) *= std::polar(1.0, half);
    return StateVector(std::move(amps));
}

/**
 * n-probe entangled state kept in the two-dimensional span of
 * |j>^{(x)n} and |k>^{(x)n}.
 */
struct EffectiveState {
    std::array<cplx, 2> branch_amps{};
    LevelPair pair{};
    int probes{1};

    /// The branch amplitudes as a dim-2 state; level 1 is |j>^n, 2 is |k>^n.
    [[nodiscard]] StateVector as_state() const {
        Amplitudes amps(2);
        amps << branch_amps[0], branch_amps[1];
        return StateVector(std::move(amps));
    }

    [[nodiscard]] std::string branch_label(int branch) const {
        const int level = branch == 0 ? pair.j : pair.k;
        return "|" + std::to_string(level) + ">^" + std::to_string(probes);
    }
};

[[nodiscard]] inline EffectiveState encode_parallel(int probes, double phi,
                                                    LevelPair pair, Sign sign) {
    if (probes < 1) {
        throw InvalidArgument("parallel strategy needs at least one probe");
    }
    if (pair.j < 1 || pair.j >= pair.k) {
        throw InvalidArgument("parallel branch levels must satisfy 1 <= j < k");
    }
    const double half = 0.5 * static_cast<double>(probes) * phi;
    EffectiveState out;
    out.branch_amps[0] = M_SQRT1_2 * std::polar(1.0, -half);
    out.branch_amps[1] = to_double(sign) * M_SQRT1_2 * std::polar(1.0, half);
    out.pair = pair;
    out.probes = probes;
    return out;
}

/// Throws unless `levels` are distinct, inside 1..dim, and dim > levels-1+1.
inline void validate_multiparam_levels(int dim, std::span<const int> levels) {
    if (levels.size() < 2) {
        throw InvalidArgument("multi-parameter encoding needs k0 and at least "
                              "one parameter level");
    }
    const int m = static_cast<int>(levels.size()) - 1;
    if (dim <= m + 1) {
        throw DimensionError("multi-parameter encoding requires d > m+1 (d = " +
                             std::to_string(dim) +
                             ", m = " + std::to_string(m) + ")");
    }
    std::vector<bool> seen(static_cast<std::size_t>(dim) + 1, false);
    for (int level : levels) {
        if (level < 1 || level > dim) {
            throw InvalidArgument("level " + std::to_string(level) +
                                  " outside 1.." + std::to_string(dim));
        }
        if (seen[static_cast<std::size_t>(level)]) {
            throw InvalidArgument("duplicate level " + std::to_string(level));
        }
        seen[static_cast<std::size_t>(level)] = true;
    }
}

/**
 * (|k0> + sum_a sign_a exp(i n phi_a) |k_a>) / sqrt(m+1).
 */
[[nodiscard]] inline StateVector
encode_multiparam(int dim, std::span<const int> levels,
                  std::span<const Sign> signs, std::span<const double> phases,
                  int n) {
    validate_multiparam_levels(dim, levels);
    const std::size_t m = levels.size() - 1;
    if (signs.size() != m || phases.size() != m) {
        throw InvalidArgument("expected " + std::to_string(m) +
                              " signs and phases");
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(m + 1));
    Amplitudes amps = Amplitudes::Zero(dim);
    amps(levels[0] - 1) = norm;
    for (std::size_t a = 0; a < m; ++a) {
        amps(levels[a + 1] - 1) =
            norm * to_double(signs[a]) *
            std::polar(1.0, static_cast<double>(n) * phases[a]);
    }
    return StateVector(std::move(amps));
}

} // namespace qcm
