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
 * Published closed-form predictions for the protocol, written exactly as
 * stated so they can be tabulated against numerically computed values.
 * Several of them disagree with direct Born-rule and Fisher-information
 * evaluation; the comparison happens in verification.hpp, never here.
 */
#pragma once

#include <cmath>

namespace qcm::closed_form {

/// 1 / sqrt(nu): one encoding per probe.
[[nodiscard]] inline double single_probe_precision(double nu) {
    return 1.0 / std::sqrt(nu);
}

/// 1 / (n sqrt(nu)): n sequential encodings or n entangled probes.
[[nodiscard]] inline double heisenberg_precision(int n, double nu) {
    return 1.0 / (n * std::sqrt(nu));
}

/// (1 + cos(n phi) exp(-delta^2/2)) / 2 under Gaussian phase noise.
[[nodiscard]] inline double gaussian_match_probability(int n, double phi,
                                                       double delta) {
    return 0.5 * (1.0 + std::cos(n * phi) * std::exp(-0.5 * delta * delta));
}

/// sqrt(1 - cos^2(n phi) e^{-delta^2}) / (n sqrt(nu sin^2(n phi) e^{-delta^2})).
[[nodiscard]] inline double gaussian_precision(int n, double phi, double delta,
                                               double nu) {
    const double damp = std::exp(-delta * delta);
    const double c = std::cos(n * phi);
    const double s = std::sin(n * phi);
    return std::sqrt(1.0 - c * c * damp) / (n * std::sqrt(nu * s * s * damp));
}

/// sqrt(1 - e^{-delta^2}) / (n sqrt(nu e^{-delta^2})), stated for n phi = N pi
/// with the rotated measurement.
[[nodiscard]] inline double rotated_gaussian_precision(int n, double delta,
                                                       double nu) {
    const double damp = std::exp(-delta * delta);
    return std::sqrt(1.0 - damp) / (n * std::sqrt(nu * damp));
}

/// sqrt(1 - (1 - m/nu)^2 cos^2(n phi)) / (n (nu - m) |sin(n phi)|) when Eve
/// measures m of nu rounds projectively.
[[nodiscard]] inline double partial_projective_precision(int n, double phi,
                                                         double nu,
                                                         double measured) {
    const double keep = 1.0 - measured / nu;
    const double c = std::cos(n * phi);
    return std::sqrt(1.0 - keep * keep * c * c) /
           (n * (nu - measured) * std::abs(std::sin(n * phi)));
}

/// Per-round concealment 2/d for a blind resend (random pair or uniform).
[[nodiscard]] inline double blind_resend_concealment(int d) {
    return 2.0 / d;
}

/// Per-round concealment (d+1)/(2d) for the superposition resend.
[[nodiscard]] inline double superposition_concealment(int d) {
    return (d + 1.0) / (2.0 * d);
}

/// Per-round concealment for the pairwise-POVM attack:
/// 1/2 + 3/(4(d-1)) + [1/2 - 3/(4(d-1))] (2d-1)/(d(d-1)).
[[nodiscard]] inline double pairwise_concealment(int d) {
    const double a = 0.5 + 3.0 / (4.0 * (d - 1.0));
    const double b = 0.5 - 3.0 / (4.0 * (d - 1.0));
    return a + b * (2.0 * d - 1.0) / (d * (d - 1.0));
}

/// Eve's precision after the pairwise-POVM attack:
/// sqrt(8 [d - 1 - cos^2(n phi/2)] cos^2(n phi/2) / (nu n^2 sin^2(n phi))).
[[nodiscard]] inline double pairwise_eve_precision(int d, int n, double phi,
                                                   double nu) {
    const double c2 = std::pow(std::cos(0.5 * n * phi), 2);
    const double s = std::sin(n * phi);
    return std::sqrt(8.0 * (d - 1.0 - c2) * c2 / (nu * n * n * s * s));
}

/// Per-round Fisher information implied by pairwise_eve_precision.
[[nodiscard]] inline double pairwise_eve_fisher(int d, int n, double phi) {
    const double c2 = std::pow(std::cos(0.5 * n * phi), 2);
    const double s = std::sin(n * phi);
    return n * n * s * s / (8.0 * (d - 1.0 - c2) * c2);
}

/// P_{j+/-} = [1/m + 1 +/- (2/sqrt(m)) cos(2 n phi_j)] / (2m + 2).
[[nodiscard]] inline double multiparam_probability(int m, int n, double phi,
                                                   int sign) {
    const double md = m;
    return (1.0 / md + 1.0 +
            sign * (2.0 / std::sqrt(md)) * std::cos(2.0 * n * phi)) /
           (2.0 * md + 2.0);
}

/// sqrt([(m+1)^2 - 4m cos^2(2 n phi_j)] / (nu n^2 sin^2 phi_j)).
[[nodiscard]] inline double multiparam_precision(int m, int n, double phi,
                                                 double nu) {
    const double c = std::cos(2.0 * n * phi);
    const double s = std::sin(phi);
    return std::sqrt(((m + 1.0) * (m + 1.0) - 4.0 * m * c * c) /
                     (nu * n * n * s * s));
}

} // namespace qcm::closed_form
