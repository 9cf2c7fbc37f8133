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
 * Library walkthrough: run one protocol instance under Gaussian phase
 * noise, estimate the phase after the reveal and compare with the
 * Cramer-Rao bound.
 */

#include <cmath>
#include <iostream>

#include "qcm/analysis.hpp"

int main() {
    qcm::ProtocolConfig cfg;
    cfg.d = 4;
    cfg.n = 3;
    cfg.nu = 50000;
    cfg.true_phases = {0.4};
    cfg.attack.kind = qcm::AttackKind::gaussian_phase;
    cfg.attack.delta = 0.5;
    cfg.seed = 1;

    const qcm::Transcript t = qcm::run_protocol(cfg);
    std::cout << "rounds: " << t.rounds.size()
              << ", aborted: " << (t.aborted() ? "yes" : "no") << "\n";

    qcm::EstimatorOptions opts;
    opts.visibility = qcm::assumed_visibility(cfg.attack);
    const double phi_hat = qcm::estimate_phase(t, cfg.n, opts);

    const double fi = qcm::round_fisher(cfg, cfg.true_phases[0]);
    const double bound = qcm::cramer_rao(fi, static_cast<double>(cfg.nu));
    std::cout << "estimate: " << phi_hat << " (true " << cfg.true_phases[0]
              << ")\n"
              << "error: " << std::abs(phi_hat - cfg.true_phases[0])
              << ", Cramer-Rao bound: " << bound << "\n";
    return 0;
}
