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
 * Parameter sweeps over attack strength or probe size, and direct
 * Fisher-information queries for one configuration.
 */
#pragma once

#include <string>
#include <vector>

#include "analysis.hpp"
#include "io.hpp"

namespace qcm {

enum class SweepAxis { delta, fraction, n, d };

[[nodiscard]] inline std::string to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::delta:
        return "delta";
    case SweepAxis::fraction:
        return "fraction";
    case SweepAxis::n:
        return "n";
    case SweepAxis::d:
        return "d";
    }
    return "unknown";
}

[[nodiscard]] inline SweepAxis sweep_axis_from_string(const std::string &s) {
    for (SweepAxis a :
         {SweepAxis::delta, SweepAxis::fraction, SweepAxis::n, SweepAxis::d}) {
        if (to_string(a) == s) {
            return a;
        }
    }
    throw InvalidArgument("unknown sweep axis '" + s +
                          "' (expected delta, fraction, n, d)");
}

struct SweepPoint {
    double value{0.0};
    PrecisionReport report;
};

struct SweepFlags {
    /// RMSE of the first component never decreases along the grid.
    bool rmse_nondecreasing{true};
    /// Fisher bound never decreases along the grid.
    bool crb_nondecreasing{true};
    /// Every doubling of n halves the bound (n axis only).
    bool crb_halves_per_doubling{true};
    /// Fisher information vanishes at fraction 1 (fraction axis only).
    bool fisher_zero_at_full_fraction{true};
};

struct SweepResult {
    SweepAxis axis{SweepAxis::delta};
    std::vector<SweepPoint> points;
    SweepFlags flags;
};

/// Fisher information below this counts as zero.
inline constexpr double kZeroFisher = 1e-8;

[[nodiscard]] inline ProtocolConfig with_axis_value(ProtocolConfig cfg,
                                                    SweepAxis axis,
                                                    double value) {
    auto integral = [&](const char *name) {
        if (value != std::floor(value)) {
            throw InvalidArgument(std::string("sweep axis ") + name +
                                  " needs integer grid values");
        }
        return static_cast<int>(value);
    };
    switch (axis) {
    case SweepAxis::delta:
        cfg.attack.delta = value;
        break;
    case SweepAxis::fraction:
        cfg.attack.fraction = value;
        break;
    case SweepAxis::n:
        cfg.n = integral("n");
        break;
    case SweepAxis::d:
        cfg.d = integral("d");
        break;
    }
    cfg.validate();
    return cfg;
}

/**
 * One experiment per grid point, in grid order. Every point reuses the
 * configuration seed so neighbouring points share random numbers, which
 * keeps the monotonicity flags from reacting to independent noise.
 */
[[nodiscard]] inline SweepResult run_sweep(const RunConfig &run, SweepAxis axis,
                                           const std::vector<double> &grid,
                                           unsigned threads) {
    if (grid.empty()) {
        throw InvalidArgument("sweep grid is empty");
    }
    SweepResult result;
    result.axis = axis;
    ExperimentOptions opts;
    opts.trials = run.trials;
    opts.threads = threads;
    opts.rotated_rerun = run.rotated_rerun;
    opts.branch_hint = run.branch_hint;
    for (double value : grid) {
        const ProtocolConfig cfg = with_axis_value(run.protocol, axis, value);
        result.points.push_back({value, run_experiment(cfg, opts)});
    }
    auto &flags = result.flags;
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        const auto &prev = result.points[i - 1];
        const auto &cur = result.points[i];
        if (cur.value < prev.value) {
            continue;
        }
        if (cur.report.rmse[0] < prev.report.rmse[0]) {
            flags.rmse_nondecreasing = false;
        }
        if (cur.report.crb[0] < prev.report.crb[0] * (1.0 - 1e-9)) {
            flags.crb_nondecreasing = false;
        }
        if (axis == SweepAxis::n && cur.value == 2.0 * prev.value) {
            const double ratio = prev.report.crb[0] / cur.report.crb[0];
            if (!(std::abs(ratio - 2.0) < 1e-6)) {
                flags.crb_halves_per_doubling = false;
            }
        }
    }
    if (axis == SweepAxis::fraction) {
        for (const auto &p : result.points) {
            if (p.value == 1.0 && !(p.report.fisher[0] < kZeroFisher)) {
                flags.fisher_zero_at_full_fraction = false;
            }
        }
    }
    return result;
}

inline constexpr const char *kSweepColumns =
    "axis,value,parameter,rmse,bias,standard_error,fisher,crb,formula_id,"
    "paper_value,verdict,completed";

inline void write_sweep_csv(std::ostream &out, const SweepResult &s) {
    out << kSweepColumns << "\n";
    for (const auto &p : s.points) {
        const auto &r = p.report;
        for (std::size_t a = 0; a < r.rmse.size(); ++a) {
            out << to_string(s.axis) << "," << format_number(p.value) << ","
                << a + 1 << "," << format_number(r.rmse[a]) << ","
                << format_number(r.bias[a]) << ","
                << format_number(r.standard_error[a]) << ","
                << format_number(r.fisher[a]) << "," << format_number(r.crb[a])
                << "," << r.formula_id << "," << format_number(r.paper_value[a])
                << "," << to_string(r.verdict[a]) << "," << r.completed << "\n";
        }
    }
}

[[nodiscard]] inline nlohmann::ordered_json
sweep_metadata(const RunConfig &run, const SweepResult &s) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(run);
    j["axis"] = to_string(s.axis);
    std::vector<double> grid;
    for (const auto &p : s.points) {
        grid.push_back(p.value);
    }
    j["grid"] = grid;
    nlohmann::ordered_json flags;
    if (s.axis == SweepAxis::delta || s.axis == SweepAxis::fraction) {
        flags["rmse_nondecreasing"] = s.flags.rmse_nondecreasing;
        flags["crb_nondecreasing"] = s.flags.crb_nondecreasing;
    }
    if (s.axis == SweepAxis::n) {
        flags["crb_halves_per_doubling"] = s.flags.crb_halves_per_doubling;
    }
    if (s.axis == SweepAxis::fraction) {
        flags["fisher_zero_at_full_fraction"] =
            s.flags.fisher_zero_at_full_fraction;
    }
    j["flags"] = flags;
    return j;
}

// ---------------------------------------------------------------------------
// Fisher queries
// ---------------------------------------------------------------------------

struct FisherEntry {
    std::string quantity;
    int component{1};
    double value{kNaN};
};

/**
 * Per-round quantum and classical Fisher information for a configuration,
 * the Cramer-Rao bound at its nu, and the matching closed form.
 */
[[nodiscard]] inline std::vector<FisherEntry>
fisher_summary(const ProtocolConfig &cfg) {
    cfg.validate();
    const double nu = static_cast<double>(std::max<std::int64_t>(cfg.nu, 1));
    std::vector<FisherEntry> out;
    const auto preps = enumerate_preparations(cfg);
    const Preparation &rep = preps.front();
    if (cfg.strategy == Strategy::multiparam) {
        const auto fim = round_fisher_matrix(cfg, cfg.true_phases);
        for (int a = 0; a < cfg.m; ++a) {
            for (int b = 0; b < cfg.m; ++b) {
                out.push_back({"fisher_matrix_" + std::to_string(b + 1), a + 1,
                               fim(a, b)});
            }
        }
        std::vector<double> crb;
        try {
            crb = cramer_rao(fim, nu);
        } catch (const SingularFisherError &) {
            crb.assign(static_cast<std::size_t>(cfg.m), kInf);
        }
        const auto [id, published] = published_prediction(cfg, Basis::standard);
        for (int a = 0; a < cfg.m; ++a) {
            out.push_back({"crb", a + 1, crb[static_cast<std::size_t>(a)]});
            out.push_back({"paper_value", a + 1, published[static_cast<std::size_t>(a)]});
        }
        return out;
    }
    const double phi = cfg.true_phases[0];
    auto state_fn = [&](double x) {
        const double ph[1] = {x};
        return encoded_state(cfg, rep, ph);
    };
    out.push_back({"qfi", 1, qfi_pure(state_fn, phi)});
    for (Basis b : {Basis::standard, Basis::rotated}) {
        ProtocolConfig c = cfg;
        c.basis = b;
        out.push_back({"fisher_" + to_string(b), 1, round_fisher(c, phi)});
    }
    const double fi = round_fisher(cfg, phi);
    out.push_back({"fisher", 1, fi});
    out.push_back({"crb", 1, fi > 0.0 ? cramer_rao(fi, nu) : kInf});
    const auto [id, published] = published_prediction(cfg, cfg.basis);
    out.push_back({"paper_value", 1, published[0]});
    return out;
}

inline void write_fisher_csv(std::ostream &out,
                             const std::vector<FisherEntry> &rows) {
    out << "quantity,component,value\n";
    for (const auto &r : rows) {
        out << r.quantity << "," << r.component << "," << format_number(r.value)
            << "\n";
    }
}

} // namespace qcm
