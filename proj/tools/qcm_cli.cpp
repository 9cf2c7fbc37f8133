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
 * qcm: command-line front end.
 *
 *   qcm simulate CONFIG      transcript + precision report
 *   qcm verify               closed-form claim table
 *   qcm sweep CONFIG         report per grid point of delta|fraction|n|d
 *   qcm fisher CONFIG        Fisher information and Cramer-Rao bound
 *
 * Exit codes: 0 success, 1 usage/config error, 2 protocol abort (strict
 * mode, or no trial free of aborts in survey mode), 3 unexpected mismatch
 * in the claim table.
 */

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcm/io.hpp"
#include "qcm/studies.hpp"
#include "qcm/verification.hpp"

namespace {

enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitAbort = 2,
    kExitMismatch = 3,
};

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    unsigned threads{1};
    std::string out{"."};
    std::optional<std::string> mode;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw qcm::ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

qcm::RunConfig load_config(const std::string &path, const GlobalOptions &g) {
    qcm::RunConfig run = qcm::parse_run_config(read_file(path));
    if (g.seed) {
        run.protocol.seed = *g.seed;
    }
    if (g.mode) {
        run.protocol.mode = qcm::mode_from_string(*g.mode);
    }
    return run;
}

std::filesystem::path prepare_out(const GlobalOptions &g) {
    std::filesystem::path dir(g.out);
    std::filesystem::create_directories(dir);
    return dir;
}

template <class Write>
void write_file(const std::filesystem::path &path, Write &&write) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw qcm::Error("cannot write '" + path.string() + "'");
    }
    write(out);
    if (!out) {
        throw qcm::Error("failed writing '" + path.string() + "'");
    }
}

void write_json(const std::filesystem::path &path,
                const nlohmann::ordered_json &j) {
    write_file(path, [&](std::ostream &o) { o << j.dump(2) << "\n"; });
}

int cmd_simulate(const std::string &config_path, const GlobalOptions &g) {
    const qcm::RunConfig run = load_config(config_path, g);
    const auto dir = prepare_out(g);
    const qcm::Transcript t = qcm::run_protocol(run.protocol);
    write_file(dir / "transcript.txt",
               [&](std::ostream &o) { qcm::write_transcript(o, t); });
    if (run.protocol.mode == qcm::Mode::strict && t.aborted()) {
        std::cout << "protocol aborted at round " << *t.first_abort_round()
                  << "\n";
        return kExitAbort;
    }
    qcm::ExperimentOptions opts;
    opts.trials = run.trials;
    opts.threads = g.threads;
    opts.rotated_rerun = run.rotated_rerun;
    opts.branch_hint = run.branch_hint;
    if (t.aborted()) {
        std::cout << "survey: " << t.abort_count() << " of " << t.rounds.size()
                  << " rounds aborted\n";
    }
    qcm::PrecisionReport report;
    try {
        report = qcm::run_experiment(run.protocol, opts);
    } catch (const qcm::AllTrialsAborted &e) {
        std::cout << e.what() << "\n";
        return kExitAbort;
    }
    write_file(dir / "report.csv",
               [&](std::ostream &o) { qcm::write_report_csv(o, report); });
    write_json(dir / "report.json", qcm::report_metadata(run, report));
    std::cout << "rounds=" << t.rounds.size() << " aborts=" << t.abort_count()
              << " trials=" << report.trials
              << " completed=" << report.completed << "\n";
    for (std::size_t a = 0; a < report.rmse.size(); ++a) {
        std::cout << "parameter " << a + 1
                  << ": rmse=" << qcm::format_number(report.rmse[a])
                  << " crb=" << qcm::format_number(report.crb[a])
                  << " published[" << report.formula_id
                  << "]=" << qcm::format_number(report.paper_value[a]) << " "
                  << qcm::to_string(report.verdict[a]) << "\n";
    }
    if (report.uniform_outcomes) {
        std::cout << "warning: standard-basis outcomes are consistent with "
                     "coin flips (p="
                  << qcm::format_number(report.uniformity_p_value) << ")\n";
    }
    return kExitOk;
}

std::pair<int, int> parse_range(const std::string &text) {
    const auto parts = qcm::split(text, ':');
    if (parts.size() != 2) {
        throw qcm::InvalidArgument("--d-range must look like MIN:MAX");
    }
    return {static_cast<int>(qcm::parse_integer(parts[0])),
            static_cast<int>(qcm::parse_integer(parts[1]))};
}

int cmd_verify(const std::vector<std::string> &claims,
               const std::string &d_range, std::int64_t nu,
               const GlobalOptions &g) {
    qcm::VerifyOptions opts;
    opts.claims.clear();
    for (const auto &c : claims) {
        for (const auto &id : qcm::split(c, ',')) {
            opts.claims.push_back(id);
        }
    }
    if (opts.claims.empty()) {
        opts.claims = {"all"};
    }
    std::tie(opts.d_min, opts.d_max) = parse_range(d_range);
    opts.nu = nu;
    opts.seed = g.seed.value_or(0);
    opts.threads = g.threads;
    std::vector<qcm::ClaimRow> rows;
    try {
        rows = qcm::verify_closed_forms(opts);
    } catch (const qcm::UnknownClaim &e) {
        std::cerr << "error: " << e.what() << "\nvalid claim ids: all";
        for (const auto &id : qcm::claim_ids()) {
            std::cerr << " " << id;
        }
        std::cerr << "\n";
        return kExitError;
    }
    const auto dir = prepare_out(g);
    write_file(dir / "verify.csv",
               [&](std::ostream &o) { qcm::write_claims_csv(o, rows); });
    nlohmann::ordered_json meta;
    meta["claims"] = opts.claims;
    meta["d_range"] = {opts.d_min, opts.d_max};
    meta["nu"] = opts.nu;
    meta["seed"] = opts.seed;
    nlohmann::ordered_json counts;
    for (auto v : {qcm::Verdict::match, qcm::Verdict::mismatch,
                   qcm::Verdict::known_mismatch, qcm::Verdict::singular_point}) {
        counts[qcm::to_string(v)] =
            std::count_if(rows.begin(), rows.end(),
                          [&](const qcm::ClaimRow &r) { return r.verdict == v; });
    }
    meta["verdicts"] = counts;
    write_json(dir / "verify.json", meta);
    std::cout << "rows=" << rows.size();
    for (const auto &[k, v] : counts.items()) {
        std::cout << " " << k << "=" << v.get<long>();
    }
    std::cout << "\n";
    for (const auto &r : rows) {
        if (r.verdict == qcm::Verdict::mismatch) {
            std::cout << "unexpected mismatch: " << r.formula_id << " "
                      << r.params << "\n";
        }
    }
    return qcm::has_unexpected_mismatch(rows) ? kExitMismatch : kExitOk;
}

std::vector<double> parse_grid(const std::string &text) {
    std::vector<double> grid;
    for (const auto &f : qcm::split(text, ',')) {
        if (!f.empty()) {
            grid.push_back(qcm::parse_number(f));
        }
    }
    if (grid.empty()) {
        throw qcm::InvalidArgument("sweep grid is empty");
    }
    return grid;
}

int cmd_sweep(const std::string &config_path, const std::string &axis,
              const std::string &grid, const GlobalOptions &g) {
    const qcm::RunConfig run = load_config(config_path, g);
    const auto result = qcm::run_sweep(run, qcm::sweep_axis_from_string(axis),
                                       parse_grid(grid), g.threads);
    const auto dir = prepare_out(g);
    write_file(dir / "sweep.csv",
               [&](std::ostream &o) { qcm::write_sweep_csv(o, result); });
    const auto meta = qcm::sweep_metadata(run, result);
    write_json(dir / "sweep.json", meta);
    std::cout << "points=" << result.points.size();
    for (const auto &[k, v] : meta["flags"].items()) {
        std::cout << " " << k << "=" << (v.get<bool>() ? "yes" : "no");
    }
    std::cout << "\n";
    return kExitOk;
}

int cmd_fisher(const std::string &config_path, const GlobalOptions &g) {
    const qcm::RunConfig run = load_config(config_path, g);
    const auto rows = qcm::fisher_summary(run.protocol);
    const auto dir = prepare_out(g);
    write_file(dir / "fisher.csv",
               [&](std::ostream &o) { qcm::write_fisher_csv(o, rows); });
    qcm::write_fisher_csv(std::cout, rows);
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Cryptographic qudit phase estimation: simulate, verify, "
                 "sweep, fisher"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Seed (overrides the config file)");
    app.add_option("--threads", g.threads, "Worker threads")
        ->check(CLI::Range(1u, 256u));
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--mode", g.mode, "strict or survey (overrides the config)")
        ->check(CLI::IsMember({"strict", "survey"}));

    std::string config_path;
    auto *simulate = app.add_subcommand("simulate", "Run the protocol and "
                                                    "write transcript and "
                                                    "report");
    simulate->add_option("config", config_path, "JSON run configuration")
        ->required();

    std::vector<std::string> claims;
    std::string d_range = "3:8";
    std::int64_t nu = 100000;
    auto *verify = app.add_subcommand("verify", "Tabulate closed forms against "
                                                "oracles");
    verify->add_option("--claims", claims, "Claim ids (comma separated) or all");
    verify->add_option("--d-range", d_range, "Dimension range MIN:MAX");
    verify->add_option("--nu", nu, "Rounds per Monte Carlo check")
        ->check(CLI::PositiveNumber);

    std::string axis;
    std::string grid;
    auto *sweep = app.add_subcommand("sweep", "Precision report per grid point");
    sweep->add_option("config", config_path, "JSON run configuration")
        ->required();
    sweep->add_option("--axis", axis, "delta, fraction, n or d")->required();
    sweep->add_option("--grid", grid, "Comma-separated grid values")
        ->required();

    auto *fisher = app.add_subcommand("fisher", "Fisher information and bound");
    fisher->add_option("config", config_path, "JSON run configuration")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (*simulate) {
            return cmd_simulate(config_path, g);
        }
        if (*verify) {
            return cmd_verify(claims, d_range, nu, g);
        }
        if (*sweep) {
            return cmd_sweep(config_path, axis, grid, g);
        }
        if (*fisher) {
            return cmd_fisher(config_path, g);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
