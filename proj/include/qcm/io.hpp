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
 * File formats: the JSON run configuration, the transcript text format,
 * comma-separated report tables and their JSON metadata sidecars.
 *
 * Numbers are written with a fixed printf format so identical inputs give
 * byte-identical files; non-finite values appear as `nan`, `inf`, `-inf`.
 */
#pragma once

#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "verification.hpp"

namespace qcm {

inline constexpr int kConfigVersion = 1;

class ConfigError : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

class FormatError : public Error {
  public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Number and enum formatting
// ---------------------------------------------------------------------------

/// Shortest text that reads back to the same double.
[[nodiscard]] inline std::string format_exact(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) {
            break;
        }
    }
    return buf;
}

/// Report precision: 10 significant digits.
[[nodiscard]] inline std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

[[nodiscard]] inline double parse_number(const std::string &text) {
    if (text == "nan") {
        return kNaN;
    }
    if (text == "inf") {
        return kInf;
    }
    if (text == "-inf") {
        return -kInf;
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception &) {
        throw FormatError("not a number: '" + text + "'");
    }
    if (used != text.size()) {
        throw FormatError("not a number: '" + text + "'");
    }
    return value;
}

[[nodiscard]] inline std::int64_t parse_integer(const std::string &text) {
    std::size_t used = 0;
    long long value = 0;
    try {
        value = std::stoll(text, &used);
    } catch (const std::exception &) {
        throw FormatError("not an integer: '" + text + "'");
    }
    if (used != text.size()) {
        throw FormatError("not an integer: '" + text + "'");
    }
    return value;
}

[[nodiscard]] inline std::vector<std::string> split(const std::string &text,
                                                    char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(text);
    while (std::getline(in, field, sep)) {
        out.push_back(field);
    }
    if (!text.empty() && text.back() == sep) {
        out.emplace_back();
    }
    return out;
}

template <class T, class F>
[[nodiscard]] std::string join(const std::vector<T> &items, char sep, F &&fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += fmt(items[i]);
    }
    return out;
}

[[nodiscard]] inline Strategy strategy_from_string(const std::string &s) {
    for (Strategy v :
         {Strategy::sequential, Strategy::parallel, Strategy::multiparam}) {
        if (to_string(v) == s) {
            return v;
        }
    }
    throw InvalidArgument("unknown strategy '" + s +
                          "' (expected sequential, parallel, multiparam)");
}

[[nodiscard]] inline AttackKind parse_attack_kind(const std::string &s) {
    if (auto kind = attack_kind_from_string(s)) {
        return *kind;
    }
    throw InvalidArgument(
        "unknown attack kind '" + s +
        "' (expected none, gaussian_phase, fixed_phase, resend_random_pair, "
        "resend_uniform, projective_resend, superposition_resend, "
        "pairwise_povm_resend)");
}

[[nodiscard]] inline Basis basis_from_string(const std::string &s) {
    for (Basis v : {Basis::standard, Basis::rotated, Basis::both}) {
        if (to_string(v) == s) {
            return v;
        }
    }
    throw InvalidArgument("unknown basis '" + s +
                          "' (expected standard, rotated, both)");
}

[[nodiscard]] inline Mode mode_from_string(const std::string &s) {
    if (s == "strict") {
        return Mode::strict;
    }
    if (s == "survey") {
        return Mode::survey;
    }
    throw InvalidArgument("unknown mode '" + s + "' (expected strict, survey)");
}

[[nodiscard]] inline MultiparamCoefficient
coefficient_from_string(const std::string &s) {
    for (auto v : {MultiparamCoefficient::inverse_sqrt_m,
                   MultiparamCoefficient::inverse_sqrt_n}) {
        if (to_string(v) == s) {
            return v;
        }
    }
    throw InvalidArgument("unknown coefficient '" + s +
                          "' (expected inv_sqrt_m, inv_sqrt_n)");
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// File form of a protocol configuration plus experiment settings.
struct RunConfig {
    ProtocolConfig protocol;
    int trials{2};
    /// Repeat with the rotated measurement when the first estimate sits
    /// near a multiple of pi/n.
    bool rotated_rerun{false};
    /// Coarse prior phase for rotated-only estimates.
    std::optional<double> branch_hint;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json &obj,
                                const std::vector<std::string> &allowed,
                                const std::string &prefix) {
    for (const auto &[key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key '" + prefix + key + "'");
        }
    }
}

template <class T>
T get_key(const nlohmann::json &obj, const std::string &key,
          const std::string &path) {
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ConfigError("config key '" + path + "' has the wrong type");
    }
}

template <class T, class Parse>
T get_enum(const nlohmann::json &obj, const std::string &key,
           const std::string &path, Parse &&parse) {
    const auto text = get_key<std::string>(obj, key, path);
    try {
        return parse(text);
    } catch (const InvalidArgument &e) {
        throw ConfigError("config key '" + path + "': " + e.what());
    }
}

} // namespace detail

/**
 * Parses and validates a JSON run configuration. Unknown keys, wrong types
 * and invalid values raise ConfigError naming the offending key.
 */
[[nodiscard]] inline RunConfig parse_run_config(const std::string &text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    detail::reject_unknown_keys(root,
                                {"version", "d", "n", "nu", "strategy", "m",
                                 "phases", "attack", "basis", "trials", "mode",
                                 "coefficient", "seed", "rotated_rerun",
                                 "branch_hint"},
                                "");
    if (!root.contains("version")) {
        throw ConfigError("config key 'version' is required");
    }
    if (detail::get_key<int>(root, "version", "version") != kConfigVersion) {
        throw ConfigError("config key 'version': unsupported version (expected " +
                          std::to_string(kConfigVersion) + ")");
    }
    RunConfig run;
    auto &cfg = run.protocol;
    if (root.contains("d")) {
        cfg.d = detail::get_key<int>(root, "d", "d");
    }
    if (root.contains("n")) {
        cfg.n = detail::get_key<int>(root, "n", "n");
    }
    if (root.contains("nu")) {
        cfg.nu = detail::get_key<std::int64_t>(root, "nu", "nu");
    }
    if (root.contains("strategy")) {
        cfg.strategy = detail::get_enum<Strategy>(root, "strategy", "strategy",
                                                  strategy_from_string);
    }
    if (root.contains("m")) {
        cfg.m = detail::get_key<int>(root, "m", "m");
    }
    if (root.contains("phases")) {
        cfg.true_phases =
            detail::get_key<std::vector<double>>(root, "phases", "phases");
    }
    if (root.contains("basis")) {
        cfg.basis =
            detail::get_enum<Basis>(root, "basis", "basis", basis_from_string);
    }
    if (root.contains("mode")) {
        cfg.mode = detail::get_enum<Mode>(root, "mode", "mode", mode_from_string);
    }
    if (root.contains("coefficient")) {
        cfg.coefficient = detail::get_enum<MultiparamCoefficient>(
            root, "coefficient", "coefficient", coefficient_from_string);
    }
    if (root.contains("seed")) {
        cfg.seed = detail::get_key<std::uint64_t>(root, "seed", "seed");
    }
    if (root.contains("trials")) {
        run.trials = detail::get_key<int>(root, "trials", "trials");
    }
    if (root.contains("rotated_rerun")) {
        run.rotated_rerun =
            detail::get_key<bool>(root, "rotated_rerun", "rotated_rerun");
    }
    if (root.contains("branch_hint")) {
        run.branch_hint =
            detail::get_key<double>(root, "branch_hint", "branch_hint");
    }
    if (root.contains("attack")) {
        const auto &atk = root.at("attack");
        if (!atk.is_object()) {
            throw ConfigError("config key 'attack' must be an object");
        }
        detail::reject_unknown_keys(
            atk, {"kind", "delta", "fraction", "shift", "exact", "target"},
            "attack.");
        if (atk.contains("kind")) {
            cfg.attack.kind = detail::get_enum<AttackKind>(
                atk, "kind", "attack.kind", parse_attack_kind);
        }
        if (atk.contains("delta")) {
            cfg.attack.delta = detail::get_key<double>(atk, "delta", "attack.delta");
        }
        if (atk.contains("fraction")) {
            cfg.attack.fraction =
                detail::get_key<double>(atk, "fraction", "attack.fraction");
        }
        if (atk.contains("shift")) {
            cfg.attack.shift = detail::get_key<double>(atk, "shift", "attack.shift");
        }
        if (atk.contains("exact")) {
            cfg.attack.exact_count =
                detail::get_key<bool>(atk, "exact", "attack.exact");
        }
        if (atk.contains("target")) {
            const auto t =
                detail::get_key<std::vector<int>>(atk, "target", "attack.target");
            if (t.size() != 2) {
                throw ConfigError("config key 'attack.target' needs two levels");
            }
            cfg.attack.target = {t[0], t[1]};
        }
    }
    if (run.trials < 2) {
        throw ConfigError("config key 'trials' must be >= 2");
    }
    try {
        cfg.validate();
        if (cfg.attack.kind == AttackKind::fixed_phase) {
            validate_pair(cfg.d, cfg.attack.target);
        }
    } catch (const InvalidArgument &e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return run;
}

[[nodiscard]] inline nlohmann::ordered_json config_to_json(const RunConfig &run) {
    const auto &cfg = run.protocol;
    nlohmann::ordered_json j;
    j["version"] = kConfigVersion;
    j["d"] = cfg.d;
    j["n"] = cfg.n;
    j["nu"] = cfg.nu;
    j["strategy"] = to_string(cfg.strategy);
    j["m"] = cfg.m;
    j["phases"] = cfg.true_phases;
    j["attack"] = {{"kind", to_string(cfg.attack.kind)},
                   {"delta", cfg.attack.delta},
                   {"fraction", cfg.attack.fraction},
                   {"shift", cfg.attack.shift},
                   {"exact", cfg.attack.exact_count},
                   {"target", {cfg.attack.target.j, cfg.attack.target.k}}};
    j["basis"] = to_string(cfg.basis);
    j["trials"] = run.trials;
    j["mode"] = to_string(cfg.mode);
    j["coefficient"] = to_string(cfg.coefficient);
    j["seed"] = cfg.seed;
    j["rotated_rerun"] = run.rotated_rerun;
    if (run.branch_hint) {
        j["branch_hint"] = *run.branch_hint;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Transcript text format
// ---------------------------------------------------------------------------

inline constexpr const char *kTranscriptColumns =
    "round,levels,signs,basis,eve_acted,eve_outcome,bob_index,bob_label,abort";

/**
 * Writes `# key=value` header lines with the configuration, the column
 * line, one line per round and a `# reveal=yes|no` footer. Multiple levels
 * or signs are joined with ';'. Preparations are written because the file
 * is the post-reveal record; with `reveal=no` they are Alice's private
 * log.
 */
inline void write_transcript(std::ostream &out, const Transcript &t) {
    const auto &c = t.config;
    out << "# format=qcm-transcript-1\n";
    out << "# d=" << c.d << "\n";
    out << "# n=" << c.n << "\n";
    out << "# nu=" << c.nu << "\n";
    out << "# strategy=" << to_string(c.strategy) << "\n";
    out << "# m=" << c.m << "\n";
    out << "# phases=" << join(c.true_phases, ';', format_exact) << "\n";
    out << "# attack=" << to_string(c.attack.kind) << "\n";
    out << "# delta=" << format_exact(c.attack.delta) << "\n";
    out << "# fraction=" << format_exact(c.attack.fraction) << "\n";
    out << "# shift=" << format_exact(c.attack.shift) << "\n";
    out << "# target=" << c.attack.target.j << ";" << c.attack.target.k << "\n";
    out << "# exact=" << (c.attack.exact_count ? 1 : 0) << "\n";
    out << "# basis=" << to_string(c.basis) << "\n";
    out << "# mode=" << to_string(c.mode) << "\n";
    out << "# coefficient=" << to_string(c.coefficient) << "\n";
    out << "# seed=" << c.seed << "\n";
    out << kTranscriptColumns << "\n";
    for (const auto &r : t.rounds) {
        out << r.round << ","
            << join(r.prepared.levels, ';', [](int l) { return std::to_string(l); })
            << ","
            << join(r.prepared.signs, ';',
                    [](Sign s) { return std::string(1, to_char(s)); })
            << "," << to_string(r.basis) << "," << (r.eve.acted ? 1 : 0) << ","
            << r.eve.outcome.value_or("-") << "," << r.bob_outcome << ","
            << r.bob_label << "," << (r.abort ? 1 : 0) << "\n";
    }
    out << "# reveal=" << (t.reveal ? "yes" : "no") << "\n";
}

/// Parses the output of write_transcript. Substituted states are not
/// stored in the file and come back empty.
[[nodiscard]] inline Transcript read_transcript(std::istream &in) {
    Transcript t;
    auto &c = t.config;
    std::string line;
    bool columns_seen = false;
    std::optional<bool> reveal;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "transcript line " + std::to_string(line_no);
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw FormatError(where + ": header without '='");
            }
            const std::string key = line.substr(2, eq - 2);
            const std::string value = line.substr(eq + 1);
            try {
                if (key == "format") {
                    if (value != "qcm-transcript-1") {
                        throw FormatError("unsupported format '" + value + "'");
                    }
                } else if (key == "d") {
                    c.d = static_cast<int>(parse_integer(value));
                } else if (key == "n") {
                    c.n = static_cast<int>(parse_integer(value));
                } else if (key == "nu") {
                    c.nu = parse_integer(value);
                } else if (key == "strategy") {
                    c.strategy = strategy_from_string(value);
                } else if (key == "m") {
                    c.m = static_cast<int>(parse_integer(value));
                } else if (key == "phases") {
                    c.true_phases.clear();
                    for (const auto &f : split(value, ';')) {
                        c.true_phases.push_back(parse_number(f));
                    }
                } else if (key == "attack") {
                    c.attack.kind = parse_attack_kind(value);
                } else if (key == "delta") {
                    c.attack.delta = parse_number(value);
                } else if (key == "fraction") {
                    c.attack.fraction = parse_number(value);
                } else if (key == "shift") {
                    c.attack.shift = parse_number(value);
                } else if (key == "target") {
                    const auto f = split(value, ';');
                    if (f.size() != 2) {
                        throw FormatError("target needs two levels");
                    }
                    c.attack.target = {static_cast<int>(parse_integer(f[0])),
                                       static_cast<int>(parse_integer(f[1]))};
                } else if (key == "exact") {
                    c.attack.exact_count = parse_integer(value) != 0;
                } else if (key == "basis") {
                    c.basis = basis_from_string(value);
                } else if (key == "mode") {
                    c.mode = mode_from_string(value);
                } else if (key == "coefficient") {
                    c.coefficient = coefficient_from_string(value);
                } else if (key == "seed") {
                    c.seed = std::stoull(value);
                } else if (key == "reveal") {
                    if (value != "yes" && value != "no") {
                        throw FormatError("reveal must be yes or no");
                    }
                    reveal = value == "yes";
                } else {
                    throw FormatError("unknown header key '" + key + "'");
                }
            } catch (const Error &e) {
                throw FormatError(where + ": " + e.what());
            }
            continue;
        }
        if (!columns_seen) {
            if (line != kTranscriptColumns) {
                throw FormatError(where + ": expected the column line");
            }
            columns_seen = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 9) {
            throw FormatError(where + ": expected 9 fields");
        }
        try {
            RoundRecord r;
            r.round = parse_integer(f[0]);
            for (const auto &l : split(f[1], ';')) {
                r.prepared.levels.push_back(static_cast<int>(parse_integer(l)));
            }
            for (const auto &s : split(f[2], ';')) {
                if (s != "+" && s != "-") {
                    throw FormatError("sign must be + or -");
                }
                r.prepared.signs.push_back(s == "+" ? Sign::plus : Sign::minus);
            }
            r.basis = basis_from_string(f[3]);
            r.eve.round = r.round;
            r.eve.acted = parse_integer(f[4]) != 0;
            if (f[5] != "-") {
                r.eve.outcome = f[5];
            }
            r.bob_outcome = static_cast<std::size_t>(parse_integer(f[6]));
            r.bob_label = f[7];
            r.abort = parse_integer(f[8]) != 0;
            t.rounds.push_back(std::move(r));
        } catch (const Error &e) {
            throw FormatError(where + ": " + e.what());
        }
    }
    if (!columns_seen || !reveal) {
        throw FormatError("truncated transcript");
    }
    if (*reveal) {
        FinalReveal fr;
        for (const auto &r : t.rounds) {
            fr.preparations.push_back(r.prepared);
        }
        t.reveal = std::move(fr);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

inline constexpr const char *kReportColumns =
    "parameter,true_phase,mean_estimate,bias,standard_error,rmse,fisher,crb,"
    "formula_id,paper_value,verdict,trials,completed,reruns";

inline void write_report_csv(std::ostream &out, const PrecisionReport &r) {
    out << kReportColumns << "\n";
    for (std::size_t a = 0; a < r.rmse.size(); ++a) {
        out << a + 1 << "," << format_number(r.config.true_phases[a]) << ","
            << format_number(r.mean_estimate[a]) << "," << format_number(r.bias[a])
            << "," << format_number(r.standard_error[a]) << ","
            << format_number(r.rmse[a]) << "," << format_number(r.fisher[a]) << ","
            << format_number(r.crb[a]) << "," << r.formula_id << ","
            << format_number(r.paper_value[a]) << "," << to_string(r.verdict[a])
            << "," << r.trials << "," << r.completed << "," << r.reruns << "\n";
    }
}

[[nodiscard]] inline nlohmann::ordered_json
tally_to_json(const BasisTally &b) {
    return {{"match", b.match}, {"mismatch", b.mismatch}, {"aborted", b.aborted}};
}

/// JSON sidecar with outcome counts and the flags of a report.
[[nodiscard]] inline nlohmann::ordered_json
report_metadata(const RunConfig &run, const PrecisionReport &r) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(run);
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto &[label, count] : r.outcome_counts) {
        counts[label] = count;
    }
    j["outcome_counts"] = counts;
    j["sign_corrected"] = {{"standard", tally_to_json(r.tally.standard)},
                           {"rotated", tally_to_json(r.tally.rotated)}};
    j["uniformity_p_value"] = format_number(r.uniformity_p_value);
    j["uniform_outcomes"] = r.uniform_outcomes;
    j["formula_id"] = r.formula_id;
    return j;
}

inline constexpr const char *kClaimColumns =
    "formula_id,params,oracle,empirical,ci_low,ci_high,paper_value,verdict";

inline void write_claims_csv(std::ostream &out,
                             const std::vector<ClaimRow> &rows) {
    out << kClaimColumns << "\n";
    for (const auto &r : rows) {
        out << r.formula_id << "," << r.params << "," << format_number(r.oracle)
            << "," << format_number(r.empirical) << ","
            << format_number(r.ci_low) << "," << format_number(r.ci_high) << ","
            << format_number(r.paper_value) << "," << to_string(r.verdict)
            << "\n";
    }
}

/// Parses a claims table back into rows (used by round-trip tests).
[[nodiscard]] inline std::vector<ClaimRow> read_claims_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != kClaimColumns) {
        throw FormatError("claims table: missing header");
    }
    std::vector<ClaimRow> rows;
    while (std::getline(in, line)) {
        const auto f = split(line, ',');
        if (f.size() != 8) {
            throw FormatError("claims table: expected 8 fields");
        }
        ClaimRow r{f[0], f[1]};
        r.oracle = parse_number(f[2]);
        r.empirical = parse_number(f[3]);
        r.ci_low = parse_number(f[4]);
        r.ci_high = parse_number(f[5]);
        r.paper_value = parse_number(f[6]);
        bool found = false;
        for (Verdict v : {Verdict::match, Verdict::mismatch,
                          Verdict::known_mismatch, Verdict::singular_point}) {
            if (to_string(v) == f[7]) {
                r.verdict = v;
                found = true;
            }
        }
        if (!found) {
            throw FormatError("claims table: unknown verdict '" + f[7] + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace qcm
