// Copyright 2026 The star-trotter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "star/estimator.hpp"
#include "star/orderings.hpp"
#include "star/qcels.hpp"
#include "star/rus.hpp"
#include "star/trotter.hpp"

namespace star::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kInfeasible = 2 };

/// Writes through a sibling temp file and renames it into place.
inline void write_atomic(const std::filesystem::path &path, const std::string &content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw ValidationError("cannot write " + tmp.string());
        }
        f << content;
        f.flush();
        if (!f) {
            throw ValidationError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ValidationError("cannot move output into " + path.string());
    }
}

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Flat "key: value" rendering for --format text.
inline std::string to_text(const nlohmann::ordered_json &j) {
    std::ostringstream ss;
    for (const auto &[key, value] : j.items()) {
        ss << key << ": ";
        if (value.is_number_float()) {
            ss << fmt_double(value.get<double>());
        } else if (value.is_string()) {
            ss << value.get<std::string>();
        } else {
            ss << value.dump();
        }
        ss << "\n";
    }
    return ss.str();
}

struct Globals {
    std::uint64_t seed = 1;
    std::string out;
    std::string format;
    unsigned threads = 1;

    unsigned workers() const { return resolve_threads(threads); }
};

/// Chooses the rendering of a command that offers a JSON summary and a CSV
/// series; `native` is used when --format is not given.
struct Rendered {
    std::string json;
    std::string csv;
    std::string text;

    std::string pick(const std::string &format, const std::string &native) const {
        const std::string &f = format.empty() ? native : format;
        if (f == "json") {
            return json;
        }
        if (f == "csv") {
            if (csv.empty()) {
                throw ValidationError("--format csv is not available for this command");
            }
            return csv;
        }
        return text;
    }
};

inline void emit(const Globals &g, const std::string &content, std::ostream &out) {
    if (g.out.empty()) {
        out << content;
    } else {
        write_atomic(g.out, content);
    }
}

inline InjectionConfig injection_from_flags(int d, double p_phys, double p_pass, const std::string &p_pass_table,
                                            int attempts) {
    InjectionConfig cfg = InjectionConfig::for_distance(d, p_phys);
    cfg.p_pass = p_pass_table.empty() ? PassRateModel::constant(p_pass) : PassRateModel::load(p_pass_table);
    cfg.attempts_per_clock = attempts;
    cfg.validate();
    return cfg;
}

inline RotationBasis parse_basis(const std::string &s) {
    if (s == "Z") {
        return RotationBasis::Z;
    }
    if (s == "ZZ") {
        return RotationBasis::ZZ;
    }
    throw ValidationError("basis must be Z or ZZ");
}

inline InjectionMode parse_mode(const std::string &s) {
    if (s == "naive") {
        return InjectionMode::naive;
    }
    if (s == "adaptive") {
        return InjectionMode::adaptive;
    }
    throw ValidationError("injection mode must be naive or adaptive");
}

inline nlohmann::ordered_json qcels_params_json(const QcelsParams &p) {
    nlohmann::ordered_json j;
    j["eps"] = p.eps;
    j["delta"] = p.delta;
    j["n_pairs"] = p.n_pairs;
    j["n_samples"] = p.n_samples;
    j["levels"] = p.levels;
    j["tau"] = p.tau;
    return j;
}

// ---------------------------------------------------------------------------
// Subcommands.

inline Rendered avg_trials(int m_max) {
    if (m_max < 1) {
        throw ValidationError("--m-max must be at least 1");
    }
    Rendered r;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    std::ostringstream csv;
    std::ostringstream text;
    csv << "M,avg_trials\n";
    for (int m = 1; m <= m_max; m++) {
        double k = expected_trials(m);
        csv << m << "," << fmt_double(k) << "\n";
        text << "M=" << m << "  <K>=" << fmt_double(k) << "\n";
        rows.push_back({{"M", m}, {"avg_trials", k}});
    }
    r.json = rows.dump(2) + "\n";
    r.csv = csv.str();
    r.text = text.str();
    return r;
}

struct RusFlags {
    int m = 32;
    std::string basis = "Z";
    double angle = 1e-4;
    std::string mode = "adaptive";
    int runs = 1000;
    int d = 9;
    double p_phys = 1e-4;
    double p_pass = 1.0;
    std::string p_pass_table;
    int attempts = 3;
    std::string histogram;
};

inline Rendered simulate_rus(const RusFlags &f, const Globals &g) {
    if (f.m < 1) {
        throw ValidationError("--m must be at least 1");
    }
    auto cfg = injection_from_flags(f.d, f.p_phys, f.p_pass, f.p_pass_table, f.attempts);
    auto stats = simulate_parallel_rus(f.m, parse_basis(f.basis), f.angle, cfg, parse_mode(f.mode), f.runs, g.seed,
                                       g.workers());
    Rendered r;
    std::ostringstream csv;
    csv << "clock,count\n";
    for (const auto &[clock, count] : stats.histogram) {
        csv << clock << "," << count << "\n";
    }
    r.csv = csv.str();
    nlohmann::ordered_json j;
    j["mean"] = stats.mean;
    j["p50"] = stats.p50;
    j["p95"] = stats.p95;
    j["max"] = stats.max;
    j["runs"] = stats.runs();
    j["seed"] = stats.seed;
    j["M"] = f.m;
    j["basis"] = f.basis;
    j["mode"] = f.mode;
    j["stddev"] = stats.stddev;
    j["avg_trials"] = expected_trials(f.m);
    r.json = j.dump(2) + "\n";
    r.text = to_text(j);
    if (!f.histogram.empty()) {
        write_atomic(f.histogram, r.csv);
    }
    return r;
}

struct TrotterFlags {
    int n = 4;
    double t = 1.0;
    double u = 4.0;
    double dtau = 0.05;
    std::string mode = "plain";
    std::string ordering;
    std::string durations = "sampled";
    double p_pass = 1.0;
    std::string timeline;
};

inline Rendered compile_trotter(const TrotterFlags &f, const Globals &g) {
    HubbardSpec spec{f.n, f.t, f.u};
    spec.validate();
    StepMode mode;
    if (f.mode == "plain") {
        mode = StepMode::plain;
    } else if (f.mode == "controlled") {
        mode = StepMode::controlled;
    } else {
        throw ValidationError("--mode must be plain or controlled");
    }
    OrderingPair pair = f.ordering.empty() ? shipped_orderings(f.n) : load_ordering_pair(f.ordering);
    RusDurationFn durations;
    if (f.durations == "sampled") {
        InjectionConfig cfg = InjectionConfig::for_distance(9);
        cfg.p_pass = PassRateModel::constant(f.p_pass);
        durations = sampled_durations(cfg, InjectionMode::adaptive, g.seed);
    } else if (f.durations == "rough") {
        durations = [](const RusGroup &grp, std::size_t) {
            return Clock::ceil_of(rough_rus_clocks(grp.count, grp.basis));
        };
    } else {
        throw ValidationError("--durations must be sampled or rough");
    }
    auto sched = compile_step(spec, f.dtau, mode, pair, durations);
    if (auto conflict = validate(sched.timeline, build_grid(f.n, mode == StepMode::controlled, pair.order_a))) {
        throw InfeasibleError("compiled timeline has a conflict at clock " + to_string(conflict->clock) + " on " +
                              to_string(conflict->coord) + ": " + conflict->reason);
    }
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const RusGroup *grp : sched.rus_groups()) {
        groups.push_back({{"count", grp->count}, {"basis", basis_name(grp->basis)}, {"angle", grp->angle}});
    }
    nlohmann::ordered_json j;
    j["n"] = f.n;
    j["mode"] = f.mode;
    j["L"] = sched.fswap_layers;
    j["rus_groups"] = groups;
    j["fixed_clocks"] = clock_json(sched.fixed_clocks());
    j["formula_clocks"] = 14 * f.n + 55 + (mode == StepMode::controlled ? 18 : 0);
    j["total_clocks"] = clock_json(sched.total());
    j["ops"] = sched.timeline.ops().size();
    Rendered r;
    r.json = j.dump(2) + "\n";
    r.text = to_text(j);
    std::ostringstream csv;
    csv << "kind,label,start,end,fixed,rus_groups\n";
    for (const auto &b : sched.batches) {
        csv << batch_kind_name(b.kind) << "," << b.label << "," << to_string(b.start) << "," << to_string(b.end)
            << "," << to_string(b.fixed) << "," << b.rus_groups.size() << "\n";
    }
    r.csv = csv.str();
    if (!f.timeline.empty()) {
        write_atomic(f.timeline, to_jsonl(sched.timeline));
    }
    return r;
}

struct SerialFlags {
    std::vector<int> n{4, 6, 8, 10};
    std::string parallel = "simulate";
    double dtau = 0.05;
    int runs = 200;
    double p_pass = 1.0;
};

inline Rendered compare_serial(const SerialFlags &f, const Globals &g) {
    Rendered r;
    std::ostringstream csv;
    csv << "n,serial_clocks,parallel_clocks,reduction_pct\n";
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int n : f.n) {
        HubbardSpec spec{n, 1.0, 4.0};
        spec.validate();
        double parallel;
        if (f.parallel == "simulate") {
            InjectionConfig cfg = InjectionConfig::for_distance(9);
            cfg.p_pass = PassRateModel::constant(f.p_pass);
            parallel = simulated_trotter_clocks(spec, f.dtau, cfg, f.runs, g.seed, g.workers());
        } else if (f.parallel == "rough") {
            parallel = trotter_clocks(n, rough_rus_clocks);
        } else {
            throw ValidationError("--parallel must be simulate or rough");
        }
        long long serial = serial_clocks(n);
        double reduction = 100.0 * (1.0 - parallel / static_cast<double>(serial));
        csv << n << "," << serial << "," << fmt_double(parallel) << "," << fmt_double(reduction) << "\n";
        rows.push_back({{"n", n}, {"serial_clocks", serial}, {"parallel_clocks", parallel}, {"reduction_pct", reduction}});
    }
    r.csv = csv.str();
    r.json = rows.dump(2) + "\n";
    r.text = r.csv;
    return r;
}

struct EstimateFlags {
    std::optional<int> n;
    std::string config;
    std::optional<double> calibrate_nmax;
};

inline Rendered estimate(const EstimateFlags &f, const Globals &g) {
    nlohmann::json raw = nlohmann::json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) {
            throw ValidationError("cannot open config " + f.config);
        }
        try {
            raw = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error &ex) {
            throw ValidationError("config " + f.config + ": " + ex.what());
        }
    }
    EstimateConfig cfg = parse_estimate_config(raw);
    if (f.n) {
        cfg.model.n = *f.n;
        cfg.model.validate();
    }
    if (f.calibrate_nmax) {
        cfg.calibrate_nmax = f.calibrate_nmax;
    }
    cfg.seed = g.seed;
    cfg.threads = g.workers();
    auto j = build_report(cfg).to_json();
    Rendered r;
    r.json = j.dump(2) + "\n";
    r.text = to_text(j);
    return r;
}

struct QcelsFlags {
    std::string spectrum;
    double eps = 0.01;
    double delta = 0.06;
    int pairs = 5;
    int samples = 100;
    int trials = 100;
};

inline SyntheticSpectrum default_spectrum() { return {{-0.5, 0.2, 0.9}, {0.8, 0.1, 0.1}}; }

inline Rendered qcels_demo_cmd(const QcelsFlags &f, const Globals &g) {
    SyntheticSpectrum spectrum = f.spectrum.empty() ? default_spectrum() : SyntheticSpectrum::load(f.spectrum);
    spectrum.validate();
    auto demo = qcels_demo(spectrum, f.eps, f.delta, f.pairs, f.samples, f.trials, g.seed, g.workers());
    nlohmann::ordered_json j;
    j["success_rate"] = demo.success_rate;
    j["median_error"] = demo.median_error;
    j["params"] = qcels_params_json(demo.params);
    j["trials"] = f.trials;
    j["seed"] = g.seed;
    j["target_phase"] = spectrum.dominant_phase();
    Rendered r;
    r.json = j.dump(2) + "\n";
    r.text = to_text(j);
    std::ostringstream csv;
    csv << "trial,error\n";
    for (std::size_t i = 0; i < demo.errors.size(); i++) {
        csv << i << "," << fmt_double(demo.errors[i]) << "\n";
    }
    r.csv = csv.str();
    return r;
}

// ---------------------------------------------------------------------------
// Entry point.

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 invalid input, 2 infeasible model.
inline int run(std::vector<std::string> args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Lattice-surgery Trotter compiler and resource estimator for the 2D Hubbard model.", "star"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Base seed for Monte Carlo runs")->capture_default_str();
    app.add_option("--out", g.out, "Write the main output to this file (atomically) instead of stdout");
    app.add_option("--format", g.format, "Output format (default depends on the command)")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--threads", g.threads, "Worker threads, 0 = all cores; STAR_THREADS overrides")
        ->capture_default_str();

    std::function<Rendered()> action;
    std::string native;

    int m_max = 64;
    auto *avg = app.add_subcommand("avg-trials", "Expected trials <K>_M of M parallel RUS processes");
    avg->add_option("--m-max", m_max, "Largest M")->capture_default_str();
    avg->callback([&] {
        native = "csv";
        action = [&] { return avg_trials(m_max); };
    });

    RusFlags rf;
    auto *rus = app.add_subcommand("simulate-rus", "Monte Carlo of M parallel RUS rotations");
    rus->add_option("--m", rf.m, "Number of parallel rotations")->capture_default_str();
    rus->add_option("--basis", rf.basis, "Z or ZZ")->capture_default_str();
    rus->add_option("--angle", rf.angle, "Target rotation angle")->capture_default_str();
    rus->add_option("--mode", rf.mode, "naive or adaptive injection")->capture_default_str();
    rus->add_option("--runs", rf.runs, "Monte Carlo runs")->capture_default_str();
    rus->add_option("--d", rf.d, "Code distance")->capture_default_str();
    rus->add_option("--p-phys", rf.p_phys, "Physical error rate")->capture_default_str();
    rus->add_option("--p-pass", rf.p_pass, "Constant post-selection pass rate")->capture_default_str();
    rus->add_option("--p-pass-table", rf.p_pass_table, "JSON file of {\"d,p_phys\": rate}");
    rus->add_option("--attempts", rf.attempts, "Injection attempts per patch per clock")->capture_default_str();
    rus->add_option("--histogram", rf.histogram, "Also write the histogram CSV here");
    rus->callback([&] {
        native = "json";
        action = [&] { return simulate_rus(rf, g); };
    });

    TrotterFlags tf;
    auto *trot = app.add_subcommand("compile-trotter", "Compile one second-order Trotter step");
    trot->add_option("--n", tf.n, "Lattice side")->capture_default_str();
    trot->add_option("--t", tf.t, "Hopping strength")->capture_default_str();
    trot->add_option("--u", tf.u, "Onsite interaction")->capture_default_str();
    trot->add_option("--dtau", tf.dtau, "Step size")->capture_default_str();
    trot->add_option("--mode", tf.mode, "plain or controlled")->capture_default_str();
    trot->add_option("--ordering", tf.ordering, "Ordering pair JSON (default: shipped pair)");
    trot->add_option("--durations", tf.durations, "RUS group durations: sampled or rough")->capture_default_str();
    trot->add_option("--p-pass", tf.p_pass, "Pass rate for sampled durations")->capture_default_str();
    trot->add_option("--timeline", tf.timeline, "Also write the timeline as JSON lines here");
    trot->callback([&] {
        native = "json";
        action = [&] { return compile_trotter(tf, g); };
    });

    SerialFlags sf;
    auto *ser = app.add_subcommand("compare-serial", "Serial versus parallel clocks per Trotter step");
    ser->add_option("--n", sf.n, "Lattice sides")->capture_default_str();
    ser->add_option("--parallel", sf.parallel, "Parallel cost: simulate or rough")->capture_default_str();
    ser->add_option("--dtau", sf.dtau, "Step size for the simulated cost")->capture_default_str();
    ser->add_option("--runs", sf.runs, "Monte Carlo runs per size")->capture_default_str();
    ser->add_option("--p-pass", sf.p_pass, "Constant pass rate")->capture_default_str();
    ser->callback([&] {
        native = "csv";
        action = [&] { return compare_serial(sf, g); };
    });

    EstimateFlags ef;
    auto *est = app.add_subcommand("estimate", "End-to-end phase-estimation resource report");
    est->add_option("--n", ef.n, "Lattice side (overrides model.n)");
    est->add_option("--config", ef.config, "Config JSON");
    est->add_option("--calibrate-nmax", ef.calibrate_nmax, "Calibrate the Trotter error norm from this N_max");
    est->callback([&] {
        native = "json";
        action = [&] { return estimate(ef, g); };
    });

    QcelsFlags qf;
    auto *qc = app.add_subcommand("qcels-demo", "Multi-level QCELS on a synthetic spectrum");
    qc->add_option("--spectrum", qf.spectrum, "Spectrum JSON {phases, weights} (default: built-in)");
    qc->add_option("--eps", qf.eps, "Target precision")->capture_default_str();
    qc->add_option("--delta", qf.delta, "Time-scale parameter")->capture_default_str();
    qc->add_option("--pairs", qf.pairs, "Time points per level")->capture_default_str();
    qc->add_option("--samples", qf.samples, "Shots per time point")->capture_default_str();
    qc->add_option("--trials", qf.trials, "Independent trials")->capture_default_str();
    qc->callback([&] {
        native = "json";
        action = [&] { return qcels_demo_cmd(qf, g); };
    });

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp &ex) {
        app.exit(ex, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp &ex) {
        app.exit(ex, out, err);
        return kOk;
    } catch (const CLI::ParseError &ex) {
        app.exit(ex, out, err);
        return kValidation;
    }

    try {
        Rendered r = action();
        emit(g, r.pick(g.format, native), out);
    } catch (const InfeasibleError &ex) {
        err << "error: " << ex.what() << "\n";
        return kInfeasible;
    } catch (const ValidationError &ex) {
        err << "error: " << ex.what() << "\n";
        return kValidation;
    } catch (const std::exception &ex) {
        err << "error: " << ex.what() << "\n";
        return kValidation;
    }
    return kOk;
}

}  // namespace star::cli
