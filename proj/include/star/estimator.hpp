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
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "star/errors.hpp"
#include "star/hubbard.hpp"
#include "star/injection.hpp"
#include "star/orderings.hpp"
#include "star/rus.hpp"
#include "star/trotter.hpp"

namespace star {

// ---------------------------------------------------------------------------
// Normalization H -> (pi / lambda) H.

inline double normalize(double value, double lambda) {
    if (!(lambda > 0)) {
        throw ValidationError("1-norm lambda must be positive");
    }
    return std::numbers::pi / lambda * value;
}

inline double normalize_w(double w, double lambda) {
    double s = normalize(1.0, lambda);
    return s * s * s * w;
}

inline double denormalize(double value, double lambda) {
    if (!(lambda > 0)) {
        throw ValidationError("1-norm lambda must be positive");
    }
    return lambda / std::numbers::pi * value;
}

// ---------------------------------------------------------------------------
// Multi-level QCELS parameters.

struct QcelsParams {
    double delta = 0.06;
    int n_pairs = 5;
    int n_samples = 100;
    /// Normalized precision.
    double eps = 0.0;
    int levels = 0;
    std::vector<double> tau;

    double tau_max() const { return tau.empty() ? 0.0 : tau.back(); }
};

/// J = ceil(log2(1/eps)) + 1 and tau_j = 2^(j-J) delta / (N eps).
inline QcelsParams make_qcels_params(double eps_norm, double delta, int n_pairs, int n_samples) {
    if (!(eps_norm > 0) || !(delta > 0) || n_pairs < 1 || n_samples < 0) {
        throw ValidationError("QCELS needs eps > 0, delta > 0, N >= 1, N_s >= 0");
    }
    QcelsParams p;
    p.delta = delta;
    p.n_pairs = n_pairs;
    p.n_samples = n_samples;
    p.eps = eps_norm;
    int c = static_cast<int>(std::ceil(std::log2(1.0 / eps_norm) - 1e-12));
    p.levels = std::max(c, 0) + 1;
    double top = delta / (n_pairs * eps_norm);
    for (int j = 1; j <= p.levels; j++) {
        p.tau.push_back(std::ldexp(top, j - p.levels));
    }
    return p;
}

/// N_j = ceil((tau_j / 2) sqrt(W / eps_T)), at least 1.
inline long long trotter_steps_per_level(double tau, double w_norm, double eps_trotter_norm) {
    if (!(w_norm > 0) || !(eps_trotter_norm > 0)) {
        throw ValidationError("W and eps_Trotter must be positive");
    }
    double bound = tau / 2.0 * std::sqrt(w_norm / eps_trotter_norm);
    auto steps = static_cast<long long>(std::ceil(bound * (1.0 - 1e-12)));
    return std::max(1LL, steps);
}

struct StepCounts {
    std::vector<long long> per_level;
    /// Integer counts: circuits (j, n) run n N_j steps, 2 N_s times each.
    long long total = 0;
    long long max = 0;
    /// Unrounded closed form (N_j taken as the real bound).
    double total_closed = 0.0;
    double max_closed = 0.0;
};

inline StepCounts total_steps(const QcelsParams &params, double w_norm, double eps_trotter_norm) {
    StepCounts out;
    double scale = std::sqrt(w_norm / eps_trotter_norm);
    long long circuits_per_level = static_cast<long long>(params.n_pairs) * (params.n_pairs - 1) / 2;
    for (double tau : params.tau) {
        long long nj = trotter_steps_per_level(tau, w_norm, eps_trotter_norm);
        out.per_level.push_back(nj);
        out.total += 2LL * params.n_samples * circuits_per_level * nj;
        out.total_closed += 2.0 * params.n_samples * circuits_per_level * (tau / 2.0 * scale);
    }
    if (!params.tau.empty()) {
        out.max = params.n_pairs * out.per_level.back();
        out.max_closed = params.n_pairs * params.tau.back() / 2.0 * scale;
    }
    return out;
}

/// Inverts N_max = (delta / 2 eps_Q) sqrt(W / eps_T) for W (normalized).
inline double calibrate_w(double n_max, double eps_qcels_norm, double eps_trotter_norm, double delta) {
    if (!(n_max > 0)) {
        throw ValidationError("calibration target N_max must be positive");
    }
    double r = 2.0 * eps_qcels_norm * n_max / delta;
    return eps_trotter_norm * r * r;
}

struct SplitResult {
    double eps_qcels_norm = 0.0;
    double eps_trotter_norm = 0.0;
    QcelsParams params;
    StepCounts steps;
};

/// Splits a normalized budget between QCELS and Trotter error to minimize
/// the closed-form N_total. Starts from the continuous optimum
/// eps_T = eps_Q / 2, then scans a grid over the budget line that includes
/// both corners and the points where J changes.
inline SplitResult optimize_split(double eps_targ_norm, double w_norm, double delta, int n_pairs, int n_samples) {
    if (!(eps_targ_norm > 0) || !(w_norm > 0)) {
        throw InfeasibleError("error budget and W must be positive");
    }
    auto evaluate = [&](double eq) {
        SplitResult r;
        r.eps_qcels_norm = eq;
        r.eps_trotter_norm = eps_targ_norm - eq;
        r.params = make_qcels_params(eq, delta, n_pairs, n_samples);
        r.steps = total_steps(r.params, w_norm, r.eps_trotter_norm);
        return r;
    };
    std::vector<double> candidates{2.0 / 3.0 * eps_targ_norm};
    const int grid = 2000;
    for (int i = 0; i <= grid; i++) {
        candidates.push_back(eps_targ_norm * (0.01 + 0.98 * i / grid));
    }
    for (int m = 0; m < 64; m++) {
        double edge = std::ldexp(1.0, -m);
        for (double f : {1.0 - 1e-9, 1.0 + 1e-9}) {
            double eq = edge * f;
            if (eq > 0.01 * eps_targ_norm && eq < 0.99 * eps_targ_norm) {
                candidates.push_back(eq);
            }
        }
    }
    std::optional<SplitResult> best;
    for (double eq : candidates) {
        SplitResult r = evaluate(eq);
        if (!best || r.steps.total_closed < best->steps.total_closed) {
            best = std::move(r);
        }
    }
    return *best;
}

// ---------------------------------------------------------------------------
// Error correction overhead.

/// Per-operation logical error 0.1 d (100 p)^((d+1)/2).
inline double p_logical(int d, double p_phys) { return 0.1 * d * std::pow(100.0 * p_phys, (d + 1) / 2.0); }

inline long long patch_count(int n) { return 4LL * n * n + 1; }

/// Smallest odd d >= 3 with p_logical(d) * patches * clocks < eps_logerr.
inline int choose_distance(int n, double clocks_per_circuit, double p_phys, double eps_logerr,
                           bool count_patches = true) {
    if (!(p_phys > 0 && p_phys < 0.01)) {
        throw InfeasibleError("p_phys must lie below the 1% threshold");
    }
    double n_op = clocks_per_circuit * (count_patches ? static_cast<double>(patch_count(n)) : 1.0);
    for (int d = 3; d <= 51; d += 2) {
        if (p_logical(d, p_phys) * n_op < eps_logerr) {
            return d;
        }
    }
    throw InfeasibleError("no code distance up to 51 meets the logical error budget");
}

/// Sampling overhead of a Hadamard test evolving for time tau.
inline double pec_circuit_factor(double tau, double p_phys, int k) {
    return std::exp(4.0 * 0.40 * k * std::numbers::pi * tau * p_phys);
}

/// Clocks of one controlled circuit with `steps` steps.
inline double circuit_clocks(double steps, double t_trotter) {
    return steps * t_trotter + controlled_overhead(steps);
}

/// Sum over all Hadamard-test circuits of samples x PEC factor x clocks x d
/// x cycle time.
inline double total_runtime_seconds(const QcelsParams &params, const std::vector<long long> &per_level,
                                    double t_trotter, int d, double p_phys, int k, double cycle_us = 1.0) {
    double total = 0.0;
    for (std::size_t j = 0; j < params.tau.size(); j++) {
        for (int m = 0; m < params.n_pairs; m++) {
            double tau = params.tau[j] * m / 2.0;
            double steps = static_cast<double>(m) * per_level[j];
            total += 2.0 * params.n_samples * pec_circuit_factor(tau, p_phys, k) * circuit_clocks(steps, t_trotter);
        }
    }
    return total * d * cycle_us * 1e-6;
}

/// Longest single circuit, counting Trotter steps only.
inline double max_runtime_seconds(double n_max, double t_trotter, int d, double cycle_us = 1.0) {
    return n_max * t_trotter * d * cycle_us * 1e-6;
}

inline long long physical_qubits(int n, int d) { return patch_count(n) * 2LL * d * d; }

// ---------------------------------------------------------------------------
// Configuration.

struct EstimateConfig {
    HubbardSpec model;
    // Injection: empty q_sizes means the shipped split for the chosen d.
    std::optional<int> k;
    std::vector<int> q_sizes;
    PassRateModel p_pass;
    int attempts_per_clock = 3;
    // Code.
    double p_phys = 1e-4;
    double eps_logerr = 0.01;
    std::optional<int> d_override;
    double cycle_time_us = 1.0;
    // QCELS.
    double delta = 0.06;
    int n_pairs = 5;
    int n_samples = 100;
    double eps_targ = 0.01;
    // Trotter.
    std::optional<double> w_norm;
    std::optional<double> calibrate_nmax;
    std::optional<double> t_trotter;
    std::string rus_model = "simulate";
    int runs = 200;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

namespace detail {

inline void reject_unknown(const nlohmann::json &obj, const std::string &where, std::initializer_list<const char *> keys) {
    if (!obj.is_object()) {
        throw ValidationError("config " + where + ": expected an object");
    }
    for (const auto &[key, value] : obj.items()) {
        bool known = false;
        for (const char *k : keys) {
            known |= key == k;
        }
        if (!known) {
            throw ValidationError("config " + where + "/" + key + ": unknown key");
        }
    }
}

template <typename T>
void read(const nlohmann::json &obj, const std::string &where, const char *key, T &dst) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        dst = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ValidationError("config " + where + "/" + key + ": wrong type");
    }
}

template <typename T>
void read(const nlohmann::json &obj, const std::string &where, const char *key, std::optional<T> &dst) {
    if (!obj.contains(key)) {
        return;
    }
    T v{};
    read(obj, where, key, v);
    dst = v;
}

}  // namespace detail

/// Parses {model, injection, code, qcels, trotter}; unknown keys are errors
/// naming the offending path.
inline EstimateConfig parse_estimate_config(const nlohmann::json &j) {
    using detail::read;
    EstimateConfig c;
    detail::reject_unknown(j, "", {"model", "injection", "code", "qcels", "trotter"});
    if (j.contains("model")) {
        const auto &m = j["model"];
        detail::reject_unknown(m, "/model", {"n", "t", "u"});
        read(m, "/model", "n", c.model.n);
        read(m, "/model", "t", c.model.t);
        read(m, "/model", "u", c.model.u);
    }
    if (j.contains("injection")) {
        const auto &m = j["injection"];
        detail::reject_unknown(m, "/injection", {"k", "q_sizes", "p_pass", "attempts_per_clock"});
        read(m, "/injection", "k", c.k);
        read(m, "/injection", "q_sizes", c.q_sizes);
        read(m, "/injection", "attempts_per_clock", c.attempts_per_clock);
        if (m.contains("p_pass")) {
            try {
                c.p_pass = PassRateModel::from_json(m["p_pass"]);
            } catch (const ValidationError &ex) {
                throw ValidationError(std::string("config /injection/p_pass: ") + ex.what());
            }
        }
    }
    if (j.contains("code")) {
        const auto &m = j["code"];
        detail::reject_unknown(m, "/code", {"p_phys", "eps_logerr", "d_override", "cycle_time_us"});
        read(m, "/code", "p_phys", c.p_phys);
        read(m, "/code", "eps_logerr", c.eps_logerr);
        read(m, "/code", "d_override", c.d_override);
        read(m, "/code", "cycle_time_us", c.cycle_time_us);
    }
    if (j.contains("qcels")) {
        const auto &m = j["qcels"];
        detail::reject_unknown(m, "/qcels", {"delta", "n_pairs", "n_samples", "eps_targ"});
        read(m, "/qcels", "delta", c.delta);
        read(m, "/qcels", "n_pairs", c.n_pairs);
        read(m, "/qcels", "n_samples", c.n_samples);
        read(m, "/qcels", "eps_targ", c.eps_targ);
    }
    if (j.contains("trotter")) {
        const auto &m = j["trotter"];
        detail::reject_unknown(m, "/trotter", {"w_norm", "calibrate_nmax", "clocks", "rus_model", "runs"});
        read(m, "/trotter", "w_norm", c.w_norm);
        read(m, "/trotter", "calibrate_nmax", c.calibrate_nmax);
        read(m, "/trotter", "clocks", c.t_trotter);
        read(m, "/trotter", "rus_model", c.rus_model);
        read(m, "/trotter", "runs", c.runs);
    }
    if (c.rus_model != "simulate" && c.rus_model != "rough") {
        throw ValidationError("config /trotter/rus_model: must be \"simulate\" or \"rough\"");
    }
    if (c.runs < 1) {
        throw ValidationError("config /trotter/runs: must be at least 1");
    }
    if (c.w_norm && !(*c.w_norm > 0)) {
        throw ValidationError("config /trotter/w_norm: must be positive");
    }
    if (!(c.eps_targ > 0)) {
        throw ValidationError("config /qcels/eps_targ: must be positive");
    }
    if (c.n_pairs < 2) {
        throw ValidationError("config /qcels/n_pairs: must be at least 2");
    }
    if (c.n_samples < 0) {
        throw ValidationError("config /qcels/n_samples: must be non-negative");
    }
    if (!(c.delta > 0)) {
        throw ValidationError("config /qcels/delta: must be positive");
    }
    if (c.attempts_per_clock < 1) {
        throw ValidationError("config /injection/attempts_per_clock: must be at least 1");
    }
    if (c.d_override && (*c.d_override < 3 || *c.d_override % 2 == 0)) {
        throw ValidationError("config /code/d_override: must be an odd distance >= 3");
    }
    if (!(c.cycle_time_us > 0)) {
        throw ValidationError("config /code/cycle_time_us: must be positive");
    }
    c.model.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Report.

struct EstimateReport {
    int n = 0;
    double lambda = 0.0;
    double eps_targ = 0.0;
    double eps_qcels = 0.0;
    double eps_trotter = 0.0;
    double eps_qcels_norm = 0.0;
    double eps_trotter_norm = 0.0;
    double w_norm_tilde = 0.0;
    std::string w_source;
    QcelsParams qcels;
    StepCounts steps;
    int d = 0;
    int k = 0;
    std::vector<int> q_sizes;
    double n_op = 0.0;
    double t_trotter = 0.0;
    std::string t_trotter_source;
    double rough_t_trotter = 0.0;
    double pec_factor_max = 1.0;
    double total_runtime_s = 0.0;
    double max_runtime_s = 0.0;
    double max_runtime_controlled_s = 0.0;
    long long n_qubit = 0;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["n"] = n;
        j["lambda"] = lambda;
        j["eps_targ"] = eps_targ;
        j["eps_qcels"] = eps_qcels;
        j["eps_trotter"] = eps_trotter;
        j["eps_qcels_norm"] = eps_qcels_norm;
        j["eps_trotter_norm"] = eps_trotter_norm;
        j["w_tilde"] = w_norm_tilde;
        j["w_source"] = w_source;
        j["qcels"] = {{"delta", qcels.delta},
                      {"n_pairs", qcels.n_pairs},
                      {"n_samples", qcels.n_samples},
                      {"levels", qcels.levels},
                      {"tau", qcels.tau}};
        j["n_j"] = steps.per_level;
        j["n_total"] = std::llround(steps.total_closed);
        j["n_max"] = std::llround(steps.max_closed);
        j["n_total_integer"] = steps.total;
        j["n_max_integer"] = steps.max;
        j["d"] = d;
        j["k"] = k;
        j["q_sizes"] = q_sizes;
        j["n_op"] = n_op;
        j["t_trotter"] = t_trotter;
        j["t_trotter_source"] = t_trotter_source;
        j["t_trotter_rough"] = rough_t_trotter;
        j["pec_factor_max"] = pec_factor_max;
        j["total_runtime_s"] = total_runtime_s;
        j["max_runtime_s"] = max_runtime_s;
        j["max_runtime_controlled_s"] = max_runtime_controlled_s;
        j["n_qubit"] = n_qubit;
        return j;
    }
};

/// Simulated mean step cost for the given injection setup and step angle.
inline double simulated_trotter_clocks(const HubbardSpec &spec, double dtau, const InjectionConfig &cfg, int runs,
                                       std::uint64_t seed, unsigned threads) {
    auto pair = shipped_orderings(spec.n);
    auto sched = compile_step(spec, dtau, StepMode::plain, pair,
                              [](const RusGroup &, std::size_t) { return Clock::clocks(1); });
    return simulate_step_clocks(sched, cfg, InjectionMode::adaptive, runs, seed, threads).mean;
}

inline EstimateReport build_report(const EstimateConfig &cfg) {
    cfg.model.validate();
    EstimateReport r;
    r.n = cfg.model.n;
    r.lambda = one_norm_formula(cfg.model);
    r.eps_targ = cfg.eps_targ;
    double eps_targ_norm = normalize(cfg.eps_targ, r.lambda);

    if (cfg.w_norm) {
        r.w_norm_tilde = normalize_w(*cfg.w_norm, r.lambda);
        r.w_source = "config";
    } else if (cfg.calibrate_nmax) {
        double eq = 2.0 / 3.0 * eps_targ_norm;
        double et = eps_targ_norm - eq;
        r.w_norm_tilde = calibrate_w(*cfg.calibrate_nmax, eq, et, cfg.delta);
        r.w_source = "calibrated";
    } else {
        throw InfeasibleError("no Trotter error norm: set trotter.w_norm or pass a calibration N_max");
    }

    SplitResult split = optimize_split(eps_targ_norm, r.w_norm_tilde, cfg.delta, cfg.n_pairs, cfg.n_samples);
    r.eps_qcels_norm = split.eps_qcels_norm;
    r.eps_trotter_norm = split.eps_trotter_norm;
    r.eps_qcels = denormalize(split.eps_qcels_norm, r.lambda);
    r.eps_trotter = denormalize(split.eps_trotter_norm, r.lambda);
    r.qcels = split.params;
    r.steps = split.steps;

    // First pass: injection assumed to finish within one clock.
    r.rough_t_trotter = trotter_clocks(r.n, [](int M, RotationBasis b) {
        return 1.0 + measurement_clocks(b) * expected_trials(M);
    });
    auto distance_for = [&](double t) {
        if (cfg.d_override) {
            return *cfg.d_override;
        }
        return choose_distance(r.n, circuit_clocks(static_cast<double>(r.steps.max), t), cfg.p_phys, cfg.eps_logerr);
    };
    r.d = distance_for(cfg.t_trotter.value_or(r.rough_t_trotter));

    auto injection_for = [&](int d) {
        InjectionConfig inj = InjectionConfig::for_distance(d, cfg.p_phys);
        if (!cfg.q_sizes.empty()) {
            inj.q_sizes = cfg.q_sizes;
            inj.k = static_cast<int>(cfg.q_sizes.size());
        }
        if (cfg.k && *cfg.k != inj.k) {
            throw InfeasibleError("injection k=" + std::to_string(*cfg.k) + " does not match the subset split for d=" +
                                  std::to_string(d));
        }
        inj.p_pass = cfg.p_pass;
        inj.attempts_per_clock = cfg.attempts_per_clock;
        try {
            inj.validate();
        } catch (const ValidationError &ex) {
            throw InfeasibleError(std::string("injection setup for d=") + std::to_string(d) + ": " + ex.what());
        }
        return inj;
    };

    InjectionConfig inj = injection_for(r.d);
    if (cfg.t_trotter) {
        r.t_trotter = *cfg.t_trotter;
        r.t_trotter_source = "config";
    } else if (cfg.rus_model == "rough") {
        r.t_trotter = r.rough_t_trotter;
        r.t_trotter_source = "rough";
    } else {
        // Largest per-step angle: the top level's step.
        double dtau = r.qcels.tau_max() / (2.0 * static_cast<double>(r.steps.per_level.back()));
        HubbardSpec scaled = cfg.model;
        scaled.t = normalize(cfg.model.t, r.lambda);
        scaled.u = normalize(cfg.model.u, r.lambda);
        for (int attempt = 0; attempt < 4; attempt++) {
            r.t_trotter = simulated_trotter_clocks(scaled, dtau, inj, cfg.runs, cfg.seed, cfg.threads);
            int needed = distance_for(r.t_trotter);
            if (needed <= r.d) {
                break;
            }
            r.d = needed;
            inj = injection_for(r.d);
        }
        r.t_trotter_source = "simulated";
    }
    r.k = inj.k;
    r.q_sizes = inj.q_sizes;
    double longest = circuit_clocks(static_cast<double>(r.steps.max), r.t_trotter);
    r.n_op = longest * static_cast<double>(patch_count(r.n));
    r.pec_factor_max = pec_circuit_factor(r.qcels.tau_max() * (r.qcels.n_pairs - 1) / 2.0, cfg.p_phys, r.k);
    r.total_runtime_s =
        total_runtime_seconds(r.qcels, r.steps.per_level, r.t_trotter, r.d, cfg.p_phys, r.k, cfg.cycle_time_us);
    r.max_runtime_s = max_runtime_seconds(static_cast<double>(r.steps.max), r.t_trotter, r.d, cfg.cycle_time_us);
    r.max_runtime_controlled_s = longest * r.d * cfg.cycle_time_us * 1e-6;
    r.n_qubit = physical_qubits(r.n, r.d);
    return r;
}

}  // namespace star
