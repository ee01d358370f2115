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

#include <gtest/gtest.h>

#include "star/estimator.hpp"

using namespace star;

namespace {

struct Size {
    int n;
    double lambda;
    double n_max;
    double t_trotter;
    int d;
};

// Reference per-size inputs: 1-norm, longest-circuit steps, clocks per step, distance.
const Size kSizes[] = {
    {4, 64, 3397, 248.355, 9},
    {6, 156, 5051, 307.51, 11},
    {8, 288, 6750, 359.51, 11},
    {10, 460, 8538, 404.25, 11},
};

}  // namespace

TEST(normalize, scales) {
    EXPECT_DOUBLE_EQ(normalize(0.01, std::numbers::pi), 0.01);
    EXPECT_NEAR(normalize(0.00667, 64), std::numbers::pi / 64 * 0.00667, 1e-18);
    EXPECT_NEAR(normalize(0.00667, 64), 3.274e-4, 1e-7);
    EXPECT_NEAR(normalize_w(5.0, 64) / 5.0, std::pow(std::numbers::pi / 64, 3), 1e-18);
    EXPECT_NEAR(denormalize(normalize(0.3, 17.0), 17.0), 0.3, 1e-15);
    EXPECT_THROW(normalize(1.0, 0.0), ValidationError);
}

TEST(qcels_params, time_identity) {
    auto p = make_qcels_params(0.1, 0.06, 5, 100);
    EXPECT_EQ(p.levels, 5);
    EXPECT_NEAR(p.tau.back(), 0.12, 1e-15);
    EXPECT_NEAR(p.n_pairs * p.tau.back(), 0.6, 1e-15);
    for (double eps : {0.3, 0.01, 3.3e-4, 1e-5}) {
        auto q = make_qcels_params(eps, 0.06, 5, 100);
        EXPECT_NEAR(q.n_pairs * q.tau_max(), 0.06 / eps, 1e-12 * 0.06 / eps);
        EXPECT_EQ(q.levels, static_cast<int>(std::ceil(std::log2(1.0 / eps))) + 1);
        for (std::size_t j = 1; j < q.tau.size(); j++) {
            EXPECT_DOUBLE_EQ(q.tau[j], 2.0 * q.tau[j - 1]);
        }
    }
    EXPECT_THROW(make_qcels_params(0.0, 0.06, 5, 100), ValidationError);
}

TEST(steps, per_level) {
    EXPECT_EQ(trotter_steps_per_level(0.0, 1.0, 1.0), 1);
    EXPECT_EQ(trotter_steps_per_level(2.0, 0.3, 0.3), 1);
    EXPECT_EQ(trotter_steps_per_level(200.0, 0.3, 0.3), 100);
    EXPECT_EQ(trotter_steps_per_level(400.0, 0.3, 0.3), 200);
    EXPECT_EQ(trotter_steps_per_level(201.0, 0.3, 0.3), 101);
}

TEST(steps, ratio_matches_closed_form) {
    for (double eps : {1e-2, 3.3e-4, 1.1e-4}) {
        auto p = make_qcels_params(eps, 0.06, 5, 100);
        auto s = total_steps(p, 0.2, eps / 2.0);
        EXPECT_NEAR(s.total_closed / s.max_closed, 800.0 * (1.0 - std::ldexp(1.0, -p.levels)), 1e-9);
    }
    auto none = total_steps(make_qcels_params(1e-3, 0.06, 5, 0), 0.2, 1e-3);
    EXPECT_EQ(none.total, 0);
    EXPECT_EQ(none.total_closed, 0.0);
}

TEST(steps, reference_ratios) {
    EXPECT_NEAR(2717609.0 / 3397.0, 800.0, 0.05 / 100 * 800.0);
    EXPECT_NEAR(5399835.0 / 6750.0, 800.0, 0.05 / 100 * 800.0);
}

TEST(split, continuous_optimum_by_grid) {
    // N_total ~ 1 / (eps_Q sqrt(eps_T)) on eps_Q + eps_T = 1.
    double best_x = 0.0;
    double best = 1e300;
    for (int i = 1; i < 100000; i++) {
        double x = i / 100000.0;
        double f = 1.0 / (x * std::sqrt(1.0 - x));
        if (f < best) {
            best = f;
            best_x = x;
        }
    }
    EXPECT_NEAR(best_x, 2.0 / 3.0, 1e-4);
}

TEST(split, respects_budget_and_beats_corners) {
    for (double budget : {1e-3, 4.9e-4, 2e-4}) {
        for (double w : {0.01, 0.2, 3.0}) {
            auto r = optimize_split(budget, w, 0.06, 5, 100);
            EXPECT_LE(r.eps_qcels_norm + r.eps_trotter_norm, budget * (1 + 1e-12));
            EXPECT_GT(r.eps_trotter_norm, 0.0);
            for (double frac : {0.01, 0.99}) {
                double eq = frac * budget;
                auto corner = total_steps(make_qcels_params(eq, 0.06, 5, 100), w, budget - eq);
                EXPECT_LE(r.steps.total_closed, corner.total_closed);
            }
        }
    }
}

TEST(split, budget_scaling) {
    // Fixed 2:1 split, J effects removed via the (1 - 2^-J) factor.
    auto closed = [](double budget) {
        double eq = 2.0 / 3.0 * budget;
        auto p = make_qcels_params(eq, 0.06, 5, 100);
        return total_steps(p, 0.2, budget - eq).total_closed / (1.0 - std::ldexp(1.0, -p.levels));
    };
    EXPECT_NEAR(closed(4e-3) / closed(1e-3), 1.0 / 8.0, 1e-12);
}

TEST(split, calibrated_totals_reproduce_table) {
    const double reference[] = {2717609, 4040743, 5399835, 6830416};
    for (int i = 0; i < 4; i++) {
        const auto &s = kSizes[i];
        double budget = normalize(0.01, s.lambda);
        double w = calibrate_w(s.n_max, 2.0 / 3.0 * budget, budget / 3.0, 0.06);
        auto r = optimize_split(budget, w, 0.06, 5, 100);
        EXPECT_NEAR(r.steps.total_closed, reference[i], 0.01 * reference[i]) << "n=" << s.n;
        EXPECT_NEAR(r.steps.max_closed, s.n_max, 1e-6 * s.n_max);
        EXPECT_NEAR(r.eps_qcels_norm / r.eps_trotter_norm, 2.0, 1e-9);
    }
}

TEST(distance, formula) {
    EXPECT_NEAR(p_logical(9, 1e-4), 9e-11, 1e-24);
    EXPECT_EQ(patch_count(4), 65);
    for (const auto &s : kSizes) {
        double clocks = circuit_clocks(s.n_max, s.t_trotter);
        EXPECT_EQ(choose_distance(s.n, clocks, 1e-4, 0.01), s.d) << "n=" << s.n;
    }
    // Counting clocks only (no patch factor) undershoots for 4x4.
    EXPECT_EQ(choose_distance(4, circuit_clocks(3397, 248.355), 1e-4, 0.01, false), 7);
    EXPECT_THROW(choose_distance(4, 1e6, 0.02, 0.01), InfeasibleError);
}

TEST(pec, circuit_factor) {
    EXPECT_DOUBLE_EQ(pec_circuit_factor(0.0, 1e-4, 3), 1.0);
    EXPECT_NEAR(pec_circuit_factor(100.0, 1e-4, 5), std::exp(0.2513274), 1e-6);
    EXPECT_NEAR(pec_circuit_factor(100.0, 1e-4, 5), 1.2857, 1e-4);
    double prev = 0.0;
    for (double tau = 0; tau < 1000; tau += 37) {
        double f = pec_circuit_factor(tau, 1e-4, 3);
        EXPECT_GT(f, prev);
        prev = f;
    }
}

TEST(runtime, final_table) {
    const double max_rt[] = {7.59, 17.09, 26.69, 37.97};
    const long long qubits[] = {10530, 35090, 62194, 97042};
    for (int i = 0; i < 4; i++) {
        const auto &s = kSizes[i];
        EXPECT_NEAR(max_runtime_seconds(s.n_max, s.t_trotter, s.d), max_rt[i], 0.01 * max_rt[i]);
        EXPECT_EQ(physical_qubits(s.n, s.d), qubits[i]);
    }
}

TEST(runtime, noiseless_total_is_unweighted_sum) {
    auto p = make_qcels_params(3e-4, 0.06, 5, 100);
    auto s = total_steps(p, 0.2, 1.5e-4);
    double plain = 0.0;
    for (std::size_t j = 0; j < p.tau.size(); j++) {
        for (int m = 0; m < p.n_pairs; m++) {
            plain += 2.0 * p.n_samples * circuit_clocks(static_cast<double>(m * s.per_level[j]), 250.0);
        }
    }
    EXPECT_NEAR(total_runtime_seconds(p, s.per_level, 250.0, 9, 0.0, 3), plain * 9e-6, 1e-9 * plain);
}

TEST(config, rejects_unknown_keys_with_path) {
    auto j = nlohmann::json::parse(R"({"model": {"n": 4, "spin": 2}})");
    try {
        parse_estimate_config(j);
        FAIL() << "expected a validation error";
    } catch (const ValidationError &ex) {
        EXPECT_NE(std::string(ex.what()).find("/model/spin"), std::string::npos);
    }
    EXPECT_THROW(parse_estimate_config(nlohmann::json::parse(R"({"qcels": {"eps_targ": "x"}})")), ValidationError);
    EXPECT_THROW(parse_estimate_config(nlohmann::json::parse(R"({"extra": 1})")), ValidationError);
}

TEST(report, requires_trotter_norm) {
    EstimateConfig cfg;
    EXPECT_THROW(build_report(cfg), InfeasibleError);
}

TEST(report, calibrated_4x4) {
    EstimateConfig cfg;
    cfg.calibrate_nmax = 3397;
    cfg.t_trotter = 248.355;
    auto r = build_report(cfg);
    EXPECT_EQ(r.d, 9);
    EXPECT_EQ(r.k, 3);
    EXPECT_EQ(r.n_qubit, 10530);
    EXPECT_EQ(r.qcels.levels, 13);
    EXPECT_NEAR(r.steps.total_closed, 2717609, 0.01 * 2717609);
    EXPECT_NEAR(r.total_runtime_s, 7158.25, 0.10 * 7158.25);
    EXPECT_NEAR(r.max_runtime_s, 7.59, 0.01 * 7.59);
    // Pure function of its inputs.
    EXPECT_EQ(r.to_json().dump(), build_report(cfg).to_json().dump());
}

TEST(report, rough_model_runs_without_simulation) {
    EstimateConfig cfg;
    cfg.model.n = 6;
    cfg.calibrate_nmax = 5051;
    cfg.rus_model = "rough";
    auto r = build_report(cfg);
    EXPECT_EQ(r.t_trotter_source, "rough");
    EXPECT_EQ(r.d, 11);
    EXPECT_EQ(r.k, 5);
}
