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
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "star/errors.hpp"
#include "star/estimator.hpp"
#include "star/parallel.hpp"
#include "star/rng.hpp"

namespace star {

using cplx = std::complex<double>;

/// Eigenphases in [-pi, pi) with overlap weights summing to one.
struct SyntheticSpectrum {
    std::vector<double> phases;
    std::vector<double> weights;

    double dominant_phase() const {
        return phases[static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin())];
    }
    double dominant_weight() const { return *std::max_element(weights.begin(), weights.end()); }

    void validate() const {
        if (phases.empty() || phases.size() != weights.size()) {
            throw ValidationError("spectrum needs matching, non-empty phase and weight lists");
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < phases.size(); i++) {
            if (!(phases[i] >= -std::numbers::pi && phases[i] < std::numbers::pi)) {
                throw ValidationError("eigenphases must lie in [-pi, pi)");
            }
            if (!(weights[i] >= 0)) {
                throw ValidationError("weights must be non-negative");
            }
            sum += weights[i];
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("weights must sum to 1");
        }
    }

    static SyntheticSpectrum from_json(const nlohmann::json &j) {
        if (!j.is_object()) {
            throw ValidationError("spectrum file: expected an object with \"phases\" and \"weights\"");
        }
        for (const auto &[key, value] : j.items()) {
            if (key != "phases" && key != "weights") {
                throw ValidationError("spectrum file /" + key + ": unknown key");
            }
        }
        SyntheticSpectrum s;
        try {
            s.phases = j.at("phases").get<std::vector<double>>();
            s.weights = j.at("weights").get<std::vector<double>>();
        } catch (const nlohmann::json::exception &ex) {
            throw ValidationError(std::string("spectrum file: ") + ex.what());
        }
        s.validate();
        return s;
    }

    static SyntheticSpectrum load(const std::filesystem::path &path) {
        std::ifstream in(path);
        if (!in) {
            throw ValidationError("cannot open spectrum file " + path.string());
        }
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error &ex) {
            throw ValidationError("spectrum file " + path.string() + ": " + ex.what());
        }
    }
};

struct SignalSeries {
    std::vector<double> times;
    std::vector<cplx> values;
};

/// Complex normal sample with E|z|^2 = scale^2 (Box-Muller, portable).
inline cplx complex_gaussian(double scale, std::mt19937_64 &rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    double radius = std::sqrt(-std::log1p(-u1)) * scale;
    double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Z_n = sum_i p_i exp(-i lambda_i n tau) + noise, n = 0..N-1.
inline SignalSeries synth_signal(const SyntheticSpectrum &spectrum, double tau, int n_points, double noise_scale,
                                 std::mt19937_64 &rng) {
    if (n_points < 2) {
        throw ValidationError("need at least two time points");
    }
    SignalSeries s;
    for (int n = 0; n < n_points; n++) {
        double t = n * tau;
        cplx z = 0.0;
        for (std::size_t i = 0; i < spectrum.phases.size(); i++) {
            z += spectrum.weights[i] * std::polar(1.0, -spectrum.phases[i] * t);
        }
        if (noise_scale > 0) {
            z += complex_gaussian(noise_scale, rng);
        }
        s.times.push_back(t);
        s.values.push_back(z);
    }
    return s;
}

inline SignalSeries synth_signal(const SyntheticSpectrum &spectrum, double tau, int n_points, double noise_scale,
                                 std::uint64_t seed) {
    auto rng = run_rng(seed, 0);
    return synth_signal(spectrum, tau, n_points, noise_scale, rng);
}

/// Best amplitude for a fixed phase: r = mean(Z_n exp(+i t_n theta)).
inline cplx qcels_amplitude(const SignalSeries &s, double theta) {
    cplx sum = 0.0;
    for (std::size_t n = 0; n < s.times.size(); n++) {
        sum += s.values[n] * std::polar(1.0, s.times[n] * theta);
    }
    return sum / static_cast<double>(s.times.size());
}

/// L(r, theta) = (1/N) sum |Z_n - r exp(-i t_n theta)|^2 at the optimal r.
inline double qcels_loss(const SignalSeries &s, double theta) {
    cplx r = qcels_amplitude(s, theta);
    double sum = 0.0;
    for (std::size_t n = 0; n < s.times.size(); n++) {
        sum += std::norm(s.values[n] - r * std::polar(1.0, -s.times[n] * theta));
    }
    return sum / static_cast<double>(s.times.size());
}

struct QcelsFit {
    cplx amplitude;
    double theta = 0.0;
    double loss = 0.0;
};

/// Dense grid over [lo, hi], then golden-section search between the grid
/// neighbours of the best point.
inline QcelsFit qcels_fit(const SignalSeries &s, double lo, double hi, int grid = 200) {
    if (s.times.empty()) {
        throw ValidationError("cannot fit an empty series");
    }
    if (!(hi > lo) || grid < 3) {
        throw ValidationError("search interval must be non-empty with at least 3 grid points");
    }
    double step = (hi - lo) / (grid - 1);
    int best = 0;
    double best_loss = qcels_loss(s, lo);
    for (int i = 1; i < grid; i++) {
        double l = qcels_loss(s, lo + step * i);
        if (l < best_loss) {
            best_loss = l;
            best = i;
        }
    }
    double a = lo + step * std::max(best - 1, 0);
    double b = lo + step * std::min(best + 1, grid - 1);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = qcels_loss(s, x1);
    double f2 = qcels_loss(s, x2);
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); it++) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = qcels_loss(s, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = qcels_loss(s, x2);
        }
    }
    QcelsFit fit;
    fit.theta = 0.5 * (a + b);
    fit.loss = qcels_loss(s, fit.theta);
    if (best_loss < fit.loss) {
        fit.theta = lo + step * best;
        fit.loss = best_loss;
    }
    fit.amplitude = qcels_amplitude(s, fit.theta);
    return fit;
}

/// Distance on the circle of phases.
inline double phase_error(double a, double b) {
    double d = std::remainder(a - b, 2.0 * std::numbers::pi);
    return std::abs(d);
}

struct QcelsRun {
    QcelsParams params;
    std::vector<double> level_estimates;
    double estimate = 0.0;
};

/// Multi-level QCELS: level j fits N points spaced tau_j apart inside the
/// window left by level j - 1, then narrows to theta_j +- pi / (2 tau_j).
/// Sampling noise has E|xi|^2 = 1 / N_s per point.
inline QcelsRun multilevel_qcels(const SyntheticSpectrum &spectrum, double eps, double delta, int n_pairs,
                                 int n_samples, std::mt19937_64 &rng, int grid = 200) {
    spectrum.validate();
    QcelsRun run;
    run.params = make_qcels_params(eps, delta, n_pairs, n_samples);
    double noise = n_samples > 0 ? 1.0 / std::sqrt(static_cast<double>(n_samples)) : 0.0;
    double lo = -std::numbers::pi;
    double hi = std::numbers::pi;
    for (double tau : run.params.tau) {
        auto series = synth_signal(spectrum, tau, n_pairs, noise, rng);
        auto fit = qcels_fit(series, lo, hi, grid);
        if (!(fit.theta > lo - 1.0 && fit.theta < hi + 1.0) || hi - lo < 1e-13) {
            throw InfeasibleError("QCELS search interval collapsed");
        }
        run.level_estimates.push_back(fit.theta);
        lo = fit.theta - std::numbers::pi / (2.0 * tau);
        hi = fit.theta + std::numbers::pi / (2.0 * tau);
    }
    run.estimate = run.level_estimates.back();
    return run;
}

struct QcelsDemo {
    QcelsParams params;
    std::vector<double> errors;
    double success_rate = 0.0;
    double median_error = 0.0;
    double eps = 0.0;
};

/// Independent trials; trial i uses run_rng(seed, i).
inline QcelsDemo qcels_demo(const SyntheticSpectrum &spectrum, double eps, double delta, int n_pairs, int n_samples,
                            int trials, std::uint64_t seed, unsigned threads = 1) {
    if (trials < 1) {
        throw ValidationError("trials must be at least 1");
    }
    QcelsDemo demo;
    demo.eps = eps;
    demo.params = make_qcels_params(eps, delta, n_pairs, n_samples);
    demo.errors.assign(static_cast<std::size_t>(trials), 0.0);
    double truth = spectrum.dominant_phase();
    parallel_for(demo.errors.size(), threads, [&](std::size_t i) {
        auto rng = run_rng(seed, i);
        demo.errors[i] = phase_error(multilevel_qcels(spectrum, eps, delta, n_pairs, n_samples, rng).estimate, truth);
    });
    int hits = 0;
    for (double e : demo.errors) {
        hits += e < eps;
    }
    demo.success_rate = static_cast<double>(hits) / trials;
    std::vector<double> sorted = demo.errors;
    std::sort(sorted.begin(), sorted.end());
    std::size_t mid = sorted.size() / 2;
    demo.median_error = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return demo;
}

}  // namespace star
