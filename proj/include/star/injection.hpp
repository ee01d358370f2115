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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "star/errors.hpp"

namespace star {

/// Largest trial angle the injection protocol supports.
inline constexpr double kAngleCap = std::numbers::pi / 4.0;

/// Probability that the k-subset postselection projects onto the right state.
inline double p_ideal(double theta, int k) {
    if (k < 1) {
        throw ValidationError("k must be at least 1");
    }
    double s2 = std::sin(theta) * std::sin(theta);
    double c2 = std::cos(theta) * std::cos(theta);
    return std::pow(s2, k) + std::pow(c2, k);
}

/// Effective rotation angle produced by physical angle theta:
/// sin(theta*) = sin^k(theta) / sqrt(p_ideal), i.e. tan(theta*) = tan^k(theta).
inline double target_for_theta(double theta, int k) {
    if (k < 1) {
        throw ValidationError("k must be at least 1");
    }
    double sign = theta < 0 ? -1.0 : 1.0;
    double a = std::abs(theta);
    if (a > kAngleCap + 1e-15) {
        throw ValidationError("physical angle outside [0, pi/4]");
    }
    return sign * std::atan(std::pow(std::tan(a), k));
}

/// Inverse of target_for_theta on [0, pi/4] (odd extension for negatives).
inline double theta_for_target(double theta_star, int k) {
    if (k < 1) {
        throw ValidationError("k must be at least 1");
    }
    double sign = theta_star < 0 ? -1.0 : 1.0;
    double a = std::abs(theta_star);
    if (!std::isfinite(a) || a > kAngleCap + 1e-15) {
        throw ValidationError("target angle " + std::to_string(theta_star) + " outside [-pi/4, pi/4]");
    }
    return sign * std::atan(std::pow(std::tan(std::min(a, kAngleCap)), 1.0 / k));
}

/// Noisy postselection pass rate: one constant or a (d, p_phys) table.
class PassRateModel {
public:
    PassRateModel() = default;
    static PassRateModel constant(double rate) {
        check_rate(rate);
        PassRateModel m;
        m.constant_ = rate;
        return m;
    }
    static PassRateModel table(std::map<std::pair<int, double>, double> entries) {
        for (const auto &[key, rate] : entries) {
            check_rate(rate);
        }
        PassRateModel m;
        m.table_ = std::move(entries);
        return m;
    }

    /// Table keys look like "9,0.0001".
    static PassRateModel from_json(const nlohmann::json &j) {
        if (j.is_number()) {
            return constant(j.get<double>());
        }
        if (!j.is_object()) {
            throw ValidationError("pass-rate table must be a number or an object of \"d,p_phys\": rate");
        }
        std::map<std::pair<int, double>, double> entries;
        for (const auto &[key, value] : j.items()) {
            auto comma = key.find(',');
            if (comma == std::string::npos || !value.is_number()) {
                throw ValidationError("pass-rate key '" + key + "' must look like \"d,p_phys\" with a numeric rate");
            }
            try {
                entries[{std::stoi(key.substr(0, comma)), std::stod(key.substr(comma + 1))}] = value.get<double>();
            } catch (const std::exception &) {
                throw ValidationError("pass-rate key '" + key + "' is not \"d,p_phys\"");
            }
        }
        return table(std::move(entries));
    }

    static PassRateModel load(const std::filesystem::path &path) {
        std::ifstream in(path);
        if (!in) {
            throw ValidationError("cannot open pass-rate file " + path.string());
        }
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error &ex) {
            throw ValidationError("pass-rate file " + path.string() + ": " + ex.what());
        }
    }

    bool is_constant() const { return !table_.has_value(); }

    double operator()(int d, double p_phys) const {
        if (!table_) {
            return constant_;
        }
        for (const auto &[key, rate] : *table_) {
            if (key.first == d && std::abs(key.second - p_phys) <= 1e-9 * std::max(1.0, std::abs(p_phys))) {
                return rate;
            }
        }
        std::ostringstream ss;
        ss << "no pass rate for d=" << d << ", p_phys=" << p_phys;
        throw InfeasibleError(ss.str());
    }

private:
    static void check_rate(double rate) {
        if (!(rate > 0.0 && rate <= 1.0)) {
            throw ValidationError("pass rate must lie in (0, 1]");
        }
    }

    double constant_ = 1.0;
    std::optional<std::map<std::pair<int, double>, double>> table_;
};

struct InjectionConfig {
    int k = 3;
    std::vector<int> q_sizes{3, 3, 3};
    int d = 9;
    double p_phys = 1e-4;
    PassRateModel p_pass;
    int attempts_per_clock = 3;

    void validate() const {
        if (k < 1 || static_cast<int>(q_sizes.size()) != k) {
            throw ValidationError("injection k must equal the number of subsets in q_sizes");
        }
        for (int q : q_sizes) {
            if (q < 1) {
                throw ValidationError("subset sizes must be positive");
            }
        }
        if (std::accumulate(q_sizes.begin(), q_sizes.end(), 0) != d) {
            throw ValidationError("subset sizes must sum to the code distance d=" + std::to_string(d));
        }
        if (attempts_per_clock < 1) {
            throw ValidationError("attempts_per_clock must be at least 1");
        }
        if (!(p_phys >= 0.0 && p_phys < 1.0)) {
            throw ValidationError("p_phys must lie in [0, 1)");
        }
    }

    /// Shipped subset splits: d = 9 -> 3 subsets of 3, d = 11 -> [2,2,2,2,3].
    static InjectionConfig for_distance(int d, double p_phys = 1e-4) {
        InjectionConfig c;
        c.d = d;
        c.p_phys = p_phys;
        if (d == 9) {
            c.q_sizes = {3, 3, 3};
        } else if (d == 11) {
            c.q_sizes = {2, 2, 2, 2, 3};
        } else if (d < 3) {
            c.q_sizes = {std::max(d, 1)};
        } else {
            // Pairs, with one triple when d is odd.
            c.q_sizes.assign(static_cast<std::size_t>(d % 3 == 0 ? d / 3 : d / 2 - (d % 2)), d % 3 == 0 ? 3 : 2);
            if (d % 3 != 0 && d % 2 == 1) {
                c.q_sizes.push_back(3);
            }
        }
        c.k = static_cast<int>(c.q_sizes.size());
        return c;
    }
};

enum class RotationBasis { Z, ZZ };

inline const char *basis_name(RotationBasis b) { return b == RotationBasis::Z ? "Z" : "ZZ"; }

struct RotationRequest {
    double target_angle = 0.0;
    RotationBasis basis = RotationBasis::Z;
    int trial = 1;

    /// Each failed trial doubles the angle; trial 1 uses the target itself.
    double trial_angle() const { return std::ldexp(target_angle, trial - 1); }
};

/// Per-attempt success probability of injecting the trial's ancilla.
inline double success_prob(const RotationRequest &req, const InjectionConfig &cfg) {
    if (req.trial < 1) {
        throw ValidationError("trial index starts at 1");
    }
    double angle = std::abs(req.trial_angle());
    if (angle > kAngleCap) {
        throw AngleCapExceeded("trial " + std::to_string(req.trial) + " angle " + std::to_string(angle) +
                               " exceeds pi/4");
    }
    return p_ideal(theta_for_target(angle, cfg.k), cfg.k) * cfg.p_pass(cfg.d, cfg.p_phys);
}

/// Probability that l patches making a attempts each all fail within one clock.
inline double per_clock_failure(double p_success, int patches, int attempts_per_clock) {
    return std::pow(1.0 - p_success, static_cast<double>(patches) * attempts_per_clock);
}

/// Worst-case logical error of one RUS rotation: 0.40 k theta* p_phys.
inline double rus_error_rate(double theta_star, double p_phys, int k) {
    return 0.40 * k * std::abs(theta_star) * p_phys;
}

/// PEC sampling factor gamma^2 = exp(4 eps).
inline double pec_sampling_factor(double eps) {
    if (eps < 0) {
        throw ValidationError("error rate must be non-negative");
    }
    return std::exp(4.0 * eps);
}

}  // namespace star
