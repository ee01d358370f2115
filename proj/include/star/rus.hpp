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
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "star/errors.hpp"
#include "star/fabric.hpp"
#include "star/injection.hpp"
#include "star/parallel.hpp"
#include "star/rng.hpp"

namespace star {

// ---------------------------------------------------------------------------
// Analytic trial counts. Each RUS trial succeeds with probability 1/2.

/// Probability that the slowest of M independent processes ends at trial K.
inline double prob_finish_at(int K, int M) {
    if (K < 1 || M < 1) {
        throw ValidationError("prob_finish_at needs K >= 1 and M >= 1");
    }
    auto all_done_by = [M](int k) {
        if (k == 0) {
            return 0.0;
        }
        return std::exp(M * std::log1p(-std::ldexp(1.0, -k)));
    };
    return all_done_by(K) - all_done_by(K - 1);
}

/// <K>_M = sum_K K P_K^M, evaluated as the tail sum sum_{K>=0} P(max > K).
inline double expected_trials(int M, double tol = 1e-18) {
    if (M < 1) {
        throw ValidationError("expected_trials needs M >= 1");
    }
    double total = 0.0;
    for (int K = 0; K < 2000; K++) {
        double q = std::ldexp(1.0, -K);
        double tail = K == 0 ? 1.0 : -std::expm1(M * std::log1p(-q));
        total += tail;
        // Remaining terms are bounded by sum_{j>K} M 2^-j = M 2^-K.
        if (M * q < tol) {
            break;
        }
    }
    return total;
}

/// Trials needed by the slowest of M fair-coin RUS processes.
inline int sample_max_trials(int M, std::mt19937_64 &rng) {
    int worst = 0;
    for (int i = 0; i < M; i++) {
        int k = 1;
        while (uniform01(rng) >= 0.5) {
            k++;
        }
        worst = std::max(worst, k);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Layouts.

struct RusProcessSpec {
    std::vector<Coord> targets;
    std::vector<Coord> region;
    double target_angle = 0.0;
};

/// Processes of one parallel rotation group plus the routing cells they may
/// inject on.
struct RusLayout {
    RotationBasis basis = RotationBasis::Z;
    std::set<Coord> cells;
    std::vector<RusProcessSpec> processes;

    std::size_t size() const { return processes.size(); }

    void validate() const {
        std::set<Coord> seen;
        for (std::size_t i = 0; i < processes.size(); i++) {
            const auto &p = processes[i];
            std::size_t want = basis == RotationBasis::Z ? 1 : 2;
            if (p.targets.size() != want) {
                throw ValidationError("process " + std::to_string(i) + " has " + std::to_string(p.targets.size()) +
                                      " targets, expected " + std::to_string(want));
            }
            if (p.region.empty()) {
                throw ValidationError("process " + std::to_string(i) + " has an empty injection region");
            }
            for (Coord c : p.region) {
                if (!cells.contains(c)) {
                    throw ValidationError("injection cell " + to_string(c) + " is not a routing cell");
                }
                if (!seen.insert(c).second) {
                    throw ValidationError("injection cell " + to_string(c) + " is shared by two processes");
                }
            }
        }
    }
};

/// Stand-alone layouts for M parallel rotations on a 4-row strip.
/// Z: targets fill data rows 0 and 3, each with the single routing cell next
/// to it as its region. ZZ: target pairs (0,i),(1,i) inject on (2,i),(3,i).
/// With `cols` > 0 the strip has that width and M must fit in it.
inline RusLayout canonical_layout(int M, RotationBasis basis, double target_angle, int cols = 0) {
    if (M < 1) {
        throw ValidationError("need at least one RUS process");
    }
    RusLayout layout;
    layout.basis = basis;
    if (basis == RotationBasis::Z) {
        int width = cols > 0 ? cols : (M + 1) / 2;
        if (M > 2 * width) {
            throw ValidationError(std::to_string(M) + " Z rotations do not fit on a grid with " +
                                  std::to_string(width) + " columns");
        }
        for (int c = 0; c < width; c++) {
            layout.cells.insert({1, c});
            layout.cells.insert({2, c});
        }
        for (int i = 0; i < M; i++) {
            bool top = i < width;
            int c = top ? i : i - width;
            layout.processes.push_back({{{top ? 0 : 3, c}}, {{top ? 1 : 2, c}}, target_angle});
        }
    } else {
        int width = cols > 0 ? cols : M;
        if (M > width) {
            throw ValidationError(std::to_string(M) + " ZZ rotations do not fit on a grid with " +
                                  std::to_string(width) + " columns");
        }
        for (int c = 0; c < width; c++) {
            layout.cells.insert({2, c});
            layout.cells.insert({3, c});
        }
        for (int i = 0; i < M; i++) {
            layout.processes.push_back({{{0, i}, {1, i}}, {{2, i}, {3, i}}, target_angle});
        }
    }
    return layout;
}

// ---------------------------------------------------------------------------
// Adaptive region update.

/// Routing cells as a dense graph; index order equals coordinate order.
struct CellGraph {
    std::vector<Coord> coords;
    std::map<Coord, int> index;
    std::vector<std::vector<int>> adjacent;

    explicit CellGraph(const std::set<Coord> &cells) : coords(cells.begin(), cells.end()) {
        for (int i = 0; i < static_cast<int>(coords.size()); i++) {
            index[coords[static_cast<std::size_t>(i)]] = i;
        }
        adjacent.resize(coords.size());
        for (std::size_t i = 0; i < coords.size(); i++) {
            Coord c = coords[i];
            for (Coord d : {Coord{c.row - 1, c.col}, Coord{c.row, c.col - 1}, Coord{c.row, c.col + 1},
                            Coord{c.row + 1, c.col}}) {
                auto it = index.find(d);
                if (it != index.end()) {
                    adjacent[i].push_back(it->second);
                }
            }
        }
    }

    int at(Coord c) const {
        auto it = index.find(c);
        if (it == index.end()) {
            throw ValidationError("cell " + to_string(c) + " is not a routing cell");
        }
        return it->second;
    }
};

/// Index form of update_injection_regions.
inline std::vector<std::vector<int>> grow_regions(const CellGraph &graph, std::vector<std::vector<int>> regions) {
    const std::size_t cells = graph.coords.size();
    std::vector<int> owner(cells, -1);
    for (std::size_t r = 0; r < regions.size(); r++) {
        for (int c : regions[r]) {
            if (owner[static_cast<std::size_t>(c)] != -1) {
                throw ValidationError("injection regions overlap at " + to_string(graph.coords[static_cast<std::size_t>(c)]));
            }
            owner[static_cast<std::size_t>(c)] = static_cast<int>(r);
        }
    }
    std::vector<std::vector<int>> frontier = regions;
    std::vector<std::vector<int>> claimants(cells);
    std::vector<int> touched;
    for (;;) {
        touched.clear();
        for (std::size_t r = 0; r < frontier.size(); r++) {
            for (int c : frontier[r]) {
                for (int d : graph.adjacent[static_cast<std::size_t>(c)]) {
                    if (owner[static_cast<std::size_t>(d)] != -1) {
                        continue;
                    }
                    auto &who = claimants[static_cast<std::size_t>(d)];
                    if (who.empty()) {
                        touched.push_back(d);
                    }
                    if (who.empty() || who.back() != static_cast<int>(r)) {
                        who.push_back(static_cast<int>(r));
                    }
                }
            }
        }
        if (touched.empty()) {
            break;
        }
        std::sort(touched.begin(), touched.end());
        for (auto &f : frontier) {
            f.clear();
        }
        auto assign = [&](int c, int r) {
            owner[static_cast<std::size_t>(c)] = r;
            regions[static_cast<std::size_t>(r)].push_back(c);
            frontier[static_cast<std::size_t>(r)].push_back(c);
        };
        // Isolated cells first, then contested ones in coordinate order.
        for (int c : touched) {
            if (claimants[static_cast<std::size_t>(c)].size() == 1) {
                assign(c, claimants[static_cast<std::size_t>(c)].front());
            }
        }
        for (int c : touched) {
            auto &who = claimants[static_cast<std::size_t>(c)];
            if (who.size() > 1) {
                int best = *std::min_element(who.begin(), who.end());
                for (int r : who) {
                    auto size_r = regions[static_cast<std::size_t>(r)].size();
                    auto size_best = regions[static_cast<std::size_t>(best)].size();
                    if (size_r < size_best || (size_r == size_best && r < best)) {
                        best = r;
                    }
                }
                assign(c, best);
            }
            who.clear();
        }
    }
    for (auto &r : regions) {
        std::sort(r.begin(), r.end());
    }
    return regions;
}

/// Grows the regions of the listed (ongoing) processes over free cells one
/// ring at a time. A cell reached by one region joins it; a cell reached by
/// several joins the currently smallest one, lower index first on ties.
/// Contested cells of a ring are resolved in coordinate order.
inline std::vector<std::vector<Coord>> update_injection_regions(const std::set<Coord> &cells,
                                                                const std::vector<std::vector<Coord>> &regions) {
    CellGraph graph(cells);
    std::vector<std::vector<int>> idx;
    for (const auto &r : regions) {
        auto &dst = idx.emplace_back();
        for (Coord c : r) {
            dst.push_back(graph.at(c));
        }
    }
    std::vector<std::vector<Coord>> out;
    for (const auto &r : grow_regions(graph, std::move(idx))) {
        auto &dst = out.emplace_back();
        for (int c : r) {
            dst.push_back(graph.coords[static_cast<std::size_t>(c)]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Clock-by-clock simulation.

enum class InjectionMode { naive, adaptive };

inline const char *mode_name(InjectionMode m) { return m == InjectionMode::naive ? "naive" : "adaptive"; }

struct RusSimOptions {
    InjectionMode mode = InjectionMode::adaptive;
    /// Assert region disjointness and bookkeeping every clock.
    bool check_invariants = false;
    /// Give up after this many clocks (a run that long means p is ~0).
    int max_clocks = 10'000'000;
};

/// Joint-measurement clocks of one trial: 1 for Z, 2 for ZZ.
inline int measurement_clocks(RotationBasis basis) {
    return static_cast<int>(catalog_cost(basis == RotationBasis::Z ? OpKind::joint_measurement
                                                                    : OpKind::zz_rotation_trial)
                                .halves() /
                            2);
}

/// Per-attempt injection success at a trial. Angles past the protocol cap are
/// clamped to pi/4 so long-running processes keep a finite success rate.
inline double injection_success(double target_angle, int trial, const InjectionConfig &cfg) {
    double angle = std::min(std::abs(std::ldexp(target_angle, trial - 1)), kAngleCap);
    return p_ideal(theta_for_target(angle, cfg.k), cfg.k) * cfg.p_pass(cfg.d, cfg.p_phys);
}

/// Layout plus its cell graph, built once and reused across runs.
struct PreparedLayout {
    const RusLayout *layout;
    CellGraph graph;
    std::vector<std::vector<int>> initial;

    explicit PreparedLayout(const RusLayout &l) : layout(&l), graph(l.cells) {
        l.validate();
        for (const auto &p : l.processes) {
            auto &dst = initial.emplace_back();
            for (Coord c : p.region) {
                dst.push_back(graph.at(c));
            }
        }
    }
};

namespace detail {

struct LiveProcess {
    enum class State { awaiting, measuring, done };
    State state = State::awaiting;
    int trial = 1;
    int remaining = 0;
    bool buffered = false;
    std::vector<int> region;
};

inline bool inject(double p_success, int attempts, std::mt19937_64 &rng) {
    if (attempts <= 0) {
        return false;
    }
    double fail = std::pow(1.0 - p_success, attempts);
    return uniform01(rng) >= fail;
}

/// Caches success probabilities per trial index for one target angle.
class SuccessTable {
public:
    SuccessTable(const InjectionConfig &cfg) : cfg_(cfg) {}
    double operator()(double angle, int trial) {
        if (angle != angle_) {
            angle_ = angle;
            values_.clear();
        }
        while (static_cast<int>(values_.size()) < trial) {
            values_.push_back(injection_success(angle, static_cast<int>(values_.size()) + 1, cfg_));
        }
        return values_[static_cast<std::size_t>(trial - 1)];
    }

private:
    const InjectionConfig &cfg_;
    double angle_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values_;
};

}  // namespace detail

/// One run: returns the clock at which the last process completes.
/// Each clock, in process order:
///   awaiting  -> l*a injection attempts at the current trial angle; on
///                success the measurement starts next clock.
///   measuring -> one measurement clock; in adaptive mode the l-1 spare
///                region patches also pre-inject the next trial's ancilla
///                (at most one buffered). When the measurement ends, a fair
///                coin decides completion; otherwise the angle doubles and
///                a buffered ancilla lets the next trial start at once.
/// Adaptive mode regrows regions after any clock in which a process ended.
inline int simulate_once(const PreparedLayout &prep, const InjectionConfig &cfg, const RusSimOptions &opt,
                         std::mt19937_64 &rng) {
    using detail::LiveProcess;
    const RusLayout &layout = *prep.layout;
    const int m = measurement_clocks(layout.basis);
    const int a = cfg.attempts_per_clock;
    detail::SuccessTable success(cfg);
    std::vector<LiveProcess> live(layout.size());
    for (std::size_t i = 0; i < live.size(); i++) {
        live[i].region = prep.initial[i];
    }
    std::size_t remaining = live.size();
    int clock = 0;
    while (remaining > 0) {
        clock++;
        if (clock > opt.max_clocks) {
            throw InfeasibleError("RUS simulation did not finish within " + std::to_string(opt.max_clocks) +
                                  " clocks");
        }
        bool someone_finished = false;
        for (std::size_t i = 0; i < live.size(); i++) {
            LiveProcess &p = live[i];
            double theta = layout.processes[i].target_angle;
            int l = static_cast<int>(p.region.size());
            if (p.state == LiveProcess::State::awaiting) {
                if (detail::inject(success(theta, p.trial), l * a, rng)) {
                    p.state = LiveProcess::State::measuring;
                    p.remaining = m;
                }
            } else if (p.state == LiveProcess::State::measuring) {
                if (opt.mode == InjectionMode::adaptive && !p.buffered && l >= 2) {
                    p.buffered = detail::inject(success(theta, p.trial + 1), (l - 1) * a, rng);
                }
                if (--p.remaining == 0) {
                    if (uniform01(rng) < 0.5) {
                        p.state = LiveProcess::State::done;
                        remaining--;
                        someone_finished = true;
                    } else {
                        p.trial++;
                        if (p.buffered) {
                            p.buffered = false;
                            p.remaining = m;
                        } else {
                            p.state = LiveProcess::State::awaiting;
                        }
                    }
                }
            }
        }
        if (opt.mode == InjectionMode::adaptive && someone_finished && remaining > 0) {
            std::vector<std::size_t> ids;
            std::vector<std::vector<int>> regions;
            for (std::size_t i = 0; i < live.size(); i++) {
                if (live[i].state != LiveProcess::State::done) {
                    ids.push_back(i);
                    regions.push_back(std::move(live[i].region));
                }
            }
            regions = grow_regions(prep.graph, std::move(regions));
            for (std::size_t j = 0; j < ids.size(); j++) {
                live[ids[j]].region = std::move(regions[j]);
            }
        }
        if (opt.check_invariants) {
            std::vector<bool> seen(prep.graph.coords.size(), false);
            for (const auto &p : live) {
                if (p.state == LiveProcess::State::done) {
                    continue;
                }
                for (int c : p.region) {
                    if (seen[static_cast<std::size_t>(c)]) {
                        throw std::logic_error("injection regions overlap at " +
                                               to_string(prep.graph.coords[static_cast<std::size_t>(c)]));
                    }
                    seen[static_cast<std::size_t>(c)] = true;
                }
                if (p.buffered && p.region.size() < 2) {
                    throw std::logic_error("buffered ancilla without a spare patch");
                }
            }
        }
    }
    return clock;
}

inline int simulate_once(const RusLayout &layout, const InjectionConfig &cfg, const RusSimOptions &opt,
                         std::mt19937_64 &rng) {
    return simulate_once(PreparedLayout(layout), cfg, opt, rng);
}

struct RusStats {
    std::uint64_t seed = 0;
    std::vector<int> completions;
    std::map<int, std::int64_t> histogram;
    double mean = 0.0;
    double stddev = 0.0;
    int p50 = 0;
    int p95 = 0;
    int max = 0;

    std::size_t runs() const { return completions.size(); }
    double standard_error() const { return completions.empty() ? 0.0 : stddev / std::sqrt(completions.size()); }
};

inline RusStats summarize(std::vector<int> completions, std::uint64_t seed) {
    RusStats s;
    s.seed = seed;
    s.completions = std::move(completions);
    if (s.completions.empty()) {
        return s;
    }
    double sum = 0.0;
    for (int c : s.completions) {
        sum += c;
        s.histogram[c]++;
    }
    double n = static_cast<double>(s.completions.size());
    s.mean = sum / n;
    double sq = 0.0;
    for (int c : s.completions) {
        sq += (c - s.mean) * (c - s.mean);
    }
    s.stddev = s.completions.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
    std::vector<int> sorted = s.completions;
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double q) {
        auto idx = static_cast<std::size_t>(std::ceil(q * n));
        return sorted[std::min(sorted.size() - 1, idx == 0 ? 0 : idx - 1)];
    };
    s.p50 = rank(0.50);
    s.p95 = rank(0.95);
    s.max = sorted.back();
    return s;
}

/// Monte Carlo over `runs` independent runs. Run r draws from run_rng(seed, r),
/// so results do not depend on the worker count.
inline RusStats simulate_parallel_rus(const RusLayout &layout, const InjectionConfig &cfg, const RusSimOptions &opt,
                                      int runs, std::uint64_t seed, unsigned threads = 1) {
    cfg.validate();
    layout.validate();
    if (runs < 1) {
        throw ValidationError("runs must be at least 1");
    }
    PreparedLayout prep(layout);
    std::vector<int> completions(static_cast<std::size_t>(runs));
    parallel_for(completions.size(), threads, [&](std::size_t r) {
        auto rng = run_rng(seed, r);
        completions[r] = simulate_once(prep, cfg, opt, rng);
    });
    return summarize(std::move(completions), seed);
}

inline RusStats simulate_parallel_rus(int M, RotationBasis basis, double target_angle, const InjectionConfig &cfg,
                                      InjectionMode mode, int runs, std::uint64_t seed, unsigned threads = 1) {
    RusSimOptions opt;
    opt.mode = mode;
    return simulate_parallel_rus(canonical_layout(M, basis, target_angle), cfg, opt, runs, seed, threads);
}

}  // namespace star
