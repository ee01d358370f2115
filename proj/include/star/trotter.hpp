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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "star/clock.hpp"
#include "star/errors.hpp"
#include "star/fabric.hpp"
#include "star/hubbard.hpp"
#include "star/injection.hpp"
#include "star/orderings.hpp"
#include "star/rus.hpp"

namespace star {

enum class StepMode { plain, controlled };

inline const char *step_mode_name(StepMode m) { return m == StepMode::plain ? "plain" : "controlled"; }

/// Rotation magnitudes of one half step: exp(-i c P dtau / 2).
struct AngleSet {
    double zz = 0.0;
    double hop = 0.0;

    static AngleSet from(const HubbardSpec &spec, double dtau) {
        return {std::abs(spec.u) * dtau / 8.0, std::abs(spec.t) * dtau / 4.0};
    }
};

enum class BatchKind { zz_rotation_layer, move_layer, xxyy_batch, fswap_layer, multi_cnot_layer, multi_cz_layer };

inline const char *batch_kind_name(BatchKind k) {
    switch (k) {
        case BatchKind::zz_rotation_layer:
            return "zz_rotation_layer";
        case BatchKind::move_layer:
            return "move_layer";
        case BatchKind::xxyy_batch:
            return "xxyy_batch";
        case BatchKind::fswap_layer:
            return "fswap_layer";
        case BatchKind::multi_cnot_layer:
            return "multi_cnot_layer";
        case BatchKind::multi_cz_layer:
            return "multi_cz_layer";
    }
    return "?";
}

struct RusGroup {
    int count = 0;
    RotationBasis basis = RotationBasis::Z;
    double angle = 0.0;
    RusLayout layout;
};

struct Batch {
    BatchKind kind = BatchKind::move_layer;
    std::string label;
    Clock fixed;
    std::vector<RusGroup> rus_groups;
    /// Hopping bonds executed by an xxyy batch, and the angle multiple used.
    std::vector<LatticeEdge> edges;
    int angle_multiple = 0;
    bool merged = false;
    Clock start;
    Clock end;
};

struct TrotterSchedule {
    int n = 0;
    StepMode mode = StepMode::plain;
    int fswap_layers = 0;
    AngleSet angles;
    std::vector<Batch> batches;
    Timeline timeline;

    Clock fixed_clocks() const {
        Clock total;
        for (const auto &b : batches) {
            total += b.fixed;
        }
        return total;
    }
    std::vector<const RusGroup *> rus_groups() const {
        std::vector<const RusGroup *> out;
        for (const auto &b : batches) {
            for (const auto &g : b.rus_groups) {
                out.push_back(&g);
            }
        }
        return out;
    }
    Clock total() const { return batches.empty() ? Clock{} : batches.back().end; }
};

/// Duration of the i-th RUS group of a step.
using RusDurationFn = std::function<Clock(const RusGroup &, std::size_t index)>;

// ---------------------------------------------------------------------------
// Layouts of the rotation groups inside a step.

/// Inter-spin ZZ rotations: site at line position p has spin up on (0,p),
/// spin down on (1,p), and injects on (2,p),(3,p).
inline RusLayout onsite_layout(int sites, double angle) { return canonical_layout(sites, RotationBasis::ZZ, angle); }

/// Rotations of one hopping sub-layer. Spin up uses data row 0 and routing
/// row 1, spin down data row 3 and routing row 2. Bond (p, p+1) starts with
/// the two routing cells of its columns; ZZ acts on both data patches, Z on
/// the one at p.
inline RusLayout hopping_layout(int sites, const std::vector<int> &positions, RotationBasis basis, double angle) {
    RusLayout layout;
    layout.basis = basis;
    for (int c = 0; c < sites; c++) {
        layout.cells.insert({1, c});
        layout.cells.insert({2, c});
    }
    for (auto [data_row, route_row] : {std::pair{0, 1}, std::pair{3, 2}}) {
        for (int p : positions) {
            RusProcessSpec proc;
            proc.targets.push_back({data_row, p});
            if (basis == RotationBasis::ZZ) {
                proc.targets.push_back({data_row, p + 1});
            }
            proc.region = {{route_row, p}, {route_row, p + 1}};
            proc.target_angle = angle;
            layout.processes.push_back(std::move(proc));
        }
    }
    return layout;
}

// ---------------------------------------------------------------------------
// Step compiler.

namespace detail {

inline std::vector<Coord> row_cells(int row, int cols) {
    std::vector<Coord> out;
    for (int c = 0; c < cols; c++) {
        out.push_back({row, c});
    }
    return out;
}

inline std::vector<Coord> group_participants(const RusLayout &layout) {
    std::set<Coord> all(layout.cells.begin(), layout.cells.end());
    for (const auto &p : layout.processes) {
        all.insert(p.targets.begin(), p.targets.end());
    }
    return {all.begin(), all.end()};
}

/// Line sites of odd parity (x + y odd).
inline std::vector<int> odd_positions(int n, const std::vector<int> &order) {
    std::vector<int> out;
    for (int p = 0; p < n * n; p++) {
        int s = order[static_cast<std::size_t>(p)];
        if ((s % n + s / n) % 2 == 1) {
            out.push_back(p);
        }
    }
    return out;
}

class StepBuilder {
public:
    StepBuilder(TrotterSchedule &out, const PatchGrid &grid, const RusDurationFn &durations)
        : out_(out), grid_(grid), durations_(durations) {}

    Batch &open(BatchKind kind, std::string label) {
        Batch b;
        b.kind = kind;
        b.label = std::move(label);
        b.start = now_;
        out_.batches.push_back(std::move(b));
        return out_.batches.back();
    }

    void op(Clock offset, OpKind kind, std::vector<Coord> participants) {
        out_.timeline.add(now_ + offset, make_op(kind, std::move(participants)));
    }

    Clock rus(Batch &b, Clock offset, RusGroup group) {
        Clock d = durations_(group, group_index_++);
        if (d <= Clock{}) {
            throw ValidationError("RUS group duration must be positive");
        }
        SurgeryOp op;
        op.kind = group.basis == RotationBasis::Z ? OpKind::rus_z_group : OpKind::rus_zz_group;
        op.participants = group_participants(group.layout);
        op.duration = d;
        out_.timeline.add(now_ + offset, std::move(op));
        b.rus_groups.push_back(std::move(group));
        return d;
    }

    void close(Batch &b, Clock fixed, Clock variable) {
        b.fixed = fixed;
        now_ += fixed + variable;
        b.end = now_;
    }

    int cols() const { return grid_.cols(); }
    const PatchGrid &grid() const { return grid_; }

private:
    TrotterSchedule &out_;
    const PatchGrid &grid_;
    const RusDurationFn &durations_;
    Clock now_;
    std::size_t group_index_ = 0;
};

}  // namespace detail

/// Compiles one second-order Trotter step. Batch order:
///   ZZ, move, [ctrl], a0, a1, fSWAP x L, b0, b1 (merged), b0, fSWAP^-1 x L,
///   a1, a0, [ctrl], move back, ZZ
/// where a0/a1 (b0/b1) are the even/odd sub-layers local under order_a
/// (order_b). The two middle b1 halves are merged into one batch with twice
/// the angle.
inline TrotterSchedule compile_step(const HubbardSpec &spec, double dtau, StepMode mode, const OrderingPair &pair,
                                    const RusDurationFn &durations) {
    spec.validate();
    if (pair.n != spec.n) {
        throw ValidationError("ordering pair is for n=" + std::to_string(pair.n) + ", model has n=" +
                              std::to_string(spec.n));
    }
    auto issues = ordering_violations(pair);
    if (!issues.empty()) {
        throw ValidationError("ordering pair rejected: " + issues.front());
    }
    if (!std::isfinite(dtau) || dtau < 0) {
        throw ValidationError("dtau must be a finite non-negative number");
    }
    const int n = spec.n;
    const int V = n * n;
    FSwapSchedule route = route_permutation(pair.order_a, pair.order_b);

    TrotterSchedule sched;
    sched.n = n;
    sched.mode = mode;
    sched.fswap_layers = route.layer_count();
    sched.angles = AngleSet::from(spec, dtau);
    PatchGrid grid = build_grid(n, mode == StepMode::controlled, pair.order_a);
    detail::StepBuilder sb(sched, grid, durations);

    auto sub_a = split_sublayers(pair.edges_a, pair.order_a);
    auto sub_b = split_sublayers(pair.edges_b, pair.order_b);
    auto pos_a = inverse_permutation(pair.order_a);
    auto pos_b = inverse_permutation(pair.order_b);

    auto zz_layer = [&](const char *label) {
        Batch &b = sb.open(BatchKind::zz_rotation_layer, label);
        Clock t = sb.rus(b, Clock{}, {V, RotationBasis::ZZ, sched.angles.zz, onsite_layout(V, sched.angles.zz)});
        sb.close(b, Clock{}, t);
    };

    auto move_layer = [&](bool forward) {
        Batch &b = sb.open(BatchKind::move_layer, forward ? "move down" : "move up");
        for (int p = 0; p < V; p++) {
            if (forward) {
                sb.op(Clock{}, OpKind::move_to_middle, {{1, p}, {2, p}});
                sb.op(Clock::clocks(2), OpKind::move_to_side, {{2, p}, {3, p}});
            } else {
                sb.op(Clock{}, OpKind::move_to_middle, {{2, p}, {3, p}});
                sb.op(Clock::clocks(2), OpKind::move_to_side, {{1, p}, {2, p}});
            }
        }
        sb.close(b, catalog_cost(OpKind::move_to_middle) + catalog_cost(OpKind::move_to_side), Clock{});
    };

    auto xxyy = [&](const std::vector<LatticeEdge> &edges, const std::vector<int> &position, std::string label,
                    int multiple) {
        Batch &b = sb.open(BatchKind::xxyy_batch, std::move(label));
        b.edges = edges;
        b.angle_multiple = multiple;
        b.merged = multiple == 2;
        std::vector<int> ps;
        for (const auto &e : edges) {
            ps.push_back(local_position(e, position));
        }
        double angle = multiple * sched.angles.hop;
        auto each_block = [&](Clock at, OpKind kind, bool full) {
            for (auto [dr, rr] : {std::pair{0, 1}, std::pair{3, 2}}) {
                for (int p : ps) {
                    if (full) {
                        sb.op(at, kind, {{dr, p}, {dr, p + 1}, {rr, p}, {rr, p + 1}});
                    } else {
                        sb.op(at, kind, {{dr, p}, {rr, p}});
                    }
                }
            }
        };
        Clock t;
        each_block(t, OpKind::cnot_no_move, true);
        t += catalog_cost(OpKind::cnot_no_move);
        each_block(t, OpKind::hadamard_no_return, false);
        t += catalog_cost(OpKind::hadamard_no_return);
        int m = 2 * static_cast<int>(ps.size());
        Clock t_zz = sb.rus(b, t, {m, RotationBasis::ZZ, angle, hopping_layout(V, ps, RotationBasis::ZZ, angle)});
        t += t_zz;
        Clock t_z = sb.rus(b, t, {m, RotationBasis::Z, angle, hopping_layout(V, ps, RotationBasis::Z, angle)});
        t += t_z;
        each_block(t, OpKind::hadamard_no_return, false);
        t += catalog_cost(OpKind::hadamard_no_return);
        each_block(t, OpKind::cnot, true);
        Clock fixed = 2 * catalog_cost(OpKind::hadamard_no_return) + catalog_cost(OpKind::cnot_no_move) +
                      catalog_cost(OpKind::cnot);
        sb.close(b, fixed, t_zz + t_z);
    };

    std::vector<int> current = pair.order_a;
    auto fswap_layer = [&](const std::vector<int> &layer, const std::string &label) {
        Batch &b = sb.open(BatchKind::fswap_layer, label);
        for (int p : layer) {
            for (auto [dr, rr] : {std::pair{0, 1}, std::pair{3, 2}}) {
                sb.op(Clock{}, OpKind::fswap, {{dr, p}, {dr, p + 1}, {rr, p}, {rr, p + 1}});
            }
        }
        apply_layer(current, layer);
        sb.close(b, catalog_cost(OpKind::fswap), Clock{});
    };

    auto ancilla_ops = [&](bool cnot_first) {
        Coord anc = grid.qpe_ancilla_coord();
        auto routing = [&] {
            auto r = detail::row_cells(1, V);
            auto r2 = detail::row_cells(2, V);
            r.insert(r.end(), r2.begin(), r2.end());
            r.push_back(anc);
            return r;
        };
        auto cnot = [&] {
            Batch &b = sb.open(BatchKind::multi_cnot_layer, "controlled X on spin down");
            auto ps = routing();
            auto data = detail::row_cells(3, V);
            ps.insert(ps.end(), data.begin(), data.end());
            sb.op(Clock{}, OpKind::multi_target_cnot_reduced, ps);
            sb.close(b, catalog_cost(OpKind::multi_target_cnot_reduced), Clock{});
        };
        auto cz = [&] {
            Batch &b = sb.open(BatchKind::multi_cz_layer, "controlled Z on odd sites");
            auto odd = detail::odd_positions(n, current);
            Clock t;
            for (int row : {0, 3}) {
                auto ps = routing();
                for (int p : odd) {
                    ps.push_back({row, p});
                }
                sb.op(t, OpKind::multi_target_cz, ps);
                t += catalog_cost(OpKind::multi_target_cz);
            }
            sb.close(b, t, Clock{});
        };
        if (cnot_first) {
            cnot();
            cz();
        } else {
            cz();
            cnot();
        }
    };

    zz_layer("onsite ZZ");
    move_layer(true);
    if (mode == StepMode::controlled) {
        ancilla_ops(true);
    }
    xxyy(sub_a[0], pos_a, "order a, even bonds", 1);
    xxyy(sub_a[1], pos_a, "order a, odd bonds", 1);
    for (std::size_t i = 0; i < route.layers.size(); i++) {
        fswap_layer(route.layers[i], "fSWAP layer " + std::to_string(i + 1));
    }
    if (current != pair.order_b) {
        throw InfeasibleError("fSWAP routing did not reach order_b");
    }
    xxyy(sub_b[0], pos_b, "order b, even bonds", 1);
    xxyy(sub_b[1], pos_b, "order b, odd bonds (merged)", 2);
    xxyy(sub_b[0], pos_b, "order b, even bonds", 1);
    for (std::size_t i = route.layers.size(); i-- > 0;) {
        fswap_layer(route.layers[i], "fSWAP layer " + std::to_string(i + 1) + " reversed");
    }
    if (current != pair.order_a) {
        throw InfeasibleError("reverse fSWAP routing did not restore order_a");
    }
    xxyy(sub_a[1], pos_a, "order a, odd bonds", 1);
    xxyy(sub_a[0], pos_a, "order a, even bonds", 1);
    if (mode == StepMode::controlled) {
        ancilla_ops(false);
    }
    move_layer(false);
    zz_layer("onsite ZZ");
    return sched;
}

/// Analytic step cost
///   7 t(V-n, Z) + 7 t(V-n, ZZ) + 2 t(V, ZZ) + 14 n + 55.
inline double trotter_clocks(int n, const std::function<double(int M, RotationBasis)> &t_rus) {
    if (n < 2) {
        throw ValidationError("lattice side n must be at least 2");
    }
    int V = n * n;
    return 7.0 * t_rus(V - n, RotationBasis::Z) + 7.0 * t_rus(V - n, RotationBasis::ZZ) +
           2.0 * t_rus(V, RotationBasis::ZZ) + 14.0 * n + 55.0;
}

/// Per-step ancilla overhead of T controlled steps: 16 + 18 T.
inline double controlled_overhead(double steps) {
    if (steps < 0) {
        throw ValidationError("step count must be non-negative");
    }
    const double per_step = 2.0 * catalog_cost(OpKind::multi_target_cnot_reduced).value() +
                            2.0 * 2.0 * catalog_cost(OpKind::multi_target_cz).value();
    const double boundary = 2.0 * catalog_cost(OpKind::multi_target_cnot_reduced).value() +
                            2.0 * catalog_cost(OpKind::cnot).value();
    return boundary + per_step * steps;
}

/// Crude RUS cost: one injection clock plus one measurement clock per trial.
inline double rough_rus_clocks(int M, RotationBasis) { return 2.0 * expected_trials(M); }

/// Controls for the Hadamard test. K0 is Z on both spins of every site with
/// x + y odd and anticommutes with each hopping term; K1 is X on every
/// spin-down orbital and anticommutes with each onsite term.
struct ControlSupport {
    std::vector<int> v0_sites;
    std::vector<int> v1_sites;
    PauliString k0;
    PauliString k1;
};

inline ControlSupport anticommuting_controls(int n, const std::vector<int> &line_order) {
    if (n < 2) {
        throw ValidationError("lattice side n must be at least 2");
    }
    int V = n * n;
    auto position = inverse_permutation(line_order);
    ControlSupport c;
    for (int s = 0; s < V; s++) {
        int pos = position[static_cast<std::size_t>(s)];
        if ((s % n + s / n) % 2 == 1) {
            c.v0_sites.push_back(s);
            c.k0[qubit_index(V, pos, Spin::up)] = Pauli::Z;
            c.k0[qubit_index(V, pos, Spin::down)] = Pauli::Z;
        }
        c.v1_sites.push_back(s);
        c.k1[qubit_index(V, pos, Spin::down)] = Pauli::X;
    }
    return c;
}

inline ControlSupport anticommuting_controls(int n) { return anticommuting_controls(n, identity_order(n * n)); }

// Serial baseline: every rotation in its own slot, ZZ layer once in the middle.
// A string rotation costs two basis-change CNOT ladders of 3 clocks plus a
// 2-clock trial; the Y variant adds two S gates of 1.5 clocks.
inline constexpr int kSerialZZ = 2;
inline constexpr int kSerialXZX = 3 * 2 + 2;
inline constexpr int kSerialYZY = 3 * 2 + 3 + 2;

/// V T_ZZ + 2 * (4 n (n-1) bonds) * (T_XZX + T_YZY) = 154 V - 152 n.
inline long long serial_clocks(int n) {
    if (n < 2) {
        throw ValidationError("lattice side n must be at least 2");
    }
    long long V = static_cast<long long>(n) * n;
    long long bonds = 4LL * n * (n - 1);
    return V * kSerialZZ + 2 * bonds * (kSerialXZX + kSerialYZY);
}

// ---------------------------------------------------------------------------
// Monte Carlo step cost.

/// Draws every RUS group of the step once per run, sharing one stream per run.
/// Returns per-run step totals (fixed clocks included).
inline RusStats simulate_step_clocks(const TrotterSchedule &sched, const InjectionConfig &cfg, InjectionMode mode,
                                     int runs, std::uint64_t seed, unsigned threads = 1) {
    cfg.validate();
    if (runs < 1) {
        throw ValidationError("runs must be at least 1");
    }
    auto groups = sched.rus_groups();
    RusSimOptions opt;
    opt.mode = mode;
    int fixed = static_cast<int>(sched.fixed_clocks().halves());
    std::vector<PreparedLayout> prepared;
    prepared.reserve(groups.size());
    for (const RusGroup *g : groups) {
        prepared.emplace_back(g->layout);
    }
    std::vector<int> totals(static_cast<std::size_t>(runs));
    parallel_for(totals.size(), threads, [&](std::size_t r) {
        auto rng = run_rng(seed, r);
        int halves = fixed;
        for (const PreparedLayout &g : prepared) {
            halves += 2 * simulate_once(g, cfg, opt, rng);
        }
        // Fixed costs are whole clocks for every kind used in a step.
        totals[r] = halves / 2;
    });
    return summarize(std::move(totals), seed);
}

/// Duration callback that draws each group once from its own stream.
inline RusDurationFn sampled_durations(const InjectionConfig &cfg, InjectionMode mode, std::uint64_t seed) {
    return [cfg, mode, seed](const RusGroup &g, std::size_t index) {
        RusSimOptions opt;
        opt.mode = mode;
        auto rng = run_rng(seed, index);
        return Clock::clocks(simulate_once(g.layout, cfg, opt, rng));
    };
}

/// Every hopping bond's total angle multiple over the step (expected: 2).
inline std::map<LatticeEdge, int> executed_bond_multiples(const TrotterSchedule &sched) {
    std::map<LatticeEdge, int> out;
    for (const auto &b : sched.batches) {
        for (const auto &e : b.edges) {
            out[e] += b.angle_multiple;
        }
    }
    return out;
}

}  // namespace star
