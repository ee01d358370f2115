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

#include "star/trotter.hpp"

using namespace star;

namespace {

Clock unit_duration(const RusGroup &, std::size_t) { return Clock::clocks(1); }

TrotterSchedule compile(int n, StepMode mode = StepMode::plain, const RusDurationFn &d = unit_duration) {
    return compile_step({n, 1.0, 4.0}, 0.05, mode, shipped_orderings(n), d);
}

std::multiset<std::pair<int, RotationBasis>> group_multiset(const TrotterSchedule &s) {
    std::multiset<std::pair<int, RotationBasis>> out;
    for (const RusGroup *g : s.rus_groups()) {
        out.insert({g->count, g->basis});
    }
    return out;
}

}  // namespace

TEST(compile, group_structure_and_fixed_clocks) {
    for (int n = 2; n <= 10; n++) {
        auto s = compile(n);
        int V = n * n;
        std::multiset<std::pair<int, RotationBasis>> expected;
        for (int i = 0; i < 7; i++) {
            expected.insert({V - n, RotationBasis::Z});
            expected.insert({V - n, RotationBasis::ZZ});
        }
        expected.insert({V, RotationBasis::ZZ});
        expected.insert({V, RotationBasis::ZZ});
        EXPECT_EQ(group_multiset(s), expected) << "n=" << n;
        EXPECT_EQ(s.fixed_clocks(), Clock::clocks(14 * n + 55)) << "n=" << n;
        EXPECT_EQ(s.fswap_layers, n - 1);
    }
    EXPECT_EQ(compile(2).fixed_clocks(), Clock::clocks(83));
    EXPECT_EQ(compile(4).fixed_clocks(), Clock::clocks(111));
}

TEST(compile, controlled_mode_adds_ancilla_layers) {
    for (int n : {2, 4, 7}) {
        auto plain = compile(n);
        auto ctrl = compile(n, StepMode::controlled);
        EXPECT_EQ(group_multiset(ctrl), group_multiset(plain));
        EXPECT_EQ(ctrl.fixed_clocks(), plain.fixed_clocks() + Clock::clocks(18));
    }
}

TEST(compile, fixed_part_decomposes) {
    // 7 xxyy batches of 9 clocks, two 3-clock moves, 2L fSWAP layers of 7.
    for (int n = 2; n <= 8; n++) {
        auto s = compile(n);
        Clock xxyy, moves, swaps;
        for (const auto &b : s.batches) {
            if (b.kind == BatchKind::xxyy_batch) {
                xxyy += b.fixed;
            } else if (b.kind == BatchKind::move_layer) {
                moves += b.fixed;
            } else if (b.kind == BatchKind::fswap_layer) {
                swaps += b.fixed;
            }
        }
        EXPECT_EQ(xxyy, Clock::clocks(63));
        EXPECT_EQ(moves, Clock::clocks(6));
        EXPECT_EQ(swaps, Clock::clocks(14 * (n - 1)));
    }
}

TEST(compile, halves_mirror_each_other) {
    for (int n : {3, 4, 6}) {
        auto s = compile(n);
        const auto &b = s.batches;
        int merged = 0;
        for (std::size_t i = 0; i < b.size(); i++) {
            const auto &mirror = b[b.size() - 1 - i];
            EXPECT_EQ(b[i].kind, mirror.kind);
            EXPECT_EQ(b[i].edges, mirror.edges);
            EXPECT_EQ(b[i].angle_multiple, mirror.angle_multiple);
            merged += b[i].merged;
        }
        EXPECT_EQ(merged, 1);
        EXPECT_TRUE(b[b.size() / 2].merged);
    }
}

TEST(compile, angle_bookkeeping) {
    const double dtau = 0.05;
    for (int n : {2, 4, 5}) {
        HubbardSpec spec{n, 1.5, 3.0};
        auto s = compile_step(spec, dtau, StepMode::plain, shipped_orderings(n), unit_duration);
        // Every bond: total XX (and YY) angle t dtau / 2 over the step.
        auto multiples = executed_bond_multiples(s);
        EXPECT_EQ(multiples.size(), lattice_edges(n).size());
        for (const auto &[edge, m] : multiples) {
            EXPECT_NEAR(m * s.angles.hop, spec.t / 2.0 * dtau, 1e-15);
        }
        double onsite = 0.0;
        for (const auto &b : s.batches) {
            if (b.kind == BatchKind::zz_rotation_layer) {
                onsite += b.rus_groups.at(0).angle;
            }
        }
        EXPECT_NEAR(onsite, spec.u / 4.0 * dtau, 1e-15);
    }
}

TEST(compile, timeline_total_matches_formula) {
    // Same duration for every group of a given (M, basis).
    auto t_rus = [](int M, RotationBasis b) { return (b == RotationBasis::Z ? 3 : 5) + M % 4; };
    for (int n : {2, 4, 6}) {
        auto s = compile(n, StepMode::plain,
                         [&](const RusGroup &g, std::size_t) { return Clock::clocks(t_rus(g.count, g.basis)); });
        EXPECT_DOUBLE_EQ(s.total().value(), trotter_clocks(n, t_rus));
        EXPECT_EQ(s.timeline.horizon(), s.total());
    }
}

TEST(compile, sampled_durations_add_up) {
    InjectionConfig cfg;
    auto d = sampled_durations(cfg, InjectionMode::adaptive, 9);
    auto s = compile(4, StepMode::plain, d);
    Clock sum = s.fixed_clocks();
    std::size_t i = 0;
    for (const RusGroup *g : s.rus_groups()) {
        sum += d(*g, i++);
    }
    EXPECT_EQ(s.total(), sum);
}

TEST(compile, rejects_mismatched_pair) {
    EXPECT_THROW(compile_step({4, 1.0, 4.0}, 0.05, StepMode::plain, shipped_orderings(3), unit_duration),
                 ValidationError);
    auto bad = shipped_orderings(3);
    std::swap(bad.order_b[0], bad.order_b[1]);
    EXPECT_THROW(compile_step({3, 1.0, 4.0}, 0.05, StepMode::plain, bad, unit_duration), ValidationError);
}

TEST(formula, trotter_clocks) {
    EXPECT_DOUBLE_EQ(trotter_clocks(4, [](int, RotationBasis) { return 0.0; }), 111.0);
    double rough = trotter_clocks(4, rough_rus_clocks);
    // 14 (2 <K>_12) + 4 <K>_16 + 111.
    EXPECT_NEAR(rough, 271.865, 1e-3);
    double lower = trotter_clocks(4, [](int M, RotationBasis) { return expected_trials(M) + 1.0; });
    EXPECT_LT(lower, rough);
}

TEST(formula, controlled_overhead) {
    EXPECT_DOUBLE_EQ(controlled_overhead(0), 16.0);
    EXPECT_DOUBLE_EQ(controlled_overhead(1), 34.0);
    EXPECT_DOUBLE_EQ(controlled_overhead(3397), 61162.0);
}

TEST(controls, supports) {
    auto c2 = anticommuting_controls(2);
    EXPECT_EQ(c2.v0_sites.size(), 2u);
    EXPECT_EQ(c2.v1_sites.size(), 4u);
    EXPECT_EQ(anticommuting_controls(4).v0_sites.size(), 8u);
}

TEST(controls, anticommute_with_their_terms) {
    for (int n : {2, 3, 4}) {
        auto order = shipped_orderings(n).order_a;
        auto c = anticommuting_controls(n, order);
        for (const auto &term : build_hamiltonian({n, 1.0, 4.0}, order)) {
            if (term.kind == TermKind::onsite_zz) {
                EXPECT_TRUE(anticommutes(c.k1, term.paulis)) << to_string(term.paulis);
                EXPECT_FALSE(anticommutes(c.k0, term.paulis));
            } else {
                EXPECT_TRUE(anticommutes(c.k0, term.paulis)) << to_string(term.paulis);
            }
        }
    }
}

TEST(serial, baseline) {
    EXPECT_EQ(serial_clocks(4), 1856);
    EXPECT_EQ(serial_clocks(10), 13880);
    for (int n = 2; n <= 12; n++) {
        EXPECT_EQ(serial_clocks(n), 154LL * n * n - 152LL * n);
    }
    EXPECT_NEAR(100.0 * (1.0 - 248.355 / 1856.0), 86.6, 0.05);
}

TEST(step_sim, deterministic) {
    auto s = compile(3);
    InjectionConfig cfg;
    auto a = simulate_step_clocks(s, cfg, InjectionMode::adaptive, 100, 5, 1);
    auto b = simulate_step_clocks(s, cfg, InjectionMode::adaptive, 100, 5, 3);
    EXPECT_EQ(a.completions, b.completions);
    EXPECT_GT(a.mean, 14.0 * 3 + 55);
}
