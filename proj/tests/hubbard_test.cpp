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

#include "star/hubbard.hpp"

using namespace star;

namespace {

int count_kind(const PauliTermSet &terms, TermKind kind) {
    return static_cast<int>(std::count_if(terms.begin(), terms.end(), [&](const PauliTerm &t) { return t.kind == kind; }));
}

}  // namespace

TEST(hubbard, term_counts_4x4) {
    auto terms = build_hamiltonian({4, 1.0, 4.0});
    EXPECT_EQ(count_kind(terms, TermKind::hopping_xx), 48);
    EXPECT_EQ(count_kind(terms, TermKind::hopping_yy), 48);
    EXPECT_EQ(count_kind(terms, TermKind::onsite_zz), 16);
}

TEST(hubbard, zero_hopping_leaves_onsite_only) {
    auto terms = build_hamiltonian({2, 0.0, 4.0});
    ASSERT_EQ(terms.size(), 4u);
    for (const auto &t : terms) {
        EXPECT_EQ(t.kind, TermKind::onsite_zz);
        EXPECT_DOUBLE_EQ(t.coefficient, 1.0);
        EXPECT_EQ(t.paulis.size(), 2u);
    }
}

TEST(hubbard, one_norm_small_lattice) {
    // 4 bonds * 2 spins * 2 Paulis * t/2 + 4 sites * u/4.
    EXPECT_DOUBLE_EQ(one_norm(build_hamiltonian({2, 1.0, 4.0})), 8.0 + 4.0);
}

TEST(hubbard, one_norm_table) {
    EXPECT_DOUBLE_EQ(one_norm(build_hamiltonian({4, 1.0, 4.0})), 64.0);
    EXPECT_DOUBLE_EQ(one_norm(build_hamiltonian({6, 1.0, 4.0})), 156.0);
    EXPECT_DOUBLE_EQ(one_norm(build_hamiltonian({8, 1.0, 4.0})), 288.0);
    EXPECT_DOUBLE_EQ(one_norm(build_hamiltonian({10, 1.0, 4.0})), 460.0);
    EXPECT_DOUBLE_EQ(one_norm(PauliTermSet{}), 0.0);
}

TEST(hubbard, one_norm_matches_closed_form) {
    for (int n = 2; n <= 12; n++) {
        for (auto [t, u] : {std::pair{1.0, 4.0}, std::pair{0.5, 8.0}, std::pair{2.0, 0.0}, std::pair{-1.0, 4.0}}) {
            HubbardSpec spec{n, t, u};
            double direct = one_norm(build_hamiltonian(spec));
            double formula = 4.0 * n * (n - 1) * std::abs(t) + n * n * std::abs(u) / 4.0;
            EXPECT_NEAR(direct, formula, 1e-9 * formula) << "n=" << n;
            EXPECT_NEAR(one_norm_formula(spec), formula, 1e-9 * formula);
        }
    }
}

TEST(hubbard, jordan_wigner_strings) {
    const int n = 3;
    const int V = n * n;
    auto order = identity_order(V);
    for (const auto &term : build_hamiltonian({n, 1.0, 4.0}, order)) {
        if (term.kind == TermKind::onsite_zz) {
            ASSERT_EQ(term.paulis.size(), 2u);
            auto it = term.paulis.begin();
            EXPECT_EQ(std::next(it)->first - it->first, V);
            EXPECT_DOUBLE_EQ(term.coefficient, 1.0);
            continue;
        }
        Pauli end = term.kind == TermKind::hopping_xx ? Pauli::X : Pauli::Y;
        int lo = term.paulis.begin()->first;
        int hi = term.paulis.rbegin()->first;
        EXPECT_EQ(lo / V, hi / V) << "hopping stays within one spin block";
        EXPECT_EQ(term.paulis.at(lo), end);
        EXPECT_EQ(term.paulis.at(hi), end);
        EXPECT_EQ(static_cast<int>(term.paulis.size()), hi - lo + 1);
        for (int q = lo + 1; q < hi; q++) {
            EXPECT_EQ(term.paulis.at(q), Pauli::Z);
        }
        EXPECT_DOUBLE_EQ(term.coefficient, -0.5);
    }
}

TEST(hubbard, line_order_changes_string_length) {
    const int n = 2;
    // Snake order makes every bond except one adjacent on the line.
    std::vector<int> snake{0, 1, 3, 2};
    int long_strings = 0;
    for (const auto &term : build_hamiltonian({n, 1.0, 0.0}, snake)) {
        long_strings += term.paulis.size() > 2;
    }
    EXPECT_EQ(long_strings, 2 * 2);  // bond (0,2): XX and YY, both spins.
}

TEST(hubbard, edges) {
    auto edges = lattice_edges(4);
    EXPECT_EQ(edges.size(), 24u);
    for (const auto &e : edges) {
        EXPECT_LT(e.a, e.b);
        EXPECT_EQ(e.b - e.a, e.horizontal ? 1 : 4);
    }
}

TEST(hubbard, anticommutation) {
    PauliString a{{0, Pauli::X}, {1, Pauli::Z}};
    PauliString b{{0, Pauli::Z}};
    PauliString c{{0, Pauli::Z}, {1, Pauli::X}};
    EXPECT_TRUE(anticommutes(a, b));
    EXPECT_FALSE(anticommutes(a, c));
    EXPECT_EQ(to_string(a), "X0 Z1");
}

TEST(hubbard, rejects_bad_specs) {
    EXPECT_THROW(build_hamiltonian({1, 1.0, 4.0}), ValidationError);
    EXPECT_THROW(build_hamiltonian({3, std::nan(""), 4.0}), ValidationError);
    EXPECT_THROW(build_hamiltonian({3, 1.0, 4.0}, identity_order(8)), ValidationError);
}
