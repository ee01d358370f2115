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
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "star/errors.hpp"

namespace star {

enum class Spin : int { up = 0, down = 1 };

/// Square n x n Hubbard lattice with open boundaries.
struct HubbardSpec {
    int n = 4;
    double t = 1.0;
    double u = 4.0;

    int sites() const { return n * n; }

    void validate() const {
        if (n < 2) {
            throw ValidationError("lattice side n must be at least 2, got " + std::to_string(n));
        }
        if (!std::isfinite(t) || !std::isfinite(u)) {
            throw ValidationError("hopping t and repulsion u must be finite");
        }
    }
};

enum class Pauli : char { X = 'X', Y = 'Y', Z = 'Z' };

enum class TermKind { hopping_xx, hopping_yy, onsite_zz };

inline const char *term_kind_name(TermKind kind) {
    switch (kind) {
        case TermKind::hopping_xx:
            return "hopping_XX";
        case TermKind::hopping_yy:
            return "hopping_YY";
        case TermKind::onsite_zz:
            return "onsite_ZZ";
    }
    return "?";
}

using PauliString = std::map<int, Pauli>;

/// coefficient * P with P a Pauli string over qubit indices.
struct PauliTerm {
    double coefficient = 0.0;
    PauliString paulis;
    TermKind kind = TermKind::onsite_zz;
};

using PauliTermSet = std::vector<PauliTerm>;

/// Nearest-neighbour bond between sites a < b (site = y * n + x).
struct LatticeEdge {
    int a = 0;
    int b = 0;
    bool horizontal = true;

    friend bool operator==(const LatticeEdge &, const LatticeEdge &) = default;
    friend auto operator<=>(const LatticeEdge &, const LatticeEdge &) = default;
};

inline int site_index(int n, int x, int y) { return y * n + x; }

/// Qubit index of a spin orbital once sites are laid out on a line.
/// Spin-up orbitals take qubits [0, V), spin-down orbitals take [V, 2V).
inline int qubit_index(int sites, int line_position, Spin spin) {
    return static_cast<int>(spin) * sites + line_position;
}

inline std::vector<LatticeEdge> lattice_edges(int n) {
    std::vector<LatticeEdge> edges;
    edges.reserve(static_cast<std::size_t>(2 * n * (n - 1)));
    for (int y = 0; y < n; y++) {
        for (int x = 0; x + 1 < n; x++) {
            edges.push_back({site_index(n, x, y), site_index(n, x + 1, y), true});
        }
    }
    for (int y = 0; y + 1 < n; y++) {
        for (int x = 0; x < n; x++) {
            edges.push_back({site_index(n, x, y), site_index(n, x, y + 1), false});
        }
    }
    return edges;
}

inline std::vector<int> identity_order(int sites) {
    std::vector<int> order(static_cast<std::size_t>(sites));
    std::iota(order.begin(), order.end(), 0);
    return order;
}

/// Jordan-Wigner Hamiltonian
///   H = -t/2 sum_<ij>,s (X_i Z..Z X_j + Y_i Z..Z Y_j) + u/4 sum_i Z_i,up Z_i,down
/// with sites placed on the line by `line_order` (line_order[pos] = site).
/// The constant and the total-number term are dropped. Zero coefficients
/// are omitted.
inline PauliTermSet build_hamiltonian(const HubbardSpec &spec, const std::vector<int> &line_order) {
    spec.validate();
    int sites = spec.sites();
    if (static_cast<int>(line_order.size()) != sites) {
        throw ValidationError("line order must list all " + std::to_string(sites) + " sites");
    }
    std::vector<int> position(static_cast<std::size_t>(sites), -1);
    for (int pos = 0; pos < sites; pos++) {
        int s = line_order[static_cast<std::size_t>(pos)];
        if (s < 0 || s >= sites || position[static_cast<std::size_t>(s)] != -1) {
            throw ValidationError("line order is not a permutation of the sites");
        }
        position[static_cast<std::size_t>(s)] = pos;
    }

    PauliTermSet terms;
    if (spec.t != 0.0) {
        for (const LatticeEdge &e : lattice_edges(spec.n)) {
            int pa = position[static_cast<std::size_t>(e.a)];
            int pb = position[static_cast<std::size_t>(e.b)];
            if (pa > pb) {
                std::swap(pa, pb);
            }
            for (Spin spin : {Spin::up, Spin::down}) {
                for (Pauli end : {Pauli::X, Pauli::Y}) {
                    PauliTerm term;
                    term.coefficient = -spec.t / 2.0;
                    term.kind = end == Pauli::X ? TermKind::hopping_xx : TermKind::hopping_yy;
                    term.paulis[qubit_index(sites, pa, spin)] = end;
                    for (int p = pa + 1; p < pb; p++) {
                        term.paulis[qubit_index(sites, p, spin)] = Pauli::Z;
                    }
                    term.paulis[qubit_index(sites, pb, spin)] = end;
                    terms.push_back(std::move(term));
                }
            }
        }
    }
    if (spec.u != 0.0) {
        for (int site = 0; site < sites; site++) {
            int pos = position[static_cast<std::size_t>(site)];
            PauliTerm term;
            term.coefficient = spec.u / 4.0;
            term.kind = TermKind::onsite_zz;
            term.paulis[qubit_index(sites, pos, Spin::up)] = Pauli::Z;
            term.paulis[qubit_index(sites, pos, Spin::down)] = Pauli::Z;
            terms.push_back(std::move(term));
        }
    }
    return terms;
}

inline PauliTermSet build_hamiltonian(const HubbardSpec &spec) {
    spec.validate();
    return build_hamiltonian(spec, identity_order(spec.sites()));
}

inline double one_norm(const PauliTermSet &terms) {
    double total = 0.0;
    for (const PauliTerm &term : terms) {
        total += std::abs(term.coefficient);
    }
    return total;
}

/// Closed form of one_norm(build_hamiltonian(spec)).
inline double one_norm_formula(const HubbardSpec &spec) {
    double n = spec.n;
    return 4.0 * n * (n - 1.0) * std::abs(spec.t) + n * n * std::abs(spec.u) / 4.0;
}

/// Two Pauli strings anticommute iff they differ on an odd number of
/// shared qubits.
inline bool anticommutes(const PauliString &a, const PauliString &b) {
    int clashes = 0;
    for (const auto &[qubit, p] : a) {
        auto it = b.find(qubit);
        if (it != b.end() && it->second != p) {
            clashes++;
        }
    }
    return clashes % 2 == 1;
}

inline std::string to_string(const PauliString &p) {
    std::string out;
    for (const auto &[qubit, op] : p) {
        if (!out.empty()) {
            out += ' ';
        }
        out += static_cast<char>(op);
        out += std::to_string(qubit);
    }
    return out;
}

}  // namespace star
