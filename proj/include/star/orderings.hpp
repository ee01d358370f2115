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
#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "star/errors.hpp"
#include "star/hubbard.hpp"

namespace star {

/// Two Jordan-Wigner line orderings whose local bonds together cover the
/// lattice. order[pos] = site.
struct OrderingPair {
    int n = 0;
    std::vector<int> order_a;
    std::vector<int> order_b;
    std::vector<LatticeEdge> edges_a;
    std::vector<LatticeEdge> edges_b;
};

/// Layers of disjoint adjacent transpositions. Each entry p swaps the
/// orbitals at line positions p and p + 1.
struct FSwapSchedule {
    std::vector<std::vector<int>> layers;

    int layer_count() const { return static_cast<int>(layers.size()); }
    int swap_count() const {
        int total = 0;
        for (const auto &layer : layers) {
            total += static_cast<int>(layer.size());
        }
        return total;
    }
};

inline std::vector<int> inverse_permutation(const std::vector<int> &order) {
    std::vector<int> inv(order.size(), -1);
    for (std::size_t i = 0; i < order.size(); i++) {
        inv[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    }
    return inv;
}

inline bool is_permutation_of_sites(const std::vector<int> &order, int sites) {
    if (static_cast<int>(order.size()) != sites) {
        return false;
    }
    std::vector<bool> seen(static_cast<std::size_t>(sites), false);
    for (int s : order) {
        if (s < 0 || s >= sites || seen[static_cast<std::size_t>(s)]) {
            return false;
        }
        seen[static_cast<std::size_t>(s)] = true;
    }
    return true;
}

/// Lower line position of a bond, or -1 if its ends are not neighbours on the line.
inline int local_position(const LatticeEdge &e, const std::vector<int> &position) {
    int pa = position[static_cast<std::size_t>(e.a)];
    int pb = position[static_cast<std::size_t>(e.b)];
    if (std::abs(pa - pb) != 1) {
        return -1;
    }
    return std::min(pa, pb);
}

/// Splits local bonds into two vertex-disjoint sub-layers keyed by the
/// parity of their lower line position.
inline std::array<std::vector<LatticeEdge>, 2> split_sublayers(const std::vector<LatticeEdge> &edges,
                                                              const std::vector<int> &order) {
    auto position = inverse_permutation(order);
    std::array<std::vector<LatticeEdge>, 2> parts;
    for (const LatticeEdge &e : edges) {
        int p = local_position(e, position);
        if (p < 0) {
            throw ValidationError("bond " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                                  " is not local under the ordering");
        }
        parts[static_cast<std::size_t>(p % 2)].push_back(e);
    }
    for (auto &part : parts) {
        std::sort(part.begin(), part.end(), [&](const LatticeEdge &x, const LatticeEdge &y) {
            return local_position(x, position) < local_position(y, position);
        });
    }
    return parts;
}

/// Every broken invariant of the pair, as human readable strings.
inline std::vector<std::string> ordering_violations(const OrderingPair &pair) {
    std::vector<std::string> out;
    int n = pair.n;
    if (n < 2) {
        out.push_back("n must be at least 2");
        return out;
    }
    int sites = n * n;
    if (!is_permutation_of_sites(pair.order_a, sites)) {
        out.push_back("order_a is not a permutation of the sites");
    }
    if (!is_permutation_of_sites(pair.order_b, sites)) {
        out.push_back("order_b is not a permutation of the sites");
    }
    if (!out.empty()) {
        return out;
    }
    std::size_t expected = static_cast<std::size_t>(n * (n - 1));
    if (pair.edges_a.size() != expected) {
        out.push_back("edges_a has " + std::to_string(pair.edges_a.size()) + " bonds, expected " +
                      std::to_string(expected));
    }
    if (pair.edges_b.size() != expected) {
        out.push_back("edges_b has " + std::to_string(pair.edges_b.size()) + " bonds, expected " +
                      std::to_string(expected));
    }
    std::set<LatticeEdge> all;
    for (const LatticeEdge &e : lattice_edges(n)) {
        all.insert(e);
    }
    std::multiset<LatticeEdge> used;
    auto check_side = [&](const std::vector<LatticeEdge> &edges, const std::vector<int> &order, const char *name) {
        auto position = inverse_permutation(order);
        std::array<std::size_t, 2> parity{0, 0};
        for (LatticeEdge e : edges) {
            if (e.a > e.b) {
                std::swap(e.a, e.b);
            }
            LatticeEdge canon{e.a, e.b, e.b - e.a == 1};
            if (!all.contains(canon)) {
                out.push_back(std::string(name) + " lists a non-bond " + std::to_string(e.a) + "-" +
                              std::to_string(e.b));
                continue;
            }
            used.insert(canon);
            int p = local_position(canon, position);
            if (p < 0) {
                out.push_back(std::string(name) + " bond " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                              " is not local under its ordering");
                continue;
            }
            parity[static_cast<std::size_t>(p % 2)]++;
        }
        if (parity[0] != parity[1]) {
            out.push_back(std::string(name) + " sub-layers are unbalanced (" + std::to_string(parity[0]) + " vs " +
                          std::to_string(parity[1]) + ")");
        }
    };
    check_side(pair.edges_a, pair.order_a, "edges_a");
    check_side(pair.edges_b, pair.order_b, "edges_b");
    for (const LatticeEdge &e : all) {
        auto c = used.count(e);
        if (c == 0) {
            out.push_back("bond " + std::to_string(e.a) + "-" + std::to_string(e.b) + " is not covered");
        } else if (c > 1) {
            out.push_back("bond " + std::to_string(e.a) + "-" + std::to_string(e.b) + " is covered twice");
        }
    }
    return out;
}

inline void validate(const OrderingPair &pair) {
    auto issues = ordering_violations(pair);
    if (!issues.empty()) {
        std::string msg = "invalid ordering pair:";
        for (const auto &s : issues) {
            msg += "\n  " + s;
        }
        throw ValidationError(msg);
    }
}

/// Builds a pair from two orders and a bond classifier (true = edges_a).
inline OrderingPair make_pair_from_orders(int n, std::vector<int> order_a, std::vector<int> order_b,
                                          const std::function<bool(const LatticeEdge &)> &in_a) {
    OrderingPair pair;
    pair.n = n;
    pair.order_a = std::move(order_a);
    pair.order_b = std::move(order_b);
    for (const LatticeEdge &e : lattice_edges(n)) {
        (in_a(e) ? pair.edges_a : pair.edges_b).push_back(e);
    }
    return pair;
}

/// Same, with bonds local under order_a going to edges_a.
inline OrderingPair make_pair_from_orders(int n, std::vector<int> order_a, std::vector<int> order_b) {
    std::vector<int> pos_a;
    if (is_permutation_of_sites(order_a, n * n)) {
        pos_a = inverse_permutation(order_a);
    }
    auto in_a = [&](const LatticeEdge &e) { return !pos_a.empty() && local_position(e, pos_a) >= 0; };
    return make_pair_from_orders(n, std::move(order_a), std::move(order_b), in_a);
}

/// Renames sites by a bijection of the lattice (rotations, reflections).
inline OrderingPair relabel(const OrderingPair &pair, const std::vector<int> &site_map) {
    OrderingPair out;
    out.n = pair.n;
    for (int s : pair.order_a) {
        out.order_a.push_back(site_map[static_cast<std::size_t>(s)]);
    }
    for (int s : pair.order_b) {
        out.order_b.push_back(site_map[static_cast<std::size_t>(s)]);
    }
    auto map_edges = [&](const std::vector<LatticeEdge> &in, std::vector<LatticeEdge> &dst) {
        for (const auto &e : in) {
            int a = site_map[static_cast<std::size_t>(e.a)];
            int b = site_map[static_cast<std::size_t>(e.b)];
            if (a > b) {
                std::swap(a, b);
            }
            dst.push_back({a, b, b - a == 1});
        }
    };
    map_edges(pair.edges_a, out.edges_a);
    map_edges(pair.edges_b, out.edges_b);
    return out;
}

namespace detail {

inline std::vector<std::pair<int, int>> anti_diagonal(int n, int s) {
    std::vector<std::pair<int, int>> out;
    for (int x = std::max(0, s - n + 1); x <= std::min(s, n - 1); x++) {
        out.emplace_back(x, s - x);
    }
    return out;
}

/// Zigzag through anti-diagonals s and s + 1; visits every bond between them.
inline std::vector<std::pair<int, int>> staircase(int n, int s, bool reversed) {
    auto lo = anti_diagonal(n, s);
    auto hi = anti_diagonal(n, s + 1);
    const auto &big = hi.size() > lo.size() ? hi : lo;
    const auto &small = hi.size() > lo.size() ? lo : hi;
    std::vector<std::pair<int, int>> seq;
    for (std::size_t i = 0; i < small.size(); i++) {
        seq.push_back(big[i]);
        seq.push_back(small[i]);
    }
    seq.push_back(big.back());
    if (reversed) {
        std::reverse(seq.begin(), seq.end());
    }
    return seq;
}

/// offset 0 pairs diagonals (0,1),(2,3),...; offset 1 starts with diagonal 0
/// alone and pairs (1,2),(3,4),...  `reversed(k)` flips the k-th staircase.
inline std::vector<std::pair<int, int>> staircase_line(int n, int offset, const std::function<bool(int)> &reversed) {
    std::vector<std::pair<int, int>> seq;
    int s = 0;
    if (offset == 1) {
        auto d = anti_diagonal(n, 0);
        seq.insert(seq.end(), d.begin(), d.end());
        s = 1;
    }
    int k = 0;
    while (s <= 2 * n - 2) {
        if (s == 2 * n - 2) {
            auto d = anti_diagonal(n, s);
            seq.insert(seq.end(), d.begin(), d.end());
            break;
        }
        auto st = staircase(n, s, reversed(k++));
        seq.insert(seq.end(), st.begin(), st.end());
        s += 2;
    }
    return seq;
}

}  // namespace detail

/// Staircase ordering pair. Both lines sweep anti-diagonals; order_a pairs
/// diagonals starting at 0, order_b starting at 1. A bond between diagonals
/// s and s + 1 belongs to edges_a when s is even.
inline OrderingPair staircase_pair(int n, const std::function<bool(int)> &reverse_a,
                                   const std::function<bool(int)> &reverse_b) {
    if (n < 2) {
        throw ValidationError("lattice side n must be at least 2");
    }
    auto to_sites = [&](const std::vector<std::pair<int, int>> &seq) {
        std::vector<int> order;
        order.reserve(seq.size());
        for (auto [x, y] : seq) {
            order.push_back(site_index(n, x, y));
        }
        return order;
    };
    auto diagonal = [n](int site) { return site % n + site / n; };
    auto in_a = [&](const LatticeEdge &e) { return std::min(diagonal(e.a), diagonal(e.b)) % 2 == 0; };
    return make_pair_from_orders(n, to_sites(detail::staircase_line(n, 0, reverse_a)),
                                 to_sites(detail::staircase_line(n, 1, reverse_b)), in_a);
}

/// Built-in generator used when no data file overrides it.
inline OrderingPair default_orderings(int n) {
    auto same = [](int) { return false; };
    OrderingPair pair = staircase_pair(n, same, same);
    auto issues = ordering_violations(pair);
    if (!issues.empty()) {
        throw InfeasibleError("ordering generator failed for n=" + std::to_string(n) + ": " + issues.front());
    }
    return pair;
}

inline void apply_layer(std::vector<int> &order, const std::vector<int> &layer) {
    for (int p : layer) {
        std::swap(order[static_cast<std::size_t>(p)], order[static_cast<std::size_t>(p) + 1]);
    }
}

inline std::vector<int> apply_schedule(std::vector<int> order, const FSwapSchedule &schedule) {
    for (const auto &layer : schedule.layers) {
        apply_layer(order, layer);
    }
    return order;
}

/// Odd-even transposition sort from `from` to `to`. Both starting parities
/// are tried, idle rounds are dropped, and the shorter schedule wins.
inline FSwapSchedule route_permutation(const std::vector<int> &from, const std::vector<int> &to) {
    if (from.size() != to.size()) {
        throw ValidationError("cannot route between orderings of different size");
    }
    std::vector<int> target_of(from.size());
    auto pos_in_to = inverse_permutation(to);
    for (std::size_t i = 0; i < from.size(); i++) {
        target_of[i] = pos_in_to[static_cast<std::size_t>(from[i])];
    }
    FSwapSchedule best;
    bool have = false;
    for (int start : {0, 1}) {
        std::vector<int> cur = target_of;
        FSwapSchedule sched;
        int parity = start;
        int idle = 0;
        while (!std::is_sorted(cur.begin(), cur.end()) && idle < 2) {
            std::vector<int> layer;
            for (std::size_t p = static_cast<std::size_t>(parity); p + 1 < cur.size(); p += 2) {
                if (cur[p] > cur[p + 1]) {
                    std::swap(cur[p], cur[p + 1]);
                    layer.push_back(static_cast<int>(p));
                }
            }
            if (layer.empty()) {
                idle++;
            } else {
                idle = 0;
                sched.layers.push_back(std::move(layer));
            }
            parity ^= 1;
        }
        if (!have || sched.layer_count() < best.layer_count()) {
            best = std::move(sched);
            have = true;
        }
    }
    return best;
}

inline FSwapSchedule route_orderings(const OrderingPair &pair) {
    validate(pair);
    return route_permutation(pair.order_a, pair.order_b);
}

// ---------------------------------------------------------------------------
// Data files.

inline constexpr const char *kOrderingFormat = "star-ordering-pair/1";

inline nlohmann::json ordering_to_json(const OrderingPair &pair) {
    auto edges = [](const std::vector<LatticeEdge> &list) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &e : list) {
            arr.push_back({e.a, e.b});
        }
        return arr;
    };
    nlohmann::ordered_json j;
    j["format"] = kOrderingFormat;
    j["n"] = pair.n;
    j["orderings"] = {pair.order_a, pair.order_b};
    j["edges"] = {edges(pair.edges_a), edges(pair.edges_b)};
    return j;
}

inline OrderingPair ordering_from_json(const nlohmann::json &j) {
    auto fail = [](const std::string &where, const std::string &what) {
        throw ValidationError("ordering file " + where + ": " + what);
    };
    if (!j.is_object()) {
        fail("/", "expected an object");
    }
    for (const auto &[key, value] : j.items()) {
        if (key != "format" && key != "n" && key != "orderings" && key != "edges") {
            fail("/" + key, "unknown key");
        }
    }
    if (!j.contains("format") || j["format"] != kOrderingFormat) {
        fail("/format", std::string("must be \"") + kOrderingFormat + "\"");
    }
    if (!j.contains("n") || !j["n"].is_number_integer()) {
        fail("/n", "missing or not an integer");
    }
    OrderingPair pair;
    pair.n = j["n"].get<int>();
    if (!j.contains("orderings") || !j["orderings"].is_array() || j["orderings"].size() != 2) {
        fail("/orderings", "expected an array of two site permutations");
    }
    if (!j.contains("edges") || !j["edges"].is_array() || j["edges"].size() != 2) {
        fail("/edges", "expected an array of two bond lists");
    }
    try {
        pair.order_a = j["orderings"][0].get<std::vector<int>>();
        pair.order_b = j["orderings"][1].get<std::vector<int>>();
        for (int side = 0; side < 2; side++) {
            auto &dst = side == 0 ? pair.edges_a : pair.edges_b;
            for (const auto &e : j["edges"][static_cast<std::size_t>(side)]) {
                auto ab = e.get<std::vector<int>>();
                if (ab.size() != 2) {
                    fail("/edges/" + std::to_string(side), "each bond must be a pair [a, b]");
                }
                int a = std::min(ab[0], ab[1]);
                int b = std::max(ab[0], ab[1]);
                dst.push_back({a, b, b - a == 1});
            }
        }
    } catch (const nlohmann::json::exception &ex) {
        fail("/", ex.what());
    }
    validate(pair);
    return pair;
}

inline OrderingPair load_ordering_pair(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open ordering file " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &ex) {
        throw ValidationError("ordering file " + path.string() + ": " + ex.what());
    }
    return ordering_from_json(j);
}

#ifdef STAR_DATA_DIR
inline std::filesystem::path default_data_dir() { return STAR_DATA_DIR; }
#else
inline std::filesystem::path default_data_dir() { return "data"; }
#endif

/// The pair shipped under data/orderings when present, else the generator.
inline OrderingPair shipped_orderings(int n, const std::filesystem::path &data_dir = default_data_dir()) {
    auto path = data_dir / "orderings" / ("n" + std::to_string(n) + ".json");
    if (std::filesystem::exists(path)) {
        OrderingPair pair = load_ordering_pair(path);
        if (pair.n != n) {
            throw ValidationError(path.string() + " holds n=" + std::to_string(pair.n));
        }
        return pair;
    }
    return default_orderings(n);
}

}  // namespace star
