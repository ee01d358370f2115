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

#include <random>

#include <gtest/gtest.h>

#include "star/orderings.hpp"
#include "support/layer_search.hpp"

using namespace star;

namespace {

/// The 8 symmetries of the square lattice as site maps.
std::vector<int> lattice_symmetry(int n, int which) {
    std::vector<int> map(static_cast<std::size_t>(n * n));
    for (int y = 0; y < n; y++) {
        for (int x = 0; x < n; x++) {
            int u = x;
            int v = y;
            if (which & 1) {
                u = n - 1 - u;
            }
            if (which & 2) {
                v = n - 1 - v;
            }
            if (which & 4) {
                std::swap(u, v);
            }
            map[static_cast<std::size_t>(site_index(n, x, y))] = site_index(n, u, v);
        }
    }
    return map;
}

bool is_valid(const OrderingPair &p) { return ordering_violations(p).empty(); }

}  // namespace

TEST(orderings, small_lattice_covers_every_bond_once) {
    auto pair = default_orderings(2);
    EXPECT_EQ(pair.edges_a.size(), 2u);
    EXPECT_EQ(pair.edges_b.size(), 2u);
    std::set<LatticeEdge> all(pair.edges_a.begin(), pair.edges_a.end());
    all.insert(pair.edges_b.begin(), pair.edges_b.end());
    EXPECT_EQ(all.size(), 4u);
}

TEST(orderings, local_subset_sizes) {
    for (int n = 2; n <= 12; n++) {
        auto pair = default_orderings(n);
        EXPECT_EQ(static_cast<int>(pair.edges_a.size()), n * (n - 1)) << n;
        EXPECT_EQ(static_cast<int>(pair.edges_b.size()), n * (n - 1)) << n;
        EXPECT_TRUE(is_valid(pair)) << n;
    }
}

TEST(orderings, identical_orders_rejected) {
    auto pair = default_orderings(4);
    auto same = make_pair_from_orders(4, pair.order_a, pair.order_a);
    EXPECT_FALSE(is_valid(same));
    EXPECT_THROW(validate(same), ValidationError);
    EXPECT_THROW(route_orderings(same), ValidationError);
}

TEST(orderings, sublayers_are_vertex_disjoint) {
    for (int n = 2; n <= 10; n++) {
        auto pair = default_orderings(n);
        for (const auto &[edges, order] : {std::pair{pair.edges_a, pair.order_a}, std::pair{pair.edges_b, pair.order_b}}) {
            for (const auto &part : split_sublayers(edges, order)) {
                std::set<int> touched;
                for (const auto &e : part) {
                    EXPECT_TRUE(touched.insert(e.a).second);
                    EXPECT_TRUE(touched.insert(e.b).second);
                }
                EXPECT_EQ(static_cast<int>(part.size()), n * (n - 1) / 2);
            }
        }
    }
}

TEST(routing, trivial_cases) {
    auto order = identity_order(9);
    EXPECT_EQ(route_permutation(order, order).layer_count(), 0);
    auto swapped = order;
    std::swap(swapped[4], swapped[5]);
    auto sched = route_permutation(order, swapped);
    EXPECT_EQ(sched.layer_count(), 1);
    EXPECT_EQ(sched.swap_count(), 1);
    EXPECT_EQ(sched.layers[0], std::vector<int>{4});
}

TEST(routing, shipped_pairs_take_n_minus_one_layers) {
    for (int n = 2; n <= 10; n++) {
        auto pair = shipped_orderings(n);
        auto sched = route_orderings(pair);
        EXPECT_EQ(sched.layer_count(), n - 1) << n;
        EXPECT_EQ(apply_schedule(pair.order_a, sched), pair.order_b);
        // n - 1 is also a lower bound: some orbital travels n - 1 slots.
        EXPECT_EQ(star_test::displacement_bound(pair.order_a, pair.order_b), n - 1) << n;
    }
    EXPECT_EQ(route_orderings(shipped_orderings(4)).layer_count(), 3);
}

TEST(routing, matches_exhaustive_search_for_small_lattices) {
    for (int n : {2, 3}) {
        auto pair = shipped_orderings(n);
        EXPECT_EQ(route_orderings(pair).layer_count(), star_test::min_layers(pair.order_a, pair.order_b)) << n;
    }
}

TEST(routing, never_beats_exhaustive_search) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; trial++) {
        auto a = identity_order(7);
        auto b = a;
        std::shuffle(b.begin(), b.end(), rng);
        auto sched = route_permutation(a, b);
        EXPECT_EQ(apply_schedule(a, sched), b);
        int best = star_test::min_layers(a, b);
        EXPECT_GE(sched.layer_count(), best);
        EXPECT_GE(best, star_test::displacement_bound(a, b));
    }
}

TEST(routing, composition_on_random_valid_pairs) {
    std::mt19937_64 rng(2026);
    int checked = 0;
    for (int trial = 0; checked < 1000 && trial < 20000; trial++) {
        int n = 2 + static_cast<int>(rng() % 7);
        std::uint64_t bits_a = rng();
        std::uint64_t bits_b = rng();
        auto pair = staircase_pair(
            n, [&](int k) { return (bits_a >> k) & 1; }, [&](int k) { return (bits_b >> k) & 1; });
        pair = relabel(pair, lattice_symmetry(n, static_cast<int>(rng() % 8)));
        if (!is_valid(pair)) {
            continue;
        }
        checked++;
        auto sched = route_orderings(pair);
        auto order = pair.order_a;
        for (const auto &layer : sched.layers) {
            std::set<int> used;
            for (int p : layer) {
                ASSERT_GE(p, 0);
                ASSERT_LT(p + 1, n * n);
                ASSERT_TRUE(used.insert(p).second && used.insert(p + 1).second) << "layer swaps overlap";
            }
            apply_layer(order, layer);
        }
        ASSERT_EQ(order, pair.order_b);
    }
    EXPECT_EQ(checked, 1000);
}

TEST(orderings, json_round_trip) {
    auto pair = default_orderings(5);
    auto back = ordering_from_json(ordering_to_json(pair));
    EXPECT_EQ(back.order_a, pair.order_a);
    EXPECT_EQ(back.order_b, pair.order_b);
    EXPECT_EQ(back.edges_a, pair.edges_a);
    EXPECT_EQ(back.edges_b, pair.edges_b);
}

TEST(orderings, json_rejects_bad_files) {
    auto j = nlohmann::json(ordering_to_json(default_orderings(3)));
    auto extra = j;
    extra["comment"] = "x";
    EXPECT_THROW(ordering_from_json(extra), ValidationError);
    auto wrong = j;
    wrong["format"] = "other";
    EXPECT_THROW(ordering_from_json(wrong), ValidationError);
    auto broken = j;
    std::swap(broken["orderings"][0][0], broken["orderings"][0][1]);
    EXPECT_THROW(ordering_from_json(broken), ValidationError);
}

TEST(orderings, shipped_files_match_generator) {
    for (int n = 2; n <= 10; n++) {
        auto path = default_data_dir() / "orderings" / ("n" + std::to_string(n) + ".json");
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        auto shipped = load_ordering_pair(path);
        auto generated = default_orderings(n);
        EXPECT_EQ(shipped.order_a, generated.order_a);
        EXPECT_EQ(shipped.order_b, generated.order_b);
    }
}
