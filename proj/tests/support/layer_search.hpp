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

// Exhaustive oracle for fSWAP routing: the fewest layers of disjoint
// adjacent transpositions that carry one line ordering into another.

#include <cstdint>
#include <queue>
#include <unordered_map>
#include <vector>

namespace star_test {

inline std::uint64_t pack(const std::vector<int> &perm) {
    std::uint64_t key = 0;
    for (int v : perm) {
        key = key * 16 + static_cast<std::uint64_t>(v);
    }
    return key;
}

/// Every non-empty set of disjoint adjacent transpositions on `size` slots.
inline std::vector<std::vector<int>> all_layers(int size) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto &self, int p) -> void {
        if (p >= size - 1) {
            if (!cur.empty()) {
                out.push_back(cur);
            }
            return;
        }
        self(self, p + 1);
        cur.push_back(p);
        self(self, p + 2);
        cur.pop_back();
    };
    rec(rec, 0);
    return out;
}

/// Breadth-first search over permutations (up to 12 elements; fine up to ~10).
inline int min_layers(const std::vector<int> &from, const std::vector<int> &to) {
    if (from == to) {
        return 0;
    }
    const int size = static_cast<int>(from.size());
    auto layers = all_layers(size);
    std::unordered_map<std::uint64_t, int> dist;
    std::queue<std::vector<int>> q;
    dist[pack(from)] = 0;
    q.push(from);
    std::uint64_t goal = pack(to);
    while (!q.empty()) {
        auto cur = q.front();
        q.pop();
        int d = dist[pack(cur)];
        for (const auto &layer : layers) {
            auto next = cur;
            for (int p : layer) {
                std::swap(next[static_cast<std::size_t>(p)], next[static_cast<std::size_t>(p) + 1]);
            }
            auto key = pack(next);
            if (key == goal) {
                return d + 1;
            }
            if (dist.emplace(key, d + 1).second) {
                q.push(std::move(next));
            }
        }
    }
    return -1;
}

/// No element can move more than one slot per layer.
inline int displacement_bound(const std::vector<int> &from, const std::vector<int> &to) {
    std::vector<int> where(to.size());
    for (std::size_t i = 0; i < to.size(); i++) {
        where[static_cast<std::size_t>(to[i])] = static_cast<int>(i);
    }
    int best = 0;
    for (std::size_t i = 0; i < from.size(); i++) {
        int d = where[static_cast<std::size_t>(from[i])] - static_cast<int>(i);
        best = std::max(best, d < 0 ? -d : d);
    }
    return best;
}

}  // namespace star_test
