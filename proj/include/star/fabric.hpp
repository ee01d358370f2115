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
#include <compare>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "star/clock.hpp"
#include "star/errors.hpp"
#include "star/hubbard.hpp"

namespace star {

struct Coord {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Coord &, const Coord &) = default;
};

inline std::string to_string(Coord c) { return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")"; }

enum class OpKind {
    hadamard,
    hadamard_no_return,
    cnot,
    cnot_no_move,
    cz,
    s_gate,
    multi_target_cnot,
    multi_target_cnot_reduced,
    multi_target_cz,
    fswap,
    patch_move_layer,
    move_to_middle,
    move_to_side,
    zz_rotation_trial,
    joint_measurement,
    rus_z_group,
    rus_zz_group,
};

struct CatalogEntry {
    OpKind kind;
    std::string_view name;
    /// Cost in half clocks; negative marks a data-dependent duration.
    int halves;
};

// Lattice-surgery cost table. One clock is d code cycles.
inline constexpr std::array<CatalogEntry, 17> kCatalog{{
    {OpKind::hadamard, "hadamard", 6},
    {OpKind::hadamard_no_return, "hadamard_no_return", 4},
    {OpKind::cnot, "cnot", 6},
    {OpKind::cnot_no_move, "cnot_no_move", 4},
    {OpKind::cz, "cz", 8},
    {OpKind::s_gate, "s_gate", 3},
    {OpKind::multi_target_cnot, "multi_target_cnot", 16},
    {OpKind::multi_target_cnot_reduced, "multi_target_cnot_reduced", 10},
    {OpKind::multi_target_cz, "multi_target_cz", 4},
    {OpKind::fswap, "fswap", 14},
    {OpKind::patch_move_layer, "patch_move_layer", 6},
    {OpKind::move_to_middle, "move_to_middle", 4},
    {OpKind::move_to_side, "move_to_side", 2},
    {OpKind::zz_rotation_trial, "zz_rotation_trial", 4},
    {OpKind::joint_measurement, "joint_measurement", 2},
    {OpKind::rus_z_group, "rus_z_group", -1},
    {OpKind::rus_zz_group, "rus_zz_group", -1},
}};

inline const CatalogEntry &catalog_entry(OpKind kind) {
    for (const auto &e : kCatalog) {
        if (e.kind == kind) {
            return e;
        }
    }
    throw ValidationError("operation kind missing from catalog");
}

inline std::string_view op_kind_name(OpKind kind) { return catalog_entry(kind).name; }

inline OpKind op_kind_from_name(std::string_view name) {
    for (const auto &e : kCatalog) {
        if (e.name == name) {
            return e.kind;
        }
    }
    throw ValidationError("unknown operation kind '" + std::string(name) + "'");
}

inline bool has_variable_duration(OpKind kind) { return catalog_entry(kind).halves < 0; }

inline Clock catalog_cost(OpKind kind) {
    const auto &e = catalog_entry(kind);
    if (e.halves < 0) {
        throw ValidationError("operation '" + std::string(e.name) + "' has a data-dependent duration");
    }
    return Clock::from_halves(e.halves);
}

inline Clock catalog_cost(std::string_view name) { return catalog_cost(op_kind_from_name(name)); }

// ---------------------------------------------------------------------------
// Patch grid: row 0 and row 3 are data rows, rows 1 and 2 route between them.

enum class PatchRole { data, routing, qpe_ancilla };

struct Occupant {
    enum class Type { free, orbital, ancilla, injection };
    Type type = Type::free;
    int site = -1;
    Spin spin = Spin::up;
    int process = -1;

    static Occupant orbital(int site, Spin spin) { return {Type::orbital, site, spin, -1}; }
};

struct Patch {
    Coord coord;
    PatchRole role = PatchRole::routing;
    Occupant occupant;
    Clock busy_until;
};

class PatchGrid {
public:
    static constexpr int kRows = 4;

    PatchGrid() = default;
    PatchGrid(int n, bool with_qpe_ancilla) : n_(n), cols_(n * n), ancilla_(with_qpe_ancilla) {
        for (int r = 0; r < kRows; r++) {
            for (int c = 0; c < cols_; c++) {
                Patch p;
                p.coord = {r, c};
                p.role = (r == 0 || r == kRows - 1) ? PatchRole::data : PatchRole::routing;
                cells_.emplace(p.coord, p);
            }
        }
        if (ancilla_) {
            Patch p;
            p.coord = qpe_ancilla_coord();
            p.role = PatchRole::qpe_ancilla;
            p.occupant.type = Occupant::Type::ancilla;
            cells_.emplace(p.coord, p);
        }
    }

    int n() const { return n_; }
    int cols() const { return cols_; }
    bool has_qpe_ancilla() const { return ancilla_; }
    /// Sits at the end of the first routing row.
    Coord qpe_ancilla_coord() const { return {1, cols_}; }
    std::size_t patch_count() const { return cells_.size(); }

    bool contains(Coord c) const { return cells_.contains(c); }
    const Patch &at(Coord c) const {
        auto it = cells_.find(c);
        if (it == cells_.end()) {
            throw ValidationError("coordinate " + to_string(c) + " is outside the grid");
        }
        return it->second;
    }
    Patch &at(Coord c) { return const_cast<Patch &>(std::as_const(*this).at(c)); }

    std::vector<Coord> neighbors(Coord c) const {
        std::vector<Coord> out;
        for (Coord d : {Coord{c.row - 1, c.col}, Coord{c.row + 1, c.col}, Coord{c.row, c.col - 1},
                        Coord{c.row, c.col + 1}}) {
            if (contains(d)) {
                out.push_back(d);
            }
        }
        return out;
    }

    const std::map<Coord, Patch> &cells() const { return cells_; }

    std::size_t occupied_by_orbitals() const {
        return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const auto &kv) {
            return kv.second.occupant.type == Occupant::Type::orbital;
        }));
    }

private:
    int n_ = 0;
    int cols_ = 0;
    bool ancilla_ = false;
    std::map<Coord, Patch> cells_;
};

/// Grid with the initial placement of the step: spin-up orbital of the site
/// at line position p on (0, p), its spin-down partner right below on (1, p).
inline PatchGrid build_grid(int n, bool with_qpe_ancilla, const std::vector<int> &line_order) {
    if (n < 2) {
        throw ValidationError("lattice side n must be at least 2");
    }
    PatchGrid grid(n, with_qpe_ancilla);
    if (static_cast<int>(line_order.size()) != n * n) {
        throw ValidationError("line order must list all sites");
    }
    for (int p = 0; p < n * n; p++) {
        int site = line_order[static_cast<std::size_t>(p)];
        grid.at({0, p}).occupant = Occupant::orbital(site, Spin::up);
        grid.at({1, p}).occupant = Occupant::orbital(site, Spin::down);
    }
    return grid;
}

inline PatchGrid build_grid(int n, bool with_qpe_ancilla) {
    return build_grid(n, with_qpe_ancilla, identity_order(n < 2 ? 0 : n * n));
}

// ---------------------------------------------------------------------------
// Timelines.

struct SurgeryOp {
    OpKind kind = OpKind::joint_measurement;
    std::vector<Coord> participants;
    Clock duration;

    friend bool operator==(const SurgeryOp &, const SurgeryOp &) = default;
};

struct ScheduledOp {
    Clock start;
    SurgeryOp op;

    Clock end() const { return start + op.duration; }
    friend bool operator==(const ScheduledOp &, const ScheduledOp &) = default;
};

/// Builds a catalog-priced op.
inline SurgeryOp make_op(OpKind kind, std::vector<Coord> participants) {
    return {kind, std::move(participants), catalog_cost(kind)};
}

class Timeline {
public:
    void add(Clock start, SurgeryOp op) { ops_.push_back({start, std::move(op)}); }
    const std::vector<ScheduledOp> &ops() const { return ops_; }
    std::vector<ScheduledOp> &ops() { return ops_; }
    bool empty() const { return ops_.empty(); }
    std::size_t size() const { return ops_.size(); }

    Clock horizon() const {
        Clock h;
        for (const auto &s : ops_) {
            h = std::max(h, s.end());
        }
        return h;
    }

private:
    std::vector<ScheduledOp> ops_;
};

struct Conflict {
    Clock clock;
    Coord coord;
    std::string reason;
    ScheduledOp first;
    std::optional<ScheduledOp> second;
};

namespace detail {

inline auto op_key(const ScheduledOp &s) {
    return std::make_tuple(s.start, s.op.duration, static_cast<int>(s.op.kind), s.op.participants);
}

inline bool participants_connected(const std::vector<Coord> &ps) {
    if (ps.size() <= 1) {
        return true;
    }
    std::set<Coord> pending(ps.begin(), ps.end());
    std::queue<Coord> frontier;
    frontier.push(*pending.begin());
    pending.erase(pending.begin());
    while (!frontier.empty()) {
        Coord c = frontier.front();
        frontier.pop();
        for (Coord d : {Coord{c.row - 1, c.col}, Coord{c.row + 1, c.col}, Coord{c.row, c.col - 1},
                        Coord{c.row, c.col + 1}}) {
            auto it = pending.find(d);
            if (it != pending.end()) {
                frontier.push(d);
                pending.erase(it);
            }
        }
    }
    return pending.empty();
}

}  // namespace detail

/// Checks bounds, catalog durations, participant connectivity, and that no
/// patch is claimed by two ops at once. Returns the earliest problem by
/// (clock, coord); the verdict does not depend on op order.
inline std::optional<Conflict> validate(const Timeline &timeline, const PatchGrid &grid) {
    std::optional<Conflict> best;
    auto offer = [&](Conflict c) {
        if (!best || std::tie(c.clock, c.coord, c.reason) < std::tie(best->clock, best->coord, best->reason)) {
            best = std::move(c);
        }
    };

    std::map<Coord, std::vector<const ScheduledOp *>> claims;
    for (const ScheduledOp &s : timeline.ops()) {
        const SurgeryOp &op = s.op;
        if (op.participants.empty()) {
            offer({s.start, {}, "op has no participants", s, std::nullopt});
            continue;
        }
        Coord anchor = *std::min_element(op.participants.begin(), op.participants.end());
        if (s.start < Clock{}) {
            offer({s.start, anchor, "op starts before clock 0", s, std::nullopt});
        }
        if (has_variable_duration(op.kind)) {
            if (op.duration <= Clock{}) {
                offer({s.start, anchor, "variable-duration op must last a positive time", s, std::nullopt});
            }
        } else if (op.duration != catalog_cost(op.kind)) {
            offer({s.start, anchor,
                   "duration " + to_string(op.duration) + " differs from catalog cost " +
                       to_string(catalog_cost(op.kind)),
                   s, std::nullopt});
        }
        std::set<Coord> unique;
        for (Coord c : op.participants) {
            if (!grid.contains(c)) {
                offer({s.start, c, "participant outside the grid", s, std::nullopt});
            } else if (!unique.insert(c).second) {
                offer({s.start, c, "participant listed twice", s, std::nullopt});
            } else {
                claims[c].push_back(&s);
            }
        }
        if (!detail::participants_connected(op.participants)) {
            offer({s.start, anchor, "participants are not connected", s, std::nullopt});
        }
    }

    for (auto &[coord, list] : claims) {
        std::sort(list.begin(), list.end(), [](const ScheduledOp *a, const ScheduledOp *b) {
            return std::make_tuple(a->start, a->end(), detail::op_key(*a)) <
                   std::make_tuple(b->start, b->end(), detail::op_key(*b));
        });
        const ScheduledOp *holder = nullptr;
        for (const ScheduledOp *s : list) {
            if (holder && s->start < holder->end()) {
                offer({s->start, coord, "patch claimed by overlapping ops", *holder, *s});
                break;
            }
            if (!holder || s->end() > holder->end()) {
                holder = s;
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// JSON lines: {start, kind, participants, duration}, one op per line.

inline nlohmann::ordered_json clock_json(Clock c) {
    if (c.halves() % 2 == 0) {
        return c.halves() / 2;
    }
    return c.value();
}

inline nlohmann::ordered_json op_to_json(const ScheduledOp &s) {
    nlohmann::ordered_json j;
    j["start"] = clock_json(s.start);
    j["kind"] = std::string(op_kind_name(s.op.kind));
    nlohmann::ordered_json ps = nlohmann::ordered_json::array();
    for (Coord c : s.op.participants) {
        ps.push_back({c.row, c.col});
    }
    j["participants"] = std::move(ps);
    j["duration"] = clock_json(s.op.duration);
    return j;
}

inline void write_jsonl(std::ostream &out, const Timeline &timeline) {
    for (const auto &s : timeline.ops()) {
        out << op_to_json(s).dump() << '\n';
    }
}

inline std::string to_jsonl(const Timeline &timeline) {
    std::ostringstream ss;
    write_jsonl(ss, timeline);
    return ss.str();
}

inline Timeline timeline_from_jsonl(std::istream &in) {
    Timeline t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) {
            continue;
        }
        try {
            auto j = nlohmann::json::parse(line);
            SurgeryOp op;
            op.kind = op_kind_from_name(j.at("kind").get<std::string>());
            for (const auto &p : j.at("participants")) {
                op.participants.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
            }
            op.duration = Clock::from_double(j.at("duration").get<double>());
            t.add(Clock::from_double(j.at("start").get<double>()), std::move(op));
        } catch (const nlohmann::json::exception &ex) {
            throw ValidationError("timeline line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return t;
}

}  // namespace star
