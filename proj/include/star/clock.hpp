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
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "star/errors.hpp"

namespace star {

/// Lattice-surgery time, counted in half clocks so that 1.5-clock operations
/// accumulate without rounding drift. One clock is d code cycles.
class Clock {
public:
    constexpr Clock() = default;

    static constexpr Clock from_halves(std::int64_t halves) {
        Clock c;
        c.halves_ = halves;
        return c;
    }
    static constexpr Clock clocks(std::int64_t whole) { return from_halves(2 * whole); }

    /// Accepts only exact multiples of 0.5.
    static Clock from_double(double value) {
        double twice = value * 2.0;
        double rounded = std::round(twice);
        if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9) {
            throw ValidationError("clock value " + std::to_string(value) + " is not a multiple of 0.5");
        }
        return from_halves(static_cast<std::int64_t>(rounded));
    }

    /// Rounds up to the next half clock.
    static Clock ceil_of(double value) {
        if (!std::isfinite(value)) {
            throw ValidationError("clock value is not finite");
        }
        return from_halves(static_cast<std::int64_t>(std::ceil(value * 2.0 - 1e-9)));
    }

    constexpr std::int64_t halves() const { return halves_; }
    constexpr double value() const { return static_cast<double>(halves_) / 2.0; }

    constexpr Clock& operator+=(Clock other) {
        halves_ += other.halves_;
        return *this;
    }
    constexpr Clock& operator-=(Clock other) {
        halves_ -= other.halves_;
        return *this;
    }
    friend constexpr Clock operator+(Clock a, Clock b) { return a += b; }
    friend constexpr Clock operator-(Clock a, Clock b) { return a -= b; }
    friend constexpr Clock operator*(std::int64_t k, Clock c) { return from_halves(k * c.halves_); }
    friend constexpr auto operator<=>(const Clock&, const Clock&) = default;

private:
    std::int64_t halves_ = 0;
};

inline std::string to_string(Clock c) {
    if (c.halves() % 2 == 0) {
        return std::to_string(c.halves() / 2);
    }
    return std::to_string(c.halves() / 2) + ".5";
}

}  // namespace star
