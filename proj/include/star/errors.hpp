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

#include <stdexcept>

namespace star {

/// Raised when an input violates a documented precondition or schema.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a well-formed model has no feasible answer (no code distance,
/// no error budget split, missing calibration data, ...).
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A repeat-until-success trial angle left the small-angle domain of the
/// injection protocol.
struct AngleCapExceeded : InfeasibleError {
    using InfeasibleError::InfeasibleError;
};

}  // namespace star
