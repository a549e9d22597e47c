// Copyright 2026 The spinsim Authors
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

#ifndef SPINSIM_ERRORS_HPP
#define SPINSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spinsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape/dimension mismatch between operands.
struct DimensionError : Error {
    using Error::Error;
};

// The scattering matching system is numerically singular (rcond below 1e-12).
struct SingularSystemError : Error {
    using Error::Error;
};

// A conditioned step has probability below the representable threshold: the
// state is orthogonal to every transmitting component.
struct VanishingProbabilityError : Error {
    using Error::Error;
};

// Unparseable or inconsistent scenario configuration.
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace spinsim

#endif
