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

#ifndef SPINSIM_SPINSIM_HPP
#define SPINSIM_SPINSIM_HPP

#include "spinsim/channel.hpp"
#include "spinsim/errors.hpp"
#include "spinsim/noise.hpp"
#include "spinsim/parallel.hpp"
#include "spinsim/scattering.hpp"
#include "spinsim/scenario.hpp"
#include "spinsim/spin_algebra.hpp"

#endif
