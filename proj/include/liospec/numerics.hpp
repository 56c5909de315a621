// Copyright 2026 The liospec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LIOSPEC_NUMERICS_HPP
#define LIOSPEC_NUMERICS_HPP

#include "liospec/numerics/arnoldi.hpp"
#include "liospec/numerics/eig_dense.hpp"
#include "liospec/numerics/krylov.hpp"
#include "liospec/numerics/ode.hpp"
#include "liospec/numerics/tridiagonal.hpp"
#include "liospec/numerics/types.hpp"

#endif  // LIOSPEC_NUMERICS_HPP
