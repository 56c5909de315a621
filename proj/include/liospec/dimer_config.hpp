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

#ifndef LIOSPEC_DIMER_CONFIG_HPP
#define LIOSPEC_DIMER_CONFIG_HPP

#include "liospec/numerics/types.hpp"

namespace liospec {

// Tilded (kappa-scaled) dimer parameters, classical-limit scale mu and Fock cutoff per site.
// Convention: U = kappa at mu = 1, F_j = F_tilde_j kappa^{3/2} / sqrt(U).
struct DimerConfig {
  double J_tilde = -3.5;
  double Delta_tilde = 4.5;
  double kappa = 1.0;
  double F1_tilde = 5.0;
  double F2_tilde = 2.5;
  double mu = 1.0;
  int n_max = 8;

  void validate() const {
    require(std::isfinite(J_tilde) && std::isfinite(Delta_tilde) && std::isfinite(F1_tilde) &&
                std::isfinite(F2_tilde),
            "DimerConfig: parameters must be finite");
    require(kappa > 0.0 && std::isfinite(kappa), "DimerConfig: kappa must be positive");
    require(mu > 0.0 && std::isfinite(mu), "DimerConfig: mu must be positive");
    require(n_max >= 2, "DimerConfig: n_max must be at least 2");
  }

  double U() const { return kappa / mu; }
  double J() const { return J_tilde * kappa; }
  double Delta() const { return Delta_tilde * kappa; }
  // F_j = sqrt(mu) F_tilde kappa^{3/2} / sqrt(kappa)
  double F1() const { return std::sqrt(mu) * F1_tilde * kappa; }
  double F2() const { return std::sqrt(mu) * F2_tilde * kappa; }
};

}  // namespace liospec

#endif  // LIOSPEC_DIMER_CONFIG_HPP
