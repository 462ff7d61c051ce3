//
// Copyright 2026 The FeO2 Authors
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
//

#ifndef FEO2_AGGREGATION_H_
#define FEO2_AGGREGATION_H_

#include <optional>
#include <span>
#include <vector>

#include "feo2/model.h"
#include "feo2/rng.h"

namespace feo2 {

// Updates received in one round, split by privacy class.
struct RoundCohort {
  std::vector<ModelVector> private_updates;
  std::vector<ModelVector> nonprivate_updates;
  std::vector<bool> indicators;

  int num_private() const { return static_cast<int>(private_updates.size()); }
  int num_nonprivate() const {
    return static_cast<int>(nonprivate_updates.size());
  }
};

// Coordinatewise mean; std::nullopt when the group is empty.
std::optional<ModelVector> GroupMean(std::span<const ModelVector> updates);

// Mean plus N(0, (z * S / n)^2 I). Every update must already be clipped to
// S; a larger norm throws ContractError.
std::optional<ModelVector> DpGroupMean(std::span<const ModelVector> updates,
                                       double clip_norm, double z, Rng& rng);

// Two-group combination
//   (N_np * delta_np + r * N_p * delta_p) / (N_np + r * N_p).
// An absent group gets weight zero. Returns std::nullopt when nothing usable
// remains (both absent, or r == 0 without a non-private group), meaning the
// round is skipped.
std::optional<ModelVector> Feo2Combine(
    const std::optional<ModelVector>& delta_np,
    const std::optional<ModelVector>& delta_p, int num_nonprivate,
    int num_private, double r);

// theta + lr * delta
ModelVector ApplyUpdate(const ModelVector& theta, const ModelVector& delta,
                        double lr = 1.0);

}  // namespace feo2

#endif  // FEO2_AGGREGATION_H_
