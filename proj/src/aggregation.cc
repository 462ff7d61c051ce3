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

#include "feo2/aggregation.h"

#include <string>

#include "feo2/errors.h"
#include "feo2/privacy.h"

namespace feo2 {

std::optional<ModelVector> GroupMean(std::span<const ModelVector> updates) {
  if (updates.empty()) return std::nullopt;
  ModelVector sum(updates.front().size());
  for (const ModelVector& u : updates) sum += u;
  return sum *= 1.0 / static_cast<double>(updates.size());
}

std::optional<ModelVector> DpGroupMean(std::span<const ModelVector> updates,
                                       double clip_norm, double z, Rng& rng) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be > 0");
  if (!(z >= 0.0)) throw ConfigError("noise multiplier must be >= 0");
  for (const ModelVector& u : updates) {
    if (u.Norm() > clip_norm + 1e-9) {
      throw ContractError("private update with norm " +
                          std::to_string(u.Norm()) + " exceeds clip norm " +
                          std::to_string(clip_norm));
    }
  }
  std::optional<ModelVector> mean = GroupMean(updates);
  if (!mean) return std::nullopt;
  const double stddev =
      z * clip_norm / static_cast<double>(updates.size());
  *mean += GaussianNoiseVector(mean->size(), stddev, rng);
  return mean;
}

std::optional<ModelVector> Feo2Combine(
    const std::optional<ModelVector>& delta_np,
    const std::optional<ModelVector>& delta_p, int num_nonprivate,
    int num_private, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("r must be in [0,1]");
  const bool has_np = delta_np.has_value() && num_nonprivate > 0;
  const bool has_p = delta_p.has_value() && num_private > 0 && r > 0.0;
  if (!has_np && !has_p) return std::nullopt;
  if (!has_p) return *delta_np;
  if (!has_np) return *delta_p;
  const double n_np = num_nonprivate;
  const double weighted_p = r * num_private;
  const double total = n_np + weighted_p;
  ModelVector out = *delta_np * (n_np / total);
  out.AddScaled(*delta_p, weighted_p / total);
  return out;
}

ModelVector ApplyUpdate(const ModelVector& theta, const ModelVector& delta,
                        double lr) {
  ModelVector out = theta;
  out.AddScaled(delta, lr);
  return out;
}

}  // namespace feo2
