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

#ifndef FEO2_CLIENT_H_
#define FEO2_CLIENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>

#include "feo2/model.h"
#include "feo2/personalization.h"
#include "feo2/rng.h"

namespace feo2 {

struct LocalTrainingConfig {
  LossKind kind = LossKind::kPointEstimation;
  int local_epochs = 1;
  double learning_rate = 1.0;
  // 0 means full batch.
  std::size_t batch_size = 0;
  // Personalization runs alongside local training when set.
  std::optional<DittoConfig> ditto;

  void Validate() const;

  friend bool operator==(const LocalTrainingConfig&,
                         const LocalTrainingConfig&) = default;
};

struct ClientUpdateResult {
  ModelVector delta;
  // 1 iff the unclipped delta norm was <= the clip norm.
  bool within_clip = true;
};

// One client's round: `local_epochs` passes of minibatch SGD from `global`,
// advancing the personalized model in the same loop when Ditto is enabled
// (lambda picked by `treat_as_private`). Returns the clipped delta. `rng`
// only shuffles minibatches. Non-finite values throw NumericError tagged with
// `round` and the client id.
ClientUpdateResult ClientUpdate(const ModelVector& global,
                                ClientRecord& client, double clip_norm,
                                const LocalTrainingConfig& cfg,
                                bool treat_as_private, Rng& rng,
                                int64_t round = 0);

}  // namespace feo2

#endif  // FEO2_CLIENT_H_
