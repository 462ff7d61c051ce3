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

#include "feo2/client.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "feo2/errors.h"
#include "feo2/privacy.h"

namespace feo2 {

void LocalTrainingConfig::Validate() const {
  if (local_epochs < 1) throw ConfigError("local_epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (ditto) ditto->Validate();
}

ClientUpdateResult ClientUpdate(const ModelVector& global,
                                ClientRecord& client, double clip_norm,
                                const LocalTrainingConfig& cfg,
                                bool treat_as_private, Rng& rng,
                                int64_t round) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be > 0");
  const std::size_t n = NumSamples(client.train);
  if (n == 0) throw ConfigError("client has no training data");

  ModelVector theta = global;
  if (cfg.ditto && !client.personalized_model) {
    client.personalized_model = global;
  }
  const double lambda =
      cfg.ditto ? cfg.ditto->LambdaFor(treat_as_private) : 0.0;

  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto step = [&](const LocalDataset& batch) {
    theta.AddScaled(LocalGradient(theta, batch, cfg.kind), -cfg.learning_rate);
    if (!theta.AllFinite()) {
      throw NumericError("non-finite local model", round, client.id);
    }
    if (cfg.ditto) {
      try {
        client.personalized_model =
            DittoStep(*client.personalized_model, global, batch, cfg.kind,
                      lambda, cfg.ditto->eta_p);
      } catch (const NumericError&) {
        throw NumericError("non-finite personalized model", round, client.id);
      }
    }
  };

  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    if (full_batch) {
      step(client.train);
      continue;
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      step(SelectSamples(client.train,
                         std::span<const std::size_t>(order).subspan(
                             start, stop - start)));
    }
  }

  ClipResult clipped = Clip(theta - global, clip_norm);
  return {std::move(clipped.clipped), clipped.within_threshold};
}

}  // namespace feo2
