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

#ifndef FEO2_CONFIG_H_
#define FEO2_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "feo2/simulate.h"
#include "json.hpp"

namespace feo2 {

// Config grammar (YAML, or JSON when the file ends in .json):
//
//   seed: <uint64>              rounds: <int>
//   cohort_fraction: (0,1]      algorithm: fedavg | dp_fedavg | feo2
//   population:
//     kind: point_estimation | linear_regression | label_shard
//     n_clients, samples_per_client, rho_np, skew_label, seed, beta2, tau2,
//     dim, test_fraction
//     pool: idx_images, idx_labels, num_classes, num_features,
//           examples_per_class, separation
//   feo2: r, learning_rate, local_epochs, batch_size
//   privacy: z, z_b, S0, kappa, eta_b, delta
//   ditto: lambda_p, lambda_np, eta_p
//
// Unknown keys and out-of-range values throw ConfigError naming the key.
// population.seed defaults to the top-level seed; privacy.z defaults to 0
// for fedavg and 1 otherwise.
ExperimentConfig ParseConfig(const nlohmann::json& doc,
                             std::optional<uint64_t> seed_override = {});
ExperimentConfig LoadConfigFile(const std::string& path,
                                std::optional<uint64_t> seed_override = {});

// Reads YAML (or JSON) text into a JSON tree.
nlohmann::json ParseConfigText(const std::string& text, bool is_json);

// Fully resolved config; ParseConfig(ConfigToJson(c)) == c.
nlohmann::json ConfigToJson(const ExperimentConfig& cfg);

// Git blob id (SHA-1 of "blob <len>\0<content>") of the canonical JSON dump.
std::string ConfigHash(const ExperimentConfig& cfg);
std::string GitBlobSha1(const std::string& content);

}  // namespace feo2

#endif  // FEO2_CONFIG_H_
