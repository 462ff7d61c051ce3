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

#ifndef FEO2_DATAGEN_H_
#define FEO2_DATAGEN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "feo2/analytic.h"
#include "feo2/model.h"

namespace feo2 {

enum class PopulationKind {
  kPointEstimation,
  kLinearRegression,
  kLabelShard,
};

std::string_view PopulationKindName(PopulationKind kind);
PopulationKind ParsePopulationKind(std::string_view name);

// Source of labeled examples for label-shard populations. When both IDX
// paths are set the pool is read from disk; otherwise a Gaussian-cluster
// pool is generated from the population seed.
struct PoolSpec {
  std::string idx_images;
  std::string idx_labels;
  int num_classes = 10;
  int num_features = 20;
  int examples_per_class = 400;
  // Standard deviation of the class centers; samples have unit noise.
  double separation = 1.0;

  bool from_idx() const { return !idx_images.empty(); }
  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

struct PopulationSpec {
  PopulationKind kind = PopulationKind::kPointEstimation;
  int n_clients = 100;
  int samples_per_client = 20;
  double rho_np = 0.0;
  // Label whose clients supply every non-private client (label shard only).
  std::optional<int> skew_label;
  uint64_t seed = 0;
  // Point and regression populations.
  double beta2 = 1.0;
  double tau2 = 0.0;
  int dim = 1;
  // Label shard populations.
  PoolSpec pool;
  // Fraction of each label-shard client's samples held out for testing.
  double test_fraction = 0.2;

  int num_nonprivate() const;
  // Analytic view of a point or regression spec (gamma2 = 0).
  AnalyticParams analytic() const;
  void Validate() const;
  friend bool operator==(const PopulationSpec&,
                         const PopulationSpec&) = default;
};

// What training code sees.
struct Population {
  std::vector<ClientRecord> clients;

  std::size_t model_dimension() const;
  int num_private() const;
};

// Ground truth of a point or regression population. Kept apart from
// Population so training paths cannot read it.
struct PopulationTruth {
  ModelVector phi;
  std::vector<ModelVector> client_phi;
};

struct GeneratedPopulation {
  Population population;
  std::optional<PopulationTruth> truth;
};

GeneratedPopulation GenPointPopulation(const PopulationSpec& spec);
// Throws ConfigError when samples_per_client < dim.
GeneratedPopulation GenRegressionPopulation(const PopulationSpec& spec);
// Throws ConfigError when some label has fewer than samples_per_client
// examples in `pool`, or the skew label has too few clients.
Population GenLabelShardPopulation(const PopulationSpec& spec,
                                   const LabeledExamples& pool);

// Gaussian-cluster stand-in for a digit pool.
LabeledExamples GenSyntheticPool(const PoolSpec& spec, uint64_t seed);

// Dispatches on spec.kind and builds the pool when needed.
GeneratedPopulation GeneratePopulation(const PopulationSpec& spec);

// IDX containers. Pixels are scaled to [0, 1]. Malformed input throws
// ParseError carrying the byte offset.
LabeledExamples ParseIdx(std::span<const unsigned char> images,
                         std::span<const unsigned char> labels);
LabeledExamples LoadIdx(const std::string& images_path,
                        const std::string& labels_path);

// Client datasets and privacy flags as JSON, for reusing a split.
void SavePopulationSnapshot(const Population& population,
                            const std::string& path);
Population LoadPopulationSnapshot(const std::string& path);

}  // namespace feo2

#endif  // FEO2_DATAGEN_H_
