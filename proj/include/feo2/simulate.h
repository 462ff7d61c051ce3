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

#ifndef FEO2_SIMULATE_H_
#define FEO2_SIMULATE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "feo2/analytic.h"
#include "feo2/datagen.h"
#include "feo2/model.h"
#include "feo2/personalization.h"
#include "feo2/privacy.h"

namespace feo2 {

enum class Algorithm { kFedAvg, kDpFedAvg, kFeo2 };

std::string_view AlgorithmName(Algorithm algorithm);
Algorithm ParseAlgorithm(std::string_view name);

struct Feo2Config {
  double r = 1.0;
  double learning_rate = 1.0;
  int local_epochs = 1;
  // 0 means full batch.
  std::size_t batch_size = 0;

  friend bool operator==(const Feo2Config&, const Feo2Config&) = default;
};

struct ExperimentConfig {
  PopulationSpec population;
  Algorithm algorithm = Algorithm::kFeo2;
  Feo2Config feo2;
  DpConfig privacy;
  std::optional<DittoConfig> ditto;
  int rounds = 1;
  double cohort_fraction = 1.0;
  uint64_t seed = 0;

  LossKind loss_kind() const;
  // Throws ConfigError naming the offending key.
  void Validate() const;
  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

// One row of the per-round report. For classification the metric columns
// are accuracies in percent; for point and regression populations they are
// mean squared errors against the hidden truth. Per-class values are NaN when
// the class is empty.
struct RoundReport {
  int round = 0;
  double clip_norm = 0.0;
  int num_private = 0;
  int num_nonprivate = 0;
  double acc_g = 0.0;
  double acc_g_p = 0.0;
  double acc_g_np = 0.0;
  double acc_l_p = 0.0;
  double acc_l_np = 0.0;
  double delta_g = 0.0;
  double delta_l = 0.0;
  double epsilon = 0.0;
  // True when nothing was aggregated and the global model is unchanged.
  bool skipped = false;
};

// Computes metrics for a population. Truth, when present, is used for point
// and regression populations; otherwise held-out (or training) loss is used.
class Evaluator {
 public:
  Evaluator(LossKind kind, std::optional<PopulationTruth> truth);

  // Fills the metric and gap fields of `report`.
  void Evaluate(const ModelVector& global,
                std::span<const ClientRecord> clients,
                RoundReport& report) const;

 private:
  double ClientMetric(const ModelVector& model, const ClientRecord& client,
                      std::size_t index, double* weight) const;

  LossKind kind_;
  std::optional<PopulationTruth> truth_;
};

// Server state plus the round loop of Algorithm 1.
class Simulator {
 public:
  Simulator(ExperimentConfig cfg, GeneratedPopulation population,
            int workers = 1);

  // Runs the next round and returns its report.
  RoundReport RunRound();

  int round() const { return round_; }
  const ModelVector& global_model() const { return global_; }
  double clip_norm() const { return clip_norm_; }
  const PrivacyLedger& ledger() const { return ledger_; }
  const Population& population() const { return population_; }
  const ExperimentConfig& config() const { return cfg_; }
  // Current epsilon at cfg.privacy.delta; infinite when a private client's
  // update was released without noise.
  double epsilon() const;

 private:
  std::vector<std::size_t> SampleCohort() const;

  ExperimentConfig cfg_;
  Population population_;
  Evaluator evaluator_;
  int workers_;
  int round_ = 0;
  ModelVector global_;
  double clip_norm_;
  PrivacyLedger ledger_;
  bool unbounded_loss_ = false;
};

struct RunOptions {
  int workers = 1;
};

struct ExperimentResult {
  std::vector<RoundReport> reports;
  ModelVector final_model;
  PrivacyLedger ledger;
  double epsilon = 0.0;
  double delta = 0.0;
};

// Runs cfg.rounds rounds. `on_round` sees each report as soon as it exists.
ExperimentResult RunExperiment(
    const ExperimentConfig& cfg, const RunOptions& options = {},
    const std::function<void(const RoundReport&)>& on_round = {});

// Mean squared error of the r-weighted two-group estimate of phi in the
// point-estimation model, per coordinate. Private clients add their share of
// the privacy noise locally.
double MonteCarloServerVariance(const AnalyticParams& p, double r, int trials,
                                uint64_t seed);
// Same, for every r in `ratios` with common random numbers.
std::vector<double> MonteCarloServerVariance(const AnalyticParams& p,
                                             std::span<const double> ratios,
                                             int trials, uint64_t seed);

struct LambdaLoss {
  double lambda = 0.0;
  double loss = 0.0;
};

// Mean squared error of the focal client's Ditto estimate against its true
// phi_j for each lambda, with the global estimate formed at ratio r. Every
// lambda shares the same draws.
std::vector<LambdaLoss> LambdaSweep(const AnalyticParams& p,
                                    bool focal_private,
                                    std::span<const double> lambdas,
                                    int trials, uint64_t seed, double r);

// Runs one round of the full client/server pipeline on fresh linear
// regression populations and returns the mean of ||theta - phi||^2. The
// private mean gets noise of variance gamma2 per coordinate.
double MonteCarloRegressionServerError(const AnalyticParams& p, double r,
                                       int trials, uint64_t seed);

}  // namespace feo2

#endif  // FEO2_SIMULATE_H_
