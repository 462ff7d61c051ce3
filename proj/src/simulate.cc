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

#include "feo2/simulate.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "feo2/aggregation.h"
#include "feo2/client.h"
#include "feo2/errors.h"
#include "feo2/rng.h"

namespace feo2 {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// by index is rethrown.
template <typename Fn>
void ParallelFor(std::size_t n, int workers, Fn fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min<std::size_t>(workers, n);
  std::vector<std::thread> threads;
  threads.reserve(count);
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Tally {
  double sum = 0.0;
  double weight = 0.0;
  void Add(double value, double w) {
    sum += value * w;
    weight += w;
  }
  double Mean() const { return weight > 0.0 ? sum / weight : kNaN; }
};

double SquaredDistance(const ModelVector& a, const ModelVector& b) {
  return (a - b).Norm() * (a - b).Norm();
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kFedAvg:
      return "fedavg";
    case Algorithm::kDpFedAvg:
      return "dp_fedavg";
    case Algorithm::kFeo2:
      return "feo2";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(std::string_view name) {
  if (name == "fedavg") return Algorithm::kFedAvg;
  if (name == "dp_fedavg") return Algorithm::kDpFedAvg;
  if (name == "feo2") return Algorithm::kFeo2;
  throw ConfigError("algorithm must be one of fedavg, dp_fedavg, feo2");
}

LossKind ExperimentConfig::loss_kind() const {
  switch (population.kind) {
    case PopulationKind::kPointEstimation:
      return LossKind::kPointEstimation;
    case PopulationKind::kLinearRegression:
      return LossKind::kLinearRegression;
    case PopulationKind::kLabelShard:
      return LossKind::kSoftmaxClassification;
  }
  throw ConfigError("unknown population kind");
}

void ExperimentConfig::Validate() const {
  population.Validate();
  if (!(feo2.r >= 0.0 && feo2.r <= 1.0)) {
    throw ConfigError("feo2.r must be in [0,1]");
  }
  if (!(feo2.learning_rate > 0.0)) {
    throw ConfigError("feo2.learning_rate must be > 0");
  }
  if (feo2.local_epochs < 1) {
    throw ConfigError("feo2.local_epochs must be >= 1");
  }
  try {
    privacy.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("privacy.") + e.what());
  }
  if (ditto) {
    try {
      ditto->Validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("ditto.") + e.what());
    }
  }
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (!(cohort_fraction > 0.0 && cohort_fraction <= 1.0)) {
    throw ConfigError("cohort_fraction must be in (0,1]");
  }
  if (algorithm == Algorithm::kFedAvg && (privacy.z != 0.0 ||
                                          privacy.z_b != 0.0)) {
    throw ConfigError("privacy.z and privacy.z_b must be 0 for fedavg");
  }
}

Evaluator::Evaluator(LossKind kind, std::optional<PopulationTruth> truth)
    : kind_(kind), truth_(std::move(truth)) {}

double Evaluator::ClientMetric(const ModelVector& model,
                               const ClientRecord& client, std::size_t index,
                               double* weight) const {
  const LocalDataset& data = client.test ? *client.test : client.train;
  if (kind_ == LossKind::kSoftmaxClassification) {
    const auto& examples = std::get<LabeledExamples>(data);
    *weight = static_cast<double>(examples.size());
    return 100.0 * Accuracy(model, examples);
  }
  *weight = 1.0;
  if (truth_) return SquaredDistance(model, truth_->client_phi.at(index));
  return LocalLoss(model, data, kind_);
}

void Evaluator::Evaluate(const ModelVector& global,
                         std::span<const ClientRecord> clients,
                         RoundReport& report) const {
  Tally all, g_p, g_np, l_p, l_np;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const ClientRecord& c = clients[i];
    double w = 0.0;
    const double g = ClientMetric(global, c, i, &w);
    all.Add(g, w);
    const ModelVector& personal =
        c.personalized_model ? *c.personalized_model : global;
    const double l = ClientMetric(personal, c, i, &w);
    (c.is_private ? g_p : g_np).Add(g, w);
    (c.is_private ? l_p : l_np).Add(l, w);
  }
  report.acc_g = all.Mean();
  report.acc_g_p = g_p.Mean();
  report.acc_g_np = g_np.Mean();
  report.acc_l_p = l_p.Mean();
  report.acc_l_np = l_np.Mean();
  report.delta_g = report.acc_g_np - report.acc_g_p;
  report.delta_l = report.acc_l_np - report.acc_l_p;
}

Simulator::Simulator(ExperimentConfig cfg, GeneratedPopulation population,
                     int workers)
    : cfg_(std::move(cfg)),
      population_(std::move(population.population)),
      evaluator_(cfg_.loss_kind(), std::move(population.truth)),
      workers_(std::max(1, workers)),
      global_(population_.model_dimension()),
      clip_norm_(cfg_.privacy.S0) {
  cfg_.Validate();
}

std::vector<std::size_t> Simulator::SampleCohort() const {
  const std::size_t n = population_.clients.size();
  const std::size_t k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(cfg_.cohort_fraction * n)), 1, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = MakeStream(cfg_.seed, round_, kServerStreamId,
                       StreamPurpose::kCohortSampling);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

RoundReport Simulator::RunRound() {
  const int t = round_;
  RoundReport report;
  report.round = t;
  report.clip_norm = clip_norm_;

  struct Participant {
    std::size_t index;
    bool as_private;
  };
  std::vector<Participant> cohort;
  bool declared_private_exposed = false;
  for (std::size_t i : SampleCohort()) {
    const bool declared = population_.clients[i].is_private;
    bool as_private = false;
    switch (cfg_.algorithm) {
      case Algorithm::kFedAvg:
        declared_private_exposed |= declared;
        break;
      case Algorithm::kDpFedAvg:
        as_private = true;
        break;
      case Algorithm::kFeo2:
        as_private = declared;
        // With r = 0 the server never talks to private clients.
        if (declared && cfg_.feo2.r == 0.0) continue;
        break;
    }
    cohort.push_back({i, as_private});
  }

  LocalTrainingConfig local;
  local.kind = cfg_.loss_kind();
  local.local_epochs = cfg_.feo2.local_epochs;
  local.learning_rate = cfg_.feo2.learning_rate;
  local.batch_size = cfg_.feo2.batch_size;
  local.ditto = cfg_.ditto;

  std::vector<ClientUpdateResult> results(cohort.size());
  ParallelFor(cohort.size(), workers_, [&](std::size_t k) {
    ClientRecord& client = population_.clients[cohort[k].index];
    Rng rng = MakeStream(cfg_.seed, t, client.id,
                         StreamPurpose::kClientBatching);
    results[k] = ClientUpdate(global_, client, clip_norm_, local,
                              cohort[k].as_private, rng, t);
  });

  RoundCohort groups;
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    (cohort[k].as_private ? groups.private_updates : groups.nonprivate_updates)
        .push_back(std::move(results[k].delta));
    groups.indicators.push_back(results[k].within_clip);
  }
  report.num_private = groups.num_private();
  report.num_nonprivate = groups.num_nonprivate();

  Rng noise_rng =
      MakeStream(cfg_.seed, t, kServerStreamId, StreamPurpose::kServerNoise);
  const auto delta_p = DpGroupMean(groups.private_updates, clip_norm_,
                                   cfg_.privacy.z, noise_rng);
  const auto delta_np = GroupMean(groups.nonprivate_updates);
  const auto delta = Feo2Combine(delta_np, delta_p, report.num_nonprivate,
                                 report.num_private, cfg_.feo2.r);
  if (delta) {
    global_ = ApplyUpdate(global_, *delta);
    if (!global_.AllFinite()) {
      throw NumericError("non-finite global model", t, -1);
    }
  } else {
    report.skipped = true;
  }

  if (!groups.indicators.empty()) {
    const std::size_t n = groups.indicators.size();
    auto flags = std::make_unique<bool[]>(n);
    std::copy(groups.indicators.begin(), groups.indicators.end(), flags.get());
    const std::span<const bool> bits(flags.get(), n);
    Rng clip_rng =
        MakeStream(cfg_.seed, t, kServerStreamId, StreamPurpose::kClipNoise);
    clip_norm_ = UpdateClipNorm(clip_norm_, bits, cfg_.privacy, clip_rng);
  }

  if (declared_private_exposed) unbounded_loss_ = true;
  if (report.num_private > 0) {
    const int total_private = cfg_.algorithm == Algorithm::kDpFedAvg
                                  ? static_cast<int>(population_.clients.size())
                                  : population_.num_private();
    const double q = static_cast<double>(report.num_private) / total_private;
    const double z = cfg_.privacy.z;
    const double z_b = cfg_.privacy.z_b;
    if (z == 0.0) {
      unbounded_loss_ = true;
    } else {
      // The noised indicator mean is a second Gaussian release with
      // sensitivity 1; composing both gives one effective multiplier.
      const double z_eff =
          z_b > 0.0 ? 1.0 / std::sqrt(1.0 / (z * z) + 1.0 / (z_b * z_b)) : z;
      ledger_.Record(q, z_eff);
    }
  }

  ++round_;
  evaluator_.Evaluate(global_, population_.clients, report);
  report.epsilon = epsilon();
  return report;
}

double Simulator::epsilon() const {
  if (unbounded_loss_) return std::numeric_limits<double>::infinity();
  if (ledger_.rounds_recorded() == 0) return 0.0;
  return ledger_.EpsilonAtDelta(cfg_.privacy.delta).epsilon;
}

ExperimentResult RunExperiment(
    const ExperimentConfig& cfg, const RunOptions& options,
    const std::function<void(const RoundReport&)>& on_round) {
  cfg.Validate();
  Simulator sim(cfg, GeneratePopulation(cfg.population), options.workers);
  ExperimentResult out;
  for (int t = 0; t < cfg.rounds; ++t) {
    out.reports.push_back(sim.RunRound());
    if (on_round) on_round(out.reports.back());
  }
  out.final_model = sim.global_model();
  out.ledger = sim.ledger();
  out.epsilon = sim.epsilon();
  out.delta = cfg.privacy.delta;
  return out;
}

std::vector<double> MonteCarloServerVariance(const AnalyticParams& p,
                                             std::span<const double> ratios,
                                             int trials, uint64_t seed) {
  p.Validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("r must be in [0,1]");
  }
  const int n_np = p.N_np();
  const int n_p = p.N_p;
  const double sd_np = std::sqrt(p.sigma_c2());
  const double sd_p = std::sqrt(p.sigma_p2());
  Rng rng = MakeStream(seed, 0, 0, StreamPurpose::kMonteCarlo);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> sse(ratios.size(), 0.0);
  for (int trial = 0; trial < trials; ++trial) {
    for (int c = 0; c < p.d; ++c) {
      // phi = 0 without loss of generality; each client sends its local
      // estimate, private clients with their share of the noise added.
      double sum_np = 0.0;
      double sum_p = 0.0;
      for (int j = 0; j < n_np; ++j) sum_np += sd_np * normal(rng);
      for (int j = 0; j < n_p; ++j) sum_p += sd_p * normal(rng);
      for (std::size_t k = 0; k < ratios.size(); ++k) {
        const double r = ratios[k];
        const double w = n_np + r * n_p;
        if (w == 0.0) {
          sse[k] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const double est = (sum_np + r * sum_p) / w;
        sse[k] += est * est;
      }
    }
  }
  for (double& v : sse) v /= static_cast<double>(trials) * p.d;
  return sse;
}

double MonteCarloServerVariance(const AnalyticParams& p, double r, int trials,
                                uint64_t seed) {
  const double ratios[] = {r};
  return MonteCarloServerVariance(p, ratios, trials, seed).front();
}

std::vector<LambdaLoss> LambdaSweep(const AnalyticParams& p,
                                    bool focal_private,
                                    std::span<const double> lambdas,
                                    int trials, uint64_t seed, double r) {
  p.Validate();
  if (lambdas.empty()) throw ConfigError("lambda grid is empty");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("r must be in [0,1]");
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ConfigError("lambda must be >= 0");
  }
  if (focal_private ? p.N_p < 1 : p.N_np() < 1) {
    throw ConfigError("focal client's class is empty");
  }
  const int n_np = p.N_np();
  const int n_p = p.N_p;
  const double w = n_np + r * n_p;
  if (w == 0.0) throw ConfigError("N_np + r N_p must be > 0");
  const int others_np = focal_private ? n_np : n_np - 1;
  const int others_p = focal_private ? n_p - 1 : n_p;
  const double sd_tau = std::sqrt(p.tau2);
  const double sd_alpha = std::sqrt(p.alpha2());
  const double sd_noise = std::sqrt(n_p * p.gamma2);
  const double sd_np = std::sqrt(p.sigma_c2());
  const double sd_p = std::sqrt(p.sigma_p2());

  Rng rng = MakeStream(seed, 0, 0, StreamPurpose::kMonteCarlo);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> sse(lambdas.size(), 0.0);
  for (int trial = 0; trial < trials; ++trial) {
    for (int c = 0; c < p.d; ++c) {
      const double phi_j = sd_tau * normal(rng);
      const double phi_hat = phi_j + sd_alpha * normal(rng);
      const double noise = sd_noise * normal(rng);
      double sum_np = 0.0;
      double sum_p = 0.0;
      for (int j = 0; j < others_np; ++j) sum_np += sd_np * normal(rng);
      for (int j = 0; j < others_p; ++j) sum_p += sd_p * normal(rng);
      if (focal_private) {
        sum_p += phi_hat + noise;
      } else {
        sum_np += phi_hat;
      }
      const double theta = (sum_np + r * sum_p) / w;
      for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double l = lambdas[k];
        const double err = (phi_hat + l * theta) / (1.0 + l) - phi_j;
        sse[k] += err * err;
      }
    }
  }
  std::vector<LambdaLoss> out;
  out.reserve(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    out.push_back({lambdas[k], sse[k] / (static_cast<double>(trials) * p.d)});
  }
  return out;
}

double MonteCarloRegressionServerError(const AnalyticParams& p, double r,
                                       int trials, uint64_t seed) {
  p.Validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  PopulationSpec spec;
  spec.kind = PopulationKind::kLinearRegression;
  spec.n_clients = p.N;
  spec.samples_per_client = p.n_s;
  spec.rho_np = p.rho_np();
  spec.beta2 = p.beta2;
  spec.tau2 = p.tau2;
  spec.dim = p.d;

  LocalTrainingConfig local;
  local.kind = LossKind::kLinearRegression;
  // Large enough that no update is clipped; the noise multiplier is scaled
  // so the private mean gets variance gamma2.
  constexpr double kClip = 1e6;
  const double z = p.N_p > 0 ? std::sqrt(p.gamma2) * p.N_p / kClip : 0.0;

  double sse = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    spec.seed = DeriveSeed(seed, trial, 0, StreamPurpose::kMonteCarlo);
    GeneratedPopulation gen = GenRegressionPopulation(spec);
    const ModelVector theta0(p.d);
    std::vector<ModelVector> priv, nonpriv;
    for (ClientRecord& c : gen.population.clients) {
      Rng rng = MakeStream(spec.seed, 0, c.id, StreamPurpose::kClientBatching);
      auto res = ClientUpdate(theta0, c, kClip, local, c.is_private, rng);
      (c.is_private ? priv : nonpriv).push_back(std::move(res.delta));
    }
    Rng noise_rng =
        MakeStream(spec.seed, 0, kServerStreamId, StreamPurpose::kServerNoise);
    const auto dp = DpGroupMean(priv, kClip, z, noise_rng);
    const auto dnp = GroupMean(nonpriv);
    const auto delta = Feo2Combine(dnp, dp, static_cast<int>(nonpriv.size()),
                                   static_cast<int>(priv.size()), r);
    if (!delta) throw ConfigError("no usable group for this r");
    sse += SquaredDistance(ApplyUpdate(theta0, *delta), gen.truth->phi);
  }
  return sse / trials;
}

}  // namespace feo2
