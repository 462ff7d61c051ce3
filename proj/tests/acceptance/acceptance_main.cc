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

// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// if any selected criterion fails.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "feo2/analytic.h"
#include "feo2/config.h"
#include "feo2/datagen.h"
#include "feo2/errors.h"
#include "feo2/personalization.h"
#include "feo2/privacy.h"
#include "feo2/report.h"
#include "feo2/simulate.h"
#include "fmt/format.h"
#include "test_oracles.h"

namespace feo2 {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// N=100, N_p=95, sigma_c2=1, gamma2=0.01.
AnalyticParams Fig1Params() {
  return AnalyticParams::FromVariances(100, 95, 1.0, 0.0, 0.01);
}

// Fig1Params with alpha2=0.25 and tau2=0.5.
AnalyticParams LambdaParams() {
  return AnalyticParams::FromVariances(100, 95, 0.25, 0.5, 0.01);
}

std::vector<double> LambdaGrid() {
  std::vector<double> out;
  for (int k = 0; k <= 40; ++k) out.push_back(0.05 * k);
  return out;
}

Outcome OptimalRatioReproduction() {
  const auto start = Clock::now();
  const AnalyticParams p = Fig1Params();
  const double r_star = OptimalRatio(p);
  std::vector<double> ratios;
  for (int k = 0; k <= 20; ++k) ratios.push_back(0.05 * k);
  ratios.push_back(r_star);
  const std::vector<double> mc =
      MonteCarloServerVariance(p, ratios, 200000, 20261019);
  const std::size_t best =
      std::min_element(mc.begin(), mc.end()) - mc.begin();
  // 1.95 / (100 * 1.0475), written out.
  const double expected = 1.95 / (100.0 * 1.0475);
  const double rel = std::abs(mc.back() / expected - 1.0);
  const double secs = Seconds(start);
  const bool pass = std::abs(r_star - 1.0 / 1.95) < 1e-12 &&
                    std::abs(r_star - 0.512821) < 1e-6 &&
                    ratios[best] == r_star && rel <= 0.03 &&
                    std::abs(ServerVarianceOpt(p) - expected) < 1e-15 &&
                    secs < 30.0;
  return {pass, fmt::format("r*={:.6f} argmin={:.6f} mc(r*)={:.7f} "
                            "analytic={:.7f} rel_err={:.4f} (tol 0.03) "
                            "{:.1f}s (limit 30s)",
                            r_star, ratios[best], mc.back(), expected, rel,
                            secs)};
}

Outcome VarianceAlgebra() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> big(1, 1000);
  std::uniform_real_distribution<double> log_unif(-3.0, 2.0);
  double worst8 = 0.0;
  double worst9 = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    AnalyticParams p;
    p.N = big(rng);
    p.N_p = std::uniform_int_distribution<int>(0, p.N)(rng);
    p.beta2 = std::pow(10.0, log_unif(rng));
    p.tau2 = std::pow(10.0, log_unif(rng));
    p.gamma2 = std::pow(10.0, log_unif(rng) - 2.0);
    const double sc = p.sigma_c2();
    const double rho = p.rho_np();
    const double g = p.N_p * p.gamma2;
    const double denom = p.N * (sc + rho * g);
    // Gap formulas written out from their closed forms.
    const double eq8 = rho * (1 - rho) * g * g / denom;
    const double eq9 = g * rho * (sc + g) / denom;
    const double opt = ServerVarianceOpt(p);
    const double fed = ServerVarianceFedAvg(p);
    const double dp = ServerVarianceDpFedAvg(p);
    worst8 = std::max({worst8, std::abs(eq8 - (fed - opt)),
                       std::abs(GapFedAvg(p) - (fed - opt))});
    worst9 = std::max({worst9, std::abs(eq9 - (dp - opt)),
                       std::abs(GapDpFedAvg(p) - (dp - opt))});
    min_gap = std::min({min_gap, GapFedAvg(p), GapDpFedAvg(p)});
  }
  const bool pass = worst8 <= 1e-12 && worst9 <= 1e-12 && min_gap >= 0.0;
  return {pass, fmt::format("10000 draws: max|eq8 - diff|={:.2e} "
                            "max|eq9 - diff|={:.2e} (tol 1e-12) "
                            "min gap={:.3e}",
                            worst8, worst9, min_gap)};
}

// Local least-squares estimate, solved without relying on orthogonality.
ModelVector LocalEstimate(const LocalDataset& data) {
  if (const auto* p = std::get_if<PointSamples>(&data)) {
    double sum = 0.0;
    for (double x : p->observations) sum += x;
    return ModelVector{sum / p->observations.size()};
  }
  const auto& r = std::get<RegressionSamples>(data);
  Eigen::MatrixXd f(r.rows, r.cols);
  Eigen::VectorXd x(r.rows);
  for (std::size_t i = 0; i < r.rows; ++i) {
    for (std::size_t c = 0; c < r.cols; ++c) f(i, c) = r.feature(i, c);
    x(i) = r.responses[i];
  }
  const Eigen::VectorXd est = (f.transpose() * f).ldlt().solve(f.transpose() * x);
  ModelVector out(r.cols);
  for (std::size_t c = 0; c < r.cols; ++c) out[c] = est(c);
  return out;
}

Outcome OneStepConvergence() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    ExperimentConfig cfg;
    PopulationSpec& s = cfg.population;
    const bool regression = inst % 2 == 1;
    s.kind = regression ? PopulationKind::kLinearRegression
                        : PopulationKind::kPointEstimation;
    s.dim = regression ? 1 + inst % 4 : 1;
    s.n_clients = 3 + inst % 10;
    s.samples_per_client = s.dim + 1 + inst % 7;
    s.rho_np = unit(rng);
    s.beta2 = 0.1 + 2 * unit(rng);
    s.tau2 = 2 * unit(rng);
    s.seed = 1000 + inst;
    cfg.algorithm = Algorithm::kFeo2;
    cfg.feo2.r = 0.05 + 0.95 * unit(rng);
    cfg.privacy.z = 0.0;
    cfg.privacy.S0 = 1e9;
    const double lambda = 3 * unit(rng);
    cfg.ditto = DittoConfig{lambda, lambda, 1.0 / (1.0 + lambda)};
    cfg.rounds = 2;
    cfg.seed = inst;

    GeneratedPopulation g = GeneratePopulation(s);
    std::vector<ModelVector> local;
    ModelVector weighted(s.dim);
    double total = 0.0;
    for (const auto& c : g.population.clients) {
      local.push_back(LocalEstimate(c.train));
      const double w = c.is_private ? cfg.feo2.r : 1.0;
      weighted.AddScaled(local.back(), w);
      total += w;
    }
    const ModelVector theta_star = weighted * (1.0 / total);

    Simulator sim(cfg, std::move(g));
    sim.RunRound();
    for (int c = 0; c < s.dim; ++c) {
      worst = std::max(worst, std::abs(sim.global_model()[c] - theta_star[c]));
    }
    sim.RunRound();
    for (std::size_t j = 0; j < local.size(); ++j) {
      const ModelVector& v = *sim.population().clients[j].personalized_model;
      for (int c = 0; c < s.dim; ++c) {
        const double want = (local[j][c] + lambda * theta_star[c]) /
                            (1.0 + lambda);
        worst = std::max(worst, std::abs(v[c] - want));
        worst = std::max(worst,
                         std::abs(sim.global_model()[c] - theta_star[c]));
      }
    }
  }
  return {worst <= 1e-12,
          fmt::format("100 instances: max abs error={:.2e} (tol 1e-12)",
                      worst)};
}

Outcome LambdaOptimality() {
  const AnalyticParams p = LambdaParams();
  const std::vector<double> grid = LambdaGrid();
  const double step = 0.05;
  const double r_star = OptimalRatio(p);
  std::string detail;
  bool pass = true;
  for (bool focal_private : {false, true}) {
    const auto curve = LambdaSweep(p, focal_private, grid, 200000, 44, r_star);
    const auto best = std::min_element(
        curve.begin(), curve.end(),
        [](const LambdaLoss& a, const LambdaLoss& b) { return a.loss < b.loss; });
    const double want =
        focal_private ? LambdaStarPrivate(p) : LambdaStarNonPrivate(p);
    const bool ok = std::abs(best->lambda - want) <= step + 1e-12;
    pass &= ok;
    detail += fmt::format("{} argmin={:.2f} lambda*={:.6f}; ",
                          focal_private ? "private" : "opted-out",
                          best->lambda, want);
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> log_unif(-2.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    AnalyticParams q;
    q.N = std::uniform_int_distribution<int>(3, 400)(rng);
    q.N_p = std::uniform_int_distribution<int>(1, q.N - 2)(rng);
    q.n_s = std::uniform_int_distribution<int>(1, 30)(rng);
    q.beta2 = std::pow(10.0, log_unif(rng));
    q.tau2 = std::pow(10.0, log_unif(rng));
    q.gamma2 = std::pow(10.0, log_unif(rng) - 1.0);
    const double r = OptimalRatio(q);
    const double np = LambdaStarNonPrivate(q);
    const double pr = LambdaStarPrivate(q);
    worst = std::max(worst, std::abs(LambdaStarGeneral(q, false, r).value() -
                                     np) / std::max(1.0, np));
    worst = std::max(worst, std::abs(LambdaStarGeneral(q, true, r).value() -
                                     pr) / std::max(1.0, pr));
  }
  pass &= worst <= 1e-9;
  detail += fmt::format("general form at r*: max err={:.2e} over 1000 draws "
                        "(tol 1e-9)",
                        worst);
  return {pass, detail};
}

Outcome LambdaCurveOrderings() {
  const AnalyticParams p = LambdaParams();
  const std::vector<double> grid = LambdaGrid();
  const double r_star = OptimalRatio(p);
  auto min_loss = [&](bool focal_private, double r) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : LambdaSweep(p, focal_private, grid, 200000, 55, r)) {
      best = std::min(best, l.loss);
    }
    return best;
  };
  const double feo2_p = min_loss(true, r_star);
  const double feo2_np = min_loss(false, r_star);
  const double avg_p = min_loss(true, 1.0);
  const double avg_np = min_loss(false, 1.0);
  const bool ordered = feo2_p < avg_p && feo2_np < avg_np &&
                       feo2_np < feo2_p && avg_np < avg_p;
  const double gain_p = 1.0 - feo2_p / avg_p;
  const double gain_np = 1.0 - feo2_np / avg_np;
  const bool in_band = gain_p >= 0.05 && gain_p <= 0.40 && gain_np >= 0.05 &&
                       gain_np <= 0.40;
  return {ordered && in_band,
          fmt::format("min loss feo2 p={:.6f} np={:.6f}, fedavg p={:.6f} "
                      "np={:.6f}; orderings {}; improvement p={:.2f}% "
                      "np={:.2f}% (band 5%..40%)",
                      feo2_p, feo2_np, avg_p, avg_np,
                      ordered ? "hold" : "violated", 100 * gain_p,
                      100 * gain_np)};
}

Outcome RhoSweepOrdering() {
  bool pass = true;
  double min_interior_gap = std::numeric_limits<double>::infinity();
  double max_end_gap = 0.0;
  for (int k = 0; k <= 100; ++k) {
    AnalyticParams p = Fig1Params();
    p.N_p = 100 - k;
    const double opt = ServerVarianceOpt(p);
    const double fed = ServerVarianceFedAvg(p);
    if (k == 0 || k == 100) {
      max_end_gap = std::max(max_end_gap, std::abs(fed - opt));
      pass &= std::abs(fed - opt) <= 1e-15;
    } else {
      min_interior_gap = std::min(min_interior_gap, fed - opt);
      pass &= opt < fed;
    }
  }
  return {pass, fmt::format("101 values of rho_np: min interior gap={:.3e}, "
                            "endpoint gap={:.1e}",
                            min_interior_gap, max_end_gap)};
}

Outcome RegressionTrace() {
  const auto start = Clock::now();
  AnalyticParams p = AnalyticParams::FromVariances(20, 15, 0.1, 0.2, 0.01, 5);
  p.n_s = 10;
  p.beta2 = 1.0;
  const double r = OptimalRatio(p);
  const double mc = MonteCarloRegressionServerError(p, r, 50000, 77);
  const double sc = p.alpha2() + p.tau2;
  const double g = p.N_p * p.gamma2;
  const double rho = static_cast<double>(p.N - p.N_p) / p.N;
  const double trace = p.d * sc * (sc + g) / (p.N * (sc + rho * g));
  const double rel = std::abs(mc / trace - 1.0);
  const double secs = Seconds(start);
  return {rel <= 0.05,
          fmt::format("d=5 N=20: mc trace={:.6f} analytic={:.6f} "
                      "rel_err={:.4f} (tol 0.05) {:.1f}s",
                      mc, trace, rel, secs)};
}

Outcome AccountantProperties() {
  bool pass = true;
  std::string detail;
  // Additivity.
  PrivacyLedger ledger;
  ledger.Record(0.05, 1.1);
  ledger.Record(0.2, 3.0);
  bool additive = true;
  for (std::size_t i = 0; i < ledger.orders().size(); ++i) {
    const double a = ledger.orders()[i];
    additive &= ledger.rdp()[i] == SubsampledGaussianRdp(0.05, 1.1, a) +
                                       SubsampledGaussianRdp(0.2, 3.0, a);
  }
  pass &= additive;
  detail += fmt::format("additivity {}; ", additive ? "exact" : "broken");
  // Monotonicity.
  const double zs[] = {0.8, 1.0, 1.5, 2.0, 4.0};
  const int ts[] = {1, 10, 50, 100, 500};
  bool monotone = true;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double e = EpsilonFor(zs[i], 0.05, ts[j], 1e-5);
      if (i > 0) monotone &= e < EpsilonFor(zs[i - 1], 0.05, ts[j], 1e-5);
      if (j > 0) monotone &= e > EpsilonFor(zs[i], 0.05, ts[j - 1], 1e-5);
    }
  }
  pass &= monotone;
  detail += fmt::format("5x5 monotonicity {}; ", monotone ? "holds" : "fails");
  // Full batch.
  double worst_full = 0.0;
  for (double z : {0.7, 1.0, 2.0, 5.0}) {
    for (int a = 2; a <= 64; ++a) {
      const double want = a / (2 * z * z);
      worst_full = std::max(worst_full,
                            std::abs(SubsampledGaussianRdp(1.0, z, a) - want) /
                                std::max(1.0, want));
    }
  }
  pass &= worst_full <= 1e-12;
  detail += fmt::format("q=1 max err={:.1e} (tol 1e-12); ", worst_full);
  // Independent summation.
  double worst_sum = 0.0;
  for (double q : {0.001, 0.01, 0.05, 0.2, 0.6}) {
    for (double z : {0.8, 1.0, 2.0, 4.0}) {
      for (int a = 2; a <= 40; ++a) {
        const double want = oracle::DirectSumRdp(q, z, a);
        worst_sum = std::max(worst_sum,
                             std::abs(SubsampledGaussianRdp(q, z, a) - want) /
                                 std::max(1.0, want));
      }
    }
  }
  pass &= worst_sum <= 1e-9;
  detail += fmt::format("summation oracle max err={:.1e} (tol 1e-9); ",
                        worst_sum);
  // Solve-z round trips.
  double worst_solve = 0.0;
  const struct {
    double eps, delta, q;
    int rounds;
  } targets[] = {{3.6, 1e-4, 0.05, 500}, {1.0, 1e-5, 0.01, 1000},
                 {8.0, 1e-5, 0.1, 100}, {0.5, 1e-6, 1.0, 1}};
  for (const auto& t : targets) {
    const double z = SolveNoiseMultiplier(t.eps, t.delta, t.q, t.rounds);
    worst_solve = std::max(
        worst_solve, std::abs(EpsilonFor(z, t.q, t.rounds, t.delta) - t.eps));
  }
  pass &= worst_solve <= 1e-3;
  detail += fmt::format("solve-z max |eps - target|={:.1e} (tol 1e-3)",
                        worst_solve);
  return {pass, detail};
}

std::string ConfigPath(const char* name) {
  return std::string(FEO2_SOURCE_DIR) + "/configs/" + name;
}

int Workers() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

Outcome DeskScaleDirection() {
  const auto start = Clock::now();
  const uint64_t seeds[] = {1, 2, 3};
  struct Arm {
    std::string name;
    Algorithm algorithm;
    double r;
    double acc = 0.0;
    double gap = 0.0;
  };
  std::vector<Arm> arms = {{"dp_fedavg", Algorithm::kDpFedAvg, 1.0},
                           {"feo2 r=0.01", Algorithm::kFeo2, 0.01},
                           {"feo2 r=0.1", Algorithm::kFeo2, 0.1},
                           {"feo2 r=1", Algorithm::kFeo2, 1.0}};
  for (Arm& arm : arms) {
    for (uint64_t seed : seeds) {
      ExperimentConfig cfg =
          LoadConfigFile(ConfigPath("skewed_label_shard.yaml"), seed);
      cfg.algorithm = arm.algorithm;
      cfg.feo2.r = arm.r;
      const ExperimentResult res = RunExperiment(cfg, {Workers()});
      arm.acc += res.reports.back().acc_g / 3.0;
      arm.gap += res.reports.back().delta_g / 3.0;
    }
  }
  const auto best = std::max_element(
      arms.begin() + 1, arms.end(),
      [](const Arm& a, const Arm& b) { return a.acc < b.acc; });
  const double secs = Seconds(start);
  const bool pass =
      best->acc >= arms[0].acc + 1.0 && best->gap > 0.0 && secs < 600.0;
  std::string detail;
  for (const Arm& arm : arms) {
    detail += fmt::format("{} acc_g={:.2f} delta_g={:.2f}; ", arm.name,
                          arm.acc, arm.gap);
  }
  detail += fmt::format("best feo2 margin={:+.2f} points (need >= 1) "
                        "{:.1f}s (limit 600s)",
                        best->acc - arms[0].acc, secs);
  return {pass, detail};
}

std::string RunCsv(const ExperimentConfig& cfg, int workers) {
  std::ostringstream out;
  WriteRoundsCsv(out, RunExperiment(cfg, {workers}).reports);
  return out.str();
}

Outcome Determinism() {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig shard = LoadConfigFile(ConfigPath("skewed_label_shard.yaml"));
  shard.rounds = 10;
  shard.ditto = DittoConfig{0.1, 0.2, 0.5};
  shard.feo2.batch_size = 4;
  shard.privacy.z_b = 10.0;
  configs.push_back(shard);
  configs.push_back(LoadConfigFile(ConfigPath("point_minimal.yaml")));
  ExperimentConfig reg = configs.back();
  reg.population.kind = PopulationKind::kLinearRegression;
  reg.population.dim = 3;
  reg.population.samples_per_client = 8;
  reg.cohort_fraction = 0.3;
  reg.feo2.batch_size = 3;
  reg.feo2.local_epochs = 2;
  reg.feo2.learning_rate = 0.3;
  configs.push_back(reg);
  bool pass = true;
  std::size_t bytes = 0;
  for (const ExperimentConfig& cfg : configs) {
    const std::string base = RunCsv(cfg, 1);
    bytes += base.size();
    for (int w : {1, 2, 4, 8}) pass &= RunCsv(cfg, w) == base;
  }
  return {pass, fmt::format("3 configs x workers {{1,2,4,8}}: rounds.csv "
                            "{} ({} bytes per sweep)",
                            pass ? "byte-identical" : "differs", bytes)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace
}  // namespace feo2

int main(int argc, char** argv) {
  using feo2::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "optimal ratio", feo2::OptimalRatioReproduction},
      {2, "variance algebra", feo2::VarianceAlgebra},
      {3, "one-step convergence", feo2::OneStepConvergence},
      {4, "lambda optimality", feo2::LambdaOptimality},
      {5, "lambda curve orderings", feo2::LambdaCurveOrderings},
      {6, "rho_np sweep", feo2::RhoSweepOrdering},
      {7, "regression trace", feo2::RegressionTrace},
      {8, "accountant", feo2::AccountantProperties},
      {9, "desk-scale label shard", feo2::DeskScaleDirection},
      {10, "determinism", feo2::Determinism},
  };
  CLI::App app{"FeO2 acceptance checks"};
  std::vector<int> only;
  app.add_option("--criterion", only, "Run only these criteria (1-10)")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.id) == only.end()) {
      continue;
    }
    feo2::Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    failures += !out.pass;
    std::cout << "criterion " << c.id << " " << (out.pass ? "PASS" : "FAIL")
              << " [" << c.name << "] " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
