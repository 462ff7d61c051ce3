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

// Command-line front end: run | analytic | solve-z | validate.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "feo2/analytic.h"
#include "feo2/config.h"
#include "feo2/errors.h"
#include "feo2/privacy.h"
#include "feo2/report.h"
#include "feo2/simulate.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigFailure = 2;

using feo2::FormatNumber;
using nlohmann::json;

struct RunArgs {
  std::string config;
  std::string out = "feo2_out";
  std::optional<uint64_t> seed;
  int workers = 1;
};

struct AnalyticArgs {
  std::string what;
  int N = 100;
  int N_p = 95;
  double beta2 = 1.0;
  int n_s = 1;
  std::optional<double> alpha2;
  double tau2 = 0.0;
  double gamma2 = 0.01;
  int d = 1;
  std::optional<double> r;
  int trials = 200000;
  uint64_t seed = 20261019;
  double lambda_max = 2.0;
  double lambda_step = 0.05;
  std::string out;
};

struct SolveArgs {
  double epsilon = 1.0;
  double delta = 1e-5;
  double q = 0.01;
  int rounds = 100;
};

void WriteJson(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

int CmdRun(const RunArgs& args) {
  feo2::ExperimentConfig cfg;
  try {
    cfg = feo2::LoadConfigFile(args.config, args.seed);
  } catch (const feo2::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigFailure;
  }
  const std::filesystem::path dir(args.out);
  std::filesystem::create_directories(dir);
  json manifest = {
      {"config_path", args.config},
      {"config", feo2::ConfigToJson(cfg)},
      {"config_hash", feo2::ConfigHash(cfg)},
      {"output_dir", dir.string()},
      {"workers", args.workers},
      {"started_at", feo2::UtcTimestamp()},
  };

  std::ofstream csv(dir / "rounds.csv", std::ios::binary);
  csv << feo2::kRoundsCsvHeader << '\n';
  feo2::RunOptions options;
  options.workers = args.workers;
  int code = kExitOk;
  try {
    const auto result =
        feo2::RunExperiment(cfg, options, [&](const feo2::RoundReport& r) {
          csv << feo2::FormatRoundRow(r) << '\n';
          csv.flush();
        });
    json summary = feo2::SummaryJson(cfg, result);
    summary["status"] = "ok";
    WriteJson(dir / "summary.json", summary);
  } catch (const std::exception& e) {
    csv << feo2::FailureRow() << '\n';
    std::cerr << "run failed: " << e.what() << '\n';
    WriteJson(dir / "summary.json", {{"status", "failed"}, {"error", e.what()}});
    code = dynamic_cast<const feo2::ConfigError*>(&e) ? kExitConfigFailure
                                                       : kExitRunFailure;
  }
  manifest["finished_at"] = feo2::UtcTimestamp();
  WriteJson(dir / "manifest.json", manifest);
  return code;
}

int CmdValidate(const std::string& path, std::optional<uint64_t> seed) {
  try {
    const auto cfg = feo2::LoadConfigFile(path, seed);
    json echo = feo2::ConfigToJson(cfg);
    std::cout << echo.dump(2) << '\n'
              << "config_hash: " << feo2::ConfigHash(cfg) << '\n';
    return kExitOk;
  } catch (const feo2::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigFailure;
  }
}

std::string LambdaText(double (*fn)(const feo2::AnalyticParams&),
                       const feo2::AnalyticParams& p) {
  try {
    return FormatNumber(fn(p));
  } catch (const feo2::UnboundedLambdaError&) {
    return "inf";
  }
}

std::vector<double> Grid(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) {
    out.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  }
  return out;
}

void EmitLambdaCurves(const feo2::AnalyticParams& p, const AnalyticArgs& a,
                      std::ostream& out) {
  const std::vector<double> lambdas = Grid(0.0, a.lambda_max, a.lambda_step);
  const double r_star = feo2::OptimalRatio(p);
  const auto feo2_p =
      feo2::LambdaSweep(p, true, lambdas, a.trials, a.seed, r_star);
  const auto feo2_np =
      feo2::LambdaSweep(p, false, lambdas, a.trials, a.seed, r_star);
  const auto avg_p = feo2::LambdaSweep(p, true, lambdas, a.trials, a.seed, 1.0);
  const auto avg_np =
      feo2::LambdaSweep(p, false, lambdas, a.trials, a.seed, 1.0);
  out << "lambda,feo2_private,feo2_opted_out,fedavg_private,fedavg_opted_out\n";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    out << FormatNumber(lambdas[i]) << ',' << FormatNumber(feo2_p[i].loss)
        << ',' << FormatNumber(feo2_np[i].loss) << ','
        << FormatNumber(avg_p[i].loss) << ',' << FormatNumber(avg_np[i].loss)
        << '\n';
  }
}

int CmdAnalytic(AnalyticArgs a) {
  feo2::AnalyticParams p;
  p.N = a.N;
  p.N_p = a.N_p;
  p.n_s = a.n_s;
  p.beta2 = a.alpha2 ? *a.alpha2 * a.n_s : a.beta2;
  p.tau2 = a.tau2;
  p.gamma2 = a.gamma2;
  p.d = a.d;
  std::ofstream file;
  if (!a.out.empty()) file.open(a.out, std::ios::binary);
  std::ostream& out = a.out.empty() ? std::cout : file;
  try {
    p.Validate();
    if (a.what == "ratio") {
      out << "r_star\n" << FormatNumber(feo2::OptimalRatio(p)) << '\n';
    } else if (a.what == "variance") {
      const double r = a.r ? *a.r : feo2::OptimalRatio(p);
      out << "r,sigma2_at_r,sigma2_opt,sigma2_fedavg,sigma2_dpfedavg\n"
          << FormatNumber(r) << ','
          << FormatNumber(feo2::ServerVarianceAtRatio(p, r)) << ','
          << FormatNumber(feo2::ServerVarianceOpt(p)) << ','
          << FormatNumber(feo2::ServerVarianceFedAvg(p)) << ','
          << FormatNumber(feo2::ServerVarianceDpFedAvg(p)) << '\n';
    } else if (a.what == "gaps") {
      const double opt = feo2::ServerVarianceOpt(p);
      out << "gap_fedavg,gap_dpfedavg,diff_fedavg,diff_dpfedavg\n"
          << FormatNumber(feo2::GapFedAvg(p)) << ','
          << FormatNumber(feo2::GapDpFedAvg(p)) << ','
          << FormatNumber(feo2::ServerVarianceFedAvg(p) - opt) << ','
          << FormatNumber(feo2::ServerVarianceDpFedAvg(p) - opt) << '\n';
    } else if (a.what == "lambdas") {
      out << "lambda_np,lambda_p\n"
          << LambdaText(feo2::LambdaStarNonPrivate, p) << ','
          << LambdaText(feo2::LambdaStarPrivate, p) << '\n';
    } else if (a.what == "fig1") {
      std::vector<double> ratios = Grid(0.0, 1.0, 0.05);
      ratios.push_back(feo2::OptimalRatio(p));
      const auto mc =
          feo2::MonteCarloServerVariance(p, ratios, a.trials, a.seed);
      out << "r,analytic,monte_carlo\n";
      for (std::size_t i = 0; i < ratios.size(); ++i) {
        double analytic = std::numeric_limits<double>::quiet_NaN();
        if (p.N_np() + ratios[i] * p.N_p > 0) {
          analytic = feo2::ServerVarianceAtRatio(p, ratios[i]);
        }
        out << FormatNumber(ratios[i]) << ',' << FormatNumber(analytic) << ','
            << FormatNumber(mc[i]) << '\n';
      }
    } else if (a.what == "fig2" || a.what == "fig3") {
      EmitLambdaCurves(p, a, out);
    } else if (a.what == "fig4") {
      out << "rho_np,sigma2_fedavg,sigma2_opt\n";
      for (int i = 0; i <= 100; ++i) {
        feo2::AnalyticParams q = p;
        q.N_p = static_cast<int>(std::lround((1.0 - i / 100.0) * p.N));
        out << FormatNumber(q.rho_np()) << ','
            << FormatNumber(feo2::ServerVarianceFedAvg(q)) << ','
            << FormatNumber(feo2::ServerVarianceOpt(q)) << '\n';
      }
    } else {
      std::cerr << "unknown analytic command " << a.what << '\n';
      return kExitConfigFailure;
    }
  } catch (const feo2::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigFailure;
  }
  return kExitOk;
}

int CmdSolveZ(const SolveArgs& a) {
  try {
    if (!(a.epsilon > 0.0)) throw feo2::ConfigError("epsilon must be > 0");
    const double z =
        feo2::SolveNoiseMultiplier(a.epsilon, a.delta, a.q, a.rounds);
    std::cout << "z,epsilon\n"
              << FormatNumber(z) << ','
              << FormatNumber(feo2::EpsilonFor(z, a.q, a.rounds, a.delta))
              << '\n';
    return kExitOk;
  } catch (const feo2::RangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  } catch (const feo2::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FeO2 federated learning simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run an experiment");
  run_cmd->add_option("--config", run.config, "config file")->required();
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_option("--seed", run.seed, "override the master seed");
  run_cmd->add_option("--workers", run.workers, "client threads per round")
      ->check(CLI::PositiveNumber);

  std::string validate_path;
  std::optional<uint64_t> validate_seed;
  auto* validate_cmd =
      app.add_subcommand("validate", "check a config and echo it resolved");
  validate_cmd->add_option("--config", validate_path, "config file")
      ->required();
  validate_cmd->add_option("--seed", validate_seed, "override the master seed");

  AnalyticArgs an;
  auto* analytic_cmd =
      app.add_subcommand("analytic", "closed forms and figure data");
  analytic_cmd->add_option("what", an.what)
      ->required()
      ->check(CLI::IsMember({"ratio", "variance", "gaps", "lambdas", "fig1",
                             "fig2", "fig3", "fig4"}));
  analytic_cmd->add_option("--N", an.N, "clients");
  analytic_cmd->add_option("--Np", an.N_p, "private clients");
  analytic_cmd->add_option("--beta2", an.beta2, "per-sample variance");
  analytic_cmd->add_option("--ns", an.n_s, "samples per client");
  analytic_cmd->add_option("--alpha2", an.alpha2,
                           "local-estimate variance (sets beta2 = alpha2 ns)");
  analytic_cmd->add_option("--tau2", an.tau2, "client heterogeneity");
  analytic_cmd->add_option("--gamma2", an.gamma2, "private-mean noise");
  analytic_cmd->add_option("--d", an.d, "dimension");
  analytic_cmd->add_option("--r", an.r, "ratio for `variance`");
  analytic_cmd->add_option("--trials", an.trials, "Monte Carlo trials");
  analytic_cmd->add_option("--seed", an.seed, "Monte Carlo seed");
  analytic_cmd->add_option("--lambda-max", an.lambda_max);
  analytic_cmd->add_option("--lambda-step", an.lambda_step);
  analytic_cmd->add_option("--out", an.out, "CSV path (default stdout)");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand(
      "solve-z", "noise multiplier reaching a target epsilon");
  solve_cmd->add_option("--epsilon", solve.epsilon)->required();
  solve_cmd->add_option("--delta", solve.delta);
  solve_cmd->add_option("--q", solve.q, "sampling fraction");
  solve_cmd->add_option("--rounds", solve.rounds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigFailure;
  }

  if (*run_cmd) return CmdRun(run);
  if (*validate_cmd) return CmdValidate(validate_path, validate_seed);
  if (*analytic_cmd) return CmdAnalytic(an);
  if (*solve_cmd) return CmdSolveZ(solve);
  return kExitConfigFailure;
}
