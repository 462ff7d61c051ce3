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

#include "feo2/report.h"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <ctime>

namespace feo2 {
namespace {

using nlohmann::json;

json Finite(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

std::string FormatRoundRow(const RoundReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", r.round,
                     FormatNumber(r.clip_norm), r.num_private,
                     r.num_nonprivate, FormatNumber(r.acc_g),
                     FormatNumber(r.acc_g_p), FormatNumber(r.acc_g_np),
                     FormatNumber(r.acc_l_p), FormatNumber(r.acc_l_np),
                     FormatNumber(r.delta_g), FormatNumber(r.delta_l),
                     FormatNumber(r.epsilon));
}

std::string FailureRow() { return "FAILED,,,,,,,,,,,"; }

void WriteRoundsCsv(std::ostream& out, const std::vector<RoundReport>& rows) {
  out << kRoundsCsvHeader << '\n';
  for (const auto& r : rows) out << FormatRoundRow(r) << '\n';
}

json SummaryJson(const ExperimentConfig& cfg, const ExperimentResult& result) {
  json summary = {
      {"algorithm", AlgorithmName(cfg.algorithm)},
      {"rounds_completed", result.reports.size()},
      {"epsilon", Finite(result.epsilon)},
      {"epsilon_unbounded", std::isinf(result.epsilon)},
      {"delta", result.delta},
      {"ledger",
       {{"orders", result.ledger.orders()},
        {"rdp", result.ledger.rdp()},
        {"rounds_recorded", result.ledger.rounds_recorded()}}},
  };
  if (result.ledger.rounds_recorded() > 0 && std::isfinite(result.epsilon)) {
    summary["best_order"] =
        result.ledger.EpsilonAtDelta(result.delta).best_order;
  }
  if (!result.reports.empty()) {
    const RoundReport& r = result.reports.back();
    summary["final"] = {
        {"round", r.round},         {"S", Finite(r.clip_norm)},
        {"acc_g", Finite(r.acc_g)}, {"acc_g_p", Finite(r.acc_g_p)},
        {"acc_g_np", Finite(r.acc_g_np)}, {"acc_l_p", Finite(r.acc_l_p)},
        {"acc_l_np", Finite(r.acc_l_np)}, {"delta_g", Finite(r.delta_g)},
        {"delta_l", Finite(r.delta_l)},
    };
  }
  return summary;
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace feo2
