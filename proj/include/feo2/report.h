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

#ifndef FEO2_REPORT_H_
#define FEO2_REPORT_H_

#include <ostream>
#include <string>
#include <vector>

#include "feo2/simulate.h"
#include "json.hpp"

namespace feo2 {

inline constexpr const char* kRoundsCsvHeader =
    "round,S,N_p_t,N_np_t,acc_g,acc_g_p,acc_g_np,acc_l_p,acc_l_np,delta_g,"
    "delta_l,epsilon";

// Shortest round-trip decimal; "nan", "inf" and "-inf" for non-finite values.
std::string FormatNumber(double value);

std::string FormatRoundRow(const RoundReport& report);
// Marker appended when a run aborts.
std::string FailureRow();

void WriteRoundsCsv(std::ostream& out, const std::vector<RoundReport>& rows);

// Final privacy state and last-round metrics.
nlohmann::json SummaryJson(const ExperimentConfig& cfg,
                           const ExperimentResult& result);

// UTC timestamp such as 2026-10-19T08:30:00Z.
std::string UtcTimestamp();

}  // namespace feo2

#endif  // FEO2_REPORT_H_
