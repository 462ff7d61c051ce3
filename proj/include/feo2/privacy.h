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

#ifndef FEO2_PRIVACY_H_
#define FEO2_PRIVACY_H_

#include <cstddef>
#include <span>
#include <vector>

#include "feo2/model.h"
#include "feo2/rng.h"

namespace feo2 {

// Privacy hyperparameters of the server loop.
struct DpConfig {
  double z = 1.0;       // update noise multiplier
  double z_b = 0.0;     // clip-indicator noise multiplier
  double S0 = 1.0;      // initial clip norm
  double kappa = 0.5;   // target quantile of update norms
  double eta_b = 0.2;   // geometric clip-norm learning rate
  double delta = 1e-5;  // target delta for (epsilon, delta) reporting

  // Throws ConfigError naming the first violated bound.
  void Validate() const;

  friend bool operator==(const DpConfig&, const DpConfig&) = default;
};

struct ClipResult {
  ModelVector clipped;
  // True iff the input norm was at most the threshold.
  bool within_threshold = true;
};

// Scales `v` by S / max(||v||, S).
ClipResult Clip(const ModelVector& v, double clip_norm);

// i.i.d. N(0, stddev^2) entries. stddev == 0 returns exact zeros without
// consuming randomness.
ModelVector GaussianNoiseVector(std::size_t dim, double stddev, Rng& rng);

// Geometric clip-norm update toward the kappa-quantile of update norms:
//   S * exp(-eta_b * (mean(b) + N(0, z_b^2 / n^2) - kappa))
// `indicators` holds one bit per participating client and must be nonempty.
double UpdateClipNorm(double clip_norm, std::span<const bool> indicators,
                      const DpConfig& cfg, Rng& rng);

// Orders {1.25, 1.5, ..., 63.5} and {64, 128, 256, 512}.
std::vector<double> DefaultRdpOrders();

// RDP at `order` of one Poisson-subsampled Gaussian release with sampling
// rate q and noise multiplier z. Integer orders use the binomial expansion,
// fractional orders the two-sided erfc series. Throws InfinitePrivacyLossError
// when z == 0.
double SubsampledGaussianRdp(double q, double z, double order);

struct EpsilonResult {
  double epsilon = 0.0;
  double best_order = 0.0;
};

// Per-order cumulative Renyi DP of a run.
class PrivacyLedger {
 public:
  explicit PrivacyLedger(std::vector<double> orders = DefaultRdpOrders());

  // Composes one subsampled-Gaussian round.
  void Record(double q, double z);
  // Composes `rounds` identical rounds.
  void Record(double q, double z, int rounds);

  const std::vector<double>& orders() const { return orders_; }
  const std::vector<double>& rdp() const { return rdp_; }
  int rounds_recorded() const { return rounds_; }

  // min over orders of rdp(a) + log(1/delta) / (a - 1).
  EpsilonResult EpsilonAtDelta(double delta) const;

 private:
  std::vector<double> orders_;
  std::vector<double> rdp_;
  int rounds_ = 0;
};

// Functional form of PrivacyLedger::Record.
PrivacyLedger AccountRound(PrivacyLedger ledger, double q, double z);

// Epsilon after `rounds` rounds at (q, z).
double EpsilonFor(double z, double q, int rounds, double delta);

// Bisection for the noise multiplier in [z_lo, z_hi] whose epsilon is within
// `tolerance` below `target_epsilon`. Returns z_lo when even z_lo meets the
// target; throws RangeError when z_hi does not.
double SolveNoiseMultiplier(double target_epsilon, double delta, double q,
                            int rounds, double tolerance = 1e-3,
                            double z_lo = 0.1, double z_hi = 100.0);

}  // namespace feo2

#endif  // FEO2_PRIVACY_H_
