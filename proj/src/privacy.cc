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

#include "feo2/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "feo2/errors.h"

namespace feo2 {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)), requires a >= b.
double LogSub(double a, double b) {
  if (b == kNegInf) return a;
  if (a <= b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

double LogErfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows past ~26.
  const double x2 = x * x;
  const double series =
      -1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) - 15.0 / (8.0 * x2 * x2 * x2);
  return -x2 - std::log(x) - 0.5 * std::log(M_PI) + std::log1p(series);
}

// log A_alpha for integer alpha:
//   sum_k C(alpha, k) (1-q)^(alpha-k) q^k exp((k^2 - k) / (2 sigma^2))
double LogAInteger(double q, double sigma, int alpha) {
  double log_a = kNegInf;
  const double lgamma_alpha = std::lgamma(alpha + 1.0);
  for (int k = 0; k <= alpha; ++k) {
    const double log_binom =
        lgamma_alpha - std::lgamma(k + 1.0) - std::lgamma(alpha - k + 1.0);
    const double term = log_binom + k * std::log(q) +
                        (alpha - k) * std::log1p(-q) +
                        (static_cast<double>(k) * k - k) / (2 * sigma * sigma);
    log_a = LogAdd(log_a, term);
  }
  return log_a;
}

// log A_alpha for fractional alpha, splitting the integral at the point where
// the two mixture components cross and expanding each side in a generalized
// binomial series.
double LogAFractional(double q, double sigma, double alpha) {
  double log_a0 = kNegInf;
  double log_a1 = kNegInf;
  const double s2 = sigma * sigma;
  const double z0 = s2 * std::log(1.0 / q - 1.0) + 0.5;
  // Generalized binomial coefficient C(alpha, i), tracked as log|c| and sign.
  double log_abs_coef = 0.0;
  bool coef_positive = true;
  for (int i = 0;; ++i) {
    if (i > 0) {
      const double factor = (alpha - (i - 1)) / static_cast<double>(i);
      if (factor == 0.0) break;
      log_abs_coef += std::log(std::abs(factor));
      if (factor < 0) coef_positive = !coef_positive;
    }
    const double j = alpha - i;
    const double log_t0 =
        log_abs_coef + i * std::log(q) + j * std::log1p(-q);
    const double log_t1 =
        log_abs_coef + j * std::log(q) + i * std::log1p(-q);
    const double log_e0 =
        std::log(0.5) + LogErfc((i - z0) / (std::sqrt(2.0) * sigma));
    const double log_e1 =
        std::log(0.5) + LogErfc((z0 - j) / (std::sqrt(2.0) * sigma));
    const double log_s0 = log_t0 + (i * static_cast<double>(i) - i) / (2 * s2) +
                          log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2 * s2) + log_e1;
    if (coef_positive) {
      log_a0 = LogAdd(log_a0, log_s0);
      log_a1 = LogAdd(log_a1, log_s1);
    } else {
      log_a0 = LogSub(log_a0, log_s0);
      log_a1 = LogSub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0) break;
    if (i > 100000) break;
  }
  return LogAdd(log_a0, log_a1);
}

}  // namespace

void DpConfig::Validate() const {
  if (!(z >= 0.0)) throw ConfigError("z must be >= 0");
  if (!(z_b >= 0.0)) throw ConfigError("z_b must be >= 0");
  if (!(S0 > 0.0)) throw ConfigError("S0 must be > 0");
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw ConfigError("kappa must be in [0,1]");
  }
  if (!(eta_b > 0.0)) throw ConfigError("eta_b must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must be in (0,1)");
  }
}

ClipResult Clip(const ModelVector& v, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be > 0");
  const double norm = v.Norm();
  if (norm <= clip_norm) return {v, true};
  // Step the factor down until the rounded norm is within the threshold, so
  // clipping twice changes nothing.
  double factor = clip_norm / norm;
  ModelVector out = v * factor;
  while (out.Norm() > clip_norm) {
    factor = std::nextafter(factor, 0.0);
    out = v * factor;
  }
  return {std::move(out), false};
}

ModelVector GaussianNoiseVector(std::size_t dim, double stddev, Rng& rng) {
  if (!(stddev >= 0.0)) throw ConfigError("noise stddev must be >= 0");
  ModelVector out(dim);
  if (stddev == 0.0) return out;
  std::normal_distribution<double> normal(0.0, stddev);
  for (double& v : out) v = normal(rng);
  return out;
}

double UpdateClipNorm(double clip_norm, std::span<const bool> indicators,
                      const DpConfig& cfg, Rng& rng) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be > 0");
  if (indicators.empty()) throw UsageError("no clip indicators this round");
  const double n = static_cast<double>(indicators.size());
  const double within = static_cast<double>(
      std::count(indicators.begin(), indicators.end(), true));
  double fraction = within / n;
  if (cfg.z_b > 0.0) {
    std::normal_distribution<double> normal(0.0, cfg.z_b / n);
    fraction += normal(rng);
  }
  return clip_norm * std::exp(-cfg.eta_b * (fraction - cfg.kappa));
}

std::vector<double> DefaultRdpOrders() {
  std::vector<double> orders;
  for (int i = 5; i <= 254; ++i) orders.push_back(0.25 * i);
  for (double a : {64.0, 128.0, 256.0, 512.0}) orders.push_back(a);
  return orders;
}

double SubsampledGaussianRdp(double q, double z, double order) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q must be in [0,1]");
  if (!(order > 1.0)) throw ConfigError("RDP order must be > 1");
  if (!(z >= 0.0)) throw ConfigError("noise multiplier must be >= 0");
  if (z == 0.0) {
    throw InfinitePrivacyLossError(
        "noise multiplier 0 gives unbounded privacy loss");
  }
  if (q == 0.0) return 0.0;
  if (q == 1.0) return order / (2.0 * z * z);
  const double log_a = (order == std::floor(order))
                           ? LogAInteger(q, z, static_cast<int>(order))
                           : LogAFractional(q, z, order);
  return log_a / (order - 1.0);
}

PrivacyLedger::PrivacyLedger(std::vector<double> orders)
    : orders_(std::move(orders)), rdp_(orders_.size(), 0.0) {
  for (double a : orders_) {
    if (!(a > 1.0)) throw ConfigError("RDP orders must be > 1");
  }
}

void PrivacyLedger::Record(double q, double z) { Record(q, z, 1); }

void PrivacyLedger::Record(double q, double z, int rounds) {
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  std::vector<double> increments(orders_.size());
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    increments[i] = SubsampledGaussianRdp(q, z, orders_[i]);
  }
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    rdp_[i] += rounds * increments[i];
  }
  rounds_ += rounds;
}

EpsilonResult PrivacyLedger::EpsilonAtDelta(double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must be in (0,1)");
  }
  if (orders_.empty()) throw UsageError("privacy ledger has no orders");
  EpsilonResult best{std::numeric_limits<double>::infinity(), orders_[0]};
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const double eps = rdp_[i] + log_inv_delta / (orders_[i] - 1.0);
    if (eps < best.epsilon) best = {eps, orders_[i]};
  }
  return best;
}

PrivacyLedger AccountRound(PrivacyLedger ledger, double q, double z) {
  ledger.Record(q, z);
  return ledger;
}

double EpsilonFor(double z, double q, int rounds, double delta) {
  PrivacyLedger ledger;
  ledger.Record(q, z, rounds);
  return ledger.EpsilonAtDelta(delta).epsilon;
}

double SolveNoiseMultiplier(double target_epsilon, double delta, double q,
                            int rounds, double tolerance, double z_lo,
                            double z_hi) {
  if (!(target_epsilon > 0.0)) {
    throw ConfigError("target epsilon must be > 0");
  }
  if (!(z_lo > 0.0 && z_hi > z_lo)) throw ConfigError("invalid z bracket");
  // epsilon is nonincreasing in z: lo keeps eps > target, hi keeps eps <= target.
  double eps_hi = EpsilonFor(z_hi, q, rounds, delta);
  if (eps_hi > target_epsilon) {
    throw RangeError("target epsilon " + std::to_string(target_epsilon) +
                     " needs z > " + std::to_string(z_hi));
  }
  const double eps_lo = EpsilonFor(z_lo, q, rounds, delta);
  // Any z in the bracket meets a loose target; report the smallest.
  if (eps_lo <= target_epsilon) return z_lo;
  double lo = z_lo;
  double hi = z_hi;
  for (int iter = 0; iter < 200 && target_epsilon - eps_hi >= tolerance;
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double eps_mid = EpsilonFor(mid, q, rounds, delta);
    if (eps_mid > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
      eps_hi = eps_mid;
    }
  }
  return hi;
}

}  // namespace feo2
