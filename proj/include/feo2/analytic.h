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

#ifndef FEO2_ANALYTIC_H_
#define FEO2_ANALYTIC_H_

#include <span>

#include "feo2/model.h"

namespace feo2 {

// Scalars of the Gaussian federated estimation model. Clients observe
// n_s samples x = phi_j + v, v ~ N(0, beta2); phi_j = phi + p_j with
// p_j ~ N(0, tau2). Private clients' updates carry extra N(0, N_p * gamma2)
// noise so that the private mean has noise variance gamma2.
struct AnalyticParams {
  int N = 1;
  int N_p = 0;
  int n_s = 1;
  int d = 1;
  double beta2 = 1.0;
  double tau2 = 0.0;
  double gamma2 = 0.0;

  // Builds params with n_s = 1 and beta2 = alpha2.
  static AnalyticParams FromVariances(int N, int N_p, double alpha2,
                                      double tau2, double gamma2, int d = 1);

  int N_np() const { return N - N_p; }
  double rho_np() const { return static_cast<double>(N_np()) / N; }
  double alpha2() const { return beta2 / n_s; }
  double sigma_c2() const { return alpha2() + tau2; }
  double sigma_p2() const { return sigma_c2() + N_p * gamma2; }
  // Normalized relatedness tau2 / alpha2.
  double upsilon2() const { return tau2 / alpha2(); }
  // Normalized privacy noise N_p gamma2 / alpha2.
  double big_gamma2() const { return N_p * gamma2 / alpha2(); }

  // Throws ConfigError on out-of-range primitives.
  void Validate() const;

  friend bool operator==(const AnalyticParams&,
                         const AnalyticParams&) = default;
};

// sigma_c2 / (sigma_c2 + N_p gamma2), the Bayes-optimal private weight ratio.
double OptimalRatio(const AnalyticParams& p);

// Variance of the r-weighted two-group estimate of phi.
double ServerVarianceAtRatio(const AnalyticParams& p, double r);

double ServerVarianceOpt(const AnalyticParams& p);
// r = 1: count-weighted average of both groups.
double ServerVarianceFedAvg(const AnalyticParams& p);
// Every client noised at the private level, averaged uniformly.
double ServerVarianceDpFedAvg(const AnalyticParams& p);

// Closed-form gaps to the optimum; both are >= 0.
double GapFedAvg(const AnalyticParams& p);
double GapDpFedAvg(const AnalyticParams& p);

// 1 / upsilon2. Throws UnboundedLambdaError when tau2 == 0.
double LambdaStarNonPrivate(const AnalyticParams& p);
// Optimal Ditto lambda for private clients. Throws UnboundedLambdaError when
// the denominator vanishes.
double LambdaStarPrivate(const AnalyticParams& p);

// The three coefficient-matching lambdas for an arbitrary ratio r; the
// optimum reported is their mean. At r = OptimalRatio(p) all three coincide
// with the class closed form.
struct LambdaStarTerms {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;

  double value() const { return (lambda1 + lambda2 + lambda3) / 3.0; }
};
LambdaStarTerms LambdaStarGeneral(const AnalyticParams& p, bool is_private,
                                  double r);

// Replaces an unbounded lambda by this cap in simulations.
inline constexpr double kLambdaCap = 1e6;

struct VarianceWeightedUpdate {
  ModelVector value;
  double variance = 1.0;
};

// Posterior mean of phi under a flat prior given independent Gaussian
// observations with isotropic covariances: the inverse-variance weighted mean.
ModelVector BayesGlobalOracle(std::span<const VarianceWeightedUpdate> updates);

struct ClassedUpdate {
  ModelVector value;
  bool is_private = false;
};

// Posterior mean of phi_j given the client's own estimate phi_hat_j and every
// other client's update. n and m are the private and non-private counts in
// `others`.
ModelVector BayesLocalOracle(const ModelVector& phi_hat_j,
                             std::span<const ClassedUpdate> others,
                             const AnalyticParams& p);

}  // namespace feo2

#endif  // FEO2_ANALYTIC_H_
