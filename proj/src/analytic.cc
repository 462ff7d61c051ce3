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

#include "feo2/analytic.h"

#include <string>

#include "feo2/errors.h"

namespace feo2 {
namespace {

void CheckPositive(double value, const char* what) {
  if (!(value > 0.0)) {
    throw ConfigError(std::string(what) + " must be positive");
  }
}

}  // namespace

AnalyticParams AnalyticParams::FromVariances(int N, int N_p, double alpha2,
                                             double tau2, double gamma2,
                                             int d) {
  AnalyticParams p;
  p.N = N;
  p.N_p = N_p;
  p.n_s = 1;
  p.d = d;
  p.beta2 = alpha2;
  p.tau2 = tau2;
  p.gamma2 = gamma2;
  p.Validate();
  return p;
}

void AnalyticParams::Validate() const {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (N_p < 0 || N_p > N) throw ConfigError("N_p must be in [0, N]");
  if (n_s < 1) throw ConfigError("n_s must be >= 1");
  if (d < 1) throw ConfigError("d must be >= 1");
  if (!(beta2 >= 0.0)) throw ConfigError("beta2 must be >= 0");
  if (!(tau2 >= 0.0)) throw ConfigError("tau2 must be >= 0");
  if (!(gamma2 >= 0.0)) throw ConfigError("gamma2 must be >= 0");
}

double OptimalRatio(const AnalyticParams& p) {
  p.Validate();
  const double denom = p.sigma_c2() + p.N_p * p.gamma2;
  if (!(denom > 0.0)) {
    throw UndefinedRatioError("optimal ratio undefined: all variances zero");
  }
  return p.sigma_c2() / denom;
}

double ServerVarianceAtRatio(const AnalyticParams& p, double r) {
  p.Validate();
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("r must be in [0,1]");
  const double n_np = p.N_np();
  const double n_p = p.N_p;
  const double weight = n_np + r * n_p;
  CheckPositive(weight, "N_np + r N_p");
  const double numer =
      n_np * p.sigma_c2() + r * r * n_p * (p.sigma_c2() + n_p * p.gamma2);
  return numer / (weight * weight);
}

double ServerVarianceOpt(const AnalyticParams& p) {
  p.Validate();
  const double s = p.sigma_c2();
  const double np_g = p.N_p * p.gamma2;
  const double denom = s + p.rho_np() * np_g;
  CheckPositive(denom, "sigma_c2 + rho_np N_p gamma2");
  return s * (s + np_g) / denom / p.N;
}

double ServerVarianceFedAvg(const AnalyticParams& p) {
  p.Validate();
  return (p.sigma_c2() + (1.0 - p.rho_np()) * p.N_p * p.gamma2) / p.N;
}

double ServerVarianceDpFedAvg(const AnalyticParams& p) {
  p.Validate();
  return (p.sigma_c2() + p.N_p * p.gamma2) / p.N;
}

double GapFedAvg(const AnalyticParams& p) {
  p.Validate();
  const double rho = p.rho_np();
  const double np_g = p.N_p * p.gamma2;
  const double denom = p.sigma_c2() + rho * np_g;
  CheckPositive(denom, "sigma_c2 + rho_np N_p gamma2");
  return rho * (1.0 - rho) * np_g * np_g / (p.N * denom);
}

double GapDpFedAvg(const AnalyticParams& p) {
  p.Validate();
  const double rho = p.rho_np();
  const double np_g = p.N_p * p.gamma2;
  const double denom = p.sigma_c2() + rho * np_g;
  CheckPositive(denom, "sigma_c2 + rho_np N_p gamma2");
  return np_g * rho * (p.sigma_c2() + np_g) / (p.N * denom);
}

double LambdaStarNonPrivate(const AnalyticParams& p) {
  p.Validate();
  if (p.tau2 == 0.0) {
    throw UnboundedLambdaError("lambda*_np is unbounded when tau2 = 0");
  }
  return p.alpha2() / p.tau2;
}

double LambdaStarPrivate(const AnalyticParams& p) {
  p.Validate();
  // Closed form in upsilon2 / Gamma2, multiplied through by alpha2^2 so that
  // the alpha2 -> 0 and tau2 -> 0 corners stay finite.
  const double a2 = p.alpha2();
  const double t2 = p.tau2;
  const double g = p.N_p * p.gamma2;
  const double n = p.N;
  const double n_np = p.N_np();
  const double numer = a2 * a2 * n + a2 * t2 * n + a2 * g * n_np;
  const double denom = t2 * (t2 + a2) * n + t2 * g * (n_np + 1.0) + a2 * g;
  if (denom == 0.0) {
    throw UnboundedLambdaError("lambda*_p is unbounded for these parameters");
  }
  return numer / denom;
}

LambdaStarTerms LambdaStarGeneral(const AnalyticParams& p, bool is_private,
                                  double r) {
  p.Validate();
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("r must be in (0,1]");
  const double sc = p.sigma_c2();
  const double sp = p.sigma_p2();
  const double t2 = p.tau2;
  const double own = is_private ? r : 1.0;
  const double n = is_private ? p.N_p - 1.0 : p.N_p;
  const double m = is_private ? p.N_np() : p.N_np() - 1.0;
  if (n < 0.0 || m < 0.0) {
    throw ConfigError("client class is empty in these parameters");
  }
  const double w = p.N_np() + p.N_p * r;
  const double mix = n * sc + m * sp;
  const double spread = n * sc + (m + 1.0) * sp;

  auto ratio = [](double numer, double denom) {
    if (denom == 0.0) {
      throw UnboundedLambdaError("lambda* denominator vanishes");
    }
    return numer / denom;
  };
  LambdaStarTerms out;
  out.lambda1 = ratio(w * (n * sc * sc + m * sc * sp - t2 * mix),
                      w * (sc * sp + t2 * mix) - own * sc * spread);
  out.lambda2 = ratio(w * (sc - t2) * sp, sc * spread - w * (sc - t2) * sp);
  out.lambda3 = ratio(w * (sc - t2), r * spread - w * (sc - t2));
  return out;
}

ModelVector BayesGlobalOracle(std::span<const VarianceWeightedUpdate> updates) {
  if (updates.empty()) throw ConfigError("no updates to combine");
  ModelVector sum(updates.front().value.size());
  double precision = 0.0;
  for (const auto& u : updates) {
    CheckPositive(u.variance, "update variance");
    sum.AddScaled(u.value, 1.0 / u.variance);
    precision += 1.0 / u.variance;
  }
  return sum *= 1.0 / precision;
}

ModelVector BayesLocalOracle(const ModelVector& phi_hat_j,
                             std::span<const ClassedUpdate> others,
                             const AnalyticParams& p) {
  p.Validate();
  const double sc = p.sigma_c2();
  const double sp = p.sigma_p2();
  const double t2 = p.tau2;
  ModelVector sum_np(phi_hat_j.size());
  ModelVector sum_p(phi_hat_j.size());
  double n = 0.0;
  double m = 0.0;
  for (const auto& u : others) {
    if (u.is_private) {
      sum_p += u.value;
      n += 1.0;
    } else {
      sum_np += u.value;
      m += 1.0;
    }
  }
  const double spread = n * sc + (m + 1.0) * sp;
  CheckPositive(sc * spread, "sigma_c2 (n sigma_c2 + (m+1) sigma_p2)");
  const double own = (sc * sp + t2 * (n * sc + m * sp)) / (sc * spread);
  const double np_coef = (sc - t2) * sp / (sc * spread);
  const double p_coef = (sc - t2) / spread;
  ModelVector out = phi_hat_j * own;
  out.AddScaled(sum_np, np_coef);
  out.AddScaled(sum_p, p_coef);
  return out;
}

}  // namespace feo2
