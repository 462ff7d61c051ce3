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

#ifndef FEO2_PERSONALIZATION_H_
#define FEO2_PERSONALIZATION_H_

#include "feo2/model.h"

namespace feo2 {

// Proximal personalization: each client minimizes
//   f_j(theta_j) + lambda / 2 * ||theta_j - theta_global||^2
// with lambda chosen by its privacy class.
struct DittoConfig {
  double lambda_p = 0.0;
  double lambda_np = 0.0;
  double eta_p = 1.0;

  double LambdaFor(bool is_private) const {
    return is_private ? lambda_p : lambda_np;
  }
  void Validate() const;

  friend bool operator==(const DittoConfig&, const DittoConfig&) = default;
};

// theta_j - eta_p * (grad f_j(theta_j) + lambda * (theta_j - theta_global)).
// Throws NumericError (round and client -1) on a non-finite result.
ModelVector DittoStep(const ModelVector& theta_j,
                      const ModelVector& theta_global,
                      const LocalDataset& data, LossKind kind, double lambda,
                      double eta_p);

// Minimizer of 1/2 ||theta - phi_hat||^2 + lambda/2 ||theta - theta_global||^2,
// i.e. (phi_hat + lambda * theta_global) / (1 + lambda).
ModelVector DittoClosedForm(const ModelVector& phi_hat,
                            const ModelVector& theta_global, double lambda);

}  // namespace feo2

#endif  // FEO2_PERSONALIZATION_H_
