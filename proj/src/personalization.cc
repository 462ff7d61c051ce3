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

#include "feo2/personalization.h"

#include "feo2/errors.h"

namespace feo2 {

void DittoConfig::Validate() const {
  if (!(lambda_p >= 0.0)) throw ConfigError("lambda_p must be >= 0");
  if (!(lambda_np >= 0.0)) throw ConfigError("lambda_np must be >= 0");
  if (!(eta_p > 0.0)) throw ConfigError("eta_p must be > 0");
}

ModelVector DittoStep(const ModelVector& theta_j,
                      const ModelVector& theta_global,
                      const LocalDataset& data, LossKind kind, double lambda,
                      double eta_p) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(eta_p > 0.0)) throw ConfigError("eta_p must be > 0");
  ModelVector step = LocalGradient(theta_j, data, kind);
  step.AddScaled(theta_j - theta_global, lambda);
  ModelVector out = theta_j;
  out.AddScaled(step, -eta_p);
  if (!out.AllFinite()) {
    throw NumericError("non-finite personalized model", -1, -1);
  }
  return out;
}

ModelVector DittoClosedForm(const ModelVector& phi_hat,
                            const ModelVector& theta_global, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  ModelVector out = phi_hat * (1.0 / (1.0 + lambda));
  out.AddScaled(theta_global, lambda / (1.0 + lambda));
  return out;
}

}  // namespace feo2
