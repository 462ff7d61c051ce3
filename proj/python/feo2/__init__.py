#
# Copyright 2026 The FeO2 Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Python bindings for the FeO2 simulator."""

from feo2._core import (
    AnalyticParams,
    ConfigError,
    Error,
    InfinitePrivacyLossError,
    RangeError,
    UnboundedLambdaError,
    UndefinedRatioError,
    clip,
    config_hash,
    ditto_closed_form,
    epsilon_for,
    feo2_combine,
    gap_dpfedavg,
    gap_fedavg,
    lambda_star_general,
    lambda_star_np,
    lambda_star_p,
    lambda_sweep,
    monte_carlo_server_variance,
    optimal_ratio,
    resolve_config,
    run_experiment,
    server_variance_at_ratio,
    server_variance_dpfedavg,
    server_variance_fedavg,
    server_variance_opt,
    solve_noise_multiplier,
    subsampled_gaussian_rdp,
)

__all__ = [name for name in dir() if not name.startswith("_")]
