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

"""Smoke tests for the Python bindings."""

import json
import math

import pytest

import feo2

MINIMAL = """
seed: 3
rounds: 4
cohort_fraction: 0.5
population:
  kind: point_estimation
  n_clients: 20
  rho_np: 0.25
  tau2: 0.5
feo2:
  r: 0.5
"""


def fig1_params():
    return feo2.AnalyticParams.from_variances(100, 95, 1.0, 0.0, 0.01)


def test_analytic_values():
    p = fig1_params()
    assert feo2.optimal_ratio(p) == pytest.approx(1 / 1.95, abs=1e-15)
    assert feo2.server_variance_opt(p) == pytest.approx(
        1.95 / (100 * 1.0475), abs=1e-15)
    assert feo2.server_variance_fedavg(p) == pytest.approx(0.019025, abs=1e-15)
    gap = feo2.server_variance_fedavg(p) - feo2.server_variance_opt(p)
    assert feo2.gap_fedavg(p) == pytest.approx(gap, abs=1e-12)


def test_lambda_star():
    p = feo2.AnalyticParams.from_variances(100, 95, 1.0, 2.0, 0.04)
    assert feo2.lambda_star_p(p) == pytest.approx(319 / 649.4, abs=1e-12)
    l1, l2, l3, mean = feo2.lambda_star_general(p, True, feo2.optimal_ratio(p))
    assert mean == pytest.approx(feo2.lambda_star_p(p), abs=1e-9)
    assert (l1 + l2 + l3) / 3 == pytest.approx(mean)
    no_spread = feo2.AnalyticParams.from_variances(10, 5, 1.0, 0.0, 0.0)
    with pytest.raises(feo2.UnboundedLambdaError):
        feo2.lambda_star_np(no_spread)


def test_error_hierarchy():
    assert issubclass(feo2.ConfigError, feo2.Error)
    with pytest.raises(feo2.UndefinedRatioError):
        feo2.optimal_ratio(feo2.AnalyticParams.from_variances(5, 2, 0, 0, 0))
    with pytest.raises(feo2.InfinitePrivacyLossError):
        feo2.subsampled_gaussian_rdp(0.1, 0.0, 2.0)
    with pytest.raises(feo2.RangeError):
        feo2.solve_noise_multiplier(1e-9, 1e-5, 1.0, 1000)


def test_privacy_helpers():
    assert feo2.subsampled_gaussian_rdp(1.0, 2.0, 4.0) == pytest.approx(0.5)
    z = feo2.solve_noise_multiplier(3.6, 1e-4, 0.05, 500)
    assert abs(feo2.epsilon_for(z, 0.05, 500, 1e-4) - 3.6) < 1e-3
    clipped, within = feo2.clip([3.0, 4.0], 2.5)
    assert not within
    assert math.hypot(*clipped) == pytest.approx(2.5)
    assert feo2.feo2_combine([0.0], [2.0], 1, 1, 1.0) == [1.0]
    assert feo2.feo2_combine(None, None, 0, 0, 1.0) is None
    assert feo2.ditto_closed_form([4.0], [0.0], 1.0) == [2.0]


def test_monte_carlo_bindings():
    p = fig1_params()
    r_star = feo2.optimal_ratio(p)
    mc = feo2.monte_carlo_server_variance(p, [r_star, 1.0], 20000, 1)
    assert len(mc) == 2
    assert mc[0] == pytest.approx(feo2.server_variance_opt(p), rel=0.05)
    losses = feo2.lambda_sweep(p, True, [0.0, 0.5], 1000, 2, r_star)
    assert len(losses) == 2


def test_config_round_trip_and_hash():
    resolved = json.loads(feo2.resolve_config(MINIMAL))
    assert resolved["feo2"]["local_epochs"] == 1
    assert resolved["privacy"]["kappa"] == 0.5
    assert feo2.resolve_config(json.dumps(resolved)) == json.dumps(
        resolved, separators=(",", ":"))
    assert feo2.config_hash(MINIMAL) == feo2.config_hash(json.dumps(resolved))
    assert feo2.config_hash(MINIMAL) != feo2.config_hash(
        MINIMAL.replace("r: 0.5", "r: 0.6"))
    with pytest.raises(feo2.ConfigError, match=r"r must be in \[0,1\]"):
        feo2.resolve_config(MINIMAL.replace("r: 0.5", "r: 1.5"))


def test_run_experiment_is_deterministic():
    a = feo2.run_experiment(MINIMAL)
    b = feo2.run_experiment(MINIMAL, workers=4)
    assert len(a["reports"]) == 4
    assert a["final_model"] == b["final_model"]
    assert [r["S"] for r in a["reports"]] == [r["S"] for r in b["reports"]]
    assert a["delta"] == 1e-5
    assert a["epsilon"] == a["reports"][-1]["epsilon"]
    first = a["reports"][0]
    assert first["N_p_t"] + first["N_np_t"] == 10
