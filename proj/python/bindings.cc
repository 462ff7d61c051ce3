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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "feo2/aggregation.h"
#include "feo2/analytic.h"
#include "feo2/config.h"
#include "feo2/errors.h"
#include "feo2/personalization.h"
#include "feo2/privacy.h"
#include "feo2/simulate.h"

namespace py = pybind11;

namespace {

using Vec = std::vector<double>;

std::optional<feo2::ModelVector> ToModel(const std::optional<Vec>& v) {
  if (!v) return std::nullopt;
  return feo2::ModelVector(*v);
}

py::dict ReportToDict(const feo2::RoundReport& r) {
  py::dict d;
  d["round"] = r.round;
  d["S"] = r.clip_norm;
  d["N_p_t"] = r.num_private;
  d["N_np_t"] = r.num_nonprivate;
  d["acc_g"] = r.acc_g;
  d["acc_g_p"] = r.acc_g_p;
  d["acc_g_np"] = r.acc_g_np;
  d["acc_l_p"] = r.acc_l_p;
  d["acc_l_np"] = r.acc_l_np;
  d["delta_g"] = r.delta_g;
  d["delta_l"] = r.delta_l;
  d["epsilon"] = r.epsilon;
  d["skipped"] = r.skipped;
  return d;
}

feo2::ExperimentConfig ConfigFromText(const std::string& text) {
  return feo2::ParseConfig(feo2::ParseConfigText(text, false));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FeO2 simulator core.";

  auto base = py::register_exception<feo2::Error>(m, "Error");
  py::register_exception<feo2::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<feo2::UnboundedLambdaError>(m, "UnboundedLambdaError",
                                                     base.ptr());
  py::register_exception<feo2::UndefinedRatioError>(m, "UndefinedRatioError",
                                                    base.ptr());
  py::register_exception<feo2::InfinitePrivacyLossError>(
      m, "InfinitePrivacyLossError", base.ptr());
  py::register_exception<feo2::RangeError>(m, "RangeError", base.ptr());

  py::class_<feo2::AnalyticParams>(m, "AnalyticParams")
      .def(py::init<>())
      .def_static("from_variances", &feo2::AnalyticParams::FromVariances,
                  py::arg("N"), py::arg("N_p"), py::arg("alpha2"),
                  py::arg("tau2"), py::arg("gamma2"), py::arg("d") = 1)
      .def_readwrite("N", &feo2::AnalyticParams::N)
      .def_readwrite("N_p", &feo2::AnalyticParams::N_p)
      .def_readwrite("n_s", &feo2::AnalyticParams::n_s)
      .def_readwrite("d", &feo2::AnalyticParams::d)
      .def_readwrite("beta2", &feo2::AnalyticParams::beta2)
      .def_readwrite("tau2", &feo2::AnalyticParams::tau2)
      .def_readwrite("gamma2", &feo2::AnalyticParams::gamma2)
      .def_property_readonly("N_np", &feo2::AnalyticParams::N_np)
      .def_property_readonly("rho_np", &feo2::AnalyticParams::rho_np)
      .def_property_readonly("alpha2", &feo2::AnalyticParams::alpha2)
      .def_property_readonly("sigma_c2", &feo2::AnalyticParams::sigma_c2)
      .def_property_readonly("sigma_p2", &feo2::AnalyticParams::sigma_p2);

  m.def("optimal_ratio", &feo2::OptimalRatio);
  m.def("server_variance_at_ratio", &feo2::ServerVarianceAtRatio);
  m.def("server_variance_opt", &feo2::ServerVarianceOpt);
  m.def("server_variance_fedavg", &feo2::ServerVarianceFedAvg);
  m.def("server_variance_dpfedavg", &feo2::ServerVarianceDpFedAvg);
  m.def("gap_fedavg", &feo2::GapFedAvg);
  m.def("gap_dpfedavg", &feo2::GapDpFedAvg);
  m.def("lambda_star_np", &feo2::LambdaStarNonPrivate);
  m.def("lambda_star_p", &feo2::LambdaStarPrivate);
  m.def(
      "lambda_star_general",
      [](const feo2::AnalyticParams& p, bool is_private, double r) {
        const auto t = feo2::LambdaStarGeneral(p, is_private, r);
        return py::make_tuple(t.lambda1, t.lambda2, t.lambda3, t.value());
      },
      py::arg("p"), py::arg("is_private"), py::arg("r"));

  m.def("subsampled_gaussian_rdp", &feo2::SubsampledGaussianRdp,
        py::arg("q"), py::arg("z"), py::arg("order"));
  m.def("epsilon_for", &feo2::EpsilonFor, py::arg("z"), py::arg("q"),
        py::arg("rounds"), py::arg("delta"));
  m.def("solve_noise_multiplier", &feo2::SolveNoiseMultiplier,
        py::arg("target_epsilon"), py::arg("delta"), py::arg("q"),
        py::arg("rounds"), py::arg("tolerance") = 1e-3, py::arg("z_lo") = 0.1,
        py::arg("z_hi") = 100.0);

  m.def(
      "clip",
      [](const Vec& v, double s) {
        auto res = feo2::Clip(feo2::ModelVector(v), s);
        return py::make_tuple(res.clipped.values(), res.within_threshold);
      },
      py::arg("v"), py::arg("clip_norm"));
  m.def(
      "feo2_combine",
      [](const std::optional<Vec>& delta_np, const std::optional<Vec>& delta_p,
         int n_np, int n_p, double r) -> std::optional<Vec> {
        auto out = feo2::Feo2Combine(ToModel(delta_np), ToModel(delta_p), n_np,
                                     n_p, r);
        if (!out) return std::nullopt;
        return out->values();
      },
      py::arg("delta_np"), py::arg("delta_p"), py::arg("n_np"), py::arg("n_p"),
      py::arg("r"));
  m.def(
      "ditto_closed_form",
      [](const Vec& phi_hat, const Vec& global, double lambda) {
        return feo2::DittoClosedForm(feo2::ModelVector(phi_hat),
                                     feo2::ModelVector(global), lambda)
            .values();
      },
      py::arg("phi_hat"), py::arg("theta_global"), py::arg("lam"));

  m.def(
      "monte_carlo_server_variance",
      [](const feo2::AnalyticParams& p, const Vec& ratios, int trials,
         uint64_t seed) {
        py::gil_scoped_release release;
        return feo2::MonteCarloServerVariance(p, ratios, trials, seed);
      },
      py::arg("p"), py::arg("ratios"), py::arg("trials"), py::arg("seed"));
  m.def(
      "lambda_sweep",
      [](const feo2::AnalyticParams& p, bool focal_private, const Vec& lambdas,
         int trials, uint64_t seed, double r) {
        std::vector<feo2::LambdaLoss> res;
        {
          py::gil_scoped_release release;
          res = feo2::LambdaSweep(p, focal_private, lambdas, trials, seed, r);
        }
        Vec losses;
        for (const auto& l : res) losses.push_back(l.loss);
        return losses;
      },
      py::arg("p"), py::arg("focal_private"), py::arg("lambdas"),
      py::arg("trials"), py::arg("seed"), py::arg("r"));

  m.def(
      "resolve_config",
      [](const std::string& text) {
        return feo2::ConfigToJson(ConfigFromText(text)).dump();
      },
      py::arg("config_text"),
      "Validates YAML/JSON config text and returns the resolved JSON.");
  m.def(
      "config_hash",
      [](const std::string& text) {
        return feo2::ConfigHash(ConfigFromText(text));
      },
      py::arg("config_text"));
  m.def(
      "run_experiment",
      [](const std::string& text, int workers) {
        const auto cfg = ConfigFromText(text);
        feo2::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = feo2::RunExperiment(cfg, {workers});
        }
        py::list reports;
        for (const auto& r : result.reports) reports.append(ReportToDict(r));
        py::dict out;
        out["reports"] = reports;
        out["epsilon"] = result.epsilon;
        out["delta"] = result.delta;
        out["final_model"] = result.final_model.values();
        return out;
      },
      py::arg("config_text"), py::arg("workers") = 1);
}
