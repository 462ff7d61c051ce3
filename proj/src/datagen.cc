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

#include "feo2/datagen.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "feo2/errors.h"
#include "feo2/rng.h"
#include "json.hpp"

namespace feo2 {
namespace {

using nlohmann::json;

double StdNormal(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

Rng PopulationStream(const PopulationSpec& spec, uint64_t client) {
  return MakeStream(spec.seed, 0, client, StreamPurpose::kPopulation);
}

ModelVector DrawTruth(const PopulationSpec& spec) {
  Rng rng = PopulationStream(spec, kServerStreamId);
  ModelVector phi(spec.dim);
  for (double& v : phi) v = StdNormal(rng);
  return phi;
}

ModelVector DrawClientTruth(const ModelVector& phi, double tau2, Rng& rng) {
  ModelVector out = phi;
  const double sd = std::sqrt(tau2);
  for (double& v : out) v += sd * StdNormal(rng);
  return out;
}

// Marks `count` clients from `candidates` as non-private.
void SelectNonPrivate(const PopulationSpec& spec,
                      std::vector<std::size_t> candidates,
                      std::vector<ClientRecord>& clients) {
  const int count = spec.num_nonprivate();
  if (static_cast<int>(candidates.size()) < count) {
    throw ConfigError("population.skew_label has " +
                      std::to_string(candidates.size()) +
                      " clients, fewer than the " + std::to_string(count) +
                      " non-private clients requested");
  }
  Rng rng = MakeStream(spec.seed, 1, kServerStreamId, StreamPurpose::kDataSplit);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (auto& c : clients) c.is_private = true;
  for (int i = 0; i < count; ++i) clients[candidates[i]].is_private = false;
}

std::vector<std::size_t> AllIndices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

uint32_t ReadBigEndian(std::span<const unsigned char> bytes,
                       std::size_t offset) {
  return (uint32_t{bytes[offset]} << 24) | (uint32_t{bytes[offset + 1]} << 16) |
         (uint32_t{bytes[offset + 2]} << 8) | uint32_t{bytes[offset + 3]};
}

std::vector<unsigned char> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

json DatasetToJson(const LocalDataset& data) {
  if (const auto* p = std::get_if<PointSamples>(&data)) {
    return {{"type", "point"}, {"observations", p->observations}};
  }
  if (const auto* r = std::get_if<RegressionSamples>(&data)) {
    return {{"type", "regression"},
            {"rows", r->rows},
            {"cols", r->cols},
            {"features", r->features},
            {"responses", r->responses}};
  }
  const auto& l = std::get<LabeledExamples>(data);
  return {{"type", "labeled"},
          {"num_features", l.num_features},
          {"num_classes", l.num_classes},
          {"features", l.features},
          {"labels", l.labels}};
}

LocalDataset DatasetFromJson(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "point") {
    return PointSamples{j.at("observations").get<std::vector<double>>()};
  }
  if (type == "regression") {
    RegressionSamples r;
    r.rows = j.at("rows").get<std::size_t>();
    r.cols = j.at("cols").get<std::size_t>();
    r.features = j.at("features").get<std::vector<double>>();
    r.responses = j.at("responses").get<std::vector<double>>();
    return r;
  }
  if (type == "labeled") {
    LabeledExamples l;
    l.num_features = j.at("num_features").get<std::size_t>();
    l.num_classes = j.at("num_classes").get<std::size_t>();
    l.features = j.at("features").get<std::vector<double>>();
    l.labels = j.at("labels").get<std::vector<int>>();
    return l;
  }
  throw ConfigError("unknown dataset type in snapshot: " + type);
}

}  // namespace

std::string_view PopulationKindName(PopulationKind kind) {
  switch (kind) {
    case PopulationKind::kPointEstimation:
      return "point_estimation";
    case PopulationKind::kLinearRegression:
      return "linear_regression";
    case PopulationKind::kLabelShard:
      return "label_shard";
  }
  return "unknown";
}

PopulationKind ParsePopulationKind(std::string_view name) {
  if (name == "point_estimation") return PopulationKind::kPointEstimation;
  if (name == "linear_regression") return PopulationKind::kLinearRegression;
  if (name == "label_shard") return PopulationKind::kLabelShard;
  throw ConfigError("population.kind must be one of point_estimation, "
                    "linear_regression, label_shard");
}

int PopulationSpec::num_nonprivate() const {
  return static_cast<int>(std::lround(rho_np * n_clients));
}

AnalyticParams PopulationSpec::analytic() const {
  AnalyticParams p;
  p.N = n_clients;
  p.N_p = n_clients - num_nonprivate();
  p.n_s = samples_per_client;
  p.d = dim;
  p.beta2 = beta2;
  p.tau2 = tau2;
  p.gamma2 = 0.0;
  return p;
}

void PopulationSpec::Validate() const {
  if (n_clients < 1) throw ConfigError("population.n_clients must be >= 1");
  if (samples_per_client < 1) {
    throw ConfigError("population.samples_per_client must be >= 1");
  }
  if (!(rho_np >= 0.0 && rho_np <= 1.0)) {
    throw ConfigError("population.rho_np must be in [0,1]");
  }
  if (!(beta2 >= 0.0)) throw ConfigError("population.beta2 must be >= 0");
  if (!(tau2 >= 0.0)) throw ConfigError("population.tau2 must be >= 0");
  if (dim < 1) throw ConfigError("population.dim must be >= 1");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("population.test_fraction must be in [0,1)");
  }
  switch (kind) {
    case PopulationKind::kPointEstimation:
      if (dim != 1) {
        throw ConfigError("population.dim must be 1 for point_estimation");
      }
      break;
    case PopulationKind::kLinearRegression:
      if (samples_per_client < dim) {
        throw ConfigError(
            "population.samples_per_client must be >= population.dim for an "
            "orthogonal design");
      }
      break;
    case PopulationKind::kLabelShard:
      if (pool.num_classes < 1) {
        throw ConfigError("population.pool.num_classes must be >= 1");
      }
      if (pool.num_features < 1) {
        throw ConfigError("population.pool.num_features must be >= 1");
      }
      if (pool.examples_per_class < 1) {
        throw ConfigError("population.pool.examples_per_class must be >= 1");
      }
      if (!(pool.separation >= 0.0)) {
        throw ConfigError("population.pool.separation must be >= 0");
      }
      if (pool.idx_images.empty() != pool.idx_labels.empty()) {
        throw ConfigError(
            "population.pool.idx_images and idx_labels must be set together");
      }
      break;
  }
  if (skew_label.has_value()) {
    if (kind != PopulationKind::kLabelShard) {
      throw ConfigError("population.skew_label requires kind label_shard");
    }
    if (*skew_label < 0 || *skew_label >= pool.num_classes) {
      throw ConfigError("population.skew_label must be a valid label");
    }
  }
}

std::size_t Population::model_dimension() const {
  if (clients.empty()) throw ConfigError("population has no clients");
  return ModelDimension(clients.front().train);
}

int Population::num_private() const {
  return static_cast<int>(std::count_if(
      clients.begin(), clients.end(),
      [](const ClientRecord& c) { return c.is_private; }));
}

GeneratedPopulation GenPointPopulation(const PopulationSpec& spec) {
  if (spec.kind != PopulationKind::kPointEstimation) {
    throw ConfigError("population.kind must be point_estimation");
  }
  spec.Validate();
  GeneratedPopulation out;
  PopulationTruth truth;
  truth.phi = DrawTruth(spec);
  const double sd = std::sqrt(spec.beta2);
  for (int j = 0; j < spec.n_clients; ++j) {
    Rng rng = PopulationStream(spec, j);
    ModelVector phi_j = DrawClientTruth(truth.phi, spec.tau2, rng);
    PointSamples samples;
    samples.observations.resize(spec.samples_per_client);
    for (double& x : samples.observations) x = phi_j[0] + sd * StdNormal(rng);
    ClientRecord c;
    c.id = j;
    c.train = std::move(samples);
    out.population.clients.push_back(std::move(c));
    truth.client_phi.push_back(std::move(phi_j));
  }
  SelectNonPrivate(spec, AllIndices(spec.n_clients), out.population.clients);
  out.truth = std::move(truth);
  return out;
}

GeneratedPopulation GenRegressionPopulation(const PopulationSpec& spec) {
  if (spec.kind != PopulationKind::kLinearRegression) {
    throw ConfigError("population.kind must be linear_regression");
  }
  spec.Validate();
  const int n = spec.samples_per_client;
  const int d = spec.dim;
  GeneratedPopulation out;
  PopulationTruth truth;
  truth.phi = DrawTruth(spec);
  const double sd = std::sqrt(spec.beta2);
  const double scale = std::sqrt(static_cast<double>(n));
  for (int j = 0; j < spec.n_clients; ++j) {
    Rng rng = PopulationStream(spec, j);
    ModelVector phi_j = DrawClientTruth(truth.phi, spec.tau2, rng);
    Eigen::MatrixXd g(n, d);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < d; ++c) g(r, c) = StdNormal(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
    RegressionSamples samples;
    samples.rows = n;
    samples.cols = d;
    samples.features.resize(static_cast<std::size_t>(n) * d);
    samples.responses.resize(n);
    for (int r = 0; r < n; ++r) {
      double fitted = 0.0;
      for (int c = 0; c < d; ++c) {
        const double f = scale * q(r, c);
        samples.features[static_cast<std::size_t>(r) * d + c] = f;
        fitted += f * phi_j[c];
      }
      samples.responses[r] = fitted + sd * StdNormal(rng);
    }
    ClientRecord c;
    c.id = j;
    c.train = std::move(samples);
    out.population.clients.push_back(std::move(c));
    truth.client_phi.push_back(std::move(phi_j));
  }
  SelectNonPrivate(spec, AllIndices(spec.n_clients), out.population.clients);
  out.truth = std::move(truth);
  return out;
}

Population GenLabelShardPopulation(const PopulationSpec& spec,
                                   const LabeledExamples& pool) {
  if (spec.kind != PopulationKind::kLabelShard) {
    throw ConfigError("population.kind must be label_shard");
  }
  spec.Validate();
  const int num_classes = static_cast<int>(pool.num_classes);
  if (num_classes < 1 || pool.num_features < 1) {
    throw ConfigError("label pool is empty");
  }
  std::vector<std::vector<std::size_t>> by_label(num_classes);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const int label = pool.labels[i];
    if (label < 0 || label >= num_classes) {
      throw ConfigError("label pool has a label outside [0, num_classes)");
    }
    by_label[label].push_back(i);
  }

  // Balanced label multiset in a seeded order.
  std::vector<int> client_label(spec.n_clients);
  for (int j = 0; j < spec.n_clients; ++j) client_label[j] = j % num_classes;
  Rng label_rng =
      MakeStream(spec.seed, 0, kServerStreamId, StreamPurpose::kDataSplit);
  std::shuffle(client_label.begin(), client_label.end(), label_rng);
  for (int j = 0; j < spec.n_clients; ++j) {
    const auto have = by_label[client_label[j]].size();
    if (have < static_cast<std::size_t>(spec.samples_per_client)) {
      throw ConfigError("label pool has " + std::to_string(have) +
                        " examples of label " +
                        std::to_string(client_label[j]) + ", fewer than " +
                        "population.samples_per_client");
    }
  }

  const int n = spec.samples_per_client;
  const int n_test = static_cast<int>(std::lround(spec.test_fraction * n));
  if (n_test >= n) {
    throw ConfigError("population.test_fraction leaves no training samples");
  }
  Population out;
  for (int j = 0; j < spec.n_clients; ++j) {
    Rng rng = PopulationStream(spec, j);
    std::vector<std::size_t> idx = by_label[client_label[j]];
    // Partial Fisher-Yates: the first n entries are a uniform draw without
    // replacement.
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    const std::span<const std::size_t> chosen(idx.data(), n);
    ClientRecord c;
    c.id = j;
    c.train = SelectSamples(pool, chosen.subspan(0, n - n_test));
    if (n_test > 0) c.test = SelectSamples(pool, chosen.subspan(n - n_test));
    out.clients.push_back(std::move(c));
  }

  std::vector<std::size_t> candidates;
  if (spec.skew_label.has_value()) {
    for (int j = 0; j < spec.n_clients; ++j) {
      if (client_label[j] == *spec.skew_label) candidates.push_back(j);
    }
  } else {
    candidates = AllIndices(spec.n_clients);
  }
  SelectNonPrivate(spec, std::move(candidates), out.clients);
  return out;
}

LabeledExamples GenSyntheticPool(const PoolSpec& spec, uint64_t seed) {
  if (spec.num_classes < 1 || spec.num_features < 1 ||
      spec.examples_per_class < 1) {
    throw ConfigError("synthetic pool dimensions must be positive");
  }
  Rng rng = MakeStream(seed, 2, kServerStreamId, StreamPurpose::kPopulation);
  const std::size_t f = spec.num_features;
  std::vector<double> centers(spec.num_classes * f);
  for (double& c : centers) c = spec.separation * StdNormal(rng);
  LabeledExamples pool;
  pool.num_features = f;
  pool.num_classes = spec.num_classes;
  pool.features.reserve(spec.num_classes * spec.examples_per_class * f);
  for (int k = 0; k < spec.num_classes; ++k) {
    for (int i = 0; i < spec.examples_per_class; ++i) {
      for (std::size_t c = 0; c < f; ++c) {
        pool.features.push_back(centers[k * f + c] + StdNormal(rng));
      }
      pool.labels.push_back(k);
    }
  }
  return pool;
}

GeneratedPopulation GeneratePopulation(const PopulationSpec& spec) {
  switch (spec.kind) {
    case PopulationKind::kPointEstimation:
      return GenPointPopulation(spec);
    case PopulationKind::kLinearRegression:
      return GenRegressionPopulation(spec);
    case PopulationKind::kLabelShard: {
      spec.Validate();
      const LabeledExamples pool =
          spec.pool.from_idx()
              ? LoadIdx(spec.pool.idx_images, spec.pool.idx_labels)
              : GenSyntheticPool(spec.pool, spec.seed);
      return {GenLabelShardPopulation(spec, pool), std::nullopt};
    }
  }
  throw ConfigError("unknown population kind");
}

LabeledExamples ParseIdx(std::span<const unsigned char> images,
                         std::span<const unsigned char> labels) {
  if (images.size() < 16) throw ParseError("truncated IDX image header",
                                           images.size());
  if (ReadBigEndian(images, 0) != 0x00000803) {
    throw ParseError("bad IDX image magic", 0);
  }
  const std::size_t count = ReadBigEndian(images, 4);
  const std::size_t rows = ReadBigEndian(images, 8);
  const std::size_t cols = ReadBigEndian(images, 12);
  const std::size_t pixels = rows * cols;
  if (images.size() - 16 < count * pixels) {
    throw ParseError("truncated IDX image data", images.size());
  }
  if (labels.size() < 8) throw ParseError("truncated IDX label header",
                                          labels.size());
  if (ReadBigEndian(labels, 0) != 0x00000801) {
    throw ParseError("bad IDX label magic", 0);
  }
  if (ReadBigEndian(labels, 4) != count) {
    throw ParseError("IDX label count does not match image count", 4);
  }
  if (labels.size() - 8 < count) {
    throw ParseError("truncated IDX label data", labels.size());
  }
  LabeledExamples out;
  out.num_features = pixels;
  out.num_classes = 10;
  out.features.resize(count * pixels);
  out.labels.resize(count);
  for (std::size_t i = 0; i < count * pixels; ++i) {
    out.features[i] = images[16 + i] / 255.0;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const int label = labels[8 + i];
    if (label > 9) throw ParseError("IDX label outside [0, 9]", 8 + i);
    out.labels[i] = label;
  }
  return out;
}

LabeledExamples LoadIdx(const std::string& images_path,
                        const std::string& labels_path) {
  const auto images = ReadFile(images_path);
  const auto labels = ReadFile(labels_path);
  return ParseIdx(images, labels);
}

void SavePopulationSnapshot(const Population& population,
                            const std::string& path) {
  json clients = json::array();
  for (const auto& c : population.clients) {
    json jc = {{"id", c.id},
               {"is_private", c.is_private},
               {"train", DatasetToJson(c.train)}};
    if (c.test.has_value()) jc["test"] = DatasetToJson(*c.test);
    clients.push_back(std::move(jc));
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << json{{"clients", clients}}.dump() << '\n';
}

Population LoadPopulationSnapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  Population out;
  for (const auto& jc : j.at("clients")) {
    ClientRecord c;
    c.id = jc.at("id").get<int64_t>();
    c.is_private = jc.at("is_private").get<bool>();
    c.train = DatasetFromJson(jc.at("train"));
    if (jc.contains("test")) c.test = DatasetFromJson(jc.at("test"));
    out.clients.push_back(std::move(c));
  }
  return out;
}

}  // namespace feo2
