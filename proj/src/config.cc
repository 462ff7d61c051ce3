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

#include "feo2/config.h"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "feo2/errors.h"

namespace feo2 {
namespace {

using nlohmann::json;

json YamlToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(YamlToJson(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) {
        out[kv.first.as<std::string>()] = YamlToJson(kv.second);
      }
      return out;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string& s = node.Scalar();
  // Quoted scalars stay strings.
  if (node.Tag() == "!") return s;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~") return nullptr;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s[0] != '-') {
    uint64_t u = 0;
    auto [ptr, ec] = std::from_chars(first, last, u);
    if (ec == std::errc() && ptr == last) return u;
  } else {
    int64_t i = 0;
    auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec == std::errc() && ptr == last) return i;
  }
  double d = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, d);
  if (ec == std::errc() && ptr == last) return d;
  return s;
}

// Typed, key-checked view of one config section.
class Section {
 public:
  Section(const json* node, std::string prefix,
          std::initializer_list<std::string_view> allowed)
      : node_(node), prefix_(std::move(prefix)) {
    if (node_ == nullptr || node_->is_null()) {
      node_ = nullptr;
      return;
    }
    if (!node_->is_object()) {
      throw ConfigError(Name("") + " must be a mapping");
    }
    for (const auto& [key, value] : node_->items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError("unknown key " + Name(key));
      }
    }
  }

  bool present() const { return node_ != nullptr; }

  const json* Find(std::string_view key) const {
    if (node_ == nullptr) return nullptr;
    auto it = node_->find(key);
    if (it == node_->end() || it->is_null()) return nullptr;
    return &*it;
  }

  double Real(std::string_view key, double fallback) const {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError(Name(key) + " must be a number");
    return v->get<double>();
  }

  int64_t Integer(std::string_view key, int64_t fallback) const {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) {
      throw ConfigError(Name(key) + " must be an integer");
    }
    return v->get<int64_t>();
  }

  int Int(std::string_view key, int fallback) const {
    const int64_t v = Integer(key, fallback);
    if (v < INT32_MIN || v > INT32_MAX) {
      throw ConfigError(Name(key) + " is out of range");
    }
    return static_cast<int>(v);
  }

  uint64_t Seed(std::string_view key, uint64_t fallback) const {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    if (v->is_number_unsigned()) return v->get<uint64_t>();
    if (v->is_number_integer() && v->get<int64_t>() >= 0) {
      return static_cast<uint64_t>(v->get<int64_t>());
    }
    throw ConfigError(Name(key) + " must be a non-negative integer");
  }

  std::string String(std::string_view key, std::string fallback) const {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(Name(key) + " must be a string");
    return v->get<std::string>();
  }

  std::string Name(std::string_view key) const {
    if (key.empty()) return prefix_.empty() ? "config" : prefix_;
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

 private:
  const json* node_;
  std::string prefix_;
};

}  // namespace

json ParseConfigText(const std::string& text, bool is_json) {
  if (is_json) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
  }
  try {
    return YamlToJson(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
}

ExperimentConfig ParseConfig(const json& doc,
                             std::optional<uint64_t> seed_override) {
  if (!doc.is_object()) throw ConfigError("config must be a mapping");
  const Section top(&doc, "",
                    {"seed", "rounds", "cohort_fraction", "algorithm",
                     "population", "feo2", "privacy", "ditto"});
  ExperimentConfig cfg;
  cfg.seed = seed_override ? *seed_override : top.Seed("seed", 0);
  cfg.rounds = top.Int("rounds", cfg.rounds);
  cfg.cohort_fraction = top.Real("cohort_fraction", cfg.cohort_fraction);
  cfg.algorithm = ParseAlgorithm(top.String("algorithm", "feo2"));

  const Section pop(top.Find("population"), "population",
                    {"kind", "n_clients", "samples_per_client", "rho_np",
                     "skew_label", "seed", "beta2", "tau2", "dim",
                     "test_fraction", "pool"});
  if (!pop.present()) throw ConfigError("population section is required");
  PopulationSpec& ps = cfg.population;
  const json* kind = pop.Find("kind");
  if (kind == nullptr) throw ConfigError("population.kind is required");
  ps.kind = ParsePopulationKind(pop.String("kind", ""));
  ps.n_clients = pop.Int("n_clients", ps.n_clients);
  ps.samples_per_client = pop.Int("samples_per_client", ps.samples_per_client);
  ps.rho_np = pop.Real("rho_np", ps.rho_np);
  if (pop.Find("skew_label") != nullptr) {
    ps.skew_label = pop.Int("skew_label", 0);
  }
  // An explicit population seed survives --seed overrides.
  ps.seed = pop.Seed("seed", cfg.seed);
  ps.beta2 = pop.Real("beta2", ps.beta2);
  ps.tau2 = pop.Real("tau2", ps.tau2);
  ps.dim = pop.Int("dim", ps.dim);
  ps.test_fraction = pop.Real("test_fraction", ps.test_fraction);
  const Section pool(pop.Find("pool"), "population.pool",
                     {"idx_images", "idx_labels", "num_classes",
                      "num_features", "examples_per_class", "separation"});
  ps.pool.idx_images = pool.String("idx_images", "");
  ps.pool.idx_labels = pool.String("idx_labels", "");
  ps.pool.num_classes = pool.Int("num_classes", ps.pool.num_classes);
  ps.pool.num_features = pool.Int("num_features", ps.pool.num_features);
  ps.pool.examples_per_class =
      pool.Int("examples_per_class", ps.pool.examples_per_class);
  ps.pool.separation = pool.Real("separation", ps.pool.separation);

  const Section feo2(top.Find("feo2"), "feo2",
                     {"r", "learning_rate", "local_epochs", "batch_size"});
  cfg.feo2.r = feo2.Real("r", cfg.feo2.r);
  cfg.feo2.learning_rate = feo2.Real("learning_rate", cfg.feo2.learning_rate);
  cfg.feo2.local_epochs = feo2.Int("local_epochs", cfg.feo2.local_epochs);
  const int batch = feo2.Int("batch_size", 0);
  if (batch < 0) throw ConfigError("feo2.batch_size must be >= 0");
  cfg.feo2.batch_size = static_cast<std::size_t>(batch);

  const Section dp(top.Find("privacy"), "privacy",
                   {"z", "z_b", "S0", "kappa", "eta_b", "delta"});
  const double default_z = cfg.algorithm == Algorithm::kFedAvg ? 0.0 : 1.0;
  cfg.privacy.z = dp.Real("z", default_z);
  cfg.privacy.z_b = dp.Real("z_b", cfg.privacy.z_b);
  cfg.privacy.S0 = dp.Real("S0", cfg.privacy.S0);
  cfg.privacy.kappa = dp.Real("kappa", cfg.privacy.kappa);
  cfg.privacy.eta_b = dp.Real("eta_b", cfg.privacy.eta_b);
  cfg.privacy.delta = dp.Real("delta", cfg.privacy.delta);

  const Section ditto(top.Find("ditto"), "ditto",
                      {"lambda_p", "lambda_np", "eta_p"});
  if (ditto.present()) {
    DittoConfig d;
    d.lambda_p = ditto.Real("lambda_p", d.lambda_p);
    d.lambda_np = ditto.Real("lambda_np", d.lambda_np);
    d.eta_p = ditto.Real("eta_p", d.eta_p);
    cfg.ditto = d;
  }

  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfigFile(const std::string& path,
                                std::optional<uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream text;
  text << in.rdbuf();
  const bool is_json =
      path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return ParseConfig(ParseConfigText(text.str(), is_json), seed_override);
}

json ConfigToJson(const ExperimentConfig& cfg) {
  const PopulationSpec& ps = cfg.population;
  json pop = {
      {"kind", PopulationKindName(ps.kind)},
      {"n_clients", ps.n_clients},
      {"samples_per_client", ps.samples_per_client},
      {"rho_np", ps.rho_np},
      {"skew_label", nullptr},
      {"seed", ps.seed},
      {"beta2", ps.beta2},
      {"tau2", ps.tau2},
      {"dim", ps.dim},
      {"test_fraction", ps.test_fraction},
      {"pool",
       {{"idx_images", ps.pool.idx_images},
        {"idx_labels", ps.pool.idx_labels},
        {"num_classes", ps.pool.num_classes},
        {"num_features", ps.pool.num_features},
        {"examples_per_class", ps.pool.examples_per_class},
        {"separation", ps.pool.separation}}},
  };
  if (ps.skew_label) pop["skew_label"] = *ps.skew_label;
  json out = {
      {"seed", cfg.seed},
      {"rounds", cfg.rounds},
      {"cohort_fraction", cfg.cohort_fraction},
      {"algorithm", AlgorithmName(cfg.algorithm)},
      {"population", pop},
      {"feo2",
       {{"r", cfg.feo2.r},
        {"learning_rate", cfg.feo2.learning_rate},
        {"local_epochs", cfg.feo2.local_epochs},
        {"batch_size", cfg.feo2.batch_size}}},
      {"privacy",
       {{"z", cfg.privacy.z},
        {"z_b", cfg.privacy.z_b},
        {"S0", cfg.privacy.S0},
        {"kappa", cfg.privacy.kappa},
        {"eta_b", cfg.privacy.eta_b},
        {"delta", cfg.privacy.delta}}},
      {"ditto", nullptr},
  };
  if (cfg.ditto) {
    out["ditto"] = {{"lambda_p", cfg.ditto->lambda_p},
                    {"lambda_np", cfg.ditto->lambda_np},
                    {"eta_p", cfg.ditto->eta_p}};
  }
  return out;
}

std::string GitBlobSha1(const std::string& content) {
  const std::string blob =
      "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(),
                 nullptr) != 1) {
    throw Error("SHA-1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

std::string ConfigHash(const ExperimentConfig& cfg) {
  return GitBlobSha1(ConfigToJson(cfg).dump());
}

}  // namespace feo2
