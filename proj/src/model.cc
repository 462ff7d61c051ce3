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

#include "feo2/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "feo2/errors.h"

namespace feo2 {
namespace {

bool AnyNonZero(const std::vector<double>& values) {
  return std::any_of(values.begin(), values.end(),
                     [](double v) { return v != 0.0; });
}

void CheckSameSize(const ModelVector& a, const ModelVector& b) {
  if (a.size() != b.size()) {
    throw ConfigError("model dimension mismatch: " + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()));
  }
}

template <typename Expected>
const Expected& ExpectKind(const LocalDataset& data, LossKind kind) {
  const auto* typed = std::get_if<Expected>(&data);
  if (typed == nullptr) {
    throw ConfigError("dataset does not match loss kind " +
                      std::string(LossKindName(kind)));
  }
  return *typed;
}

void CheckDimension(const ModelVector& model, const LocalDataset& data) {
  const std::size_t expected = ModelDimension(data);
  if (model.size() != expected) {
    throw ConfigError("model has dimension " + std::to_string(model.size()) +
                      " but data requires " + std::to_string(expected));
  }
}

double Mean(const std::vector<double>& xs) {
  if (xs.empty()) throw ConfigError("dataset has no samples");
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

// Residuals F theta - x.
std::vector<double> Residuals(const ModelVector& theta,
                              const RegressionSamples& data) {
  std::vector<double> out(data.rows);
  for (std::size_t r = 0; r < data.rows; ++r) {
    double fitted = 0.0;
    for (std::size_t c = 0; c < data.cols; ++c) {
      fitted += data.feature(r, c) * theta[c];
    }
    out[r] = fitted - data.responses[r];
  }
  return out;
}

// Class logits W x + b for one example.
void Logits(const ModelVector& model, const LabeledExamples& data,
            std::size_t i, std::vector<double>& out) {
  const std::size_t f = data.num_features;
  const std::size_t k = data.num_classes;
  const auto x = data.row(i);
  out.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    double z = model[k * f + c];
    for (std::size_t j = 0; j < f; ++j) z += model[c * f + j] * x[j];
    out[c] = z;
  }
}

std::size_t LabelOf(const LabeledExamples& data, std::size_t i) {
  const int label = data.labels[i];
  if (label < 0 || static_cast<std::size_t>(label) >= data.num_classes) {
    throw ConfigError("label " + std::to_string(label) + " out of range");
  }
  return static_cast<std::size_t>(label);
}

// In-place softmax; returns log-sum-exp of the logits.
double SoftmaxInPlace(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return top + std::log(sum);
}

}  // namespace

double ModelVector::Norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  if (std::isfinite(sum) && (sum > 0.0 || !AnyNonZero(values_))) {
    return std::sqrt(sum);
  }
  // Squares overflowed or underflowed; rescale by the largest entry.
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  if (!std::isfinite(scale)) return scale;
  sum = 0.0;
  for (double v : values_) sum += (v / scale) * (v / scale);
  return scale * std::sqrt(sum);
}

bool ModelVector::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

ModelVector& ModelVector::operator+=(const ModelVector& other) {
  return AddScaled(other, 1.0);
}

ModelVector& ModelVector::operator-=(const ModelVector& other) {
  return AddScaled(other, -1.0);
}

ModelVector& ModelVector::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

ModelVector& ModelVector::AddScaled(const ModelVector& other, double scale) {
  CheckSameSize(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += scale * other.values_[i];
  }
  return *this;
}

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kPointEstimation:
      return "point_estimation";
    case LossKind::kLinearRegression:
      return "linear_regression";
    case LossKind::kSoftmaxClassification:
      return "softmax_classification";
  }
  return "unknown";
}

LossKind ParseLossKind(std::string_view name) {
  if (name == "point_estimation") return LossKind::kPointEstimation;
  if (name == "linear_regression") return LossKind::kLinearRegression;
  if (name == "softmax_classification") {
    return LossKind::kSoftmaxClassification;
  }
  throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

std::size_t NumSamples(const LocalDataset& data) {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointSamples>) {
          return d.observations.size();
        } else if constexpr (std::is_same_v<T, RegressionSamples>) {
          return d.rows;
        } else {
          return d.size();
        }
      },
      data);
}

std::size_t ModelDimension(const LocalDataset& data) {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointSamples>) {
          return 1;
        } else if constexpr (std::is_same_v<T, RegressionSamples>) {
          return d.cols;
        } else {
          return d.num_classes * (d.num_features + 1);
        }
      },
      data);
}

LocalDataset SelectSamples(const LocalDataset& data,
                           std::span<const std::size_t> indices) {
  return std::visit(
      [&](const auto& d) -> LocalDataset {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointSamples>) {
          PointSamples out;
          for (std::size_t i : indices) {
            out.observations.push_back(d.observations.at(i));
          }
          return out;
        } else if constexpr (std::is_same_v<T, RegressionSamples>) {
          RegressionSamples out;
          out.rows = indices.size();
          out.cols = d.cols;
          for (std::size_t i : indices) {
            if (i >= d.rows) throw ConfigError("sample index out of range");
            out.features.insert(out.features.end(),
                                d.features.begin() + i * d.cols,
                                d.features.begin() + (i + 1) * d.cols);
            out.responses.push_back(d.responses[i]);
          }
          return out;
        } else {
          LabeledExamples out;
          out.num_features = d.num_features;
          out.num_classes = d.num_classes;
          for (std::size_t i : indices) {
            if (i >= d.size()) throw ConfigError("sample index out of range");
            const auto row = d.row(i);
            out.features.insert(out.features.end(), row.begin(), row.end());
            out.labels.push_back(d.labels[i]);
          }
          return out;
        }
      },
      data);
}

double LocalLoss(const ModelVector& model, const LocalDataset& data,
                 LossKind kind) {
  CheckDimension(model, data);
  switch (kind) {
    case LossKind::kPointEstimation: {
      const auto& d = ExpectKind<PointSamples>(data, kind);
      const double diff = model[0] - Mean(d.observations);
      return 0.5 * diff * diff;
    }
    case LossKind::kLinearRegression: {
      const auto& d = ExpectKind<RegressionSamples>(data, kind);
      if (d.rows == 0) throw ConfigError("dataset has no samples");
      double sum = 0.0;
      for (double e : Residuals(model, d)) sum += e * e;
      return sum / (2.0 * static_cast<double>(d.rows));
    }
    case LossKind::kSoftmaxClassification: {
      const auto& d = ExpectKind<LabeledExamples>(data, kind);
      if (d.size() == 0) throw ConfigError("dataset has no samples");
      std::vector<double> z;
      double sum = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        Logits(model, d, i, z);
        const double top = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double v : z) s += std::exp(v - top);
        sum += top + std::log(s) - z[LabelOf(d, i)];
      }
      return sum / static_cast<double>(d.size());
    }
  }
  throw ConfigError("unknown loss kind");
}

ModelVector LocalGradient(const ModelVector& model, const LocalDataset& data,
                          LossKind kind) {
  CheckDimension(model, data);
  switch (kind) {
    case LossKind::kPointEstimation: {
      const auto& d = ExpectKind<PointSamples>(data, kind);
      return ModelVector{model[0] - Mean(d.observations)};
    }
    case LossKind::kLinearRegression: {
      const auto& d = ExpectKind<RegressionSamples>(data, kind);
      if (d.rows == 0) throw ConfigError("dataset has no samples");
      const std::vector<double> e = Residuals(model, d);
      ModelVector grad(d.cols);
      for (std::size_t r = 0; r < d.rows; ++r) {
        for (std::size_t c = 0; c < d.cols; ++c) {
          grad[c] += d.feature(r, c) * e[r];
        }
      }
      return grad *= 1.0 / static_cast<double>(d.rows);
    }
    case LossKind::kSoftmaxClassification: {
      const auto& d = ExpectKind<LabeledExamples>(data, kind);
      if (d.size() == 0) throw ConfigError("dataset has no samples");
      const std::size_t f = d.num_features;
      const std::size_t k = d.num_classes;
      ModelVector grad(model.size());
      std::vector<double> p;
      for (std::size_t i = 0; i < d.size(); ++i) {
        Logits(model, d, i, p);
        SoftmaxInPlace(p);
        p[LabelOf(d, i)] -= 1.0;
        const auto x = d.row(i);
        for (std::size_t c = 0; c < k; ++c) {
          for (std::size_t j = 0; j < f; ++j) grad[c * f + j] += p[c] * x[j];
          grad[k * f + c] += p[c];
        }
      }
      return grad *= 1.0 / static_cast<double>(d.size());
    }
  }
  throw ConfigError("unknown loss kind");
}

double Accuracy(const ModelVector& model, const LabeledExamples& data) {
  CheckDimension(model, data);
  if (data.size() == 0) return 0.0;
  std::vector<double> z;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Logits(model, data, i, z);
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace feo2
