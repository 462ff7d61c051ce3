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

#ifndef FEO2_MODEL_H_
#define FEO2_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace feo2 {

// Flat real-valued parameter vector. Used for global models, personalized
// models and client deltas alike. Arithmetic between vectors of different
// dimension throws ConfigError.
class ModelVector {
 public:
  ModelVector() = default;
  explicit ModelVector(std::size_t dim, double fill = 0.0)
      : values_(dim, fill) {}
  explicit ModelVector(std::vector<double> values)
      : values_(std::move(values)) {}
  ModelVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  // Euclidean norm.
  double Norm() const;
  bool AllFinite() const;

  ModelVector& operator+=(const ModelVector& other);
  ModelVector& operator-=(const ModelVector& other);
  ModelVector& operator*=(double scale);
  // this += scale * other
  ModelVector& AddScaled(const ModelVector& other, double scale);

  friend ModelVector operator+(ModelVector a, const ModelVector& b) {
    return a += b;
  }
  friend ModelVector operator-(ModelVector a, const ModelVector& b) {
    return a -= b;
  }
  friend ModelVector operator*(ModelVector a, double s) { return a *= s; }
  friend ModelVector operator*(double s, ModelVector a) { return a *= s; }
  friend bool operator==(const ModelVector&, const ModelVector&) = default;
  friend std::ostream& operator<<(std::ostream& os, const ModelVector& v) {
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    return os << ')';
  }

 private:
  std::vector<double> values_;
};

// Scalar observations x_i of one unknown point.
struct PointSamples {
  std::vector<double> observations;
};

// Design matrix F (rows x cols, row-major) and responses x.
struct RegressionSamples {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> features;
  std::vector<double> responses;

  double feature(std::size_t r, std::size_t c) const {
    return features[r * cols + c];
  }
};

// Feature vectors (row-major) with integer class labels in [0, num_classes).
struct LabeledExamples {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * num_features,
                                                     num_features);
  }
};

using LocalDataset =
    std::variant<PointSamples, RegressionSamples, LabeledExamples>;

enum class LossKind {
  kPointEstimation,
  kLinearRegression,
  kSoftmaxClassification,
};

std::string_view LossKindName(LossKind kind);
LossKind ParseLossKind(std::string_view name);

std::size_t NumSamples(const LocalDataset& data);

// Parameter count of the model family that fits `data`. The softmax layout is
// a num_classes x num_features weight block followed by num_classes biases.
std::size_t ModelDimension(const LocalDataset& data);

// Subset of the samples in `data`, in the given order.
LocalDataset SelectSamples(const LocalDataset& data,
                           std::span<const std::size_t> indices);

// Per-client loss:
//   point:      1/2 (theta - mean(x))^2
//   regression: 1/(2 n) ||F theta - x||^2
//   softmax:    mean cross-entropy of a linear softmax layer
// Throws ConfigError when `kind` does not match the dataset or the model
// dimension is wrong.
double LocalLoss(const ModelVector& model, const LocalDataset& data,
                 LossKind kind);

ModelVector LocalGradient(const ModelVector& model, const LocalDataset& data,
                          LossKind kind);

// Fraction of correctly classified examples (softmax only).
double Accuracy(const ModelVector& model, const LabeledExamples& data);

struct ClientRecord {
  int64_t id = 0;
  bool is_private = true;
  LocalDataset train;
  // Held-out split used by evaluation; may be empty.
  std::optional<LocalDataset> test;
  std::optional<ModelVector> personalized_model;
};

}  // namespace feo2

#endif  // FEO2_MODEL_H_
