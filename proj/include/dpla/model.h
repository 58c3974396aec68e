// Copyright 2026 The dp-la Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPLA_MODEL_H_
#define DPLA_MODEL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpla/matrix.h"
#include "dpla/status_macros.h"
#include "json.hpp"

namespace dpla {

struct TrainConfig {
  double lambda = 1e-4;
  int epochs = 100;
  double learning_rate = 0.5;
  uint64_t seed = 0;

  absl::Status Validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      return absl::InvalidArgumentError("lambda must be non-negative");
    }
    if (epochs < 1) return absl::InvalidArgumentError("epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      return absl::InvalidArgumentError("learning_rate must be positive");
    }
    return absl::OkStatus();
  }
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  TrainConfig config;
  double final_objective = 0.0;

  size_t dim() const { return weights.size(); }

  nlohmann::json ToJson() const {
    return {{"weights", weights},
            {"bias", bias},
            {"lambda", config.lambda},
            {"epochs", config.epochs},
            {"learning_rate", config.learning_rate},
            {"seed", config.seed},
            {"final_objective", final_objective}};
  }

  static absl::StatusOr<LogisticModel> FromJson(const nlohmann::json& j) {
    LogisticModel m;
    try {
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias").get<double>();
      m.config.lambda = j.at("lambda").get<double>();
      m.config.epochs = j.at("epochs").get<int>();
      m.config.seed = j.at("seed").get<uint64_t>();
      m.config.learning_rate = j.value("learning_rate", 0.5);
      m.final_objective = j.value("final_objective", 0.0);
    } catch (const nlohmann::json::exception& e) {
      return absl::InvalidArgumentError(std::string("malformed model: ") +
                                        e.what());
    }
    return m;
  }
};

// Extra terms beyond the logistic loss: (l2/2)||w||^2 + <linear, w>.
// An empty `linear` means no linear term. The bias is never penalized.
struct ObjectiveTerms {
  double l2 = 0.0;
  std::vector<double> linear;
};

namespace internal {

// log(1 + exp(x)) without overflow.
inline double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace internal

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// J(w, b) = (1/n) sum log(1 + exp(-y_i (w.x_i + b))) + extra terms,
// with y in {-1, +1} mapped from {0, 1} labels.
inline double LogisticObjective(const Matrix& features,
                                std::span<const int> labels,
                                std::span<const double> weights, double bias,
                                const ObjectiveTerms& terms) {
  double loss = 0.0;
  for (size_t i = 0; i < features.rows(); ++i) {
    const double y = labels[i] ? 1.0 : -1.0;
    loss += internal::Softplus(-y * (Dot(weights, features.Row(i)) + bias));
  }
  loss /= static_cast<double>(features.rows());
  loss += 0.5 * terms.l2 * SquaredNorm(weights);
  if (!terms.linear.empty()) loss += Dot(terms.linear, weights);
  return loss;
}

// Writes dJ/dw into grad_w and returns dJ/db.
inline double LogisticGradient(const Matrix& features,
                               std::span<const int> labels,
                               std::span<const double> weights, double bias,
                               const ObjectiveTerms& terms,
                               std::span<double> grad_w) {
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  double grad_b = 0.0;
  for (size_t i = 0; i < features.rows(); ++i) {
    const double y = labels[i] ? 1.0 : -1.0;
    auto row = features.Row(i);
    const double coeff = -y * Sigmoid(-y * (Dot(weights, row) + bias));
    for (size_t j = 0; j < row.size(); ++j) grad_w[j] += coeff * row[j];
    grad_b += coeff;
  }
  const double inv_n = 1.0 / static_cast<double>(features.rows());
  for (size_t j = 0; j < grad_w.size(); ++j) {
    grad_w[j] = grad_w[j] * inv_n + terms.l2 * weights[j];
    if (!terms.linear.empty()) grad_w[j] += terms.linear[j];
  }
  return grad_b * inv_n;
}

namespace internal {

inline absl::Status ValidateTrainingData(const Matrix& features,
                                         std::span<const int> labels) {
  if (features.rows() != labels.size()) {
    return absl::InvalidArgumentError("feature rows and labels differ in size");
  }
  if (features.rows() < 2) {
    return absl::InvalidArgumentError("need at least two training rows");
  }
  bool has[2] = {false, false};
  for (int y : labels) has[y != 0] = true;
  if (!has[0] || !has[1]) {
    return absl::InvalidArgumentError("training labels contain a single class");
  }
  if (!features.AllFinite()) {
    return absl::InvalidArgumentError("features contain non-finite values");
  }
  return absl::OkStatus();
}

}  // namespace internal

inline constexpr int kMaxStepHalvings = 60;

// Full-batch accelerated gradient descent from zero on the logistic loss
// plus `terms`. Each epoch takes one Nesterov step from the extrapolated
// point. The step starts at config.learning_rate, is doubled at the start of
// every epoch and halved until the sufficient-decrease test holds. A step that
// would raise the objective is rejected and momentum restarts, so the
// objective never increases.
inline absl::StatusOr<LogisticModel> TrainWithObjective(
    const Matrix& features, std::span<const int> labels,
    const TrainConfig& config, const ObjectiveTerms& terms) {
  DPLA_RETURN_IF_ERROR(config.Validate());
  DPLA_RETURN_IF_ERROR(internal::ValidateTrainingData(features, labels));
  const size_t d = features.cols();
  if (!terms.linear.empty() && terms.linear.size() != d) {
    return absl::InvalidArgumentError("linear term has the wrong dimension");
  }

  LogisticModel model;
  model.config = config;
  model.weights.assign(d, 0.0);
  std::vector<double> previous(d, 0.0), lookahead(d), grad(d), candidate(d);
  double previous_bias = 0.0;
  double objective =
      LogisticObjective(features, labels, model.weights, model.bias, terms);
  double step = config.learning_rate / 2.0;
  double t = 1.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    t = t_next;
    for (size_t j = 0; j < d; ++j) {
      lookahead[j] =
          model.weights[j] + momentum * (model.weights[j] - previous[j]);
    }
    const double lookahead_bias =
        model.bias + momentum * (model.bias - previous_bias);
    const double base = LogisticObjective(features, labels, lookahead,
                                          lookahead_bias, terms);
    const double grad_b = LogisticGradient(features, labels, lookahead,
                                           lookahead_bias, terms, grad);
    const double grad_sq = SquaredNorm(grad) + grad_b * grad_b;

    step *= 2.0;
    double value = base;
    double candidate_bias = lookahead_bias;
    for (int attempt = 0; attempt < kMaxStepHalvings; ++attempt) {
      for (size_t j = 0; j < d; ++j) {
        candidate[j] = lookahead[j] - step * grad[j];
      }
      candidate_bias = lookahead_bias - step * grad_b;
      value = LogisticObjective(features, labels, candidate, candidate_bias,
                                terms);
      if (value <= base - 0.5 * step * grad_sq) break;
      step *= 0.5;
    }
    if (value <= objective) {
      previous = model.weights;
      previous_bias = model.bias;
      model.weights = candidate;
      model.bias = candidate_bias;
      objective = value;
    } else {
      previous = model.weights;
      previous_bias = model.bias;
      t = 1.0;
    }
  }
  model.final_objective = objective;
  if (!std::isfinite(objective)) {
    return absl::InternalError("training diverged to a non-finite objective");
  }
  return model;
}

// The l2-regularized logistic regression baseline.
inline absl::StatusOr<LogisticModel> Train(const Matrix& features,
                                           std::span<const int> labels,
                                           const TrainConfig& config) {
  return TrainWithObjective(features, labels, config,
                            ObjectiveTerms{config.lambda, {}});
}

inline absl::StatusOr<std::vector<double>> PredictProba(
    const LogisticModel& model, const Matrix& features) {
  if (features.cols() != model.dim()) {
    return absl::InvalidArgumentError(
        "model expects " + std::to_string(model.dim()) + " features, got " +
        std::to_string(features.cols()));
  }
  std::vector<double> p(features.rows());
  for (size_t i = 0; i < features.rows(); ++i) {
    p[i] = Sigmoid(Dot(model.weights, features.Row(i)) + model.bias);
  }
  return p;
}

// Label 1 iff p >= threshold.
inline std::vector<int> ThresholdProbabilities(std::span<const double> p,
                                               double threshold = 0.5) {
  std::vector<int> labels(p.size());
  for (size_t i = 0; i < p.size(); ++i) labels[i] = p[i] >= threshold;
  return labels;
}

inline absl::StatusOr<std::vector<int>> Predict(const LogisticModel& model,
                                                const Matrix& features,
                                                double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    return absl::InvalidArgumentError("threshold must lie in (0, 1)");
  }
  DPLA_ASSIGN_OR_RETURN(std::vector<double> p, PredictProba(model, features));
  return ThresholdProbabilities(p, threshold);
}

inline absl::StatusOr<double> Accuracy(std::span<const int> predicted,
                                       std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    return absl::InvalidArgumentError("prediction and label lengths differ");
  }
  if (predicted.empty()) {
    return absl::InvalidArgumentError("cannot score an empty prediction set");
  }
  size_t correct = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    correct += (predicted[i] != 0) == (actual[i] != 0);
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

}  // namespace dpla

#endif  // DPLA_MODEL_H_
