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

#ifndef DPLA_DP_PIPELINES_H_
#define DPLA_DP_PIPELINES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpla/data.h"
#include "dpla/matrix.h"
#include "dpla/mechanisms.h"
#include "dpla/model.h"
#include "dpla/rng.h"
#include "dpla/status_macros.h"
#include "json.hpp"

namespace dpla {

// Where noise enters the learning pipeline.
enum class DpMethod {
  kInputPerturbation,
  kObjectivePerturbation,
  kPredictionPerturbation,
};

inline constexpr DpMethod kAllDpMethods[] = {
    DpMethod::kInputPerturbation, DpMethod::kObjectivePerturbation,
    DpMethod::kPredictionPerturbation};

inline std::string_view DpMethodName(DpMethod method) {
  switch (method) {
    case DpMethod::kInputPerturbation: return "input_perturbation";
    case DpMethod::kObjectivePerturbation: return "objective_perturbation";
    case DpMethod::kPredictionPerturbation: return "prediction_perturbation";
  }
  return "unknown";
}

inline absl::StatusOr<DpMethod> ParseDpMethod(std::string_view name) {
  for (DpMethod method : kAllDpMethods) {
    if (DpMethodName(method) == name) return method;
  }
  return absl::InvalidArgumentError("unknown DP method '" + std::string(name) +
                                    "'");
}

// Input perturbation adds Gaussian noise; the other two use Laplace.
inline NoiseKind NoiseKindFor(DpMethod method) {
  return method == DpMethod::kInputPerturbation ? NoiseKind::kGaussian
                                                : NoiseKind::kLaplace;
}

inline absl::Status CheckBudgetForMethod(DpMethod method,
                                         const PrivacyBudget& budget) {
  if (NoiseKindFor(method) == NoiseKind::kGaussian && budget.is_pure()) {
    return absl::InvalidArgumentError(std::string(DpMethodName(method)) +
                                      " uses Gaussian noise and needs delta > 0");
  }
  if (NoiseKindFor(method) == NoiseKind::kLaplace && !budget.is_pure()) {
    return absl::InvalidArgumentError(std::string(DpMethodName(method)) +
                                      " uses Laplace noise and needs delta = 0");
  }
  return absl::OkStatus();
}

inline constexpr double kUnitRangeSlack = 1e-9;

// Adds N(0, sigma^2) to every cell, sigma calibrated for per-cell L2
// sensitivity 1 on [0, 1]-scaled features. The result is not clipped.
inline absl::StatusOr<Matrix> InputPerturb(const Matrix& features,
                                           const PrivacyBudget& budget,
                                           Rng& rng) {
  DPLA_ASSIGN_OR_RETURN(
      double sigma, GaussianSigma({1.0, Sensitivity::Norm::kL2}, budget));
  for (double v : features.data()) {
    if (!(v >= -kUnitRangeSlack && v <= 1.0 + kUnitRangeSlack)) {
      return absl::InvalidArgumentError(
          "input perturbation expects features normalized to [0, 1]");
    }
  }
  Matrix noisy = features;
  for (double& v : noisy.mutable_data()) v += sigma * rng.Gaussian();
  return noisy;
}

// Upper bound on the second derivative of the logistic loss.
inline constexpr double kLogisticCurvature = 0.25;

struct ObjectivePerturbationBudget {
  double epsilon_prime = 0.0;
  // Regularization added on top of lambda; zero unless the budget is too
  // small for the requested lambda.
  double extra_l2 = 0.0;
  bool augmented = false;
};

// Budget split for objective perturbation:
//   eps' = eps - 2 ln(1 + c / (n lambda)),
// and when eps' <= 0, add Delta = c / (n (e^{eps/4} - 1)) - lambda to the
// regularizer and use eps' = eps / 2.
inline ObjectivePerturbationBudget SplitObjectivePerturbationBudget(
    double epsilon, size_t n, double lambda) {
  const double nd = static_cast<double>(n);
  ObjectivePerturbationBudget out;
  out.epsilon_prime =
      epsilon - 2.0 * std::log1p(kLogisticCurvature / (nd * lambda));
  if (out.epsilon_prime <= 0.0) {
    out.extra_l2 =
        kLogisticCurvature / (nd * std::expm1(epsilon / 4.0)) - lambda;
    out.epsilon_prime = epsilon / 2.0;
    out.augmented = true;
  }
  return out;
}

struct ObjectivePerturbedModel {
  // Weights act on the caller's (unscaled) features.
  LogisticModel model;
  ObjectivePerturbationBudget budget_split;
  double noise_norm = 0.0;
  // Factor applied to features during training to bound row norms by 1.
  double feature_scale = 1.0;
};

// Minimizes J(w) + (Delta/2)||w||^2 + (1/n) b.w where b has a uniformly
// random direction and ||b|| ~ Gamma(d, 2/eps'). Rows are rescaled by
// 1/sqrt(d) when any row norm exceeds 1, and any row still above norm 1 is
// clipped onto the unit sphere.
inline absl::StatusOr<ObjectivePerturbedModel> ObjectivePerturbTrain(
    const Matrix& features, std::span<const int> labels,
    const PrivacyBudget& budget, const TrainConfig& config, Rng& rng) {
  if (!budget.is_pure()) {
    return absl::InvalidArgumentError(
        "objective perturbation is pure epsilon-DP; delta must be 0");
  }
  if (!(config.lambda > 0.0)) {
    return absl::InvalidArgumentError(
        "objective perturbation needs lambda > 0");
  }
  const size_t n = features.rows();
  const size_t d = features.cols();
  if (n == 0) return absl::InvalidArgumentError("no training rows");
  if (d == 0) return absl::InvalidArgumentError("no features");

  ObjectivePerturbedModel out;
  Matrix scaled = features;
  for (size_t i = 0; i < n && out.feature_scale == 1.0; ++i) {
    if (SquaredNorm(features.Row(i)) > 1.0) {
      out.feature_scale = 1.0 / std::sqrt(static_cast<double>(d));
    }
  }
  for (size_t i = 0; i < n; ++i) {
    auto row = scaled.MutableRow(i);
    for (double& v : row) v *= out.feature_scale;
    const double norm = std::sqrt(SquaredNorm(row));
    if (norm > 1.0) {
      for (double& v : row) v /= norm;
    }
  }

  out.budget_split =
      SplitObjectivePerturbationBudget(budget.epsilon(), n, config.lambda);
  out.noise_norm = rng.GammaIntegerShape(static_cast<int>(d)) * 2.0 /
                   out.budget_split.epsilon_prime;
  std::vector<double> direction(d);
  double direction_norm = 0.0;
  while (direction_norm == 0.0) {
    for (double& v : direction) v = rng.Gaussian();
    direction_norm = std::sqrt(SquaredNorm(direction));
  }
  ObjectiveTerms terms;
  terms.l2 = config.lambda + out.budget_split.extra_l2;
  terms.linear.resize(d);
  for (size_t j = 0; j < d; ++j) {
    terms.linear[j] = out.noise_norm * direction[j] / direction_norm /
                      static_cast<double>(n);
  }
  DPLA_ASSIGN_OR_RETURN(out.model,
                        TrainWithObjective(scaled, labels, config, terms));
  for (double& w : out.model.weights) w *= out.feature_scale;
  return out;
}

inline constexpr int kDefaultNumTeachers = 10;
inline constexpr int kMaxPartitionAttempts = 10;

struct TeacherEnsemble {
  std::vector<LogisticModel> teachers;
  // Row indices (into the training matrix) each teacher saw.
  std::vector<std::vector<size_t>> partition;

  int num_teachers() const { return static_cast<int>(teachers.size()); }
};

// Shuffles the rows into num_teachers disjoint shards whose sizes differ by
// at most one (the first n % k shards get the extra row) and trains one
// model per shard. Reshuffles until every shard holds both classes.
inline absl::StatusOr<TeacherEnsemble> PateTrain(const Matrix& features,
                                                 std::span<const int> labels,
                                                 int num_teachers,
                                                 const TrainConfig& config,
                                                 Rng& rng) {
  const size_t n = features.rows();
  if (num_teachers < 2) {
    return absl::InvalidArgumentError("PATE needs at least two teachers");
  }
  if (static_cast<size_t>(num_teachers) * 4 > n) {
    return absl::InvalidArgumentError(
        "num_teachers " + std::to_string(num_teachers) +
        " exceeds n/4 for n = " + std::to_string(n));
  }
  if (labels.size() != n) {
    return absl::InvalidArgumentError("feature rows and labels differ in size");
  }
  const size_t k = static_cast<size_t>(num_teachers);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  TeacherEnsemble ensemble;
  bool balanced = false;
  for (int attempt = 0; attempt < kMaxPartitionAttempts && !balanced;
       ++attempt) {
    Shuffle(order, rng);
    ensemble.partition.assign(k, {});
    size_t next = 0;
    balanced = true;
    for (size_t t = 0; t < k; ++t) {
      const size_t size = n / k + (t < n % k ? 1 : 0);
      bool has[2] = {false, false};
      for (size_t i = 0; i < size; ++i) {
        const size_t row = order[next++];
        ensemble.partition[t].push_back(row);
        has[labels[row] != 0] = true;
      }
      balanced = balanced && has[0] && has[1];
    }
  }
  if (!balanced) {
    return absl::FailedPreconditionError(
        "could not give every teacher shard both classes after 10 shuffles");
  }
  for (const std::vector<size_t>& shard : ensemble.partition) {
    Matrix x = features.SelectRows(shard);
    std::vector<int> y = SelectElements(std::vector<int>(labels.begin(),
                                                         labels.end()),
                                        shard);
    DPLA_ASSIGN_OR_RETURN(LogisticModel teacher, Train(x, y, config));
    ensemble.teachers.push_back(std::move(teacher));
  }
  return ensemble;
}

// Number of teachers voting for class 1 on each row.
inline absl::StatusOr<std::vector<int>> TeacherVotes(
    const TeacherEnsemble& ensemble, const Matrix& features) {
  if (ensemble.teachers.empty()) {
    return absl::InvalidArgumentError("teacher ensemble is empty");
  }
  std::vector<int> votes(features.rows(), 0);
  for (const LogisticModel& teacher : ensemble.teachers) {
    DPLA_ASSIGN_OR_RETURN(std::vector<int> labels, Predict(teacher, features));
    for (size_t i = 0; i < votes.size(); ++i) votes[i] += labels[i];
  }
  return votes;
}

// Vote counts have L1 sensitivity 2 per query.
inline absl::StatusOr<double> PateNoiseScale(const PrivacyBudget& budget) {
  return LaplaceScale({2.0, Sensitivity::Norm::kL1}, budget);
}

// argmax_c (n_c + Lap(2/eps)), independent noise per class; ties go to 1.
inline int NoisyArgmax(int votes_class1, int num_teachers, double scale,
                       Rng& rng) {
  const double noisy0 =
      (num_teachers - votes_class1) + scale * rng.StandardLaplace();
  const double noisy1 = votes_class1 + scale * rng.StandardLaplace();
  return noisy1 >= noisy0 ? 1 : 0;
}

inline absl::StatusOr<std::vector<int>> PatePredict(
    const TeacherEnsemble& ensemble, const Matrix& features,
    const PrivacyBudget& budget, Rng& rng) {
  DPLA_ASSIGN_OR_RETURN(double scale, PateNoiseScale(budget));
  DPLA_ASSIGN_OR_RETURN(std::vector<int> votes,
                        TeacherVotes(ensemble, features));
  std::vector<int> out(votes.size());
  for (size_t i = 0; i < votes.size(); ++i) {
    out[i] = NoisyArgmax(votes[i], ensemble.num_teachers(), scale, rng);
  }
  return out;
}

// (n_1 + Lap(2/eps)) / num_teachers, clamped to [0, 1]. This is what the
// ensemble exposes in place of a class-1 probability.
inline absl::StatusOr<std::vector<double>> PateNoisyVoteFraction(
    const TeacherEnsemble& ensemble, const Matrix& features,
    const PrivacyBudget& budget, Rng& rng) {
  DPLA_ASSIGN_OR_RETURN(double scale, PateNoiseScale(budget));
  DPLA_ASSIGN_OR_RETURN(std::vector<int> votes,
                        TeacherVotes(ensemble, features));
  std::vector<double> out(votes.size());
  const double k = ensemble.num_teachers();
  for (size_t i = 0; i < votes.size(); ++i) {
    out[i] = std::clamp((votes[i] + scale * rng.StandardLaplace()) / k, 0.0,
                        1.0);
  }
  return out;
}

struct ArtifactMetadata {
  uint64_t seed = 0;
  std::optional<int> num_teachers;
  std::optional<double> sigma;
  std::optional<double> noise_norm;
  std::optional<double> epsilon_prime;
  std::optional<double> extra_l2;
  // PATE: per-query epsilon times the number of answered queries. Reported,
  // not enforced.
  std::optional<double> composed_epsilon;
};

struct PrivateModelArtifact {
  DpMethod method;
  PrivacyBudget budget;
  std::variant<LogisticModel, TeacherEnsemble> payload;
  NoiseKind noise_kind;
  ArtifactMetadata metadata;

  nlohmann::json MetadataJson() const {
    nlohmann::json j = {{"method", DpMethodName(method)},
                        {"epsilon", budget.epsilon()},
                        {"delta", budget.delta()},
                        {"noise_kind", NoiseKindName(noise_kind)},
                        {"seed", metadata.seed}};
    if (metadata.num_teachers) j["num_teachers"] = *metadata.num_teachers;
    if (metadata.sigma) j["sigma"] = *metadata.sigma;
    if (metadata.noise_norm) j["noise_norm"] = *metadata.noise_norm;
    if (metadata.epsilon_prime) j["epsilon_prime"] = *metadata.epsilon_prime;
    if (metadata.extra_l2) j["extra_l2"] = *metadata.extra_l2;
    if (metadata.composed_epsilon) {
      j["composed_epsilon"] = *metadata.composed_epsilon;
    }
    return j;
  }
};

// What the released artifact reveals about each row, as a class-1 score in
// [0, 1]: model probabilities for single models, fresh noisy vote fractions
// for the teacher ensemble.
inline absl::StatusOr<std::vector<double>> ReleasedProbabilities(
    const PrivateModelArtifact& artifact, const Matrix& features, Rng& rng) {
  if (const auto* model = std::get_if<LogisticModel>(&artifact.payload)) {
    return PredictProba(*model, features);
  }
  return PateNoisyVoteFraction(std::get<TeacherEnsemble>(artifact.payload),
                               features, artifact.budget, rng);
}

struct PipelineConfig {
  TrainConfig train;
  int num_teachers = kDefaultNumTeachers;
};

struct PipelineResult {
  PrivateModelArtifact artifact;
  std::vector<int> train_predictions;
  std::vector<int> test_predictions;
};

// Trains the private model for `method` on victim_train and labels both
// victim parts with it.
inline absl::StatusOr<PipelineResult> RunPipeline(
    DpMethod method, const Dataset& dataset, const FourWaySplit& split,
    const PrivacyBudget& budget, const PipelineConfig& config, Rng& rng) {
  DPLA_RETURN_IF_ERROR(CheckBudgetForMethod(method, budget));
  const Matrix train_x = dataset.features.SelectRows(split.victim_train);
  const std::vector<int> train_y =
      SelectElements(dataset.labels, split.victim_train);
  const Matrix test_x = dataset.features.SelectRows(split.victim_test);

  ArtifactMetadata metadata;
  metadata.seed = rng.seed();
  Rng training_rng = rng.Substream({1});
  Rng prediction_rng = rng.Substream({2});

  switch (method) {
    case DpMethod::kInputPerturbation: {
      DPLA_ASSIGN_OR_RETURN(Matrix noisy,
                            InputPerturb(train_x, budget, training_rng));
      DPLA_ASSIGN_OR_RETURN(LogisticModel model,
                            Train(noisy, train_y, config.train));
      DPLA_ASSIGN_OR_RETURN(
          metadata.sigma,
          GaussianSigma({1.0, Sensitivity::Norm::kL2}, budget));
      DPLA_ASSIGN_OR_RETURN(std::vector<int> train_pred,
                            Predict(model, train_x));
      DPLA_ASSIGN_OR_RETURN(std::vector<int> test_pred, Predict(model, test_x));
      return PipelineResult{
          PrivateModelArtifact{method, budget, std::move(model),
                               NoiseKindFor(method), metadata},
          std::move(train_pred), std::move(test_pred)};
    }
    case DpMethod::kObjectivePerturbation: {
      DPLA_ASSIGN_OR_RETURN(
          ObjectivePerturbedModel result,
          ObjectivePerturbTrain(train_x, train_y, budget, config.train,
                                training_rng));
      metadata.noise_norm = result.noise_norm;
      metadata.epsilon_prime = result.budget_split.epsilon_prime;
      metadata.extra_l2 = result.budget_split.extra_l2;
      DPLA_ASSIGN_OR_RETURN(std::vector<int> train_pred,
                            Predict(result.model, train_x));
      DPLA_ASSIGN_OR_RETURN(std::vector<int> test_pred,
                            Predict(result.model, test_x));
      return PipelineResult{
          PrivateModelArtifact{method, budget, std::move(result.model),
                               NoiseKindFor(method), metadata},
          std::move(train_pred), std::move(test_pred)};
    }
    case DpMethod::kPredictionPerturbation: {
      DPLA_ASSIGN_OR_RETURN(
          TeacherEnsemble ensemble,
          PateTrain(train_x, train_y, config.num_teachers, config.train,
                    training_rng));
      DPLA_ASSIGN_OR_RETURN(
          std::vector<int> train_pred,
          PatePredict(ensemble, train_x, budget, prediction_rng));
      DPLA_ASSIGN_OR_RETURN(
          std::vector<int> test_pred,
          PatePredict(ensemble, test_x, budget, prediction_rng));
      metadata.num_teachers = ensemble.num_teachers();
      metadata.composed_epsilon =
          budget.epsilon() *
          static_cast<double>(train_pred.size() + test_pred.size());
      return PipelineResult{
          PrivateModelArtifact{method, budget, std::move(ensemble),
                               NoiseKindFor(method), metadata},
          std::move(train_pred), std::move(test_pred)};
    }
  }
  return absl::InternalError("unhandled DP method");
}

}  // namespace dpla

#endif  // DPLA_DP_PIPELINES_H_
