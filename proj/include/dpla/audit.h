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

#ifndef DPLA_AUDIT_H_
#define DPLA_AUDIT_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpla/data.h"
#include "dpla/dp_pipelines.h"
#include "dpla/matrix.h"
#include "dpla/model.h"
#include "dpla/status_macros.h"

namespace dpla {

inline constexpr size_t kAttackFeatureDim = 3;

// [1 - p, p, true_label]: the victim's confidence vector plus the label.
inline absl::StatusOr<std::array<double, kAttackFeatureDim>> AttackFeatures(
    double probability, int true_label) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    return absl::InvalidArgumentError("probability must lie in [0, 1]");
  }
  return std::array<double, kAttackFeatureDim>{
      1.0 - probability, probability, true_label ? 1.0 : 0.0};
}

// Shadow-model membership classifier. One logistic model per true label,
// each reading the full attack feature vector; a record is flagged as a
// member when its label's model gives probability >= 0.5.
struct AttackModel {
  static constexpr const char* kFeatureLayout = "p_class0,p_class1,true_label";
  std::array<LogisticModel, 2> per_label;

  const LogisticModel& ForLabel(int label) const {
    return per_label[label != 0];
  }

  // Flags every record as a member (or none), regardless of features.
  static AttackModel Constant(bool member) {
    AttackModel attack;
    for (LogisticModel& m : attack.per_label) {
      m.weights.assign(kAttackFeatureDim, 0.0);
      m.bias = member ? 50.0 : -50.0;
    }
    return attack;
  }
};

// The rows the attacker owns. Holds no victim rows.
struct AttackerRows {
  std::vector<size_t> members;
  std::vector<size_t> nonmembers;

  static AttackerRows FromSplit(const FourWaySplit& split) {
    return {split.attack_train, split.attack_test};
  }
};

namespace internal {

inline absl::StatusOr<Matrix> AttackFeatureMatrix(
    std::span<const double> probabilities, std::span<const int> labels) {
  Matrix out(probabilities.size(), kAttackFeatureDim);
  for (size_t i = 0; i < probabilities.size(); ++i) {
    DPLA_ASSIGN_OR_RETURN(auto f, AttackFeatures(probabilities[i], labels[i]));
    for (size_t j = 0; j < kAttackFeatureDim; ++j) out(i, j) = f[j];
  }
  return out;
}

}  // namespace internal

// Labels the shadow model's outputs on its own training rows as members and
// on the held-out attacker rows as non-members, then fits one attack model
// per true label.
inline absl::StatusOr<AttackModel> TrainAttack(const LogisticModel& shadow,
                                               const Dataset& dataset,
                                               const AttackerRows& rows,
                                               const TrainConfig& config) {
  if (shadow.dim() != dataset.dim()) {
    return absl::InvalidArgumentError(
        "shadow model dimension does not match the dataset");
  }
  if (rows.members.empty() || rows.nonmembers.empty()) {
    return absl::InvalidArgumentError(
        "attack training needs both member and non-member rows");
  }
  std::vector<double> p[2];
  std::vector<int> membership[2];
  std::vector<int> true_label[2];
  for (int member = 0; member < 2; ++member) {
    const std::vector<size_t>& idx = member ? rows.members : rows.nonmembers;
    DPLA_ASSIGN_OR_RETURN(
        std::vector<double> probs,
        PredictProba(shadow, dataset.features.SelectRows(idx)));
    for (size_t i = 0; i < idx.size(); ++i) {
      const int y = dataset.labels[idx[i]] != 0;
      p[y].push_back(probs[i]);
      membership[y].push_back(member);
      true_label[y].push_back(y);
    }
  }
  AttackModel attack;
  for (int y = 0; y < 2; ++y) {
    DPLA_ASSIGN_OR_RETURN(Matrix x,
                          internal::AttackFeatureMatrix(p[y], true_label[y]));
    auto model = Train(x, membership[y], config);
    if (!model.ok()) {
      return absl::FailedPreconditionError(
          "attack model for label " + std::to_string(y) +
          " cannot be trained: " + std::string(model.status().message()));
    }
    attack.per_label[y] = *std::move(model);
  }
  return attack;
}

struct MiaOutcome {
  double tpr = 0.0;
  double fpr = 0.0;
  int64_t true_positive_count = 0;
  int64_t false_positive_count = 0;
  int64_t member_count = 0;
  int64_t nonmember_count = 0;
};

// Victim's released class-1 score for each row of a feature matrix.
using VictimScorer =
    std::function<absl::StatusOr<std::vector<double>>(const Matrix&)>;

inline absl::StatusOr<std::vector<int>> ClassifyMembership(
    const AttackModel& attack, std::span<const double> probabilities,
    std::span<const int> labels) {
  std::vector<int> flagged(probabilities.size());
  for (size_t i = 0; i < probabilities.size(); ++i) {
    DPLA_ASSIGN_OR_RETURN(auto f, AttackFeatures(probabilities[i], labels[i]));
    const LogisticModel& m = attack.ForLabel(labels[i]);
    if (m.dim() != kAttackFeatureDim) {
      return absl::InvalidArgumentError("attack model has the wrong dimension");
    }
    flagged[i] = Sigmoid(Dot(m.weights, f) + m.bias) >= 0.5;
  }
  return flagged;
}

// Runs the attack against the victim's members (victim_train) and
// non-members (victim_test). Members are scored first.
inline absl::StatusOr<MiaOutcome> RunMia(const AttackModel& attack,
                                         const VictimScorer& victim,
                                         const Dataset& dataset,
                                         const FourWaySplit& split) {
  if (split.victim_train.empty() || split.victim_test.empty()) {
    return absl::InvalidArgumentError("victim parts must be non-empty");
  }
  MiaOutcome out;
  for (int member = 1; member >= 0; --member) {
    const std::vector<size_t>& idx =
        member ? split.victim_train : split.victim_test;
    DPLA_ASSIGN_OR_RETURN(std::vector<double> probs,
                          victim(dataset.features.SelectRows(idx)));
    if (probs.size() != idx.size()) {
      return absl::InternalError("victim scorer returned the wrong row count");
    }
    DPLA_ASSIGN_OR_RETURN(
        std::vector<int> flagged,
        ClassifyMembership(attack, probs, SelectElements(dataset.labels, idx)));
    int64_t hits = 0;
    for (int f : flagged) hits += f;
    if (member) {
      out.true_positive_count = hits;
      out.member_count = static_cast<int64_t>(idx.size());
    } else {
      out.false_positive_count = hits;
      out.nonmember_count = static_cast<int64_t>(idx.size());
    }
  }
  out.tpr = static_cast<double>(out.true_positive_count) /
            static_cast<double>(out.member_count);
  out.fpr = static_cast<double>(out.false_positive_count) /
            static_cast<double>(out.nonmember_count);
  return out;
}

// TPR - FPR; negative when the attack flags outsiders more often than
// members.
inline double PrivacyLeakage(const MiaOutcome& outcome) {
  return outcome.tpr - outcome.fpr;
}

// Non-private minus private accuracy; positive means the private model is
// worse.
inline double UtilityLoss(double acc_private, double acc_nonprivate) {
  return acc_nonprivate - acc_private;
}

inline int64_t TrueRevealedRecords(const MiaOutcome& outcome) {
  return outcome.true_positive_count;
}

inline double TrueRevealedRate(const MiaOutcome& outcome) {
  return static_cast<double>(outcome.true_positive_count) /
         static_cast<double>(outcome.member_count);
}

struct AuditReport {
  DpMethod method = DpMethod::kInputPerturbation;
  double epsilon = 0.0;
  int64_t seed = 0;
  double acc_nonprivate = 0.0;
  double acc_private = 0.0;
  double utility_loss = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double privacy_leakage = 0.0;
  int64_t true_revealed_records = 0;
  double trr_rate = 0.0;
  int64_t member_count = 0;
};

inline AuditReport MakeAuditReport(DpMethod method, double epsilon,
                                   int64_t seed, double acc_private,
                                   double acc_nonprivate,
                                   const MiaOutcome& outcome) {
  AuditReport r;
  r.method = method;
  r.epsilon = epsilon;
  r.seed = seed;
  r.acc_private = acc_private;
  r.acc_nonprivate = acc_nonprivate;
  r.utility_loss = UtilityLoss(acc_private, acc_nonprivate);
  r.tpr = outcome.tpr;
  r.fpr = outcome.fpr;
  r.privacy_leakage = PrivacyLeakage(outcome);
  r.true_revealed_records = TrueRevealedRecords(outcome);
  r.trr_rate = TrueRevealedRate(outcome);
  r.member_count = outcome.member_count;
  return r;
}

}  // namespace dpla

#endif  // DPLA_AUDIT_H_
