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

#include "dpla/audit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dpla/data.h"
#include "dpla/dp_pipelines.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpla {
namespace {

using ::testing::ElementsAre;

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Dataset SynthDataset(SynthOptions options) {
  SynthData synth = SynthGenerate(options).value();
  return Preprocess(synth.table, synth.schema).value();
}

VictimScorer ModelScorer(const LogisticModel& model) {
  return [model](const Matrix& x) { return PredictProba(model, x); };
}

// Accuracy of the attack on the rows it was trained on.
double AttackTrainingAccuracy(const AttackModel& attack,
                              const LogisticModel& shadow, const Dataset& d,
                              const AttackerRows& rows) {
  size_t correct = 0;
  for (int member = 0; member < 2; ++member) {
    const auto& idx = member ? rows.members : rows.nonmembers;
    std::vector<double> p =
        PredictProba(shadow, d.features.SelectRows(idx)).value();
    std::vector<int> flagged =
        ClassifyMembership(attack, p, SelectElements(d.labels, idx)).value();
    for (int f : flagged) correct += f == member;
  }
  return static_cast<double>(correct) /
         (rows.members.size() + rows.nonmembers.size());
}

struct AuditRun {
  MiaOutcome outcome;
  double leakage;
};

// Shadow and victim share architecture and config; the victim is scored by
// `victim_scorer` if given, else by its own probabilities.
AuditRun AuditNonPrivate(const Dataset& d, uint64_t seed,
                         const TrainConfig& config) {
  FourWaySplit split = MakeFourWaySplit(d.labels, seed).value();
  LogisticModel victim =
      Train(d.features.SelectRows(split.victim_train),
            SelectElements(d.labels, split.victim_train), config)
          .value();
  LogisticModel shadow =
      Train(d.features.SelectRows(split.attack_train),
            SelectElements(d.labels, split.attack_train), config)
          .value();
  AttackModel attack =
      TrainAttack(shadow, d, AttackerRows::FromSplit(split), config).value();
  MiaOutcome outcome = RunMia(attack, ModelScorer(victim), d, split).value();
  return {outcome, PrivacyLeakage(outcome)};
}

TEST(AttackFeaturesTest, Examples) {
  auto f = AttackFeatures(0.9, 1).value();
  EXPECT_NEAR(f[0], 0.1, 1e-15);
  EXPECT_EQ(f[1], 0.9);
  EXPECT_EQ(f[2], 1.0);
  EXPECT_THAT(AttackFeatures(0.5, 0).value(), ElementsAre(0.5, 0.5, 0.0));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double p = rng.Uniform();
    auto g = AttackFeatures(p, i % 2).value();
    EXPECT_NEAR(g[0] + g[1], 1.0, 1e-15);
  }
  EXPECT_FALSE(AttackFeatures(1.01, 0).ok());
  EXPECT_FALSE(AttackFeatures(-0.01, 0).ok());
  EXPECT_FALSE(AttackFeatures(std::nan(""), 0).ok());
}

TEST(TrainAttackTest, DegenerateShadowIsSeparable) {
  // Column 0 flags the attack_train rows; the shadow puts all its weight on
  // it, giving p ~ 1 on its training rows and p = 0.5 elsewhere.
  Dataset d = SynthDataset({.n = 400, .seed = 2});
  FourWaySplit split = MakeFourWaySplit(d.labels, 2).value();
  for (size_t r = 0; r < d.size(); ++r) d.features(r, 0) = 0.0;
  for (size_t r : split.attack_train) d.features(r, 0) = 1.0;
  LogisticModel shadow;
  shadow.weights.assign(d.dim(), 0.0);
  shadow.weights[0] = 50.0;
  AttackerRows rows = AttackerRows::FromSplit(split);
  AttackModel attack = TrainAttack(shadow, d, rows, TrainConfig{}).value();
  EXPECT_GT(AttackTrainingAccuracy(attack, shadow, d, rows), 0.9);
}

TEST(TrainAttackTest, ConstantShadowCarriesNoSignal) {
  Dataset d = SynthDataset({.n = 400, .seed = 3});
  FourWaySplit split = MakeFourWaySplit(d.labels, 3).value();
  LogisticModel shadow;
  shadow.weights.assign(d.dim(), 0.0);
  AttackerRows rows = AttackerRows::FromSplit(split);
  AttackModel attack = TrainAttack(shadow, d, rows, TrainConfig{}).value();
  EXPECT_NEAR(AttackTrainingAccuracy(attack, shadow, d, rows), 0.5, 0.05);
}

TEST(TrainAttackTest, DeterministicAndValidated) {
  Dataset d = SynthDataset({.n = 400, .seed = 4});
  FourWaySplit split = MakeFourWaySplit(d.labels, 4).value();
  LogisticModel shadow =
      Train(d.features.SelectRows(split.attack_train),
            SelectElements(d.labels, split.attack_train), TrainConfig{})
          .value();
  AttackerRows rows = AttackerRows::FromSplit(split);
  AttackModel a = TrainAttack(shadow, d, rows, TrainConfig{}).value();
  AttackModel b = TrainAttack(shadow, d, rows, TrainConfig{}).value();
  for (int y = 0; y < 2; ++y) {
    EXPECT_EQ(a.per_label[y].weights, b.per_label[y].weights);
    EXPECT_EQ(a.per_label[y].bias, b.per_label[y].bias);
    EXPECT_EQ(a.per_label[y].dim(), kAttackFeatureDim);
  }

  LogisticModel wrong_dim;
  wrong_dim.weights = {1.0};
  EXPECT_FALSE(TrainAttack(wrong_dim, d, rows, TrainConfig{}).ok());
  AttackerRows no_nonmembers{rows.members, {}};
  EXPECT_FALSE(TrainAttack(shadow, d, no_nonmembers, TrainConfig{}).ok());
}

TEST(TrainAttackTest, NeverReadsVictimRows) {
  Dataset d = SynthDataset({.n = 400, .seed = 5});
  FourWaySplit split = MakeFourWaySplit(d.labels, 5).value();
  LogisticModel shadow =
      Train(d.features.SelectRows(split.attack_train),
            SelectElements(d.labels, split.attack_train), TrainConfig{})
          .value();
  AttackerRows rows = AttackerRows::FromSplit(split);
  AttackModel clean = TrainAttack(shadow, d, rows, TrainConfig{}).value();

  Dataset poisoned = d;
  for (const auto* part : {&split.victim_train, &split.victim_test}) {
    for (size_t r : *part) {
      for (double& v : poisoned.features.MutableRow(r)) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      poisoned.labels[r] = 1 - poisoned.labels[r];
    }
  }
  AttackModel after = TrainAttack(shadow, poisoned, rows, TrainConfig{}).value();
  for (int y = 0; y < 2; ++y) {
    EXPECT_EQ(after.per_label[y].weights, clean.per_label[y].weights);
    EXPECT_EQ(after.per_label[y].bias, clean.per_label[y].bias);
  }
}

TEST(RunMiaTest, ConstantAttacks) {
  Dataset d = SynthDataset({.n = 200, .seed = 6});
  FourWaySplit split = MakeFourWaySplit(d.labels, 6).value();
  LogisticModel victim;
  victim.weights.assign(d.dim(), 0.1);
  MiaOutcome all =
      RunMia(AttackModel::Constant(true), ModelScorer(victim), d, split)
          .value();
  EXPECT_EQ(all.tpr, 1.0);
  EXPECT_EQ(all.fpr, 1.0);
  EXPECT_EQ(all.true_positive_count, all.member_count);
  EXPECT_EQ(all.member_count, static_cast<int64_t>(split.victim_train.size()));
  EXPECT_EQ(all.nonmember_count,
            static_cast<int64_t>(split.victim_test.size()));
  MiaOutcome none =
      RunMia(AttackModel::Constant(false), ModelScorer(victim), d, split)
          .value();
  EXPECT_EQ(none.tpr, 0.0);
  EXPECT_EQ(none.fpr, 0.0);
  EXPECT_EQ(TrueRevealedRecords(none), 0);
}

TEST(RunMiaTest, Errors) {
  Dataset d = SynthDataset({.n = 200, .seed = 7});
  FourWaySplit split = MakeFourWaySplit(d.labels, 7).value();
  LogisticModel victim;
  victim.weights.assign(d.dim(), 0.0);
  FourWaySplit empty = split;
  empty.victim_test.clear();
  EXPECT_FALSE(
      RunMia(AttackModel::Constant(true), ModelScorer(victim), d, empty).ok());
  VictimScorer short_scorer = [](const Matrix&) {
    return absl::StatusOr<std::vector<double>>(std::vector<double>{0.5});
  };
  EXPECT_FALSE(RunMia(AttackModel::Constant(true), short_scorer, d, split).ok());
  VictimScorer out_of_range = [](const Matrix& x) {
    return absl::StatusOr<std::vector<double>>(
        std::vector<double>(x.rows(), 1.5));
  };
  EXPECT_FALSE(RunMia(AttackModel::Constant(true), out_of_range, d, split).ok());
}

TEST(RunMiaTest, OverfitVictimLeaks) {
  // 60 victim training rows in 30 dimensions with weak class signal and no
  // regularization: the victim memorizes its training set.
  Dataset d = SynthDataset({.n = 240, .d_numeric = 30, .d_categorical = 0,
                            .class_separation = 0.5, .seed = 7});
  TrainConfig overfit;
  overfit.lambda = 0.0;
  overfit.epochs = 2000;
  std::vector<double> leakage;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    leakage.push_back(AuditNonPrivate(d, seed, overfit).leakage);
  }
  EXPECT_GE(Median(leakage), 0.05);
}

TEST(RunMiaTest, NullAttackIsCalibrated) {
  Dataset d = SynthDataset({.n = 8000, .class_separation = 0.0, .seed = 8});
  std::vector<double> abs_leakage;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    abs_leakage.push_back(
        std::abs(AuditNonPrivate(d, seed, TrainConfig{}).leakage));
  }
  EXPECT_LT(Median(abs_leakage), 0.05);
}

TEST(MetricsTest, LeakageExamples) {
  MiaOutcome o;
  o.tpr = 1.0;
  o.fpr = 0.0;
  EXPECT_EQ(PrivacyLeakage(o), 1.0);
  o.tpr = 0.5;
  o.fpr = 0.5;
  EXPECT_EQ(PrivacyLeakage(o), 0.0);
  o.tpr = 0.48;
  o.fpr = 0.50;
  EXPECT_NEAR(PrivacyLeakage(o), -0.02, 1e-15);
}

TEST(MetricsTest, UtilityLossExamples) {
  EXPECT_NEAR(UtilityLoss(0.80, 0.85), 0.05, 1e-15);
  EXPECT_EQ(UtilityLoss(0.85, 0.85), 0.0);
  EXPECT_NEAR(UtilityLoss(0.90, 0.85), -0.05, 1e-15);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.Uniform();
    EXPECT_EQ(UtilityLoss(a, a), 0.0);
  }
}

TEST(MetricsTest, TrueRevealedRecordsExamples) {
  MiaOutcome o;
  o.member_count = 100;
  o.true_positive_count = 0;
  o.tpr = 0.0;
  EXPECT_EQ(TrueRevealedRecords(o), 0);
  o.true_positive_count = 100;
  o.tpr = 1.0;
  EXPECT_EQ(TrueRevealedRecords(o), 100);
  o.true_positive_count = 7;
  o.tpr = 0.07;
  EXPECT_EQ(TrueRevealedRecords(o), 7);
  EXPECT_EQ(TrueRevealedRate(o), 0.07);
}

TEST(MetricsTest, ReportInvariantsHoldOnRealRuns) {
  Dataset d = SynthDataset({.n = 600, .seed = 10});
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    AuditRun run = AuditNonPrivate(d, seed, TrainConfig{});
    const MiaOutcome& o = run.outcome;
    AuditReport r = MakeAuditReport(DpMethod::kObjectivePerturbation, 1.0,
                                    seed, 0.8, 0.85, o);
    EXPECT_GE(r.privacy_leakage, -1.0);
    EXPECT_LE(r.privacy_leakage, 1.0);
    EXPECT_EQ(r.privacy_leakage, r.tpr - r.fpr);
    EXPECT_EQ(r.utility_loss, r.acc_nonprivate - r.acc_private);
    EXPECT_LE(o.true_positive_count, o.member_count);
    EXPECT_EQ(o.tpr, static_cast<double>(o.true_positive_count) /
                         o.member_count);
    EXPECT_EQ(r.true_revealed_records,
              std::llround(o.tpr * o.member_count));
    EXPECT_EQ(r.trr_rate, o.tpr);
  }
}

TEST(RunMiaTest, PateVictimIsScoredOnNoisyVotes) {
  Dataset d = SynthDataset({.n = 800, .seed = 11});
  FourWaySplit split = MakeFourWaySplit(d.labels, 11).value();
  Rng rng(12);
  TeacherEnsemble e =
      PateTrain(d.features.SelectRows(split.victim_train),
                SelectElements(d.labels, split.victim_train), 5,
                TrainConfig{}, rng)
          .value();
  PrivateModelArtifact artifact{DpMethod::kPredictionPerturbation,
                                PrivacyBudget::Create(0.5).value(), e,
                                NoiseKind::kLaplace, {}};
  Rng noise(13);
  VictimScorer scorer = [&](const Matrix& x) {
    return ReleasedProbabilities(artifact, x, noise);
  };
  MiaOutcome o = RunMia(AttackModel::Constant(true), scorer, d, split).value();
  EXPECT_EQ(o.tpr, 1.0);
  std::vector<double> p =
      scorer(d.features.SelectRows(split.victim_test)).value();
  bool fractional = false;
  for (double v : p) fractional = fractional || (v > 0.0 && v < 1.0);
  EXPECT_TRUE(fractional);
}

}  // namespace
}  // namespace dpla
