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

// dp-la: differentially private learning-analytics sweeps and audits.
//
//   dp-la run --config cfg.json [--seed N] [--out DIR] [--force] [--threads N]
//   dp-la synth --n N --numeric D --categorical C --separation S --seed N
//               --out DIR
//   dp-la check-dp --epsilon E --trials T
//   dp-la audit --config cfg.json
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 failed cell(s) or
// failed check.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dpla/dpla.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitFailed = 2;

int Fail(const absl::Status& status) {
  std::cerr << "dp-la: " << status.message() << "\n";
  return kExitConfigError;
}

struct RunArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out;
  bool force = false;
  std::optional<int> threads;
};

int RunCommand(const RunArgs& args) {
  auto config = dpla::ExperimentConfig::Load(args.config_path);
  if (!config.ok()) return Fail(config.status());
  if (args.seed) config->master_seed = *args.seed;
  if (!args.out.empty()) config->output_dir = args.out;

  auto results = dpla::RunSweep(*config, args.threads);
  if (!results.ok()) return Fail(results.status());
  const dpla::SweepSummary summary = dpla::Summarize(*results);
  absl::Status written = dpla::EmitReport(*config, *results, summary,
                                          config->output_dir, args.force);
  if (!written.ok()) return Fail(written);

  int failed = 0;
  for (const dpla::CellResult& row : results->rows) {
    if (!row.ok()) {
      ++failed;
      std::cerr << "cell " << dpla::DpMethodName(row.cell.method)
                << " eps=" << row.cell.epsilon << " seed=" << row.cell.seed
                << ": " << row.status << "\n";
    }
  }
  std::printf("%zu cells (%d failed) in %.2fs on %d thread(s); fingerprint %s\n",
              results->rows.size(), failed, results->wall_time_seconds,
              results->threads_used, results->config_fingerprint.c_str());
  std::printf("reports written to %s\n", config->output_dir.c_str());
  return failed > 0 ? kExitFailed : kExitOk;
}

struct SynthArgs {
  dpla::SynthOptions options;
  std::string out;
  bool force = false;
};

int SynthCommand(const SynthArgs& args) {
  auto synth = dpla::SynthGenerate(args.options);
  if (!synth.ok()) return Fail(synth.status());
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) return Fail(absl::PermissionDeniedError("cannot create " + args.out));
  const fs::path data = fs::path(args.out) / "data.csv";
  const fs::path schema = fs::path(args.out) / "schema.json";
  if (!args.force && (fs::exists(data) || fs::exists(schema))) {
    return Fail(absl::AlreadyExistsError(
        "synth output exists in " + args.out + "; pass --force to overwrite"));
  }
  absl::Status s = dpla::WriteFile(data.string(), synth->table.ToCsv());
  if (s.ok()) {
    s = dpla::WriteFile(schema.string(), synth->schema.ToJson().dump(2) + "\n");
  }
  if (!s.ok()) return Fail(s);
  std::printf("wrote %s and %s\n", data.c_str(), schema.c_str());
  return kExitOk;
}

struct CheckDpArgs {
  double epsilon = 1.0;
  dpla::DpCheckOptions options;
  uint64_t seed = 0;
};

int CheckDpCommand(const CheckDpArgs& args) {
  auto budget = dpla::PrivacyBudget::Create(args.epsilon);
  if (!budget.ok()) return Fail(budget.status());
  dpla::Rng rng(args.seed);
  auto report = dpla::CountQueryDpCheck(*budget, args.options, rng);
  if (!report.ok()) return Fail(report.status());
  std::printf(
      "epsilon=%g trials=%lld bins_compared=%d max_ratio=%.6f bound=%.6f "
      "%s\n",
      args.epsilon, static_cast<long long>(args.options.trials),
      report->bins_compared, report->max_ratio, report->bound,
      report->passed ? "PASS" : "FAIL");
  return report->passed ? kExitOk : kExitFailed;
}

struct AuditArgs {
  std::string config_path;
  std::string method;
  std::optional<double> epsilon;
  std::optional<int64_t> seed;
};

int AuditCommand(const AuditArgs& args) {
  auto config = dpla::ExperimentConfig::Load(args.config_path);
  if (!config.ok()) return Fail(config.status());
  dpla::SweepCell cell{config->methods.front(), config->epsilons.front(),
                       dpla::EnumerateCells(*config).front().seed};
  if (!args.method.empty()) {
    auto method = dpla::ParseDpMethod(args.method);
    if (!method.ok()) return Fail(method.status());
    cell.method = *method;
  }
  if (args.epsilon) cell.epsilon = *args.epsilon;
  if (args.seed) cell.seed = *args.seed;

  auto dataset = dpla::LoadExperimentData(*config);
  if (!dataset.ok()) return Fail(dataset.status());
  dpla::CellDetail detail;
  auto report = dpla::RunCell(*dataset, *config, cell, &detail);
  if (!report.ok()) {
    std::cerr << "dp-la: cell failed: " << report.status().message() << "\n";
    return kExitFailed;
  }
  const dpla::MiaOutcome& o = detail.outcome;
  const dpla::SeedContext& ctx = detail.seed_context;
  std::printf("cell: method=%s epsilon=%g seed=%lld\n",
              std::string(dpla::DpMethodName(cell.method)).c_str(),
              cell.epsilon, static_cast<long long>(cell.seed));
  std::printf("split: victim_train=%zu victim_test=%zu attack_train=%zu "
              "attack_test=%zu\n",
              ctx.split.victim_train.size(), ctx.split.victim_test.size(),
              ctx.split.attack_train.size(), ctx.split.attack_test.size());
  std::printf("artifact: %s\n", detail.artifact_metadata.dump().c_str());
  std::printf("baseline objective=%.6g shadow objective=%.6g\n",
              ctx.baseline.final_objective, ctx.shadow.final_objective);
  for (int y = 0; y < 2; ++y) {
    const dpla::LogisticModel& m = ctx.attack.per_label[y];
    std::printf("attack[label=%d]: weights=[%.6g, %.6g, %.6g] bias=%.6g\n", y,
                m.weights[0], m.weights[1], m.weights[2], m.bias);
  }
  std::printf("accuracy: nonprivate=%.6f private=%.6f utility_loss=%.6f\n",
              report->acc_nonprivate, report->acc_private,
              report->utility_loss);
  std::printf("mia: members=%lld flagged=%lld tpr=%.6f | nonmembers=%lld "
              "flagged=%lld fpr=%.6f\n",
              static_cast<long long>(o.member_count),
              static_cast<long long>(o.true_positive_count), o.tpr,
              static_cast<long long>(o.nonmember_count),
              static_cast<long long>(o.false_positive_count), o.fpr);
  std::printf("privacy_leakage=%.6f true_revealed_records=%lld trr_rate=%.6f\n",
              report->privacy_leakage,
              static_cast<long long>(report->true_revealed_records),
              report->trr_rate);
  auto baseline = dpla::AuditBaseline(*dataset, ctx);
  if (baseline.ok()) {
    std::printf("reference (non-private victim): tpr=%.6f fpr=%.6f "
                "privacy_leakage=%.6f\n",
                baseline->tpr, baseline->fpr, dpla::PrivacyLeakage(*baseline));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private learning-analytics pipeline and audit"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an epsilon sweep from a config");
  run->add_option("--config", run_args.config_path, "Config JSON")->required();
  run->add_option("--seed", run_args.seed, "Override the master seed");
  run->add_option("--out", run_args.out, "Override the output directory");
  run->add_flag("--force", run_args.force, "Overwrite existing reports");
  run->add_option("--threads", run_args.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a synthetic CSV + schema");
  synth->add_option("--n", synth_args.options.n, "Rows")->required();
  synth->add_option("--numeric", synth_args.options.d_numeric,
                    "Numeric columns")->required();
  synth->add_option("--categorical", synth_args.options.d_categorical,
                    "Categorical columns")->required();
  synth->add_option("--separation", synth_args.options.class_separation,
                    "Class mean gap per numeric column")->required();
  synth->add_option("--seed", synth_args.options.seed, "Seed")->required();
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_flag("--force", synth_args.force, "Overwrite existing files");

  CheckDpArgs check_args;
  auto* check = app.add_subcommand(
      "check-dp", "Empirical epsilon-DP check of the Laplace count query");
  check->add_option("--epsilon", check_args.epsilon, "Epsilon")->required();
  check->add_option("--trials", check_args.options.trials,
                    "Trials per dataset")->required();
  check->add_option("--bins", check_args.options.bins, "Histogram bins")
      ->capture_default_str();
  check->add_option("--tolerance", check_args.options.tolerance_factor,
                    "Multiplier on e^epsilon")->capture_default_str();
  check->add_option("--seed", check_args.seed, "Seed")->capture_default_str();

  AuditArgs audit_args;
  auto* audit = app.add_subcommand(
      "audit", "Run one sweep cell and print the audit breakdown");
  audit->add_option("--config", audit_args.config_path, "Config JSON")
      ->required();
  audit->add_option("--method", audit_args.method,
                    "Method (default: first in config)");
  audit->add_option("--epsilon", audit_args.epsilon,
                    "Epsilon (default: first in config)");
  audit->add_option("--seed", audit_args.seed,
                    "Seed (default: smallest in config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (*run) return RunCommand(run_args);
  if (*synth) return SynthCommand(synth_args);
  if (*check) return CheckDpCommand(check_args);
  return AuditCommand(audit_args);
}
