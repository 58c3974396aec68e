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

#include "dpla/experiment.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpla {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

fs::path FreshDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("dpla_experiment_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.synth.n = 400;
  c.epsilons = {0.1, 10.0};
  c.seeds = {1, 2};
  c.num_teachers = 5;
  c.master_seed = 3;
  return c;
}

const Dataset& SmallData() {
  static const Dataset* d =
      new Dataset(LoadExperimentData(SmallConfig()).value());
  return *d;
}

std::map<std::string, std::vector<std::string>> RowsByCell(
    const std::string& csv) {
  auto records = ParseCsv(csv).value();
  std::map<std::string, std::vector<std::string>> out;
  for (size_t r = 1; r < records.size(); ++r) {
    out[records[r][0] + "/" + records[r][1] + "/" + records[r][2]] =
        records[r];
  }
  return out;
}

TEST(ConfigTest, DefaultsMatchTheStudyGrid) {
  ExperimentConfig c;
  EXPECT_EQ(c.epsilons, (std::vector<double>{0.01, 0.1, 1, 10, 100, 1000,
                                             10000}));
  EXPECT_EQ(c.seeds, (std::vector<int64_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(c.delta, 1e-5);
  EXPECT_EQ(c.num_teachers, 10);
  EXPECT_EQ(c.train.lambda, 1e-4);
  EXPECT_EQ(c.train.epochs, 100);
  EXPECT_EQ(c.methods.size(), 3u);
  EXPECT_TRUE(c.Validate().ok());
}

TEST(ConfigTest, ValidationErrors) {
  auto invalid = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    return !c.Validate().ok();
  };
  EXPECT_TRUE(invalid([](auto& c) { c.epsilons = {1.0, 0.1}; }));
  EXPECT_TRUE(invalid([](auto& c) { c.epsilons = {1.0, 1.0}; }));
  EXPECT_TRUE(invalid([](auto& c) { c.epsilons = {-1.0}; }));
  EXPECT_TRUE(invalid([](auto& c) { c.epsilons.clear(); }));
  EXPECT_TRUE(invalid([](auto& c) { c.seeds.clear(); }));
  EXPECT_TRUE(invalid([](auto& c) { c.seeds = {1, 1}; }));
  EXPECT_TRUE(invalid([](auto& c) { c.methods.clear(); }));
  EXPECT_TRUE(invalid([](auto& c) {
    c.methods = {DpMethod::kInputPerturbation, DpMethod::kInputPerturbation};
  }));
  EXPECT_TRUE(invalid([](auto& c) { c.delta = 0.0; }));
  EXPECT_TRUE(invalid([](auto& c) { c.num_teachers = 1; }));
  EXPECT_TRUE(invalid([](auto& c) { c.threads = 0; }));
  EXPECT_TRUE(invalid([](auto& c) { c.data_path = "data.csv"; }));
  EXPECT_TRUE(invalid([](auto& c) { c.train.epochs = 0; }));
  // delta is irrelevant without input perturbation.
  EXPECT_FALSE(invalid([](auto& c) {
    c.methods = {DpMethod::kObjectivePerturbation};
    c.delta = 0.0;
  }));
}

TEST(ConfigTest, FromJson) {
  nlohmann::json j = {{"data_path", "data.csv"},
                      {"schema_path", "/abs/schema.json"},
                      {"methods", {"objective_perturbation"}},
                      {"epsilons", {0.5, 2}},
                      {"seeds", {7}},
                      {"train", {{"lambda", 0.01}}},
                      {"threads", 2}};
  ExperimentConfig c = ExperimentConfig::FromJson(j, "/base").value();
  EXPECT_EQ(c.data_path, "/base/data.csv");
  EXPECT_EQ(c.schema_path, "/abs/schema.json");
  EXPECT_EQ(c.methods, std::vector<DpMethod>{DpMethod::kObjectivePerturbation});
  EXPECT_EQ(c.epsilons, (std::vector<double>{0.5, 2.0}));
  EXPECT_EQ(c.seeds, std::vector<int64_t>{7});
  EXPECT_EQ(c.train.lambda, 0.01);
  EXPECT_EQ(c.train.epochs, 100);
  EXPECT_EQ(c.threads, 2);

  EXPECT_FALSE(
      ExperimentConfig::FromJson({{"methods", {"dp_sgd"}}}).ok());
  EXPECT_FALSE(ExperimentConfig::FromJson({{"epsilons", "many"}}).ok());
  EXPECT_FALSE(ExperimentConfig::FromJson({{"epsilons", {2, 1}}}).ok());
}

TEST(ConfigTest, FingerprintCoversOnlyResultInputs) {
  ExperimentConfig a = SmallConfig();
  ExperimentConfig b = a;
  b.output_dir = "/elsewhere";
  b.threads = 7;
  b.record_wall_time = true;
  EXPECT_EQ(a.Fingerprint(), b.Fingerprint());
  EXPECT_EQ(a.Fingerprint().size(), 16u);
  b = a;
  b.master_seed = 4;
  EXPECT_NE(a.Fingerprint(), b.Fingerprint());
  b = a;
  b.epsilons = {0.1, 100.0};
  EXPECT_NE(a.Fingerprint(), b.Fingerprint());
  b = a;
  b.synth.n = 401;
  EXPECT_NE(a.Fingerprint(), b.Fingerprint());
}

TEST(EnumerateCellsTest, DefaultGridHas105CellsInOrder) {
  ExperimentConfig c;
  std::vector<SweepCell> cells = EnumerateCells(c);
  ASSERT_EQ(cells.size(), 105u);
  EXPECT_EQ(cells[0].method, DpMethod::kInputPerturbation);
  EXPECT_EQ(cells[0].epsilon, 0.01);
  EXPECT_EQ(cells[0].seed, 1);
  EXPECT_EQ(cells[1].seed, 2);
  EXPECT_EQ(cells[5].epsilon, 0.1);
  EXPECT_EQ(cells[35].method, DpMethod::kObjectivePerturbation);
  EXPECT_EQ(cells[104].method, DpMethod::kPredictionPerturbation);
  EXPECT_EQ(cells[104].epsilon, 10000);
  EXPECT_EQ(cells[104].seed, 5);

  c.seeds = {3, 1, 2};
  cells = EnumerateCells(c);
  EXPECT_EQ(cells[0].seed, 1);
  EXPECT_EQ(cells[2].seed, 3);
}

TEST(MedianTest, Examples) {
  EXPECT_EQ(Median({0.1, 0.2, 0.3, 0.4, 0.5}), 0.3);
  EXPECT_EQ(Median({0.5, 0.1, 0.4, 0.2, 0.3}), 0.3);
  EXPECT_EQ(Median({0.7}), 0.7);
  EXPECT_EQ(Median({1.0, 2.0}), 1.5);
  EXPECT_FALSE(Median({}).has_value());
}

SweepResults FakeResults(const std::vector<std::optional<double>>& losses) {
  SweepResults results;
  int64_t seed = 1;
  for (const auto& loss : losses) {
    CellResult row;
    row.cell = {DpMethod::kObjectivePerturbation, 1.0, seed++};
    if (loss) {
      AuditReport r;
      r.utility_loss = *loss;
      r.member_count = 10;
      row.report = r;
      row.status = "ok";
    } else {
      row.status = "failed:boom";
    }
    results.rows.push_back(row);
  }
  return results;
}

TEST(SummarizeTest, FailedCellsAreExcludedNotZeroed) {
  SweepSummary s = Summarize(FakeResults({0.1, 0.2, 0.3, 0.4, 0.5}));
  ASSERT_EQ(s.groups.size(), 1u);
  EXPECT_EQ(s.groups[0].utility_loss, 0.3);

  s = Summarize(FakeResults({0.1, std::nullopt, 0.3, 0.4, 0.5}));
  EXPECT_EQ(s.groups[0].ok_count, 4);
  EXPECT_EQ(s.groups[0].failed_count, 1);
  EXPECT_EQ(s.groups[0].utility_loss, 0.35);

  s = Summarize(FakeResults({std::nullopt, std::nullopt}));
  EXPECT_FALSE(s.groups[0].utility_loss.has_value());
  EXPECT_FALSE(s.groups[0].privacy_leakage.has_value());
  EXPECT_EQ(s.Find(DpMethod::kInputPerturbation, 1.0), nullptr);
}

TEST(ReportTest, FailedRowsAndMissingGroups) {
  ExperimentConfig c;
  c.methods = {DpMethod::kObjectivePerturbation};
  c.epsilons = {1.0};
  SweepResults results = FakeResults({std::nullopt, 0.2});
  const std::string csv = ResultsCsv(results, false);
  auto records = ParseCsv(csv).value();
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0], ResultsCsvColumns());
  EXPECT_EQ(records[1][12], "failed:boom");
  for (int i = 3; i < 12; ++i) EXPECT_EQ(records[1][i], "") << i;
  EXPECT_EQ(records[2][5], "0.2");
  EXPECT_EQ(records[2][12], "ok");

  fs::path dir = FreshDir("missing_groups");
  SweepResults all_failed = FakeResults({std::nullopt});
  ASSERT_TRUE(EmitReport(c, all_failed, Summarize(all_failed), dir.string(),
                         false)
                  .ok());
  EXPECT_EQ(ReadFile((dir / "fig_utility_loss.csv").string()).value(),
            "epsilon,objective_perturbation\n1,NA\n");
  EXPECT_EQ(ReadFile((dir / "fig_trr.csv").string()).value(),
            "epsilon,objective_perturbation,objective_perturbation_rate\n"
            "1,NA,NA\n");
  nlohmann::json summary = nlohmann::json::parse(
      ReadFile((dir / "summary.json").string()).value());
  EXPECT_TRUE(summary["groups"][0]["median_utility_loss"].is_null());
}

TEST(SweepTest, RowCountOrderAndStatus) {
  ExperimentConfig c = SmallConfig();
  SweepResults r = RunSweepOnData(SmallData(), c, 1).value();
  std::vector<SweepCell> cells = EnumerateCells(c);
  ASSERT_EQ(r.rows.size(), 3u * 2 * 2);
  for (size_t i = 0; i < cells.size(); ++i) {
    EXPECT_EQ(r.rows[i].cell.method, cells[i].method);
    EXPECT_EQ(r.rows[i].cell.epsilon, cells[i].epsilon);
    EXPECT_EQ(r.rows[i].cell.seed, cells[i].seed);
    EXPECT_EQ(r.rows[i].status, "ok");
  }
  EXPECT_EQ(r.config_fingerprint, c.Fingerprint());
}

TEST(SweepTest, ThreadCountDoesNotChangeResults) {
  ExperimentConfig c = SmallConfig();
  const std::string one =
      ResultsCsv(RunSweepOnData(SmallData(), c, 1).value(), false);
  const std::string four =
      ResultsCsv(RunSweepOnData(SmallData(), c, 4).value(), false);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, ResultsCsv(RunSweepOnData(SmallData(), c, 1).value(), false));
}

TEST(SweepTest, CellsAreIsolatedFromEachOther) {
  ExperimentConfig a = SmallConfig();
  a.epsilons = {0.1, 1.0};
  a.seeds = {1, 2};
  ExperimentConfig b = SmallConfig();
  b.methods = {DpMethod::kPredictionPerturbation, DpMethod::kInputPerturbation};
  b.epsilons = {1.0, 5.0};
  b.seeds = {2, 9};
  auto rows_a = RowsByCell(
      ResultsCsv(RunSweepOnData(SmallData(), a, 1).value(), false));
  auto rows_b = RowsByCell(
      ResultsCsv(RunSweepOnData(SmallData(), b, 1).value(), false));
  int shared = 0;
  for (const auto& [key, row] : rows_b) {
    auto it = rows_a.find(key);
    if (it == rows_a.end()) continue;
    EXPECT_EQ(it->second, row) << key;
    ++shared;
  }
  EXPECT_EQ(shared, 2);
}

TEST(SweepTest, MasterSeedChangesResults) {
  ExperimentConfig a = SmallConfig();
  ExperimentConfig b = a;
  b.master_seed = 99;
  EXPECT_NE(ResultsCsv(RunSweepOnData(SmallData(), a, 1).value(), false),
            ResultsCsv(RunSweepOnData(SmallData(), b, 1).value(), false));
}

TEST(SweepTest, CellFailuresAreContained) {
  ExperimentConfig c;
  c.synth.n = 40;
  c.epsilons = {1.0};
  c.seeds = {1, 2};
  c.num_teachers = 3;  // 3 * 4 > 10 victim_train rows.
  SweepResults r = RunSweep(c, 1).value();
  ASSERT_EQ(r.rows.size(), 6u);
  for (const CellResult& row : r.rows) {
    if (row.cell.method == DpMethod::kPredictionPerturbation) {
      EXPECT_FALSE(row.ok());
      EXPECT_THAT(row.status, HasSubstr("failed:"));
      EXPECT_THAT(row.status, HasSubstr("n/4"));
    } else {
      EXPECT_EQ(row.status, "ok");
    }
  }
  SweepSummary s = Summarize(r);
  EXPECT_FALSE(s.Find(DpMethod::kPredictionPerturbation, 1.0)
                   ->utility_loss.has_value());
  EXPECT_TRUE(s.Find(DpMethod::kInputPerturbation, 1.0)
                  ->utility_loss.has_value());
}

TEST(SweepTest, BadDataFailsTheWholeSweep) {
  ExperimentConfig c = SmallConfig();
  c.data_path = "/nonexistent/data.csv";
  c.schema_path = "/nonexistent/schema.json";
  EXPECT_FALSE(RunSweep(c, 1).ok());
}

TEST(ThreadsTest, ResolutionOrder) {
  ExperimentConfig c;
  setenv(kThreadsEnvVar, "3", 1);
  EXPECT_EQ(ResolveThreadCount(c), 3);
  c.threads = 2;
  EXPECT_EQ(ResolveThreadCount(c), 2);
  EXPECT_EQ(ResolveThreadCount(c, 5), 5);
  unsetenv(kThreadsEnvVar);
  c.threads.reset();
  EXPECT_GE(ResolveThreadCount(c), 1);
}

TEST(ReportTest, EmitRefusesToOverwriteWithoutForce) {
  ExperimentConfig c = SmallConfig();
  SweepResults r = RunSweepOnData(SmallData(), c, 1).value();
  SweepSummary s = Summarize(r);
  fs::path dir = FreshDir("overwrite");
  ASSERT_TRUE(EmitReport(c, r, s, dir.string(), false).ok());
  for (const std::string& name : ReportFileNames()) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  ASSERT_TRUE(WriteFile((dir / "results.csv").string(), "sentinel").ok());
  absl::Status again = EmitReport(c, r, s, dir.string(), false);
  EXPECT_TRUE(absl::IsAlreadyExists(again)) << again;
  EXPECT_EQ(ReadFile((dir / "results.csv").string()).value(), "sentinel");
  ASSERT_TRUE(EmitReport(c, r, s, dir.string(), true).ok());
  EXPECT_EQ(ReadFile((dir / "results.csv").string()).value(),
            ResultsCsv(r, false));
}

TEST(ReportTest, SummaryJsonRoundTripsAndMatchesCsvMedians) {
  ExperimentConfig c = SmallConfig();
  c.seeds = {1, 2, 3};
  SweepResults r = RunSweepOnData(SmallData(), c, 1).value();
  fs::path dir = FreshDir("summary");
  ASSERT_TRUE(EmitReport(c, r, Summarize(r), dir.string(), false).ok());

  const std::string text = ReadFile((dir / "summary.json").string()).value();
  nlohmann::json summary = nlohmann::json::parse(text);
  EXPECT_EQ(nlohmann::json::parse(summary.dump()), summary);
  EXPECT_EQ(summary["config_fingerprint"], c.Fingerprint());
  EXPECT_EQ(summary["cells"], 18);

  // Recompute medians straight from results.csv.
  auto records =
      ParseCsv(ReadFile((dir / "results.csv").string()).value()).value();
  std::map<std::pair<std::string, double>, std::vector<double>> loss, leak;
  for (size_t i = 1; i < records.size(); ++i) {
    const auto& row = records[i];
    const auto key = std::make_pair(row[0], std::stod(row[1]));
    loss[key].push_back(std::stod(row[5]));
    leak[key].push_back(std::stod(row[8]));
  }
  auto median3 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[1];
  };
  ASSERT_EQ(summary["groups"].size(), loss.size());
  for (const auto& g : summary["groups"]) {
    const auto key = std::make_pair(g["method"].get<std::string>(),
                                    g["epsilon"].get<double>());
    EXPECT_EQ(g["median_utility_loss"].get<double>(), median3(loss[key]));
    EXPECT_EQ(g["median_privacy_leakage"].get<double>(), median3(leak[key]));
  }
}

// --- Command-line interface -------------------------------------------------

int RunCli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = fs::temp_directory_path() /
                       ("dpla_cli_output_" + std::to_string(getpid()) + ".txt");
  const std::string command = std::string(DPLA_CLI_PATH) + " " + args +
                              " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  if (output != nullptr) *output = ReadFile(log.string()).value_or("");
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path WriteConfig(const fs::path& dir, const nlohmann::json& j) {
  const fs::path path = dir / "config.json";
  EXPECT_TRUE(WriteFile(path.string(), j.dump(2)).ok());
  return path;
}

TEST(CliTest, RunWritesReportsAndHonoursForce) {
  fs::path dir = FreshDir("cli_run");
  fs::path config = WriteConfig(
      dir, {{"synth", {{"n", 300}}}, {"epsilons", {1, 100}}, {"seeds", {1}},
            {"num_teachers", 5}, {"output_dir", "unused"}});
  const std::string out = (dir / "out").string();
  std::string log;
  EXPECT_EQ(RunCli("run --config " + config.string() + " --out " + out, &log),
            0)
      << log;
  for (const std::string& name : ReportFileNames()) {
    EXPECT_TRUE(fs::exists(fs::path(out) / name)) << name;
  }
  EXPECT_EQ(RunCli("run --config " + config.string() + " --out " + out, &log),
            1);
  EXPECT_THAT(log, HasSubstr("--force"));
  EXPECT_EQ(RunCli("run --config " + config.string() + " --out " + out +
                   " --force --threads 2"),
            0);
}

TEST(CliTest, FailedCellExitsWithTwo) {
  fs::path dir = FreshDir("cli_failed");
  fs::path config = WriteConfig(
      dir, {{"synth", {{"n", 40}}}, {"epsilons", {1}}, {"seeds", {1}},
            {"num_teachers", 3}, {"output_dir", (dir / "out").string()}});
  std::string log;
  EXPECT_EQ(RunCli("run --config " + config.string(), &log), 2) << log;
  EXPECT_THAT(log, HasSubstr("failed"));
  EXPECT_TRUE(fs::exists(dir / "out" / "results.csv"));
}

TEST(CliTest, ConfigErrorsExitWithOne) {
  fs::path dir = FreshDir("cli_bad");
  fs::path config = WriteConfig(dir, {{"epsilons", {10, 1}}});
  EXPECT_EQ(RunCli("run --config " + config.string()), 1);
  EXPECT_EQ(RunCli("run --config " + (dir / "missing.json").string()), 1);
  EXPECT_EQ(RunCli("run"), 1);
  EXPECT_EQ(RunCli("check-dp --epsilon -1"), 1);
}

TEST(CliTest, SynthOutputFeedsARun) {
  fs::path dir = FreshDir("cli_synth");
  std::string log;
  ASSERT_EQ(RunCli("synth --n 300 --numeric 3 --categorical 1 --separation 2 "
                   "--seed 4 --out " + (dir / "data").string(),
                   &log),
            0)
      << log;
  EXPECT_EQ(RunCli("synth --n 300 --seed 4 --out " + (dir / "data").string()),
            1);
  fs::path config = WriteConfig(
      dir, {{"data_path", "data/data.csv"},
            {"schema_path", "data/schema.json"},
            {"methods", {"objective_perturbation"}},
            {"epsilons", {1}},
            {"seeds", {1}},
            {"output_dir", (dir / "out").string()}});
  EXPECT_EQ(RunCli("run --config " + config.string(), &log), 0) << log;
  auto records =
      ParseCsv(ReadFile((dir / "out" / "results.csv").string()).value())
          .value();
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].back(), "ok");
}

TEST(CliTest, CheckDpAndAudit) {
  std::string log;
  EXPECT_EQ(RunCli("check-dp --epsilon 1 --trials 100000", &log), 0) << log;
  EXPECT_THAT(log, HasSubstr("PASS"));
  EXPECT_EQ(RunCli("check-dp --epsilon 1 --trials 10", &log), 1);

  fs::path dir = FreshDir("cli_audit");
  fs::path config = WriteConfig(dir, {{"synth", {{"n", 300}}},
                                      {"num_teachers", 5}});
  EXPECT_EQ(RunCli("audit --config " + config.string() +
                       " --method prediction_perturbation --epsilon 0.1",
                   &log),
            0)
      << log;
  EXPECT_THAT(log, HasSubstr("privacy_leakage="));
  EXPECT_THAT(log, HasSubstr("attack[label=1]"));
  EXPECT_EQ(RunCli("audit --config " + config.string() + " --method nope"), 1);
}

}  // namespace
}  // namespace dpla
