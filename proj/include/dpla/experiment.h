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

#ifndef DPLA_EXPERIMENT_H_
#define DPLA_EXPERIMENT_H_

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpla/audit.h"
#include "dpla/csv.h"
#include "dpla/data.h"
#include "dpla/dp_pipelines.h"
#include "dpla/mechanisms.h"
#include "dpla/model.h"
#include "dpla/rng.h"
#include "dpla/status_macros.h"
#include "json.hpp"

namespace dpla {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr const char* kSynthDataSource = "synth";
inline constexpr const char* kThreadsEnvVar = "DP_LA_THREADS";

inline const std::vector<double>& DefaultEpsilonGrid() {
  static const std::vector<double> grid = {0.01, 0.1,  1,    10,
                                           100,  1000, 10000};
  return grid;
}

struct ExperimentConfig {
  // CSV path, or "synth" to generate data from `synth`.
  std::string data_path = kSynthDataSource;
  std::string schema_path;
  SynthOptions synth;
  std::vector<DpMethod> methods = {std::begin(kAllDpMethods),
                                   std::end(kAllDpMethods)};
  std::vector<double> epsilons = DefaultEpsilonGrid();
  double delta = kDefaultDelta;
  std::vector<int64_t> seeds = {1, 2, 3, 4, 5};
  int num_teachers = kDefaultNumTeachers;
  TrainConfig train;
  double inner_train_fraction = 0.5;
  uint64_t master_seed = 0;
  std::string output_dir = "dp-la-results";
  std::optional<int> threads;
  // Fills results.csv wall_time_seconds; off by default.
  bool record_wall_time = false;

  absl::Status Validate() const {
    if (data_path.empty()) {
      return absl::InvalidArgumentError("data_path is empty");
    }
    if (data_path != kSynthDataSource && schema_path.empty()) {
      return absl::InvalidArgumentError(
          "schema_path is required for CSV input");
    }
    if (methods.empty()) return absl::InvalidArgumentError("no methods");
    if (std::set<DpMethod>(methods.begin(), methods.end()).size() !=
        methods.size()) {
      return absl::InvalidArgumentError("methods contain duplicates");
    }
    if (epsilons.empty()) return absl::InvalidArgumentError("no epsilons");
    for (size_t i = 0; i < epsilons.size(); ++i) {
      if (!(epsilons[i] > 0.0) || !std::isfinite(epsilons[i])) {
        return absl::InvalidArgumentError("epsilons must be positive");
      }
      if (i > 0 && !(epsilons[i] > epsilons[i - 1])) {
        return absl::InvalidArgumentError(
            "epsilons must be strictly increasing");
      }
    }
    const bool needs_delta =
        std::find(methods.begin(), methods.end(),
                  DpMethod::kInputPerturbation) != methods.end();
    if (needs_delta && !(delta > 0.0 && delta < 1.0)) {
      return absl::InvalidArgumentError(
          "delta must lie in (0, 1) for input perturbation");
    }
    if (seeds.empty()) return absl::InvalidArgumentError("no seeds");
    if (std::set<int64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
      return absl::InvalidArgumentError("seeds contain duplicates");
    }
    if (num_teachers < 2) {
      return absl::InvalidArgumentError("num_teachers must be >= 2");
    }
    if (!(inner_train_fraction > 0.0 && inner_train_fraction < 1.0)) {
      return absl::InvalidArgumentError(
          "inner_train_fraction must lie in (0, 1)");
    }
    if (threads && *threads < 1) {
      return absl::InvalidArgumentError("threads must be positive");
    }
    return train.Validate();
  }

  // Everything that influences results; execution knobs (output_dir,
  // threads, record_wall_time) are left out.
  nlohmann::json CanonicalJson() const {
    nlohmann::json j;
    j["data_path"] = data_path;
    j["schema_path"] = schema_path;
    if (data_path == kSynthDataSource) {
      j["synth"] = {{"n", synth.n},
                    {"numeric", synth.d_numeric},
                    {"categorical", synth.d_categorical},
                    {"separation", synth.class_separation},
                    {"seed", synth.seed}};
    }
    std::vector<std::string> names;
    for (DpMethod m : methods) names.emplace_back(DpMethodName(m));
    j["methods"] = names;
    j["epsilons"] = epsilons;
    j["delta"] = delta;
    j["seeds"] = seeds;
    j["num_teachers"] = num_teachers;
    j["train"] = {{"lambda", train.lambda},
                  {"epochs", train.epochs},
                  {"learning_rate", train.learning_rate}};
    j["inner_train_fraction"] = inner_train_fraction;
    j["master_seed"] = master_seed;
    return j;
  }

  // FNV-1a over the canonical JSON text (keys sorted), as 16 hex digits.
  std::string Fingerprint() const {
    uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : CanonicalJson().dump()) {
      hash ^= c;
      hash *= 0x100000001b3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
  }

  // Relative data/schema paths resolve against `base_dir`.
  static absl::StatusOr<ExperimentConfig> FromJson(
      const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    try {
      c.data_path = j.value("data_path", c.data_path);
      c.schema_path = j.value("schema_path", c.schema_path);
      auto resolve = [&](std::string& path) {
        if (path.empty() || path == kSynthDataSource) return;
        std::filesystem::path p(path);
        if (p.is_relative() && !base_dir.empty()) path = (base_dir / p).string();
      };
      resolve(c.data_path);
      resolve(c.schema_path);
      if (j.contains("synth")) {
        const auto& s = j.at("synth");
        c.synth.n = s.value("n", c.synth.n);
        c.synth.d_numeric = s.value("numeric", c.synth.d_numeric);
        c.synth.d_categorical = s.value("categorical", c.synth.d_categorical);
        c.synth.class_separation =
            s.value("separation", c.synth.class_separation);
        c.synth.seed = s.value("seed", c.synth.seed);
      }
      if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : j.at("methods")) {
          DPLA_ASSIGN_OR_RETURN(DpMethod method,
                                ParseDpMethod(m.get<std::string>()));
          c.methods.push_back(method);
        }
      }
      if (j.contains("epsilons")) {
        c.epsilons = j.at("epsilons").get<std::vector<double>>();
      }
      c.delta = j.value("delta", c.delta);
      if (j.contains("seeds")) {
        c.seeds = j.at("seeds").get<std::vector<int64_t>>();
      }
      c.num_teachers = j.value("num_teachers", c.num_teachers);
      if (j.contains("train")) {
        const auto& t = j.at("train");
        c.train.lambda = t.value("lambda", c.train.lambda);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      }
      c.inner_train_fraction =
          j.value("inner_train_fraction", c.inner_train_fraction);
      c.master_seed = j.value("master_seed", c.master_seed);
      c.output_dir = j.value("output_dir", c.output_dir);
      if (j.contains("threads") && !j.at("threads").is_null()) {
        c.threads = j.at("threads").get<int>();
      }
      c.record_wall_time = j.value("record_wall_time", c.record_wall_time);
    } catch (const nlohmann::json::exception& e) {
      return absl::InvalidArgumentError(std::string("malformed config: ") +
                                        e.what());
    }
    DPLA_RETURN_IF_ERROR(c.Validate());
    return c;
  }

  static absl::StatusOr<ExperimentConfig> Load(const std::string& path) {
    DPLA_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError("config " + path + " is not JSON");
    }
    return FromJson(j, std::filesystem::path(path).parent_path());
  }
};

inline absl::StatusOr<Dataset> LoadExperimentData(
    const ExperimentConfig& config) {
  if (config.data_path == kSynthDataSource) {
    DPLA_ASSIGN_OR_RETURN(SynthData synth, SynthGenerate(config.synth));
    return Preprocess(synth.table, synth.schema);
  }
  DPLA_ASSIGN_OR_RETURN(TabularSchema schema,
                        TabularSchema::Load(config.schema_path));
  DPLA_ASSIGN_OR_RETURN(RawTable table, LoadCsv(config.data_path, schema));
  return Preprocess(table, schema);
}

struct SweepCell {
  DpMethod method;
  double epsilon;
  int64_t seed;
};

// Method-major, then epsilon ascending, then seed ascending.
inline std::vector<SweepCell> EnumerateCells(const ExperimentConfig& config) {
  std::vector<int64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  std::vector<SweepCell> cells;
  for (DpMethod m : config.methods) {
    for (double eps : config.epsilons) {
      for (int64_t s : seeds) cells.push_back({m, eps, s});
    }
  }
  return cells;
}

namespace internal {
inline constexpr uint64_t kSplitStream = 0x5b;
inline constexpr uint64_t kCellStream = 0xce;
inline constexpr uint64_t kAuditStream = 0xa0;
}  // namespace internal

// State shared by every method and epsilon of one seed: the split, the
// non-private baseline, and the shadow-trained attack. Depends only on
// (master_seed, seed).
struct SeedContext {
  FourWaySplit split;
  TrainConfig train;
  LogisticModel baseline;
  double acc_nonprivate = 0.0;
  LogisticModel shadow;
  AttackModel attack;
};

inline absl::StatusOr<SeedContext> PrepareSeed(const Dataset& dataset,
                                               const ExperimentConfig& config,
                                               int64_t seed) {
  SeedContext ctx;
  DPLA_ASSIGN_OR_RETURN(
      ctx.split,
      MakeFourWaySplit(dataset.labels,
                       DeriveSeed(config.master_seed,
                                  {internal::kSplitStream,
                                   static_cast<uint64_t>(seed)}),
                       config.inner_train_fraction));
  ctx.train = config.train;
  ctx.train.seed = static_cast<uint64_t>(seed);
  const FourWaySplit& split = ctx.split;

  DPLA_ASSIGN_OR_RETURN(
      ctx.baseline,
      Train(dataset.features.SelectRows(split.victim_train),
            SelectElements(dataset.labels, split.victim_train), ctx.train));
  DPLA_ASSIGN_OR_RETURN(
      std::vector<int> baseline_pred,
      Predict(ctx.baseline, dataset.features.SelectRows(split.victim_test)));
  DPLA_ASSIGN_OR_RETURN(
      ctx.acc_nonprivate,
      Accuracy(baseline_pred, SelectElements(dataset.labels, split.victim_test)));

  DPLA_ASSIGN_OR_RETURN(
      ctx.shadow,
      Train(dataset.features.SelectRows(split.attack_train),
            SelectElements(dataset.labels, split.attack_train), ctx.train));
  DPLA_ASSIGN_OR_RETURN(ctx.attack,
                        TrainAttack(ctx.shadow, dataset,
                                    AttackerRows::FromSplit(split), ctx.train));
  return ctx;
}

// Membership attack against the non-private baseline of a seed.
inline absl::StatusOr<MiaOutcome> AuditBaseline(const Dataset& dataset,
                                                const SeedContext& ctx) {
  VictimScorer victim = [&](const Matrix& x) {
    return PredictProba(ctx.baseline, x);
  };
  return RunMia(ctx.attack, victim, dataset, ctx.split);
}

// Intermediate state of one cell, for verbose reporting.
struct CellDetail {
  SeedContext seed_context;
  MiaOutcome outcome;
  nlohmann::json artifact_metadata;
};

// One sweep cell: seed-level preparation followed by the cell's DP pipeline
// and the membership audit of what it releases. The DP noise stream is
// keyed by (master_seed, method, epsilon, seed).
inline absl::StatusOr<AuditReport> RunCell(const Dataset& dataset,
                                           const ExperimentConfig& config,
                                           const SweepCell& cell,
                                           CellDetail* detail = nullptr) {
  DPLA_ASSIGN_OR_RETURN(SeedContext ctx,
                        PrepareSeed(dataset, config, cell.seed));
  const FourWaySplit& split = ctx.split;
  const std::vector<int> victim_test_y =
      SelectElements(dataset.labels, split.victim_test);

  const double delta =
      cell.method == DpMethod::kInputPerturbation ? config.delta : 0.0;
  DPLA_ASSIGN_OR_RETURN(PrivacyBudget budget,
                        PrivacyBudget::Create(cell.epsilon, delta));
  Rng cell_rng(DeriveSeed(
      config.master_seed,
      {internal::kCellStream, static_cast<uint64_t>(cell.method),
       std::bit_cast<uint64_t>(cell.epsilon), static_cast<uint64_t>(cell.seed)}));
  Rng pipeline_rng = cell_rng.Substream({1});
  DPLA_ASSIGN_OR_RETURN(
      PipelineResult pipeline,
      RunPipeline(cell.method, dataset, split, budget,
                  PipelineConfig{ctx.train, config.num_teachers},
                  pipeline_rng));
  DPLA_ASSIGN_OR_RETURN(double acc_private,
                        Accuracy(pipeline.test_predictions, victim_test_y));

  Rng audit_rng = cell_rng.Substream({internal::kAuditStream});
  const PrivateModelArtifact& artifact = pipeline.artifact;
  VictimScorer victim = [&](const Matrix& x) {
    return ReleasedProbabilities(artifact, x, audit_rng);
  };
  DPLA_ASSIGN_OR_RETURN(MiaOutcome outcome,
                        RunMia(ctx.attack, victim, dataset, split));

  AuditReport report = MakeAuditReport(cell.method, cell.epsilon, cell.seed,
                                       acc_private, ctx.acc_nonprivate,
                                       outcome);
  if (detail != nullptr) {
    detail->outcome = outcome;
    detail->artifact_metadata = artifact.MetadataJson();
    detail->seed_context = std::move(ctx);
  }
  return report;
}

struct CellResult {
  SweepCell cell;
  std::optional<AuditReport> report;
  // "ok" or "failed:<reason>".
  std::string status;
  double wall_time_seconds = 0.0;

  bool ok() const { return report.has_value(); }
};

struct SweepResults {
  std::vector<CellResult> rows;
  std::string config_fingerprint;
  int threads_used = 1;
  double wall_time_seconds = 0.0;
};

// Resolution order: explicit override, config, DP_LA_THREADS, hardware.
inline int ResolveThreadCount(const ExperimentConfig& config,
                              std::optional<int> override_threads = {}) {
  if (override_threads && *override_threads > 0) return *override_threads;
  if (config.threads) return *config.threads;
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs every cell on a pool of `threads` workers. Per-cell errors are
// recorded in the row's status; only config and data errors fail the sweep.
inline absl::StatusOr<SweepResults> RunSweepOnData(
    const Dataset& dataset, const ExperimentConfig& config, int threads) {
  DPLA_RETURN_IF_ERROR(config.Validate());
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const std::vector<SweepCell> cells = EnumerateCells(config);
  SweepResults results;
  results.config_fingerprint = config.Fingerprint();
  results.rows.resize(cells.size());
  results.threads_used =
      std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      const auto cell_start = Clock::now();
      CellResult& row = results.rows[i];
      row.cell = cells[i];
      auto report = RunCell(dataset, config, cells[i]);
      if (report.ok()) {
        row.report = *report;
        row.status = "ok";
      } else {
        row.status = "failed:" + std::string(report.status().message());
      }
      row.wall_time_seconds =
          std::chrono::duration<double>(Clock::now() - cell_start).count();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < results.threads_used; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  results.wall_time_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  return results;
}

inline absl::StatusOr<SweepResults> RunSweep(
    const ExperimentConfig& config, std::optional<int> threads = {}) {
  DPLA_RETURN_IF_ERROR(config.Validate());
  DPLA_ASSIGN_OR_RETURN(Dataset dataset, LoadExperimentData(config));
  return RunSweepOnData(dataset, config, ResolveThreadCount(config, threads));
}

inline std::optional<double> Median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

// Medians over the successful seeds of one (method, epsilon) group. A group
// without successful rows has no medians.
struct GroupSummary {
  DpMethod method;
  double epsilon;
  int ok_count = 0;
  int failed_count = 0;
  std::optional<double> utility_loss;
  std::optional<double> privacy_leakage;
  std::optional<double> true_revealed_records;
  std::optional<double> trr_rate;
  std::optional<double> acc_private;
  std::optional<double> acc_nonprivate;
};

struct SweepSummary {
  std::vector<GroupSummary> groups;

  const GroupSummary* Find(DpMethod method, double epsilon) const {
    for (const GroupSummary& g : groups) {
      if (g.method == method && g.epsilon == epsilon) return &g;
    }
    return nullptr;
  }
};

inline constexpr int kReportDigits = 12;

namespace internal {

// The value as it appears in results.csv.
inline double AsReported(double value) {
  return std::strtod(FormatDouble(value, kReportDigits).c_str(), nullptr);
}

}  // namespace internal

// Medians are taken over the values as written to results.csv.
inline SweepSummary Summarize(const SweepResults& results) {
  SweepSummary summary;
  std::map<std::pair<int, double>, size_t> index;
  std::map<size_t, std::vector<const AuditReport*>> members;
  for (const CellResult& row : results.rows) {
    const auto key = std::make_pair(static_cast<int>(row.cell.method),
                                    row.cell.epsilon);
    auto [it, inserted] = index.try_emplace(key, summary.groups.size());
    if (inserted) {
      summary.groups.push_back({row.cell.method, row.cell.epsilon});
    }
    GroupSummary& g = summary.groups[it->second];
    if (row.ok()) {
      ++g.ok_count;
      members[it->second].push_back(&*row.report);
    } else {
      ++g.failed_count;
    }
  }
  for (auto& [i, reports] : members) {
    auto median_of = [&](auto field) {
      std::vector<double> v;
      for (const AuditReport* r : reports) {
        v.push_back(internal::AsReported(field(*r)));
      }
      return Median(std::move(v));
    };
    GroupSummary& g = summary.groups[i];
    g.utility_loss = median_of([](const auto& r) { return r.utility_loss; });
    g.privacy_leakage =
        median_of([](const auto& r) { return r.privacy_leakage; });
    g.true_revealed_records = median_of([](const auto& r) {
      return static_cast<double>(r.true_revealed_records);
    });
    g.trr_rate = median_of([](const auto& r) { return r.trr_rate; });
    g.acc_private = median_of([](const auto& r) { return r.acc_private; });
    g.acc_nonprivate =
        median_of([](const auto& r) { return r.acc_nonprivate; });
  }
  return summary;
}

inline const std::vector<std::string>& ResultsCsvColumns() {
  static const std::vector<std::string> columns = {
      "method",  "epsilon",         "seed",
      "acc_nonprivate", "acc_private", "utility_loss",
      "tpr",     "fpr",             "privacy_leakage",
      "true_revealed_records", "trr_rate", "wall_time_seconds",
      "status"};
  return columns;
}

// results.csv contents. Wall times are filled only when requested.
inline std::string ResultsCsv(const SweepResults& results,
                              bool record_wall_time) {
  auto num = [](double v) { return FormatDouble(v, kReportDigits); };
  std::string out = JoinCsvRecord(ResultsCsvColumns()) + "\n";
  for (const CellResult& row : results.rows) {
    std::vector<std::string> f = {std::string(DpMethodName(row.cell.method)),
                                  num(row.cell.epsilon),
                                  std::to_string(row.cell.seed)};
    if (row.ok()) {
      const AuditReport& r = *row.report;
      for (double v : {r.acc_nonprivate, r.acc_private, r.utility_loss, r.tpr,
                       r.fpr, r.privacy_leakage}) {
        f.push_back(num(v));
      }
      f.push_back(std::to_string(r.true_revealed_records));
      f.push_back(num(r.trr_rate));
    } else {
      f.insert(f.end(), 8, "");
    }
    f.push_back(record_wall_time ? num(row.wall_time_seconds) : "");
    f.push_back(row.status);
    out += JoinCsvRecord(f) + "\n";
  }
  return out;
}

namespace internal {

inline std::string FigureCsv(
    const ExperimentConfig& config, const SweepSummary& summary,
    const std::vector<std::pair<std::string, std::optional<double> GroupSummary::*>>&
        series) {
  std::vector<std::string> header = {"epsilon"};
  for (const auto& [suffix, field] : series) {
    for (DpMethod m : config.methods) {
      header.push_back(std::string(DpMethodName(m)) + suffix);
    }
  }
  std::string out = JoinCsvRecord(header) + "\n";
  for (double eps : config.epsilons) {
    std::vector<std::string> f = {FormatDouble(eps, kReportDigits)};
    for (const auto& [suffix, field] : series) {
      for (DpMethod m : config.methods) {
        const GroupSummary* g = summary.Find(m, eps);
        f.push_back(g != nullptr && (g->*field).has_value()
                        ? FormatDouble(*(g->*field), kReportDigits)
                        : "NA");
      }
    }
    out += JoinCsvRecord(f) + "\n";
  }
  return out;
}

inline nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace internal

inline nlohmann::json SummaryJson(const ExperimentConfig& config,
                                  const SweepResults& results,
                                  const SweepSummary& summary) {
  nlohmann::json groups = nlohmann::json::array();
  for (const GroupSummary& g : summary.groups) {
    groups.push_back(
        {{"method", DpMethodName(g.method)},
         {"epsilon", g.epsilon},
         {"ok", g.ok_count},
         {"failed", g.failed_count},
         {"median_utility_loss", internal::OptionalJson(g.utility_loss)},
         {"median_privacy_leakage", internal::OptionalJson(g.privacy_leakage)},
         {"median_true_revealed_records",
          internal::OptionalJson(g.true_revealed_records)},
         {"median_trr_rate", internal::OptionalJson(g.trr_rate)},
         {"median_acc_private", internal::OptionalJson(g.acc_private)},
         {"median_acc_nonprivate", internal::OptionalJson(g.acc_nonprivate)}});
  }
  nlohmann::json env = {{"library_version", kLibraryVersion},
                        {"cxx_standard", static_cast<long>(__cplusplus)},
                        {"threads", results.threads_used},
                        {"wall_time_seconds", results.wall_time_seconds}};
#if defined(__VERSION__)
  env["compiler"] = __VERSION__;
#endif
  return {{"config_fingerprint", results.config_fingerprint},
          {"config", config.CanonicalJson()},
          {"cells", results.rows.size()},
          {"groups", groups},
          {"environment", env}};
}

inline const std::vector<std::string>& ReportFileNames() {
  static const std::vector<std::string> names = {
      "results.csv", "summary.json", "fig_utility_loss.csv",
      "fig_privacy_leakage.csv", "fig_trr.csv"};
  return names;
}

// Writes the five report files into `output_dir`. Without `force`, refuses
// to touch the directory if any of them already exists.
inline absl::Status EmitReport(const ExperimentConfig& config,
                               const SweepResults& results,
                               const SweepSummary& summary,
                               const std::string& output_dir, bool force) {
  namespace fs = std::filesystem;
  const fs::path dir(output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError("cannot create " + output_dir + ": " +
                                       ec.message());
  }
  if (!force) {
    for (const std::string& name : ReportFileNames()) {
      if (fs::exists(dir / name)) {
        return absl::AlreadyExistsError((dir / name).string() +
                                        " exists; pass --force to overwrite");
      }
    }
  }
  using Field = std::optional<double> GroupSummary::*;
  const std::map<std::string, std::string> files = {
      {"results.csv", ResultsCsv(results, config.record_wall_time)},
      {"summary.json", SummaryJson(config, results, summary).dump(2) + "\n"},
      {"fig_utility_loss.csv",
       internal::FigureCsv(config, summary,
                           {{"", Field(&GroupSummary::utility_loss)}})},
      {"fig_privacy_leakage.csv",
       internal::FigureCsv(config, summary,
                           {{"", Field(&GroupSummary::privacy_leakage)}})},
      {"fig_trr.csv",
       internal::FigureCsv(
           config, summary,
           {{"", Field(&GroupSummary::true_revealed_records)},
            {"_rate", Field(&GroupSummary::trr_rate)}})},
  };
  for (const auto& [name, contents] : files) {
    DPLA_RETURN_IF_ERROR(WriteFile((dir / name).string(), contents));
  }
  return absl::OkStatus();
}

}  // namespace dpla

#endif  // DPLA_EXPERIMENT_H_
