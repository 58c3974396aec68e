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

#ifndef DPLA_MECHANISMS_H_
#define DPLA_MECHANISMS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpla/rng.h"

namespace dpla {

enum class NoiseKind { kLaplace, kGaussian };

inline std::string_view NoiseKindName(NoiseKind kind) {
  return kind == NoiseKind::kLaplace ? "laplace" : "gaussian";
}

// Default slack for Gaussian calibration.
inline constexpr double kDefaultDelta = 1e-5;

// (epsilon, delta) pair. delta is 0 for pure epsilon-DP.
class PrivacyBudget {
 public:
  static absl::StatusOr<PrivacyBudget> Create(double epsilon,
                                              double delta = 0.0) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      return absl::InvalidArgumentError(
          "epsilon must be positive and finite, got " +
          std::to_string(epsilon));
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
      return absl::InvalidArgumentError("delta must lie in [0, 1), got " +
                                        std::to_string(delta));
    }
    return PrivacyBudget(epsilon, delta);
  }

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  bool is_pure() const { return delta_ == 0.0; }

 private:
  PrivacyBudget(double epsilon, double delta)
      : epsilon_(epsilon), delta_(delta) {}

  double epsilon_;
  double delta_;
};

struct Sensitivity {
  enum class Norm { kL1, kL2 };
  double value = 1.0;
  Norm norm = Norm::kL1;
};

// b = S / epsilon for the Laplace mechanism.
inline absl::StatusOr<double> LaplaceScale(const Sensitivity& sensitivity,
                                           const PrivacyBudget& budget) {
  if (sensitivity.norm != Sensitivity::Norm::kL1) {
    return absl::InvalidArgumentError("Laplace calibration needs L1 sensitivity");
  }
  if (!(sensitivity.value > 0.0)) {
    return absl::InvalidArgumentError("sensitivity must be positive");
  }
  if (!budget.is_pure()) {
    return absl::InvalidArgumentError(
        "Laplace mechanism is pure epsilon-DP; delta must be 0");
  }
  return sensitivity.value / budget.epsilon();
}

// sigma = (S / epsilon) * sqrt(2 ln(1.25 / delta)).
inline absl::StatusOr<double> GaussianSigma(const Sensitivity& sensitivity,
                                            const PrivacyBudget& budget) {
  if (sensitivity.norm != Sensitivity::Norm::kL2) {
    return absl::InvalidArgumentError(
        "Gaussian calibration needs L2 sensitivity");
  }
  if (!(sensitivity.value > 0.0)) {
    return absl::InvalidArgumentError("sensitivity must be positive");
  }
  if (budget.is_pure()) {
    return absl::InvalidArgumentError(
        "Gaussian mechanism is undefined for delta = 0");
  }
  return sensitivity.value / budget.epsilon() *
         std::sqrt(2.0 * std::log(1.25 / budget.delta()));
}

inline absl::StatusOr<double> SampleLaplace(double scale, Rng& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError("Laplace scale must be positive");
  }
  return scale * rng.StandardLaplace();
}

inline absl::StatusOr<double> SampleGaussian(double sigma, Rng& rng) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError("Gaussian sigma must be positive");
  }
  return sigma * rng.Gaussian();
}

// Analytic CDF of Lap(0, scale).
inline double LaplaceCdf(double x, double scale) {
  return x < 0 ? 0.5 * std::exp(x / scale)
               : 1.0 - 0.5 * std::exp(-x / scale);
}

struct DpCheckOptions {
  int bins = 50;
  int64_t trials = 100000;
  double sensitivity = 1.0;
  // Bins are compared only when both datasets land at least this many
  // samples in them.
  int64_t min_hits = 1000;
  double tolerance_factor = 1.2;
};

struct DpCheckReport {
  double max_ratio = 0.0;
  double bound = 0.0;
  int bins_compared = 0;
  bool passed = false;
};

inline constexpr int64_t kMinDpCheckTrials = 10000;

// Monte-Carlo check of Pr[M(D) in T] <= e^eps Pr[M(D') in T] for the
// Laplace-noised `query`, with T ranging over equal-width bins spanning the
// pooled outputs. The ratio is taken in both directions.
template <typename Record, typename Query>
absl::StatusOr<DpCheckReport> EmpiricalDpCheck(
    Query&& query, std::span<const Record> d, std::span<const Record> d_prime,
    const PrivacyBudget& budget, const DpCheckOptions& options, Rng& rng) {
  if (d.size() != d_prime.size()) {
    return absl::InvalidArgumentError(
        "datasets are not neighbouring: sizes differ");
  }
  size_t differing = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] == d_prime[i])) ++differing;
  }
  if (differing > 1) {
    return absl::InvalidArgumentError(
        "datasets are not neighbouring: " + std::to_string(differing) +
        " records differ");
  }
  if (options.trials < kMinDpCheckTrials) {
    return absl::InvalidArgumentError("need at least 10^4 trials, got " +
                                      std::to_string(options.trials));
  }
  if (options.bins < 1) {
    return absl::InvalidArgumentError("bins must be positive");
  }
  auto scale = LaplaceScale({options.sensitivity, Sensitivity::Norm::kL1},
                            budget);
  if (!scale.ok()) return scale.status();

  const double answer = static_cast<double>(query(d));
  const double answer_prime = static_cast<double>(query(d_prime));
  std::vector<double> out(options.trials), out_prime(options.trials);
  for (double& v : out) v = answer + *scale * rng.StandardLaplace();
  for (double& v : out_prime) v = answer_prime + *scale * rng.StandardLaplace();

  const auto [lo_a, hi_a] = std::minmax_element(out.begin(), out.end());
  const auto [lo_b, hi_b] =
      std::minmax_element(out_prime.begin(), out_prime.end());
  const double lo = std::min(*lo_a, *lo_b);
  const double hi = std::max(*hi_a, *hi_b);
  const double width = (hi - lo) / options.bins;

  auto histogram = [&](const std::vector<double>& samples) {
    std::vector<int64_t> counts(options.bins, 0);
    for (double v : samples) {
      int bin = width > 0 ? static_cast<int>((v - lo) / width) : 0;
      counts[std::clamp(bin, 0, options.bins - 1)]++;
    }
    return counts;
  };
  const std::vector<int64_t> hist = histogram(out);
  const std::vector<int64_t> hist_prime = histogram(out_prime);

  DpCheckReport report;
  report.bound = std::exp(budget.epsilon()) * options.tolerance_factor;
  for (int b = 0; b < options.bins; ++b) {
    if (hist[b] < options.min_hits || hist_prime[b] < options.min_hits) {
      continue;
    }
    const double ratio = static_cast<double>(hist[b]) / hist_prime[b];
    report.max_ratio = std::max({report.max_ratio, ratio, 1.0 / ratio});
    ++report.bins_compared;
  }
  if (report.bins_compared == 0) {
    return absl::FailedPreconditionError(
        "no bin reached the minimum hit count; increase trials or reduce bins");
  }
  report.passed = report.max_ratio <= report.bound;
  return report;
}

// The built-in sensitivity-1 counting query: ten binary records, one of
// which flips between the two neighbouring datasets.
inline absl::StatusOr<DpCheckReport> CountQueryDpCheck(
    const PrivacyBudget& budget, const DpCheckOptions& options, Rng& rng) {
  const std::vector<int> d = {1, 0, 1, 1, 0, 1, 0, 0, 1, 1};
  std::vector<int> d_prime = d;
  d_prime[1] = 1;
  auto count = [](std::span<const int> records) {
    return std::count(records.begin(), records.end(), 1);
  };
  return EmpiricalDpCheck<int>(count, std::span<const int>(d),
                               std::span<const int>(d_prime), budget, options,
                               rng);
}

}  // namespace dpla

#endif  // DPLA_MECHANISMS_H_
