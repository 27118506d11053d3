#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/nulldist.hpp"
#include "hddiff/params.hpp"
#include "hddiff/screening.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hddiff {

struct TestConfig {
  int k_splits = 50;
  double gamma_min = 0.05;
  // Multiplier of the aggregated quantile; defaults to 1 - gamma_min.
  std::optional<double> agg_constant;
  BEstimator b_estimator = BEstimator::Plugin;
  std::uint64_t seed = 1;
  // n_folds, lambda grid and cap; the fold seed is derived per split.
  ScreeningConfig screening;
  // Rows per population used for screening; 0 means ceil(n / 2).
  int screen_size = 0;
  // Worker count for the splits; 0 defers to HDDIFF_THREADS.
  int threads = 0;

  void validate() const;
  double aggregation_constant() const { return agg_constant.value_or(1.0 - gamma_min); }
};

// True supports, available in simulation mode only.
struct ScreeningTruth {
  IndexSet support_u, support_v, support_uv;
};

struct SplitDiagnostics {
  int size_u = 0, size_v = 0, size_uv = 0, size_j = 0;
  std::optional<bool> hit_u, hit_v, hit_uv;
  double lambda_u = 0.0, lambda_v = 0.0, lambda_uv = 0.0;
  bool capped = false;
  int clamp_events = 0;
  double max_clamp = 0.0;
  int jitter_events = 0;
};

struct SplitOutcome {
  int split_id = 0;
  bool valid = false;
  std::string error;
  ActiveSets sets;
  double lr = 0.0;
  int r = 0;
  NullWeights weights;
  double pvalue = 1.0;
  SplitDiagnostics diagnostics;
};

struct TestReport {
  ModelKind kind = ModelKind::Regression;
  int n_u = 0, n_v = 0, dim = 0;
  TestConfig config;
  std::vector<SplitOutcome> splits;
  int n_valid = 0, n_invalid = 0;
  double p_aggregated = 1.0;
  double seconds = 0.0;
};

struct LrResult {
  double lr = 0.0;
  Params phi_u, phi_v, phi_uv;
};

// 2 (l(phi_u; U) + l(phi_v; V) - l(phi_uv; U) - l(phi_uv; V)) with restricted
// fits on the given data.
LrResult restricted_lr(const Dataset& u_out, const Dataset& v_out, const ActiveSets& sets);

// LR, estimated weights and p-value on held-out data for fixed active sets.
SplitOutcome test_fixed_sets(const Dataset& u_out, const Dataset& v_out, const ActiveSets& sets,
                             BEstimator estimator);

SplitOutcome single_split_test(const Dataset& u, const Dataset& v, const TestConfig& config, int split_id,
                               const ScreeningTruth* truth = nullptr);

double aggregate_pvalues(std::span<const double> pvals, double gamma_min, std::optional<double> constant = std::nullopt);

TestReport multi_split_test(const Dataset& u, const Dataset& v, const TestConfig& config,
                            const ScreeningTruth* truth = nullptr);

// Randomly halves one dataset into two pseudo-populations.
std::pair<Dataset, Dataset> backtest_split(const Dataset& pooled, std::uint64_t seed);

}  // namespace hddiff
