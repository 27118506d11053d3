#include "hddiff/testing.hpp"

#include "hddiff/error.hpp"
#include "hddiff/models.hpp"
#include "hddiff/parallel.hpp"
#include "hddiff/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace hddiff {

namespace {

bool contains(const IndexSet& set, const IndexSet& sub) { return set_difference(sub, set).empty(); }

// Rows [0, m) of a seeded permutation go to the in-half, the rest out.
std::pair<Dataset, Dataset> split_rows(const Dataset& d, int m, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<int> perm = random_permutation(static_cast<int>(d.n()), rng);
  std::vector<int> in(perm.begin(), perm.begin() + m), out(perm.begin() + m, perm.end());
  std::sort(in.begin(), in.end());
  std::sort(out.begin(), out.end());
  return {d.rows(in), d.rows(out)};
}

int in_size(const Dataset& d, const TestConfig& config) {
  const int n = static_cast<int>(d.n());
  const int m = config.screen_size > 0 ? config.screen_size : (n + 1) / 2;
  if (m >= n - 1) throw InputError("screening sample leaves fewer than 2 held-out rows");
  return m;
}

}  // namespace

void TestConfig::validate() const {
  if (k_splits < 1) throw InputError("number of splits must be at least 1");
  if (!(gamma_min > 0.0 && gamma_min < 1.0)) throw InputError("gamma_min must lie in (0, 1)");
  if (agg_constant && !(*agg_constant > 0.0)) throw InputError("aggregation constant must be positive");
  if (screen_size < 0) throw InputError("screen size must be non-negative");
  if (threads < 0) throw InputError("thread count must be non-negative");
  screening.validate();
}

LrResult restricted_lr(const Dataset& u_out, const Dataset& v_out, const ActiveSets& sets) {
  require_compatible(u_out, v_out);
  if (sets.i_u.empty() || sets.i_v.empty() || sets.i_uv.empty()) throw InputError("empty active set");
  LrResult r;
  r.phi_u = fit_restricted_mle(u_out, sets.i_u);
  r.phi_v = fit_restricted_mle(v_out, sets.i_v);
  r.phi_uv = fit_restricted_mle(stack(u_out, v_out), sets.i_uv);
  r.lr = 2.0 * (loglik(r.phi_u, u_out) + loglik(r.phi_v, v_out) - loglik(r.phi_uv, u_out) - loglik(r.phi_uv, v_out));
  return r;
}

SplitOutcome test_fixed_sets(const Dataset& u_out, const Dataset& v_out, const ActiveSets& sets,
                             BEstimator estimator) {
  SplitOutcome out;
  out.sets = sets;
  const LrResult lr = restricted_lr(u_out, v_out, sets);
  out.lr = lr.lr;
  const QBlocks q = estimate_q(sets, lr.phi_u, lr.phi_v, lr.phi_uv, u_out, v_out, estimator);
  out.weights = weights_prop2(q, sets);
  out.r = out.weights.r;
  out.pvalue = pvalue(out.lr, out.weights.nu);
  out.valid = true;
  auto& d = out.diagnostics;
  d.size_u = static_cast<int>(sets.i_u.size());
  d.size_v = static_cast<int>(sets.i_v.size());
  d.size_uv = static_cast<int>(sets.i_uv.size());
  d.size_j = static_cast<int>(sets.j.size());
  d.clamp_events = out.weights.clamp_events;
  d.max_clamp = out.weights.max_clamp;
  d.jitter_events = out.weights.jitter_events;
  return out;
}

SplitOutcome single_split_test(const Dataset& u, const Dataset& v, const TestConfig& config, int split_id,
                               const ScreeningTruth* truth) {
  config.validate();
  require_compatible(u, v);
  if (u.n() < 4 || v.n() < 4) throw InputError("each population needs at least 4 samples");
  const auto id = static_cast<std::uint64_t>(split_id);
  const auto [u_in, u_out] = split_rows(u, in_size(u, config), derive_seed(config.seed, {stream::kSplit, id, 0}));
  const auto [v_in, v_out] = split_rows(v, in_size(v, config), derive_seed(config.seed, {stream::kSplit, id, 1}));

  SplitOutcome out;
  out.split_id = split_id;
  ScreenAllResult screened;
  try {
    ScreeningConfig sc = config.screening;
    sc.seed = derive_seed(config.seed, {stream::kFolds, id});
    screened = screen_all(u_in, v_in, sc);
    out = test_fixed_sets(u_out, v_out, screened.sets, config.b_estimator);
  } catch (const std::exception& e) {
    out = SplitOutcome{};
    out.sets = screened.sets;
    out.valid = false;
    out.error = e.what();
  }
  out.split_id = split_id;
  auto& d = out.diagnostics;
  d.lambda_u = screened.u.lambda_cv;
  d.lambda_v = screened.v.lambda_cv;
  d.lambda_uv = screened.uv.lambda_cv;
  d.capped = screened.u.capped || screened.v.capped || screened.uv.capped;
  if (truth) {
    d.hit_u = contains(screened.sets.i_u, truth->support_u);
    d.hit_v = contains(screened.sets.i_v, truth->support_v);
    d.hit_uv = contains(screened.sets.i_uv, truth->support_uv);
  }
  return out;
}

double aggregate_pvalues(std::span<const double> pvals, double gamma_min, std::optional<double> constant) {
  if (pvals.empty()) throw InputError("no p-values to aggregate");
  if (!(gamma_min > 0.0 && gamma_min < 1.0)) throw InputError("gamma_min must lie in (0, 1)");
  std::vector<double> p(pvals.begin(), pvals.end());
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("p-values must lie in [0, 1]");
  std::sort(p.begin(), p.end());
  const auto k = static_cast<double>(p.size());
  const auto first = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(gamma_min * k - 1e-9)));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i <= p.size(); ++i) best = std::min(best, p[i - 1] * k / static_cast<double>(i));
  const double c = constant.value_or(1.0 - gamma_min);
  return std::clamp(c * best, 1e-300, 1.0);
}

TestReport multi_split_test(const Dataset& u, const Dataset& v, const TestConfig& config,
                            const ScreeningTruth* truth) {
  config.validate();
  require_compatible(u, v);
  const auto start = std::chrono::steady_clock::now();
  TestReport report;
  report.kind = u.kind();
  report.n_u = static_cast<int>(u.n());
  report.n_v = static_cast<int>(v.n());
  report.dim = static_cast<int>(u.kind() == ModelKind::Regression ? u.l() : u.k());
  report.config = config;
  report.splits.resize(static_cast<std::size_t>(config.k_splits));
  parallel_for(report.splits.size(), resolve_threads(config.threads), [&](std::size_t i) {
    report.splits[i] = single_split_test(u, v, config, static_cast<int>(i) + 1, truth);
  });
  std::vector<double> p;
  for (const auto& s : report.splits) {
    if (s.valid) p.push_back(s.pvalue);
  }
  report.n_valid = static_cast<int>(p.size());
  report.n_invalid = config.k_splits - report.n_valid;
  if (p.empty()) throw ComputationError("all " + std::to_string(config.k_splits) + " splits failed: " + report.splits.front().error);
  report.p_aggregated = config.k_splits == 1 ? p.front() : aggregate_pvalues(p, config.gamma_min, config.agg_constant);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::pair<Dataset, Dataset> backtest_split(const Dataset& pooled, std::uint64_t seed) {
  if (pooled.n() < 8) throw InputError("back-testing needs at least 8 samples");
  return split_rows(pooled, static_cast<int>(pooled.n() / 2), derive_seed(seed, {stream::kBacktest}));
}

}  // namespace hddiff
