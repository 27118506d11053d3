#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/linalg.hpp"
#include "hddiff/params.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hddiff {

// Three screened index sets plus the derived common part and remainders.
struct ActiveSets {
  IndexSet i_u, i_v, i_uv;
  IndexSet j;                          // i_uv ∩ i_u ∩ i_v
  IndexSet ring_u, ring_v, ring_uv;    // each set minus j

  static ActiveSets make(IndexSet u, IndexSet v, IndexSet uv);

  int r() const { return static_cast<int>(i_u.size() + i_v.size() + i_uv.size()); }
};

struct ScreeningConfig {
  int n_folds = 10;
  int lambda_grid_size = 50;
  double lambda_min_ratio = 0.01;
  // Active sets are capped at ceil(cap_multiplier * n) penalised components.
  double cap_multiplier = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

// Result of an l1-penalised fit at one lambda.
//
// Penalty convention: regression minimises ||y - X beta||^2 / (2n) +
// lambda ||beta||_1 (the n-scaled form of the penalised log-likelihood with
// sigma^2 profiled out); the graphical model minimises
// -log det(Omega) + tr(S Omega) + lambda sum_{j != j'} |Omega_jj'|, which is
// twice the per-sample penalised negative log-likelihood.
struct L1Fit {
  double lambda = 0.0;
  // Regression: beta and sigma^2 = RSS / n. Graphical model: Omega.
  Params params;
  // Penalised parameter positions and their magnitudes on the standardised
  // scale (|beta_j| sd(x_j), or the absolute partial correlation).
  IndexSet penalized;
  Vector magnitude;
  int sweeps = 0;
};

struct L1Options {
  double tol = 1e-7;
  // stationarity tolerance relative to max(1, max |X^T y / n|) or max(1, max |S_jj'|)
  double kkt_tol = 1e-8;
  int max_sweeps = 100000;
};

L1Fit fit_l1(const Dataset& data, double lambda, const L1Options& opts = {});

// Smallest lambda at which the penalised fit is empty.
double lambda_max(const Dataset& data);

// Log-spaced grid from lambda_max down to lambda_max * min_ratio.
std::vector<double> lambda_grid(double lmax, int size, double min_ratio);

// Fold of each row: a seeded permutation of 0..n-1 dealt round-robin.
std::vector<int> assign_folds(int n, int n_folds, std::uint64_t seed);

struct CvResult {
  double lambda_cv = 0.0;
  std::vector<double> grid;
  std::vector<double> score;  // mean held-out log-likelihood per sample
  std::size_t best = 0;
};

// K-fold cross-validation over the lambda grid, maximising held-out
// log-likelihood. `folds` overrides the seeded assignment.
CvResult select_lambda_cv(const Dataset& data, const ScreeningConfig& config,
                          std::optional<std::span<const int>> folds = std::nullopt);

// Indices of the nonzero entries of `coefficients`; when more than `cap`
// remain, only the `cap` largest in absolute value are kept (ties go to the
// smaller index). Returned sorted ascending.
std::vector<int> active_set(std::span<const double> coefficients, std::size_t cap);

struct ScreenResult {
  double lambda_cv = 0.0;
  IndexSet active;     // includes the always-active positions
  std::size_t cap = 0;
  bool capped = false;
};

// The cap is ceil(cap_multiplier * cap_n), with cap_n defaulting to the sample size.
ScreenResult screen(const Dataset& data, const ScreeningConfig& config,
                    std::optional<std::span<const int>> folds = std::nullopt, std::size_t cap_n = 0);

struct ScreenAllResult {
  ActiveSets sets;
  ScreenResult u, v, uv;
};

// Screens U alone, V alone and the pooled rows. The pooled run is capped
// with the larger of the two individual sample sizes.
ScreenAllResult screen_all(const Dataset& u_in, const Dataset& v_in, const ScreeningConfig& config);

}  // namespace hddiff
