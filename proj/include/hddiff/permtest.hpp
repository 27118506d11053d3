#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/screening.hpp"

#include <cstdint>
#include <vector>

namespace hddiff {

struct PermConfig {
  int n_perm = 100;
  std::uint64_t seed = 1;
  ScreeningConfig screening;
  // Re-run cross-validation for every relabelled pair.
  bool reselect_lambda = true;
  int max_retries = 3;
  int threads = 0;

  void validate() const;
};

struct PermResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  int exceedances = 0;  // permutations with statistic >= observed
  int n_perm = 0;
  double lambda_u = 0.0, lambda_v = 0.0;
  int retries = 0;
  std::vector<double> permuted;
};

// Symmetric KL divergence between cross-validated l1 fits of the two groups.
// Returns the statistic and the two selected lambdas.
struct KlStatistic {
  double value = 0.0;
  double lambda_u = 0.0, lambda_v = 0.0;
};
KlStatistic kl_statistic(const Dataset& u, const Dataset& v, const ScreeningConfig& screening,
                         const std::optional<Matrix>& x_moment, const double* fixed_lambdas = nullptr);

PermResult perm_test(const Dataset& u, const Dataset& v, const PermConfig& config);

}  // namespace hddiff
