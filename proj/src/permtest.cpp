#include "hddiff/permtest.hpp"

#include "hddiff/error.hpp"
#include "hddiff/models.hpp"
#include "hddiff/parallel.hpp"
#include "hddiff/rng.hpp"

#include <numeric>

namespace hddiff {

void PermConfig::validate() const {
  if (n_perm < 1) throw InputError("number of permutations must be at least 1");
  if (max_retries < 0) throw InputError("retry count must be non-negative");
  if (threads < 0) throw InputError("thread count must be non-negative");
  screening.validate();
}

KlStatistic kl_statistic(const Dataset& u, const Dataset& v, const ScreeningConfig& screening,
                         const std::optional<Matrix>& x_moment, const double* fixed_lambdas) {
  KlStatistic s;
  s.lambda_u = fixed_lambdas ? fixed_lambdas[0] : select_lambda_cv(u, screening).lambda_cv;
  s.lambda_v = fixed_lambdas ? fixed_lambdas[1] : select_lambda_cv(v, screening).lambda_cv;
  s.value = sym_kl(fit_l1(u, s.lambda_u).params, fit_l1(v, s.lambda_v).params, x_moment);
  return s;
}

PermResult perm_test(const Dataset& u, const Dataset& v, const PermConfig& config) {
  config.validate();
  require_compatible(u, v);
  const Dataset pooled = stack(u, v);
  std::optional<Matrix> x_moment;
  if (pooled.kind() == ModelKind::Regression)
    x_moment = symmetrize(pooled.x().transpose() * pooled.x() / static_cast<double>(pooled.n()));

  PermResult out;
  out.n_perm = config.n_perm;
  const KlStatistic observed = kl_statistic(u, v, config.screening, x_moment);
  out.statistic = observed.value;
  out.lambda_u = observed.lambda_u;
  out.lambda_v = observed.lambda_v;
  const double fixed[2] = {observed.lambda_u, observed.lambda_v};

  const int nu = static_cast<int>(u.n());
  const int n = static_cast<int>(pooled.n());
  out.permuted.assign(static_cast<std::size_t>(config.n_perm), 0.0);
  std::vector<int> retries(static_cast<std::size_t>(config.n_perm), 0);
  parallel_for(out.permuted.size(), resolve_threads(config.threads), [&](std::size_t b) {
    for (int attempt = 0;; ++attempt) {
      Rng rng = make_rng(config.seed, {stream::kPermutation, b, static_cast<std::uint64_t>(attempt)});
      std::vector<int> perm = random_permutation(n, rng);
      std::vector<int> a(perm.begin(), perm.begin() + nu), c(perm.begin() + nu, perm.end());
      std::sort(a.begin(), a.end());
      std::sort(c.begin(), c.end());
      try {
        out.permuted[b] = kl_statistic(pooled.rows(a), pooled.rows(c), config.screening, x_moment,
                                       config.reselect_lambda ? nullptr : fixed)
                              .value;
        retries[b] = attempt;
        return;
      } catch (const std::exception& e) {
        if (attempt >= config.max_retries)
          throw ComputationError("permutation " + std::to_string(b + 1) + " failed after " +
                                 std::to_string(attempt + 1) + " attempts: " + e.what());
      }
    }
  });
  out.retries = std::accumulate(retries.begin(), retries.end(), 0);
  for (double s : out.permuted)
    if (s >= out.statistic) ++out.exceedances;
  out.pvalue = (1.0 + out.exceedances) / (1.0 + config.n_perm);
  return out;
}

}  // namespace hddiff
