#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/params.hpp"

#include <optional>

namespace hddiff {

// Sum of log-densities log d(y_i | x_i; phi), base e, constants included.
double loglik(const Params& params, const Dataset& data);

// Maximum-likelihood estimate over the parameters supported on `active`,
// with every other component pinned to zero.
//
// Regression: `active` lists beta positions (sigma^2 is always estimated);
// beta solves least squares on the active columns and sigma^2 = RSS / n.
// Throws InputError("unidentifiable support") when the active design is
// rank-deficient or n <= |active|, and ComputationError when RSS == 0.
//
// Graphical model: maximises log det(Omega) - tr(S Omega) with Omega_jj' = 0
// off `active`; the diagonal is always free. Uses the uncentred second
// moment S. Throws ComputationError on non-convergence.
Params fit_restricted_mle(const Dataset& data, const IndexSet& active);

struct GgmMleOptions {
  double tol = 1e-7;
  int max_sweeps = 500;
};

// Restricted graphical-model MLE from a second-moment matrix.
GgmParams fit_ggm_restricted(const Matrix& s, const IndexSet& active, const GgmMleOptions& opts = {});

// Score vector of one sample, laid out per ParamLayout (length p).
// `y` holds the sample's response values, `x` its predictors.
Vector score(const Params& params, const Vector& y, const Vector& x);

// Scores of every row of `data` restricted to `idx` (n x |idx|).
Matrix score_rows(const Params& params, const Dataset& data, const IndexSet& idx);

// Closed-form B^c_{rows,cols}(phi_a; phi_b): the average over the rows of
// `x` of E_{phi_c}[s_rows(Y|x; phi_a) s_cols(Y|x; phi_b)^T].
//
// For regression `x` supplies the conditioning predictor rows; the
// graphical-model moments do not depend on `x`.
Matrix cross_moment_plugin(const Params& c, const Params& a, const Params& b, const IndexSet& rows,
                           const IndexSet& cols, const Matrix& x);

// Empirical (1/n) sum_i s_rows(z_i; phi_a) s_cols(z_i; phi_b)^T.
Matrix cross_moment_sample(const Params& a, const Params& b, const IndexSet& rows, const IndexSet& cols,
                           const Dataset& data);

// D(p1 || p2) + D(p2 || p1). Regression requires `x_second_moment`, the
// stand-in for E[x x^T].
double sym_kl(const Params& p1, const Params& p2, const std::optional<Matrix>& x_second_moment = std::nullopt);

// One-directional divergence D(p1 || p2).
double kl(const Params& p1, const Params& p2, const std::optional<Matrix>& x_second_moment = std::nullopt);

}  // namespace hddiff
