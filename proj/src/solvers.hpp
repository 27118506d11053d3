#pragma once

#include "hddiff/linalg.hpp"
#include "hddiff/screening.hpp"

namespace hddiff::detail {

// Coordinate descent for min 1/2 b^T G b - c^T b + lambda ||b||_1 with
// warm start in `beta`. Returns the number of sweeps.
int lasso_gram(const Matrix& gram, const Vector& c, double lambda, Vector& beta, const L1Options& opts);

// Graphical lasso with unpenalised diagonal. `w` (covariance estimate) and
// `coef` (column j holds the regression of variable j on the others) carry
// the warm start; on return `omega` is the symmetric precision estimate.
int glasso(const Matrix& s, double lambda, Matrix& w, Matrix& coef, Matrix& omega, const L1Options& opts);

}  // namespace hddiff::detail
