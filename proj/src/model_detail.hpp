#pragma once

#include "hddiff/models.hpp"

namespace hddiff::detail {

double regression_loglik(const RegressionParams& p, const Dataset& data);
RegressionParams regression_mle(const Dataset& data, const IndexSet& active);
Matrix regression_score_rows(const RegressionParams& p, const Dataset& data, const IndexSet& idx);
Matrix regression_plugin(const RegressionParams& c, const RegressionParams& a, const RegressionParams& b,
                         const IndexSet& rows, const IndexSet& cols, const Matrix& x);
double regression_kl(const RegressionParams& p, const RegressionParams& q, const Matrix& xx);

double ggm_loglik(const GgmParams& p, const Dataset& data);
Matrix ggm_score_rows(const GgmParams& p, const Dataset& data, const IndexSet& idx);
Matrix ggm_plugin(const GgmParams& c, const GgmParams& a, const GgmParams& b, const IndexSet& rows,
                  const IndexSet& cols);
double ggm_kl(const GgmParams& p, const GgmParams& q);

}  // namespace hddiff::detail
