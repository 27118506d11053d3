#include "hddiff/models.hpp"

#include "hddiff/error.hpp"
#include "model_detail.hpp"

namespace hddiff {

namespace {

void require_same_kind(const Params& a, const Params& b) {
  if (kind_of(a) != kind_of(b)) throw InputError("parameters belong to different model kinds");
}

void require_positions(const IndexSet& idx, const ParamLayout& layout) {
  for (int p : idx)
    if (p < 0 || p >= layout.size()) throw InputError("parameter position out of range");
}

}  // namespace

double loglik(const Params& params, const Dataset& data) {
  const ParamLayout layout = ParamLayout::of(data);
  validate(params, layout);
  if (const auto* r = std::get_if<RegressionParams>(&params)) return detail::regression_loglik(*r, data);
  return detail::ggm_loglik(std::get<GgmParams>(params), data);
}

Params fit_restricted_mle(const Dataset& data, const IndexSet& active) {
  const ParamLayout layout = ParamLayout::of(data);
  require_positions(active, layout);
  if (data.kind() == ModelKind::Regression) return detail::regression_mle(data, active);
  return fit_ggm_restricted(data.second_moment(), active);
}

Vector score(const Params& params, const Vector& y, const Vector& x) {
  if (const auto* r = std::get_if<RegressionParams>(&params)) {
    if (y.size() != 1 || x.size() != r->beta.size()) throw InputError("sample does not match the parameter");
    const double res = y(0) - r->beta.dot(x);
    Vector out(x.size() + 1);
    out.head(x.size()) = res * x / r->sigma2;
    out(x.size()) = (res * res / r->sigma2 - 1.0) / (2.0 * r->sigma2);
    return out;
  }
  const auto& g = std::get<GgmParams>(params);
  const int k = static_cast<int>(g.sigma.rows());
  if (y.size() != k) throw InputError("sample does not match the parameter");
  const ParamLayout layout(ModelKind::Ggm, k);
  Vector out(layout.size());
  for (int j = 0; j < k; ++j)
    for (int jp = 0; jp <= j; ++jp) out(layout.entry(j, jp).position) = y(j) * y(jp) - g.sigma(j, jp);
  return out;
}

Matrix score_rows(const Params& params, const Dataset& data, const IndexSet& idx) {
  const ParamLayout layout = ParamLayout::of(data);
  validate(params, layout);
  require_positions(idx, layout);
  if (const auto* r = std::get_if<RegressionParams>(&params)) return detail::regression_score_rows(*r, data, idx);
  return detail::ggm_score_rows(std::get<GgmParams>(params), data, idx);
}

Matrix cross_moment_plugin(const Params& c, const Params& a, const Params& b, const IndexSet& rows,
                           const IndexSet& cols, const Matrix& x) {
  require_same_kind(c, a);
  require_same_kind(c, b);
  if (const auto* rc = std::get_if<RegressionParams>(&c)) {
    const ParamLayout layout(ModelKind::Regression, static_cast<int>(rc->beta.size()));
    validate(a, layout);
    validate(b, layout);
    validate(c, layout);
    require_positions(rows, layout);
    require_positions(cols, layout);
    if (x.cols() != rc->beta.size() || x.rows() < 1) throw InputError("predictor rows do not match the parameter");
    return detail::regression_plugin(*rc, std::get<RegressionParams>(a), std::get<RegressionParams>(b), rows, cols, x);
  }
  const auto& gc = std::get<GgmParams>(c);
  const ParamLayout layout(ModelKind::Ggm, static_cast<int>(gc.sigma.rows()));
  validate(a, layout);
  validate(b, layout);
  require_positions(rows, layout);
  require_positions(cols, layout);
  return detail::ggm_plugin(gc, std::get<GgmParams>(a), std::get<GgmParams>(b), rows, cols);
}

Matrix cross_moment_sample(const Params& a, const Params& b, const IndexSet& rows, const IndexSet& cols,
                           const Dataset& data) {
  require_same_kind(a, b);
  const Matrix sa = score_rows(a, data, rows);
  const Matrix sb = score_rows(b, data, cols);
  return sa.transpose() * sb / static_cast<double>(data.n());
}

double kl(const Params& p1, const Params& p2, const std::optional<Matrix>& x_second_moment) {
  require_same_kind(p1, p2);
  if (const auto* r1 = std::get_if<RegressionParams>(&p1)) {
    const auto& r2 = std::get<RegressionParams>(p2);
    if (!x_second_moment) throw InputError("regression divergence needs the predictor second moment");
    if (x_second_moment->rows() != r1->beta.size() || r2.beta.size() != r1->beta.size())
      throw InputError("dimension mismatch in divergence");
    if (!(r1->sigma2 > 0.0) || !(r2.sigma2 > 0.0)) throw InputError("noise variance must be positive");
    return detail::regression_kl(*r1, r2, *x_second_moment);
  }
  const auto& g1 = std::get<GgmParams>(p1);
  const auto& g2 = std::get<GgmParams>(p2);
  if (g1.omega.rows() != g2.omega.rows()) throw InputError("dimension mismatch in divergence");
  return detail::ggm_kl(g1, g2);
}

double sym_kl(const Params& p1, const Params& p2, const std::optional<Matrix>& x_second_moment) {
  return kl(p1, p2, x_second_moment) + kl(p2, p1, x_second_moment);
}

}  // namespace hddiff
