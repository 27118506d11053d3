#include "hddiff/params.hpp"

#include "hddiff/error.hpp"

#include <cmath>

namespace hddiff {

ParamLayout::ParamLayout(ModelKind kind, int dim) : kind_(kind), dim_(dim) {
  if (dim < 1) throw InputError("parameter layout needs a positive dimension");
}

ParamLayout ParamLayout::of(const Dataset& data) {
  return data.kind() == ModelKind::Regression ? ParamLayout(ModelKind::Regression, static_cast<int>(data.l()))
                                              : ParamLayout(ModelKind::Ggm, static_cast<int>(data.k()));
}

int ParamLayout::size() const { return kind_ == ModelKind::Regression ? dim_ + 1 : dim_ * (dim_ + 1) / 2; }

ParamIndex ParamLayout::at(int position) const {
  if (position < 0 || position >= size()) throw InputError("parameter position out of range");
  if (kind_ == ModelKind::Regression)
    return position == dim_ ? variance() : coefficient(position);
  int j = static_cast<int>((std::sqrt(8.0 * position + 1.0) - 1.0) / 2.0);
  while (j * (j + 1) / 2 > position) --j;
  while ((j + 1) * (j + 2) / 2 <= position) ++j;
  return {ParamIndex::Kind::Entry, j, position - j * (j + 1) / 2, position};
}

ParamIndex ParamLayout::coefficient(int j) const {
  if (kind_ != ModelKind::Regression || j < 0 || j >= dim_) throw InputError("invalid coefficient index");
  return {ParamIndex::Kind::Coefficient, j, 0, j};
}

ParamIndex ParamLayout::variance() const {
  if (kind_ != ModelKind::Regression) throw InputError("graphical models have no variance parameter");
  return {ParamIndex::Kind::Variance, 0, 0, dim_};
}

ParamIndex ParamLayout::entry(int j, int jp) const {
  if (kind_ != ModelKind::Ggm) throw InputError("regression models have no matrix entries");
  if (j < jp) std::swap(j, jp);
  if (jp < 0 || j >= dim_) throw InputError("invalid matrix entry");
  return {ParamIndex::Kind::Entry, j, jp, j * (j + 1) / 2 + jp};
}

IndexSet ParamLayout::always_active() const {
  if (kind_ == ModelKind::Regression) return {dim_};
  IndexSet out;
  for (int j = 0; j < dim_; ++j) out.push_back(entry(j, j).position);
  return out;
}

std::string ParamLayout::label(int position, const std::vector<std::string>& names) const {
  const ParamIndex p = at(position);
  switch (p.kind) {
    case ParamIndex::Kind::Variance:
      return "sigma2";
    case ParamIndex::Kind::Coefficient: {
      // names[0] is the response column
      if (names.size() == static_cast<std::size_t>(dim_) + 1) return names[p.row + 1];
      return "beta" + std::to_string(p.row + 1);
    }
    case ParamIndex::Kind::Entry:
    default: {
      if (names.size() == static_cast<std::size_t>(dim_)) return names[p.row] + ":" + names[p.col];
      return "omega" + std::to_string(p.row + 1) + "," + std::to_string(p.col + 1);
    }
  }
}

GgmParams GgmParams::from_precision(const Matrix& omega) {
  if (omega.rows() != omega.cols()) throw InputError("precision matrix must be square");
  if ((omega - omega.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, omega.cwiseAbs().maxCoeff()))
    throw InputError("precision matrix must be symmetric");
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) throw InputError("precision matrix is not positive definite");
  GgmParams out;
  out.omega = symmetrize(omega);
  out.sigma = symmetrize(llt.solve(Matrix::Identity(omega.rows(), omega.cols())));
  return out;
}

GgmParams GgmParams::from_covariance(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw InputError("covariance matrix is not positive definite");
  GgmParams out;
  out.sigma = symmetrize(sigma);
  out.omega = symmetrize(llt.solve(Matrix::Identity(sigma.rows(), sigma.cols())));
  return out;
}

ModelKind kind_of(const Params& params) {
  return std::holds_alternative<RegressionParams>(params) ? ModelKind::Regression : ModelKind::Ggm;
}

Vector flatten(const Params& params) {
  if (const auto* r = std::get_if<RegressionParams>(&params)) {
    Vector out(r->beta.size() + 1);
    out << r->beta, r->sigma2;
    return out;
  }
  const auto& g = std::get<GgmParams>(params);
  const int k = static_cast<int>(g.omega.rows());
  const ParamLayout layout(ModelKind::Ggm, k);
  Vector out(layout.size());
  for (int j = 0; j < k; ++j)
    for (int jp = 0; jp <= j; ++jp)
      out(layout.entry(j, jp).position) = j == jp ? -0.5 * g.omega(j, j) : -g.omega(j, jp);
  return out;
}

void validate(const Params& params, const ParamLayout& layout) {
  if (kind_of(params) != layout.kind()) throw InputError("parameter kind does not match the data");
  if (const auto* r = std::get_if<RegressionParams>(&params)) {
    if (r->beta.size() != layout.dim()) throw InputError("coefficient vector has the wrong length");
    if (!(r->sigma2 > 0.0) || !std::isfinite(r->sigma2)) throw InputError("noise variance must be positive");
    if (!r->beta.allFinite()) throw InputError("coefficients must be finite");
    return;
  }
  const auto& g = std::get<GgmParams>(params);
  if (g.omega.rows() != layout.dim() || g.sigma.rows() != layout.dim())
    throw InputError("precision matrix has the wrong dimension");
  if (!g.omega.allFinite() || !g.sigma.allFinite()) throw InputError("precision matrix must be finite");
}

}  // namespace hddiff
