#include "hddiff/dataset.hpp"

#include "hddiff/error.hpp"

#include <utility>

namespace hddiff {

const char* to_string(ModelKind kind) { return kind == ModelKind::Regression ? "regression" : "ggm"; }

Dataset::Dataset(Matrix y, Matrix x, std::vector<std::string> labels)
    : y_(std::move(y)), x_(std::move(x)), labels_(std::move(labels)) {
  if (x_.cols() > 0 && x_.rows() != y_.rows()) throw InputError("response and predictor row counts differ");
  if (x_.cols() == 0) x_.resize(y_.rows(), 0);
  if (y_.rows() < 2) throw InputError("a dataset needs at least 2 samples");
  if (!y_.allFinite() || !x_.allFinite()) throw InputError("dataset contains non-finite values");
  if (x_.cols() > 0) {
    if (y_.cols() != 1) throw InputError("regression data needs exactly one response column");
    kind_ = ModelKind::Regression;
  } else {
    if (y_.cols() < 2) throw InputError("graphical-model data needs at least two variables");
    kind_ = ModelKind::Ggm;
  }
  const auto width = static_cast<std::size_t>(y_.cols() + x_.cols());
  if (labels_.empty()) {
    for (std::size_t j = 0; j < width; ++j) labels_.push_back("V" + std::to_string(j + 1));
  } else if (labels_.size() != width) {
    throw InputError("label count does not match the number of columns");
  }
}

Dataset Dataset::regression(const Vector& y, Matrix x, std::vector<std::string> labels) {
  if (x.cols() == 0) throw InputError("regression data needs at least one predictor");
  return Dataset(Matrix(y), std::move(x), std::move(labels));
}

Dataset Dataset::ggm(Matrix y, std::vector<std::string> labels) {
  Matrix none(y.rows(), 0);
  return Dataset(std::move(y), std::move(none), std::move(labels));
}

Dataset Dataset::rows(std::span<const int> idx) const {
  Dataset out;
  out.y_ = select_rows(y_, idx);
  out.x_ = select_rows(x_, idx);
  out.labels_ = labels_;
  out.kind_ = kind_;
  return out;
}

Dataset Dataset::centered() const {
  Dataset out = *this;
  out.y_.rowwise() -= y_.colwise().mean();
  return out;
}

Matrix Dataset::second_moment() const {
  Matrix s = y_.transpose() * y_ / static_cast<double>(n());
  return symmetrize(s);
}

Dataset stack(const Dataset& a, const Dataset& b) {
  require_compatible(a, b);
  Matrix y(a.n() + b.n(), a.k());
  y << a.y(), b.y();
  Matrix x(a.n() + b.n(), a.l());
  if (a.l() > 0) x << a.x(), b.x();
  return Dataset(std::move(y), std::move(x), a.labels());
}

void require_compatible(const Dataset& a, const Dataset& b) {
  if (a.kind() != b.kind() || a.k() != b.k() || a.l() != b.l())
    throw InputError("populations have incompatible column layouts");
  if (a.labels() != b.labels()) throw InputError("populations have different column names");
}

}  // namespace hddiff
