#include "hddiff/linalg.hpp"

#include <algorithm>
#include <iterator>

namespace hddiff {

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet concat(const IndexSet& a, const IndexSet& b) {
  IndexSet out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Matrix select(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = m(rows[i], cols[j]);
  return out;
}

Matrix select_rows(const Matrix& m, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

Matrix select_cols(const Matrix& m, std::span<const int> cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = m.col(cols[j]);
  return out;
}

Vector select(const Vector& v, std::span<const int> idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double inverse_residual(const Matrix& a, const Matrix& b) {
  const Matrix r = a * b - Matrix::Identity(a.rows(), b.cols());
  Eigen::JacobiSVD<Matrix> svd(r);
  Eigen::JacobiSVD<Matrix> sa(a);
  const double na = sa.singularValues()(0);
  Eigen::JacobiSVD<Matrix> sb(b);
  const double nb = sb.singularValues()(0);
  return svd.singularValues()(0) / std::max(1.0, na * nb);
}

}  // namespace hddiff
