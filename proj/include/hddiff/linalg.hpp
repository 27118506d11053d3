#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hddiff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sorted, duplicate-free list of flattened parameter positions.
using IndexSet = std::vector<int>;

IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet concat(const IndexSet& a, const IndexSet& b);

Matrix select(const Matrix& m, std::span<const int> rows, std::span<const int> cols);
Matrix select_rows(const Matrix& m, std::span<const int> rows);
Matrix select_cols(const Matrix& m, std::span<const int> cols);
Vector select(const Vector& v, std::span<const int> idx);

// Symmetric part (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

// Relative spectral-norm distance of a*b from the identity.
double inverse_residual(const Matrix& a, const Matrix& b);

}  // namespace hddiff
