#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/params.hpp"
#include "hddiff/rng.hpp"

#include <random>

namespace hddiff::test {

inline Matrix normal_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

inline Matrix random_spd(int k, Rng& rng, double ridge = 1.0) {
  const Matrix a = normal_matrix(k, k, rng);
  return a * a.transpose() / k + ridge * Matrix::Identity(k, k);
}

inline RegressionParams random_regression(int l, Rng& rng) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  return {normal_matrix(l, 1, rng).col(0), u(rng)};
}

inline Dataset sample_regression(const RegressionParams& p, const Matrix& x, Rng& rng) {
  std::normal_distribution<double> z;
  Vector y = x * p.beta;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += std::sqrt(p.sigma2) * z(rng);
  return Dataset::regression(y, x);
}

inline Dataset sample_ggm(const GgmParams& p, int n, Rng& rng) {
  const Matrix l = Eigen::LLT<Matrix>(p.sigma).matrixL();
  return Dataset::ggm(normal_matrix(n, static_cast<int>(p.sigma.rows()), rng) * l.transpose());
}

// Sparse precision with a random pattern and a dominant diagonal.
inline GgmParams random_sparse_ggm(int k, double density, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix om = Matrix::Identity(k, k);
  for (int j = 1; j < k; ++j)
    for (int jp = 0; jp < j; ++jp)
      if (u(rng) < density) om(j, jp) = om(jp, j) = (u(rng) < 0.5 ? -1 : 1) * (0.1 + 0.3 * u(rng));
  Eigen::SelfAdjointEigenSolver<Matrix> es(om);
  const double shift = std::max(0.0, 0.2 - es.eigenvalues().minCoeff());
  om += shift * Matrix::Identity(k, k);
  return GgmParams::from_precision(om);
}

}  // namespace hddiff::test
