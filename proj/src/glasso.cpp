#include "hddiff/error.hpp"
#include "solvers.hpp"

#include <cmath>
#include <string>

namespace hddiff::detail {

namespace {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Lasso on the sub-problem 1/2 b^T W_oo b - s_o^T b + lambda ||b||_1, where o
// lists every variable except j. `w` is read through the index list.
int column_lasso(const Matrix& w, const Matrix& s, int j, const std::vector<int>& o, double lambda, Vector& beta,
                 Vector& grad, const L1Options& opts) {
  const auto m = static_cast<Eigen::Index>(o.size());
  for (Eigen::Index a = 0; a < m; ++a) {
    double acc = s(o[a], j);
    for (Eigen::Index b = 0; b < m; ++b)
      if (beta(b) != 0.0) acc -= w(o[a], o[b]) * beta(b);
    grad(a) = acc;
  }
  auto update = [&](Eigen::Index a) {
    const double waa = w(o[a], o[a]);
    const double nb = soft_threshold(grad(a) + waa * beta(a), lambda) / waa;
    const double d = nb - beta(a);
    if (d == 0.0) return 0.0;
    for (Eigen::Index b = 0; b < m; ++b) grad(b) -= w(o[b], o[a]) * d;
    beta(a) = nb;
    return std::abs(d) * std::sqrt(waa);
  };
  int sweeps = 0;
  for (;;) {
    double change = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) change = std::max(change, update(a));
    ++sweeps;
    if (change < opts.tol) break;
    for (;;) {
      double inner = 0.0;
      for (Eigen::Index a = 0; a < m; ++a)
        if (beta(a) != 0.0) inner = std::max(inner, update(a));
      ++sweeps;
      if (inner < opts.tol || sweeps > opts.max_sweeps) break;
    }
    if (sweeps > opts.max_sweeps) throw ComputationError("graphical lasso column solver did not converge");
  }
  return sweeps;
}

}  // namespace

int glasso(const Matrix& s, double lambda, Matrix& w, Matrix& coef, Matrix& omega, const L1Options& opts) {
  const int k = static_cast<int>(s.rows());
  if (w.rows() != k) w = s;
  if (coef.rows() != k) coef = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j) w(j, j) = s(j, j);
  const double scale = s.diagonal().mean();
  const double tol = opts.tol * std::max(scale, 1e-300);
  const int max_outer = 10000;

  std::vector<std::vector<int>> others(k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      if (i != j) others[j].push_back(i);

  Vector beta(k - 1), grad(k - 1);
  int outer = 0;
  double change = 0.0;
  for (; outer < max_outer; ++outer) {
    change = 0.0;
    for (int j = 0; j < k; ++j) {
      const auto& o = others[j];
      for (int a = 0; a < k - 1; ++a) beta(a) = coef(o[a], j);
      column_lasso(w, s, j, o, lambda, beta, grad, opts);
      for (int a = 0; a < k - 1; ++a) {
        coef(o[a], j) = beta(a);
        // w12 = W_oo beta = s_o - grad
        const double v = s(o[a], j) - grad(a);
        change = std::max(change, std::abs(v - w(o[a], j)));
        w(o[a], j) = w(j, o[a]) = v;
      }
    }
    if (change < tol) break;
  }
  if (outer >= max_outer)
    throw ComputationError("graphical lasso did not converge after " + std::to_string(outer) +
                           " sweeps (residual " + std::to_string(change) + ")");

  omega = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    const auto& o = others[j];
    double wb = 0.0;
    for (int a = 0; a < k - 1; ++a) wb += w(o[a], j) * coef(o[a], j);
    const double theta = 1.0 / (w(j, j) - wb);
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ComputationError("graphical lasso lost positive definiteness");
    omega(j, j) = theta;
    for (int a = 0; a < k - 1; ++a) omega(o[a], j) = -coef(o[a], j) * theta;
  }
  omega = symmetrize(omega);
  return outer + 1;
}

}  // namespace hddiff::detail
