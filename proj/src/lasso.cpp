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

}  // namespace

int lasso_gram(const Matrix& gram, const Vector& c, double lambda, Vector& beta, const L1Options& opts) {
  const Eigen::Index p = gram.rows();
  if (beta.size() != p) beta = Vector::Zero(p);
  Vector grad = c - gram * beta;

  auto update = [&](Eigen::Index j) {
    const double gjj = gram(j, j);
    if (!(gjj > 0.0)) {
      if (beta(j) != 0.0) {
        grad += gram.col(j) * beta(j);
        beta(j) = 0.0;
      }
      return 0.0;
    }
    const double nb = soft_threshold(grad(j) + gjj * beta(j), lambda) / gjj;
    const double d = nb - beta(j);
    if (d == 0.0) return 0.0;
    grad.noalias() -= gram.col(j) * d;
    beta(j) = nb;
    return std::abs(d) * std::sqrt(gjj);
  };

  const double kkt_tol = opts.kkt_tol * std::max(1.0, c.cwiseAbs().maxCoeff());
  int sweeps = 0;
  for (;;) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update(j));
    ++sweeps;
    if (change < opts.tol) {
      // refresh the gradient and confirm stationarity before stopping
      grad = c - gram * beta;
      bool kkt = true;
      for (Eigen::Index j = 0; j < p && kkt; ++j) {
        const double g = grad(j);
        kkt = beta(j) == 0.0 ? std::abs(g) <= lambda + kkt_tol : std::abs(g - std::copysign(lambda, beta(j))) <= kkt_tol;
      }
      if (kkt) break;
    }
    for (;;) {
      double inner = 0.0;
      for (Eigen::Index j = 0; j < p; ++j)
        if (beta(j) != 0.0) inner = std::max(inner, update(j));
      ++sweeps;
      if (inner < opts.tol || sweeps > opts.max_sweeps) break;
    }
    if (sweeps > opts.max_sweeps) {
      const Vector g = c - gram * beta;
      double worst = 0.0;
      for (Eigen::Index j = 0; j < p; ++j)
        worst = std::max(worst, beta(j) == 0.0 ? std::max(0.0, std::abs(g(j)) - lambda)
                                               : std::abs(g(j) - std::copysign(lambda, beta(j))));
      throw ComputationError("lasso did not converge after " + std::to_string(sweeps) +
                             " sweeps (KKT residual " + std::to_string(worst) + ")");
    }
  }
  return sweeps;
}

}  // namespace hddiff::detail
