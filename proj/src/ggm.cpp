#include "model_detail.hpp"

#include "hddiff/error.hpp"

#include <cmath>
#include <string>

namespace hddiff {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw InputError("matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency(const IndexSet& active, int k) {
  const ParamLayout layout(ModelKind::Ggm, k);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(k, k, false);
  for (int p : active) {
    const ParamIndex idx = layout.at(p);
    adj(idx.row, idx.col) = adj(idx.col, idx.row) = true;
  }
  return adj;
}

}  // namespace

// Block coordinate ascent over columns (the known-graph variant of the
// graphical lasso): each column solves W_ff beta = s_f on its free
// neighbours and writes w12 = W_11 beta back into W.
GgmParams fit_ggm_restricted(const Matrix& s, const IndexSet& active, const GgmMleOptions& opts) {
  const int k = static_cast<int>(s.rows());
  const auto adj = adjacency(active, k);
  const double scale = s.diagonal().cwiseAbs().mean();
  if (!(scale > 0.0)) throw ComputationError("second-moment matrix has a zero diagonal");
  for (int j = 0; j < k; ++j)
    if (!(s(j, j) > 0.0)) throw ComputationError("variable " + std::to_string(j + 1) + " has zero second moment");

  std::vector<IndexSet> free(k), others(k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      if (i == j) continue;
      others[j].push_back(i);
      if (adj(i, j)) free[j].push_back(i);
    }

  Matrix w = s;
  std::vector<Vector> beta(k);
  auto solve_column = [&](int j) -> Vector {
    const IndexSet& f = free[j];
    if (f.empty()) return Vector();
    Eigen::LLT<Matrix> llt(select(w, f, f));
    if (llt.info() != Eigen::Success)
      throw ComputationError("restricted MLE does not exist: singular neighbourhood for variable " + std::to_string(j + 1));
    Vector rhs(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) rhs(i) = s(f[i], j);
    return llt.solve(rhs);
  };

  int sweep = 0;
  double change = 0.0;
  bool converged = false;
  for (; sweep < opts.max_sweeps; ++sweep) {
    change = 0.0;
    for (int j = 0; j < k; ++j) {
      beta[j] = solve_column(j);
      for (int i : others[j]) {
        double v = 0.0;
        for (std::size_t t = 0; t < free[j].size(); ++t) v += w(i, free[j][t]) * beta[j](t);
        change = std::max(change, std::abs(v - w(i, j)));
        w(i, j) = w(j, i) = v;
      }
    }
    if (change < opts.tol * scale) {
      converged = true;
      ++sweep;
      break;
    }
  }
  if (!converged)
    throw ComputationError("restricted graphical-model MLE did not converge after " + std::to_string(sweep) +
                           " sweeps (last change " + std::to_string(change) + ")");

  Matrix omega = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    const Vector b = solve_column(j);
    double wb = 0.0;
    for (std::size_t t = 0; t < free[j].size(); ++t) wb += w(free[j][t], j) * b(t);
    const double theta = 1.0 / (s(j, j) - wb);
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ComputationError("restricted MLE lost positive definiteness");
    omega(j, j) = theta;
    for (std::size_t t = 0; t < free[j].size(); ++t) omega(free[j][t], j) = -b(t) * theta;
  }
  omega = symmetrize(omega);
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) throw ComputationError("restricted MLE is not positive definite");
  GgmParams out;
  out.omega = omega;
  out.sigma = symmetrize(llt.solve(Matrix::Identity(k, k)));
  return out;
}

namespace detail {

double ggm_loglik(const GgmParams& p, const Dataset& data) {
  const double n = static_cast<double>(data.n());
  const double k = static_cast<double>(data.k());
  const double quad = (data.y() * p.omega).cwiseProduct(data.y()).sum();
  return 0.5 * n * (log_det_spd(p.omega) - k * kLog2Pi) - 0.5 * quad;
}

Matrix ggm_score_rows(const GgmParams& p, const Dataset& data, const IndexSet& idx) {
  const ParamLayout layout(ModelKind::Ggm, static_cast<int>(data.k()));
  Matrix out(data.n(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t) {
    const ParamIndex e = layout.at(idx[t]);
    out.col(t) = data.y().col(e.row).cwiseProduct(data.y().col(e.col)).array() - p.sigma(e.row, e.col);
  }
  return out;
}

Matrix ggm_plugin(const GgmParams& c, const GgmParams& a, const GgmParams& b, const IndexSet& rows,
                  const IndexSet& cols) {
  const ParamLayout layout(ModelKind::Ggm, static_cast<int>(c.sigma.rows()));
  const Matrix& sc = c.sigma;
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  std::vector<ParamIndex> ci;
  ci.reserve(cols.size());
  for (int q : cols) ci.push_back(layout.at(q));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ParamIndex r = layout.at(rows[i]);
    const int j = r.row, jp = r.col;
    const double da = sc(j, jp) - a.sigma(j, jp);
    for (std::size_t m = 0; m < cols.size(); ++m) {
      const int l = ci[m].row, lp = ci[m].col;
      out(i, m) = sc(j, l) * sc(jp, lp) + sc(j, lp) * sc(jp, l) + da * (sc(l, lp) - b.sigma(l, lp));
    }
  }
  return out;
}

// Correct Gaussian divergence: 0.5 (tr(Omega' Sigma) - k + log det Omega - log det Omega').
double ggm_kl(const GgmParams& p, const GgmParams& q) {
  const double k = static_cast<double>(p.omega.rows());
  return 0.5 * ((q.omega * p.sigma).trace() - k + log_det_spd(p.omega) - log_det_spd(q.omega));
}

}  // namespace detail
}  // namespace hddiff
