#include "model_detail.hpp"

#include "hddiff/error.hpp"

#include <cmath>
#include <numbers>

namespace hddiff::detail {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Positions below l address coefficients; anything else is sigma^2.
IndexSet coefficient_positions(const IndexSet& active, int l) {
  IndexSet out;
  for (int p : active)
    if (p < l) out.push_back(p);
  return out;
}

}  // namespace

double regression_loglik(const RegressionParams& p, const Dataset& data) {
  const Vector r = data.response() - data.x() * p.beta;
  const double n = static_cast<double>(data.n());
  return -0.5 * n * (kLog2Pi + std::log(p.sigma2)) - 0.5 * r.squaredNorm() / p.sigma2;
}

RegressionParams regression_mle(const Dataset& data, const IndexSet& active) {
  const int l = static_cast<int>(data.l());
  const IndexSet cols = coefficient_positions(active, l);
  const Vector y = data.response();
  RegressionParams out;
  out.beta = Vector::Zero(l);
  Vector resid = y;
  if (!cols.empty()) {
    if (data.n() <= static_cast<Eigen::Index>(cols.size())) throw InputError("unidentifiable support");
    const Matrix xa = select_cols(data.x(), cols);
    Eigen::ColPivHouseholderQR<Matrix> qr(xa);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(cols.size())) throw InputError("unidentifiable support");
    const Vector coef = qr.solve(y);
    for (std::size_t j = 0; j < cols.size(); ++j) out.beta(cols[j]) = coef(j);
    resid = y - xa * coef;
  }
  const double rss = resid.squaredNorm();
  if (!(rss > 1e-24 * std::max(1.0, y.squaredNorm())))
    throw ComputationError("degenerate fit: zero residual variance");
  out.sigma2 = rss / static_cast<double>(data.n());
  return out;
}

Matrix regression_score_rows(const RegressionParams& p, const Dataset& data, const IndexSet& idx) {
  const int l = static_cast<int>(data.l());
  const Vector r = data.response() - data.x() * p.beta;
  Matrix out(data.n(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] < l)
      out.col(j) = r.cwiseProduct(data.x().col(idx[j])) / p.sigma2;
    else
      out.col(j) = ((r.array().square() / p.sigma2 - 1.0) / (2.0 * p.sigma2)).matrix();
  }
  return out;
}

// With e_a = eps + d_a, e_b = eps + d_b, eps ~ N(0, s_c) and
// d_a = x^T (beta_c - beta_a), the moments needed are
//   E[e_a e_b]       = s_c + d_a d_b
//   E[e_a e_b^2]     = s_c d_a + 2 s_c d_b + d_a d_b^2
//   E[e_a^2 e_b^2]   = 3 s_c^2 + s_c (d_a^2 + d_b^2 + 4 d_a d_b) + d_a^2 d_b^2
Matrix regression_plugin(const RegressionParams& c, const RegressionParams& a, const RegressionParams& b,
                         const IndexSet& rows, const IndexSet& cols, const Matrix& x) {
  const int l = static_cast<int>(x.cols());
  const double n = static_cast<double>(x.rows());
  const double sc = c.sigma2, sa = a.sigma2, sb = b.sigma2;
  const Eigen::ArrayXd da = (x * (c.beta - a.beta)).array();
  const Eigen::ArrayXd db = (x * (c.beta - b.beta)).array();

  const Eigen::ArrayXd w_cc = (sc + da * db) / (sa * sb);
  const Eigen::ArrayXd w_cv = ((sc * da + 2.0 * sc * db + da * db.square()) / sb - da) / (2.0 * sa * sb);
  const Eigen::ArrayXd w_vc = ((sc * db + 2.0 * sc * da + db * da.square()) / sa - db) / (2.0 * sa * sb);
  const Eigen::ArrayXd e4 = 3.0 * sc * sc + sc * (da.square() + db.square() + 4.0 * da * db) + da.square() * db.square();
  const double vv = ((e4 / (sa * sb) - (sc + da.square()) / sa - (sc + db.square()) / sb + 1.0) / (4.0 * sa * sb)).mean();

  IndexSet rc, cc;
  std::vector<int> rslot(rows.size(), -1), cslot(cols.size(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i] < l) {
      rslot[i] = static_cast<int>(rc.size());
      rc.push_back(rows[i]);
    }
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (cols[j] < l) {
      cslot[j] = static_cast<int>(cc.size());
      cc.push_back(cols[j]);
    }
  const Matrix xr = select_cols(x, rc);
  const Matrix xc = select_cols(x, cc);
  const Matrix bb = xr.transpose() * (w_cc.matrix().asDiagonal() * xc) / n;
  const Vector bv = xr.transpose() * w_cv.matrix() / n;
  const Vector vb = xc.transpose() * w_vc.matrix() / n;

  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (rslot[i] >= 0 && cslot[j] >= 0)
        out(i, j) = bb(rslot[i], cslot[j]);
      else if (rslot[i] >= 0)
        out(i, j) = bv(rslot[i]);
      else if (cslot[j] >= 0)
        out(i, j) = vb(cslot[j]);
      else
        out(i, j) = vv;
    }
  }
  return out;
}

double regression_kl(const RegressionParams& p, const RegressionParams& q, const Matrix& xx) {
  const Vector d = p.beta - q.beta;
  return -0.5 + p.sigma2 / (2.0 * q.sigma2) + d.dot(xx * d) / (2.0 * q.sigma2) + 0.5 * std::log(q.sigma2 / p.sigma2);
}

}  // namespace hddiff::detail
