#include "hddiff/nulldist.hpp"

#include "hddiff/error.hpp"
#include "hddiff/models.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hddiff {

namespace {

constexpr double kRidge = 1e-8;
constexpr double kMinRcond = 1e-12;
constexpr double kClampTol = 1e-6;

Matrix ridge(const Matrix& m) {
  const double scale = m.rows() > 0 ? std::abs(m.trace()) / static_cast<double>(m.rows()) : 0.0;
  return m + Matrix::Identity(m.rows(), m.cols()) * kRidge * scale;
}

// Cholesky factor of a symmetric positive definite matrix, ridged once if needed.
Matrix chol_lower(const Matrix& m, const char* name, int& jitter) {
  Eigen::LLT<Matrix> llt(symmetrize(m));
  if (llt.info() == Eigen::Success && llt.rcond() >= kMinRcond) return llt.matrixL();
  ++jitter;
  llt.compute(ridge(symmetrize(m)));
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond)
    throw ComputationError(std::string("matrix ") + name + " is not positive definite");
  return llt.matrixL();
}

// Eigenvalues of S T^{-1} (S symmetric, T symmetric positive definite).
Vector whitened_eigenvalues(const Matrix& s, const Matrix& t, const char* name, int& jitter) {
  const Matrix l = chol_lower(t, name, jitter);
  const auto tri = l.triangularView<Eigen::Lower>();
  const Matrix a = tri.solve(s);                                   // L^{-1} S
  const Matrix c = tri.solve(a.transpose()).transpose();           // L^{-1} S L^{-T}
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(c), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ComputationError(std::string("eigen decomposition failed for ") + name);
  return es.eigenvalues();
}

Matrix solve_spd(const Matrix& m, const Matrix& rhs, const char* name, int& jitter) {
  const Matrix l = chol_lower(m, name, jitter);
  const auto tri = l.triangularView<Eigen::Lower>();
  return tri.transpose().solve(tri.solve(rhs));
}

// A_c = Q_{uv,c} Q_c^{-1} Q_{c,uv}
Matrix projected(const PopulationQ& q, int& jitter) {
  if (q.q_c.rows() == 0) return Matrix::Zero(q.q_uv.rows(), q.q_uv.rows());
  return symmetrize(q.q_uv_c * solve_spd(q.q_c, q.q_uv_c.transpose(), "Q_c", jitter));
}

void append_pairs(const Vector& mu, NullWeights& w, std::vector<double>& out) {
  for (double m : mu) {
    if (!std::isfinite(m)) throw ComputationError("non-finite eigenvalue in null weights");
    double c = m;
    if (m < 0.0) {
      if (m < -kClampTol) throw ComputationError("weight eigenvalue " + std::to_string(m) + " below 0");
      c = 0.0;
    } else if (m > 1.0) {
      if (m > 1.0 + kClampTol) throw ComputationError("weight eigenvalue " + std::to_string(m) + " above 1");
      c = 1.0;
    }
    if (c != m) {
      ++w.clamp_events;
      w.max_clamp = std::max(w.max_clamp, std::abs(c - m));
    }
    const double root = std::sqrt(1.0 - c);
    out.push_back(root);
    out.push_back(-root);
    ++w.n_paired;
  }
}

double chi2_cdf(double x, int m) {
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::chi_squared(static_cast<double>(m)), x);
}

double imhof_cdf(const std::vector<double>& nu, double x) {
  using namespace boost::math::quadrature;
  auto half_sum = [&] {
    double t = 0.0;
    for (double v : nu) t += v;
    return 0.5 * t;
  };
  auto phase = [&](double u) {
    double t = 0.0;
    for (double v : nu) t += std::atan(v * u);
    return 0.5 * t;
  };
  auto rho = [&](double u) {
    double t = 0.0;
    for (double v : nu) t += std::log1p(v * v * u * u);
    return std::exp(0.25 * t);
  };
  auto f_sin = [&](double u) { return u == 0.0 ? half_sum() : std::sin(phase(u)) / (u * rho(u)); };
  const double omega = 0.5 * x;
  double integral = 0.0;
  if (omega == 0.0) {
    exp_sinh<double> es;
    integral = es.integrate(f_sin, 1e-12);
  } else {
    // per-call integrators: a reused one resumes at its last refinement level
    ooura_fourier_sin<double> osin(1e-11, 4);
    ooura_fourier_cos<double> ocos(1e-11, 4);
    auto f_cos = [&](double u) { return std::cos(phase(u)) / (u * rho(u)); };
    // sin(phase - omega u) = sin(phase) cos(omega u) - cos(phase) sin(omega u)
    const double a = ocos.integrate(f_sin, std::abs(omega)).first;
    const double b = osin.integrate(f_cos, std::abs(omega)).first;
    integral = a - std::copysign(b, omega);
  }
  return 0.5 - integral / std::numbers::pi;
}

}  // namespace

const char* to_string(BEstimator e) { return e == BEstimator::Plugin ? "plugin" : "sample"; }

BEstimator parse_b_estimator(const std::string& s) {
  if (s == "plugin") return BEstimator::Plugin;
  if (s == "sample") return BEstimator::Sample;
  throw InputError("unknown B estimator '" + s + "' (expected plugin or sample)");
}

Matrix compute_q(const Matrix& b_full, int j_size, int* jitter_events) {
  const Eigen::Index j = j_size;
  if (j < 0 || j > b_full.rows() || j > b_full.cols()) throw InputError("J block larger than the cross-moment block");
  const Eigen::Index ra = b_full.rows() - j;
  const Eigen::Index rb = b_full.cols() - j;
  if (j == 0) return b_full;
  const Matrix bjj = b_full.topLeftCorner(j, j);
  Eigen::PartialPivLU<Matrix> lu(bjj);
  if (!(lu.rcond() >= kMinRcond)) {
    if (jitter_events) ++*jitter_events;
    lu.compute(ridge(bjj));
    if (!(lu.rcond() >= kMinRcond)) throw ComputationError("cross-moment block B_JJ is singular");
  }
  return b_full.bottomRightCorner(ra, rb) - b_full.bottomLeftCorner(ra, j) * lu.solve(b_full.topRightCorner(j, rb));
}

Matrix estimate_b(BEstimator estimator, const Params& c, const Params& a, const Params& b, const IndexSet& rows,
                  const IndexSet& cols, const Dataset& c_data) {
  if (estimator == BEstimator::Plugin) return cross_moment_plugin(c, a, b, rows, cols, c_data.x());
  return cross_moment_sample(a, b, rows, cols, c_data);
}

QBlocks estimate_q(const ActiveSets& sets, const Params& phi_u, const Params& phi_v, const Params& phi_uv,
                   const Dataset& u_out, const Dataset& v_out, BEstimator estimator) {
  QBlocks q;
  const int j = static_cast<int>(sets.j.size());
  const IndexSet uv = concat(sets.j, sets.ring_uv);
  auto population = [&](const Params& phi_c, const IndexSet& ring_c, const Dataset& data) {
    const IndexSet cc = concat(sets.j, ring_c);
    PopulationQ p;
    p.q_uv_c = compute_q(estimate_b(estimator, phi_c, phi_uv, phi_c, uv, cc, data), j, &q.jitter_events);
    p.q_c = symmetrize(compute_q(estimate_b(estimator, phi_c, phi_c, phi_c, cc, cc, data), j, &q.jitter_events));
    p.q_uv = symmetrize(compute_q(estimate_b(estimator, phi_c, phi_uv, phi_uv, uv, uv, data), j, &q.jitter_events));
    return p;
  };
  q.u = population(phi_u, sets.ring_u, u_out);
  q.v = population(phi_v, sets.ring_v, v_out);
  return q;
}

NullWeights weights_prop2(const QBlocks& q, const ActiveSets& sets) {
  NullWeights w;
  w.jitter_events = q.jitter_events;
  const int ru = static_cast<int>(sets.i_u.size());
  const int rv = static_cast<int>(sets.i_v.size());
  const int ruv = static_cast<int>(sets.i_uv.size());
  const int nj = static_cast<int>(sets.j.size());
  w.r = ru + rv + ruv;
  const auto ring_uv = static_cast<Eigen::Index>(sets.ring_uv.size());
  if (q.u.q_uv.rows() != ring_uv || q.v.q_uv.rows() != ring_uv ||
      q.u.q_c.rows() != static_cast<Eigen::Index>(sets.ring_u.size()) ||
      q.v.q_c.rows() != static_cast<Eigen::Index>(sets.ring_v.size()))
    throw InputError("Q blocks do not match the active sets");

  std::vector<double> nu;
  nu.reserve(static_cast<std::size_t>(w.r));
  w.n_zero = 2 * nj;
  nu.insert(nu.end(), static_cast<std::size_t>(w.n_zero), 0.0);

  if (ru + rv >= ruv) {
    w.n_plus_one = ru + rv - ruv;
    nu.insert(nu.end(), static_cast<std::size_t>(w.n_plus_one), 1.0);
    if (ring_uv > 0) {
      const Matrix s = projected(q.u, w.jitter_events) + projected(q.v, w.jitter_events);
      const Matrix t = q.u.q_uv + q.v.q_uv;
      append_pairs(whitened_eigenvalues(s, t, "Q_uv", w.jitter_events), w, nu);
    }
  } else {
    w.n_minus_one = ruv - ru - rv + nj;
    w.n_plus_one = nj;
    nu.insert(nu.end(), static_cast<std::size_t>(w.n_minus_one), -1.0);
    nu.insert(nu.end(), static_cast<std::size_t>(w.n_plus_one), 1.0);
    const Eigen::Index a = q.u.q_c.rows();
    const Eigen::Index b = q.v.q_c.rows();
    if (a + b > 0) {
      Matrix c(ring_uv, a + b);
      c << q.u.q_uv_c, q.v.q_uv_c;
      const Matrix t = q.u.q_uv + q.v.q_uv;
      const Matrix k = symmetrize(c.transpose() * solve_spd(t, c, "Q_uv", w.jitter_events));
      Matrix d = Matrix::Zero(a + b, a + b);
      d.topLeftCorner(a, a) = q.u.q_c;
      d.bottomRightCorner(b, b) = q.v.q_c;
      append_pairs(whitened_eigenvalues(k, d, "Q_c", w.jitter_events), w, nu);
    }
  }
  if (static_cast<int>(nu.size()) != w.r)
    throw ComputationError("null weight count " + std::to_string(nu.size()) + " differs from r = " +
                           std::to_string(w.r));
  w.nu = Eigen::Map<Vector>(nu.data(), static_cast<Eigen::Index>(nu.size()));
  return w;
}

DirectBlocks estimate_direct_blocks(const ActiveSets& sets, const Params& phi_u, const Params& phi_v,
                                    const Params& phi_uv, const Dataset& u_out, const Dataset& v_out,
                                    BEstimator estimator) {
  const auto ru = static_cast<Eigen::Index>(sets.i_u.size());
  const auto rv = static_cast<Eigen::Index>(sets.i_v.size());
  const auto ruv = static_cast<Eigen::Index>(sets.i_uv.size());
  DirectBlocks d;
  d.ind = Matrix::Zero(ru + rv, ru + rv);
  d.ind.topLeftCorner(ru, ru) = estimate_b(estimator, phi_u, phi_u, phi_u, sets.i_u, sets.i_u, u_out);
  d.ind.bottomRightCorner(rv, rv) = estimate_b(estimator, phi_v, phi_v, phi_v, sets.i_v, sets.i_v, v_out);
  d.joint = estimate_b(estimator, phi_u, phi_uv, phi_uv, sets.i_uv, sets.i_uv, u_out) +
            estimate_b(estimator, phi_v, phi_uv, phi_uv, sets.i_uv, sets.i_uv, v_out);
  d.joint_ind.resize(ruv, ru + rv);
  d.joint_ind << estimate_b(estimator, phi_u, phi_uv, phi_u, sets.i_uv, sets.i_u, u_out),
      estimate_b(estimator, phi_v, phi_uv, phi_v, sets.i_uv, sets.i_v, v_out);
  return d;
}

NullWeights weights_direct(const DirectBlocks& blocks) {
  const Eigen::Index ri = blocks.ind.rows();
  const Eigen::Index rj = blocks.joint.rows();
  if (blocks.ind.cols() != ri || blocks.joint.cols() != rj || blocks.joint_ind.rows() != rj ||
      blocks.joint_ind.cols() != ri)
    throw InputError("direct weight blocks have inconsistent shapes");
  Eigen::PartialPivLU<Matrix> ind(blocks.ind), joint(blocks.joint);
  if (ri > 0 && !(ind.rcond() >= kMinRcond)) throw ComputationError("B_ind is singular");
  if (rj > 0 && !(joint.rcond() >= kMinRcond)) throw ComputationError("B_joint is singular");
  const Eigen::Index r = ri + rj;
  NullWeights out;
  out.r = static_cast<int>(r);
  out.nu.resize(r);

  // W = C A with C the covariance of the stacked individual and joint scores
  // and A = diag(B_ind^{-1}, -B_joint^{-1}).
  Matrix c(r, r);
  c.topLeftCorner(ri, ri) = blocks.ind;
  c.bottomRightCorner(rj, rj) = blocks.joint;
  c.bottomLeftCorner(rj, ri) = blocks.joint_ind;
  c.topRightCorner(ri, rj) = blocks.joint_ind.transpose();
  Matrix a = Matrix::Zero(r, r);
  a.topLeftCorner(ri, ri) = ind.inverse();
  a.bottomRightCorner(rj, rj) = -joint.inverse();

  // W is typically defective at 0, where a general eigensolver loses half the
  // digits; when C is PSD use the symmetric similar matrix C^{1/2} A C^{1/2}.
  Eigen::SelfAdjointEigenSolver<Matrix> ce(symmetrize(c));
  const double cmax = ce.eigenvalues().cwiseAbs().maxCoeff();
  if (ce.info() == Eigen::Success && ce.eigenvalues().minCoeff() >= -1e-10 * cmax) {
    // round-off in the null space of C would otherwise surface as O(sqrt(eps)) weights
    const Vector root = ce.eigenvalues().unaryExpr([&](double e) { return e > 1e-11 * cmax ? std::sqrt(e) : 0.0; });
    const Matrix half = ce.eigenvectors() * root.asDiagonal() * ce.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(half * symmetrize(a) * half), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ComputationError("eigen decomposition of W failed");
    out.nu = es.eigenvalues();
    return out;
  }
  const Matrix w = c * a;
  Eigen::EigenSolver<Matrix> es(w, false);
  if (es.info() != Eigen::Success) throw ComputationError("eigen decomposition of W failed");
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > 1e-8)
      throw ComputationError("W has a complex eigenvalue (imaginary part " + std::to_string(ev.imag()) + ")");
    out.nu(i) = ev.real();
  }
  std::sort(out.nu.begin(), out.nu.end());
  return out;
}

double wchisq_cdf(double x, const Vector& nu) {
  if (std::isnan(x)) throw InputError("wchisq_cdf at NaN");
  if (!nu.allFinite()) throw InputError("weights must be finite");
  const double scale = nu.size() > 0 ? nu.cwiseAbs().maxCoeff() : 0.0;
  if (!(scale > 0.0)) throw ComputationError("degenerate null: all weights are zero");
  std::vector<double> w;
  for (double v : nu)
    if (std::abs(v) > 1e-12 * scale) w.push_back(v / scale);
  const double xs = x / scale;
  if (std::isinf(xs)) return xs > 0 ? 1.0 : 0.0;

  const bool all_plus = std::all_of(w.begin(), w.end(), [](double v) { return std::abs(v - 1.0) <= 1e-12; });
  const bool all_minus = std::all_of(w.begin(), w.end(), [](double v) { return std::abs(v + 1.0) <= 1e-12; });
  const int m = static_cast<int>(w.size());
  if (all_plus) return chi2_cdf(xs, m);
  if (all_minus) return xs >= 0.0 ? 1.0 : 1.0 - chi2_cdf(-xs, m);
  return std::clamp(imhof_cdf(w, xs), 0.0, 1.0);
}

double pvalue(double lr, const Vector& nu) { return std::clamp(1.0 - wchisq_cdf(lr, nu), 0.0, 1.0); }

}  // namespace hddiff
