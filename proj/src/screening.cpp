#include "hddiff/screening.hpp"

#include "hddiff/error.hpp"
#include "hddiff/rng.hpp"
#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hddiff {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

IndexSet sorted_unique(IndexSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

void regression_magnitudes(const Dataset& data, const Vector& beta, L1Fit& fit) {
  const auto l = static_cast<int>(beta.size());
  fit.penalized.resize(static_cast<std::size_t>(l));
  std::iota(fit.penalized.begin(), fit.penalized.end(), 0);
  const Vector sd = (data.x().colwise().squaredNorm() / static_cast<double>(data.n())).cwiseSqrt().transpose();
  fit.magnitude = beta.cwiseAbs().cwiseProduct(sd);
}

void ggm_magnitudes(const Matrix& omega, L1Fit& fit) {
  const int k = static_cast<int>(omega.rows());
  const ParamLayout layout(ModelKind::Ggm, k);
  fit.penalized.clear();
  std::vector<double> mags;
  for (int j = 1; j < k; ++j)
    for (int jp = 0; jp < j; ++jp) {
      fit.penalized.push_back(layout.entry(j, jp).position);
      mags.push_back(std::abs(omega(j, jp)) / std::sqrt(omega(j, j) * omega(jp, jp)));
    }
  fit.magnitude = Eigen::Map<Vector>(mags.data(), static_cast<Eigen::Index>(mags.size()));
}

double log_det_or_neg_inf(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double gaussian_heldout(double rss_test, double n_test, double sigma2) {
  if (!(sigma2 > 0.0)) return kNegInf;
  return -0.5 * n_test * (kLog2Pi + std::log(sigma2)) - 0.5 * rss_test / sigma2;
}

}  // namespace

ActiveSets ActiveSets::make(IndexSet u, IndexSet v, IndexSet uv) {
  ActiveSets s;
  s.i_u = sorted_unique(std::move(u));
  s.i_v = sorted_unique(std::move(v));
  s.i_uv = sorted_unique(std::move(uv));
  s.j = set_intersection(set_intersection(s.i_uv, s.i_u), s.i_v);
  s.ring_u = set_difference(s.i_u, s.j);
  s.ring_v = set_difference(s.i_v, s.j);
  s.ring_uv = set_difference(s.i_uv, s.j);
  return s;
}

void ScreeningConfig::validate() const {
  if (n_folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (lambda_grid_size < 2) throw InputError("lambda grid needs at least 2 points");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) throw InputError("lambda_min_ratio must lie in (0, 1)");
  if (!(cap_multiplier > 0.0)) throw InputError("cap multiplier must be positive");
}

L1Fit fit_l1(const Dataset& data, double lambda, const L1Options& opts) {
  if (!(lambda >= 0.0)) throw InputError("lambda must be non-negative");
  L1Fit fit;
  fit.lambda = lambda;
  const double n = static_cast<double>(data.n());
  if (data.kind() == ModelKind::Regression) {
    const Matrix gram = data.x().transpose() * data.x() / n;
    const Vector c = data.x().transpose() * data.response() / n;
    Vector beta = Vector::Zero(data.l());
    fit.sweeps = detail::lasso_gram(gram, c, lambda, beta, opts);
    const double rss = (data.response() - data.x() * beta).squaredNorm();
    fit.params = RegressionParams{beta, std::max(rss / n, std::numeric_limits<double>::min())};
    regression_magnitudes(data, beta, fit);
  } else {
    const Matrix s = data.second_moment();
    Matrix w, coef, omega;
    fit.sweeps = detail::glasso(s, lambda, w, coef, omega, opts);
    fit.params = GgmParams::from_precision(omega);
    ggm_magnitudes(omega, fit);
  }
  return fit;
}

double lambda_max(const Dataset& data) {
  if (data.kind() == ModelKind::Regression)
    return (data.x().transpose() * data.response()).cwiseAbs().maxCoeff() / static_cast<double>(data.n());
  Matrix s = data.second_moment();
  s.diagonal().setZero();
  return s.cwiseAbs().maxCoeff();
}

std::vector<double> lambda_grid(double lmax, int size, double min_ratio) {
  std::vector<double> grid(static_cast<std::size_t>(size));
  const double step = std::log(min_ratio) / static_cast<double>(size - 1);
  for (int i = 0; i < size; ++i) grid[static_cast<std::size_t>(i)] = lmax * std::exp(step * i);
  return grid;
}

std::vector<int> assign_folds(int n, int n_folds, std::uint64_t seed) {
  Rng rng = make_rng(seed, {stream::kFolds, static_cast<std::uint64_t>(n)});
  const std::vector<int> perm = random_permutation(n, rng);
  std::vector<int> folds(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) folds[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i % n_folds;
  return folds;
}

CvResult select_lambda_cv(const Dataset& data, const ScreeningConfig& config, std::optional<std::span<const int>> folds) {
  config.validate();
  const int n = static_cast<int>(data.n());
  if (n < config.n_folds) throw InputError("fewer samples than cross-validation folds");
  if (data.kind() == ModelKind::Regression) {
    const Vector y = data.response();
    if ((y.array() == y(0)).all()) throw InputError("response is constant");
  }
  std::vector<int> assignment;
  if (folds) {
    if (folds->size() != static_cast<std::size_t>(n)) throw InputError("fold assignment has the wrong length");
    assignment.assign(folds->begin(), folds->end());
  } else {
    assignment = assign_folds(n, config.n_folds, config.seed);
  }

  CvResult cv;
  const double lmax = lambda_max(data);
  if (!(lmax > 0.0)) throw InputError("no association between response and predictors (lambda_max = 0)");
  cv.grid = lambda_grid(lmax, config.lambda_grid_size, config.lambda_min_ratio);
  cv.score.assign(cv.grid.size(), 0.0);
  L1Options opts;
  opts.tol = 1e-6;
  opts.kkt_tol = 1e-5;

  for (int f = 0; f < config.n_folds; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i) (assignment[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    if (test.empty() || train.size() < 2) continue;
    const Dataset tr = data.rows(train);
    const Dataset te = data.rows(test);
    const double ntr = static_cast<double>(tr.n());
    const double nte = static_cast<double>(te.n());
    if (data.kind() == ModelKind::Regression) {
      const Matrix gram = tr.x().transpose() * tr.x() / ntr;
      const Vector c = tr.x().transpose() * tr.response() / ntr;
      const Vector ytr = tr.response();
      const Vector yte = te.response();
      Vector beta = Vector::Zero(data.l());
      for (std::size_t g = 0; g < cv.grid.size(); ++g) {
        detail::lasso_gram(gram, c, cv.grid[g], beta, opts);
        const double sigma2 = (ytr - tr.x() * beta).squaredNorm() / ntr;
        const double rss = (yte - te.x() * beta).squaredNorm();
        cv.score[g] += gaussian_heldout(rss, nte, sigma2);
      }
    } else {
      const Matrix s_tr = tr.second_moment();
      const Matrix s_te = te.second_moment();
      const double k = static_cast<double>(data.k());
      Matrix w, coef, omega;
      for (std::size_t g = 0; g < cv.grid.size(); ++g) {
        detail::glasso(s_tr, cv.grid[g], w, coef, omega, opts);
        const double ld = log_det_or_neg_inf(omega);
        cv.score[g] += std::isfinite(ld) ? 0.5 * nte * (ld - (s_te * omega).trace() - k * kLog2Pi) : kNegInf;
      }
    }
  }
  for (double& s : cv.score) s /= static_cast<double>(n);
  cv.best = 0;
  for (std::size_t g = 1; g < cv.score.size(); ++g)
    if (cv.score[g] > cv.score[cv.best]) cv.best = g;
  cv.lambda_cv = cv.grid[cv.best];
  return cv;
}

std::vector<int> active_set(std::span<const double> coefficients, std::size_t cap) {
  if (cap < 1) throw InputError("active-set cap must be at least 1");
  std::vector<int> idx;
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    if (coefficients[i] != 0.0) idx.push_back(static_cast<int>(i));
  if (idx.size() > cap) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(coefficients[a]) > std::abs(coefficients[b]); });
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

ScreenResult screen(const Dataset& data, const ScreeningConfig& config, std::optional<std::span<const int>> folds,
                    std::size_t cap_n) {
  const CvResult cv = select_lambda_cv(data, config, folds);
  const L1Fit fit = fit_l1(data, cv.lambda_cv);
  ScreenResult out;
  out.lambda_cv = cv.lambda_cv;
  out.cap = static_cast<std::size_t>(std::ceil(config.cap_multiplier * static_cast<double>(cap_n > 0 ? cap_n : static_cast<std::size_t>(data.n())) - 1e-12));
  out.cap = std::max<std::size_t>(out.cap, 1);
  std::vector<double> mags(fit.magnitude.data(), fit.magnitude.data() + fit.magnitude.size());
  const std::size_t nonzero = static_cast<std::size_t>(std::count_if(mags.begin(), mags.end(), [](double m) { return m != 0.0; }));
  out.capped = nonzero > out.cap;
  IndexSet active;
  for (int i : active_set(mags, out.cap)) active.push_back(fit.penalized[static_cast<std::size_t>(i)]);
  out.active = set_union(sorted_unique(active), ParamLayout::of(data).always_active());
  return out;
}

ScreenAllResult screen_all(const Dataset& u_in, const Dataset& v_in, const ScreeningConfig& config) {
  require_compatible(u_in, v_in);
  config.validate();
  const std::vector<int> fu = assign_folds(static_cast<int>(u_in.n()), config.n_folds, config.seed);
  const std::vector<int> fv = assign_folds(static_cast<int>(v_in.n()), config.n_folds, config.seed);
  std::vector<int> fuv(fu);
  fuv.insert(fuv.end(), fv.begin(), fv.end());
  ScreenAllResult out;
  out.u = screen(u_in, config, fu);
  out.v = screen(v_in, config, fv);
  out.uv = screen(stack(u_in, v_in), config, fuv, static_cast<std::size_t>(std::max(u_in.n(), v_in.n())));
  out.sets = ActiveSets::make(out.u.active, out.v.active, out.uv.active);
  return out;
}

}  // namespace hddiff
