#include "hddiff/simulate.hpp"

#include "hddiff/error.hpp"
#include "hddiff/models.hpp"
#include "hddiff/parallel.hpp"
#include "hddiff/rng.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>

namespace hddiff {

namespace {

enum SimStream : std::uint64_t { kLocations = 1, kDataU = 2, kDataV = 3, kTest = 4, kPerm = 5 };

Matrix standard_normal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

Matrix ar1_sample(int n, int l, double rho, Rng& rng) {
  const Matrix z = standard_normal(n, l, rng);
  Matrix x(n, l);
  const double s = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = z(i, 0);
    for (int j = 1; j < l; ++j) x(i, j) = rho * x(i, j - 1) + s * z(i, j);
  }
  return x;
}

Dataset regression_sample(const Matrix& x, const RegressionParams& p, Rng& rng) {
  std::normal_distribution<double> z;
  Vector y = x * p.beta;
  const double sd = std::sqrt(p.sigma2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sd * z(rng);
  return Dataset::regression(y, x);
}

IndexSet regression_support(const Vector& beta) {
  IndexSet s;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) s.push_back(static_cast<int>(j));
  s.push_back(static_cast<int>(beta.size()));
  return s;
}

IndexSet ggm_support(const Matrix& omega) {
  const int k = static_cast<int>(omega.rows());
  const ParamLayout layout(ModelKind::Ggm, k);
  IndexSet s;
  for (int j = 0; j < k; ++j)
    for (int jp = 0; jp <= j; ++jp)
      if (omega(j, jp) != 0.0) s.push_back(layout.entry(j, jp).position);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

const char* to_string(Setting s) {
  switch (s) {
    case Setting::RegSynthetic: return "reg-synthetic";
    case Setting::RegExternal: return "reg-external";
    case Setting::Ggm: return "ggm";
  }
  return "?";
}

const char* to_string(Hypothesis h) { return h == Hypothesis::H0 ? "H0" : "HA"; }

const char* to_string(Method m) {
  switch (m) {
    case Method::OrdinaryLrt: return "ordinary-lrt";
    case Method::SingleSplit: return "single-split";
    case Method::MultiSplit: return "multi-split";
    case Method::Permutation: return "permutation";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::OrdinaryLrt, Method::SingleSplit, Method::MultiSplit, Method::Permutation})
    if (s == to_string(m)) return m;
  throw InputError("unknown method '" + s + "'");
}

void SimSpec::validate() const {
  if (n < 8) throw InputError("simulation needs at least 8 samples per population");
  if (!(snr > 0.0)) throw InputError("snr must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw InputError("AR(1) correlation must lie in (-1, 1)");
  switch (setting) {
    case Setting::RegSynthetic:
      if (dim < 7) throw InputError("regression settings need l >= 7");
      break;
    case Setting::RegExternal:
      if (!external_x) throw InputError("external-design setting needs a predictor matrix");
      if (external_x->cols() < 7) throw InputError("external design needs at least 7 columns");
      if (external_x->rows() < 2 * n) throw InputError("external design has fewer than 2n rows");
      if (!external_x->allFinite()) throw InputError("external design has non-finite entries");
      break;
    case Setting::Ggm:
      if (dim < 5) throw InputError("graphical-model setting needs k >= 5");
      if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("alpha_2 must lie in (0, 1]");
      if (!(offdiag != 0.0 && std::isfinite(offdiag))) throw InputError("off-diagonal value must be nonzero");
      break;
  }
  if (setting != Setting::Ggm && !std::isfinite(alpha)) throw InputError("alpha_1 must be finite");
}

Matrix ar1_covariance(int l, double rho) {
  Matrix s(l, l);
  for (int j = 0; j < l; ++j)
    for (int jp = 0; jp < l; ++jp) s(j, jp) = std::pow(rho, std::abs(j - jp));
  return s;
}

SimData gen_regression(const SimSpec& spec) {
  spec.validate();
  if (spec.setting == Setting::Ggm) throw InputError("not a regression setting");
  const bool external = spec.setting == Setting::RegExternal;
  const int l = external ? static_cast<int>(spec.external_x->cols()) : spec.dim;

  Rng loc = make_rng(spec.seed, {stream::kSimulation, kLocations});
  const std::vector<int> slots = random_permutation(l, loc);
  Vector bu = Vector::Zero(l), bv = Vector::Zero(l);
  if (spec.hypothesis == Hypothesis::H0) {
    for (int i = 0; i < 5; ++i) bu(slots[static_cast<std::size_t>(i)]) = 1.0;
    bv = bu;
  } else {
    for (int i = 0; i < 3; ++i) bu(slots[static_cast<std::size_t>(i)]) = bv(slots[static_cast<std::size_t>(i)]) = 1.0;
    bu(slots[3]) = bu(slots[4]) = spec.alpha;
    bv(slots[5]) = bv(slots[6]) = spec.alpha;
  }

  SimData out;
  Matrix xu, xv;
  if (external) {
    const Matrix& ext = *spec.external_x;
    out.truth.x_moment = symmetrize(ext.transpose() * ext / static_cast<double>(ext.rows()));
    const std::vector<int> rows = random_permutation(static_cast<int>(ext.rows()), loc);
    const std::vector<int> ru(rows.begin(), rows.begin() + spec.n), rv(rows.begin() + spec.n, rows.begin() + 2 * spec.n);
    xu = select_rows(ext, ru);
    xv = select_rows(ext, rv);
  } else {
    out.truth.x_moment = ar1_covariance(l, spec.rho);
  }
  const Matrix& sx = out.truth.x_moment;
  const RegressionParams pu{bu, bu.dot(sx * bu) / spec.snr};
  const RegressionParams pv{bv, bv.dot(sx * bv) / spec.snr};
  if (!(pu.sigma2 > 0.0) || !(pv.sigma2 > 0.0)) throw InputError("signal variance is zero for this design");

  Rng ru = make_rng(spec.seed, {stream::kSimulation, kDataU});
  Rng rv = make_rng(spec.seed, {stream::kSimulation, kDataV});
  if (!external) {
    xu = ar1_sample(spec.n, l, spec.rho, ru);
    xv = ar1_sample(spec.n, l, spec.rho, rv);
  }
  out.u = regression_sample(xu, pu, ru);
  out.v = regression_sample(xv, pv, rv);
  out.truth.phi_u = pu;
  out.truth.phi_v = pv;
  out.truth.identical = bu == bv && pu.sigma2 == pv.sigma2;
  out.truth.support.support_u = regression_support(bu);
  out.truth.support.support_v = regression_support(bv);
  out.truth.support.support_uv = set_union(out.truth.support.support_u, out.truth.support.support_v);
  return out;
}

Matrix build_precision(int k, const std::vector<std::pair<int, int>>& pairs, double value) {
  Matrix a = Matrix::Zero(k, k);
  for (auto [j, jp] : pairs) a(j, jp) = a(jp, j) = value;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  // I + A / d has unit diagonal and smallest eigenvalue 1 + lambda_min(A) / d >= 0.1
  const double d = std::max(1.0, -es.eigenvalues().minCoeff() / 0.9);
  return Matrix::Identity(k, k) + a / d;
}

SimData gen_ggm(const SimSpec& spec) {
  spec.validate();
  if (spec.setting != Setting::Ggm) throw InputError("not a graphical-model setting");
  const int k = spec.dim;
  std::vector<std::pair<int, int>> all;
  for (int j = 1; j < k; ++j)
    for (int jp = 0; jp < j; ++jp) all.emplace_back(j, jp);
  Rng loc = make_rng(spec.seed, {stream::kSimulation, kLocations});
  const std::vector<int> order = random_permutation(static_cast<int>(all.size()), loc);
  auto pair_at = [&](int i) { return all[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]; };

  const int shared = spec.hypothesis == Hypothesis::H0 ? k : static_cast<int>(std::ceil(k * spec.alpha - 1e-12));
  if (2 * k - shared > static_cast<int>(all.size())) throw InputError("k too small for disjoint alternative edges");
  std::vector<std::pair<int, int>> pu, pv;
  for (int i = 0; i < k; ++i) pu.push_back(pair_at(i));
  for (int i = 0; i < shared; ++i) pv.push_back(pair_at(i));
  for (int i = k; i < 2 * k - shared; ++i) pv.push_back(pair_at(i));

  const GgmParams gu = GgmParams::from_precision(build_precision(k, pu, spec.offdiag));
  const GgmParams gv = GgmParams::from_precision(build_precision(k, pv, spec.offdiag));
  auto draw = [&](const GgmParams& g, std::uint64_t tag) {
    Rng rng = make_rng(spec.seed, {stream::kSimulation, tag});
    const Matrix z = standard_normal(spec.n, k, rng);
    // rows y = L^{-T} z with Omega = L L^T
    const Matrix l = Eigen::LLT<Matrix>(g.omega).matrixL();
    return Dataset::ggm(l.transpose().triangularView<Eigen::Upper>().solve(z.transpose()).transpose());
  };
  SimData out;
  out.u = draw(gu, kDataU);
  out.v = draw(gv, kDataV);
  out.truth.phi_u = gu;
  out.truth.phi_v = gv;
  out.truth.identical = gu.omega == gv.omega;
  out.truth.support.support_u = ggm_support(gu.omega);
  out.truth.support.support_v = ggm_support(gv.omega);
  out.truth.support.support_uv = set_union(out.truth.support.support_u, out.truth.support.support_v);
  return out;
}

SimData generate(const SimSpec& spec) {
  return spec.setting == Setting::Ggm ? gen_ggm(spec) : gen_regression(spec);
}

std::optional<std::pair<double, double>> ordinary_lrt(const Dataset& u, const Dataset& v) {
  require_compatible(u, v);
  const ParamLayout layout = ParamLayout::of(u);
  const Eigen::Index need = u.kind() == ModelKind::Regression ? u.l() : u.k();
  if (u.n() <= need || v.n() <= need) return std::nullopt;
  IndexSet all(static_cast<std::size_t>(layout.size()));
  for (int i = 0; i < layout.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  try {
    const double lr = restricted_lr(u, v, ActiveSets::make(all, all, all)).lr;
    const double p = boost::math::cdf(boost::math::complement(
        boost::math::chi_squared(static_cast<double>(layout.size())), std::max(lr, 0.0)));
    return std::make_pair(lr, p);
  } catch (const InputError&) {
    return std::nullopt;
  }
}

std::vector<CellResult> run_experiment(const std::vector<SimSpec>& grid, const ExperimentConfig& config) {
  if (config.runs < 1) throw InputError("runs must be at least 1");
  if (config.methods.empty()) throw InputError("no methods selected");
  if (!(config.level > 0.0 && config.level < 1.0)) throw InputError("level must lie in (0, 1)");
  if (grid.empty()) throw InputError("empty simulation grid");
  config.test.validate();
  for (const auto& s : grid) s.validate();
  const bool want_perm =
      std::find(config.methods.begin(), config.methods.end(), Method::Permutation) != config.methods.end();
  if (want_perm) config.perm.validate();

  const std::size_t runs = static_cast<std::size_t>(config.runs);
  const std::size_t m = config.methods.size();
  std::vector<CellResult> cells;
  for (const auto& spec : grid)
    for (Method method : config.methods) {
      CellResult c;
      c.spec = spec;
      c.method = method;
      c.runs = config.runs;
      c.records.resize(runs);
      cells.push_back(std::move(c));
    }

  parallel_for(grid.size() * runs, resolve_threads(config.threads), [&](std::size_t task) {
    const std::size_t g = task / runs;
    const std::size_t run = task % runs;
    SimSpec spec = grid[g];
    spec.seed = derive_seed(grid[g].seed, {stream::kSimulation, run});
    std::vector<RunRecord> recs(m);
    for (std::size_t i = 0; i < m; ++i) {
      recs[i].run = static_cast<int>(run) + 1;
      recs[i].method = config.methods[i];
    }
    try {
      const SimData data = generate(spec);
      std::optional<SplitOutcome> first;
      for (std::size_t i = 0; i < m; ++i) {
        RunRecord& r = recs[i];
        try {
          switch (r.method) {
            case Method::OrdinaryLrt: {
              const auto o = ordinary_lrt(data.u, data.v);
              if (!o) {
                r.applicable = false;
                break;
              }
              r.statistic = o->first;
              r.pvalue = o->second;
              r.ok = true;
              break;
            }
            case Method::SingleSplit:
            case Method::MultiSplit: {
              TestConfig tc = config.test;
              tc.seed = derive_seed(spec.seed, {kTest});
              tc.threads = 1;
              if (r.method == Method::MultiSplit) {
                const TestReport rep = multi_split_test(data.u, data.v, tc, &data.truth.support);
                first = rep.splits.front();
                r.pvalue = rep.p_aggregated;
                r.n_valid_splits = rep.n_valid;
                r.diagnostics = rep.splits.front().diagnostics;
                r.ok = true;
              } else {
                const SplitOutcome s = first ? *first : single_split_test(data.u, data.v, tc, 1, &data.truth.support);
                r.diagnostics = s.diagnostics;
                r.n_valid_splits = s.valid ? 1 : 0;
                if (!s.valid) throw ComputationError(s.error);
                r.statistic = s.lr;
                r.pvalue = s.pvalue;
                r.ok = true;
              }
              break;
            }
            case Method::Permutation: {
              PermConfig pc = config.perm;
              pc.seed = derive_seed(spec.seed, {kPerm});
              pc.threads = 1;
              const PermResult p = perm_test(data.u, data.v, pc);
              r.statistic = p.statistic;
              r.pvalue = p.pvalue;
              r.ok = true;
              break;
            }
          }
        } catch (const std::exception& e) {
          r.ok = false;
          r.error = e.what();
        }
      }
    } catch (const std::exception& e) {
      for (auto& r : recs) r.error = e.what();
    }
    for (std::size_t i = 0; i < m; ++i) cells[g * m + i].records[run] = std::move(recs[i]);
  });

  for (auto& c : cells) {
    for (const auto& r : c.records) {
      if (!r.applicable) {
        ++c.n_not_applicable;
      } else if (!r.ok) {
        ++c.n_error;
      } else {
        ++c.n_ok;
        if (r.pvalue <= config.level) ++c.rejections;
      }
    }
    if (c.n_ok > 0) {
      c.rate = static_cast<double>(c.rejections) / c.n_ok;
      c.se = std::sqrt(c.rate * (1.0 - c.rate) / c.n_ok);
    }
  }
  return cells;
}

}  // namespace hddiff
