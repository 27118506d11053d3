#include "hddiff/error.hpp"
#include "hddiff/io.hpp"
#include "hddiff/nulldist.hpp"
#include "hddiff/permtest.hpp"
#include "hddiff/simulate.hpp"
#include "hddiff/testing.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hddiff;

namespace {

Dataset regression_data(const Matrix& m) {
  if (m.cols() < 2) throw InputError("regression data needs a response column and at least one predictor");
  return Dataset::regression(m.col(0), m.rightCols(m.cols() - 1));
}

ScreeningConfig screening(int folds, int grid_size, double cap_multiplier) {
  ScreeningConfig s;
  s.n_folds = folds;
  s.lambda_grid_size = grid_size;
  s.cap_multiplier = cap_multiplier;
  return s;
}

std::string two_sample(const Dataset& u, const Dataset& v, int splits, double gamma_min,
                       std::optional<double> agg_constant, const std::string& b_estimator, int screen_size,
                       std::uint64_t seed, int folds, int grid_size, double cap_multiplier, int threads) {
  TestConfig tc;
  tc.k_splits = splits;
  tc.gamma_min = gamma_min;
  tc.agg_constant = agg_constant;
  tc.b_estimator = parse_b_estimator(b_estimator);
  tc.screen_size = screen_size;
  tc.seed = seed;
  tc.screening = screening(folds, grid_size, cap_multiplier);
  tc.threads = threads;
  tc.validate();
  return to_json(multi_split_test(u, v, tc), u, false).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "High-dimensional two-sample testing";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);
  m.attr("schema_version") = kSchemaVersion;

  m.def(
      "diffregr",
      [](const Matrix& u, const Matrix& v, int splits, double gamma_min, std::optional<double> agg_constant,
         const std::string& b_estimator, int screen_size, std::uint64_t seed, int folds, int grid_size,
         double cap_multiplier, int threads) {
        return two_sample(regression_data(u), regression_data(v), splits, gamma_min, agg_constant, b_estimator,
                          screen_size, seed, folds, grid_size, cap_multiplier, threads);
      },
      py::arg("u"), py::arg("v"), py::arg("splits") = 50, py::arg("gamma_min") = 0.05,
      py::arg("agg_constant") = py::none(), py::arg("b_estimator") = "plugin", py::arg("screen_size") = 0,
      py::arg("seed") = 1, py::arg("folds") = 10, py::arg("grid_size") = 50, py::arg("cap_multiplier") = 0.2,
      py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>(),
      "Differential regression test; the first column of each array is the response. Returns the report as JSON.");

  m.def(
      "diffnet",
      [](const Matrix& u, const Matrix& v, int splits, double gamma_min, std::optional<double> agg_constant,
         const std::string& b_estimator, int screen_size, std::uint64_t seed, int folds, int grid_size,
         double cap_multiplier, int threads) {
        return two_sample(Dataset::ggm(u), Dataset::ggm(v), splits, gamma_min, agg_constant, b_estimator,
                          screen_size, seed, folds, grid_size, cap_multiplier, threads);
      },
      py::arg("u"), py::arg("v"), py::arg("splits") = 50, py::arg("gamma_min") = 0.05,
      py::arg("agg_constant") = py::none(), py::arg("b_estimator") = "plugin", py::arg("screen_size") = 0,
      py::arg("seed") = 1, py::arg("folds") = 10, py::arg("grid_size") = 50, py::arg("cap_multiplier") = 0.2,
      py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>(),
      "Differential network test on zero-mean samples. Returns the report as JSON.");

  m.def(
      "permtest",
      [](const Matrix& u, const Matrix& v, const std::string& model, int n_perm, std::uint64_t seed,
         bool fixed_lambda, int threads) {
        if (model != "regression" && model != "ggm") throw InputError("model must be regression or ggm");
        PermConfig pc;
        pc.n_perm = n_perm;
        pc.seed = seed;
        pc.reselect_lambda = !fixed_lambda;
        pc.threads = threads;
        pc.validate();
        const bool reg = model == "regression";
        return to_json(perm_test(reg ? regression_data(u) : Dataset::ggm(u), reg ? regression_data(v) : Dataset::ggm(v),
                                 pc))
            .dump();
      },
      py::arg("u"), py::arg("v"), py::arg("model") = "regression", py::arg("n_perm") = 100, py::arg("seed") = 1,
      py::arg("fixed_lambda") = false, py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>(),
      "Permutation test on the symmetric KL divergence of l1 fits. Returns the result as JSON.");

  m.def(
      "generate",
      [](const std::string& setting, int n, int dim, const std::string& hypothesis, double alpha, double snr,
         std::uint64_t seed) {
        SimSpec s;
        if (setting == "regression")
          s.setting = Setting::RegSynthetic;
        else if (setting == "ggm")
          s.setting = Setting::Ggm;
        else
          throw InputError("setting must be regression or ggm");
        if (hypothesis != "H0" && hypothesis != "HA") throw InputError("hypothesis must be H0 or HA");
        s.n = n;
        s.dim = dim;
        s.hypothesis = hypothesis == "H0" ? Hypothesis::H0 : Hypothesis::HA;
        s.alpha = alpha;
        s.snr = snr;
        s.seed = seed;
        const SimData d = generate(s);
        auto as_matrix = [&](const Dataset& x) -> Matrix {
          if (x.kind() == ModelKind::Ggm) return x.y();
          Matrix out(x.n(), x.l() + 1);
          out << x.response(), x.x();
          return out;
        };
        return py::make_tuple(as_matrix(d.u), as_matrix(d.v));
      },
      py::arg("setting") = "regression", py::arg("n") = 200, py::arg("dim") = 10, py::arg("hypothesis") = "H0",
      py::arg("alpha") = 0.5, py::arg("snr") = 10.0, py::arg("seed") = 1,
      "Synthetic pair of populations; regression arrays hold the response in column 0.");

  m.def("wchisq_cdf", &wchisq_cdf, py::arg("x"), py::arg("nu"));
  m.def("pvalue", &pvalue, py::arg("lr"), py::arg("nu"));
  m.def(
      "aggregate_pvalues",
      [](const std::vector<double>& p, double gamma_min, std::optional<double> constant) {
        return aggregate_pvalues(p, gamma_min, constant);
      },
      py::arg("pvalues"), py::arg("gamma_min") = 0.05, py::arg("constant") = py::none());
}
