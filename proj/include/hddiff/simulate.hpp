#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/params.hpp"
#include "hddiff/permtest.hpp"
#include "hddiff/testing.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hddiff {

enum class Setting { RegSynthetic, RegExternal, Ggm };
enum class Hypothesis { H0, HA };

const char* to_string(Setting s);
const char* to_string(Hypothesis h);

struct SimSpec {
  Setting setting = Setting::RegSynthetic;
  int n = 200;    // samples per population
  int dim = 10;   // l for regression, k for the graphical model
  double snr = 10.0;
  double alpha = 0.5;  // alpha_1 (regression) or alpha_2 (graphical model)
  Hypothesis hypothesis = Hypothesis::H0;
  std::uint64_t seed = 1;
  double rho = 0.5;       // AR(1) predictor correlation
  double offdiag = 0.5;   // precision entry before rescaling
  std::shared_ptr<const Matrix> external_x;  // RegExternal only

  void validate() const;
};

struct SimTruth {
  Params phi_u, phi_v;
  ScreeningTruth support;
  // Population second moment of the predictors (regression).
  Matrix x_moment;
  // Both populations share one parameter.
  bool identical = false;
};

struct SimData {
  Dataset u, v;
  SimTruth truth;
};

// AR(1) covariance rho^|j - j'|.
Matrix ar1_covariance(int l, double rho);

SimData gen_regression(const SimSpec& spec);
SimData gen_ggm(const SimSpec& spec);
SimData generate(const SimSpec& spec);

// Precision matrix with ones on the diagonal and `value` at the given
// (j, j') pairs, shrunk towards the identity until its smallest eigenvalue
// is at least 0.1.
Matrix build_precision(int k, const std::vector<std::pair<int, int>>& pairs, double value);

enum class Method { OrdinaryLrt, SingleSplit, MultiSplit, Permutation };
const char* to_string(Method m);
Method parse_method(const std::string& s);

struct RunRecord {
  int run = 0;
  Method method = Method::MultiSplit;
  bool applicable = true;
  bool ok = false;
  std::string error;
  double pvalue = 1.0;
  double statistic = 0.0;
  // Screening diagnostics of split 1 (single/multi-split only).
  std::optional<SplitDiagnostics> diagnostics;
  int n_valid_splits = 0;
};

struct CellResult {
  SimSpec spec;
  Method method = Method::MultiSplit;
  int runs = 0;
  int n_ok = 0;
  int n_error = 0;
  int n_not_applicable = 0;
  int rejections = 0;
  double rate = 0.0;  // false positive rate under H0, true positive rate under HA
  double se = 0.0;
  std::vector<RunRecord> records;
};

struct ExperimentConfig {
  int runs = 100;
  std::vector<Method> methods{Method::MultiSplit};
  double level = 0.05;
  TestConfig test;
  PermConfig perm;
  int threads = 0;
};

// Unrestricted LR over all parameters with a chi-square_p reference.
// Returns nullopt when the unrestricted fit does not exist.
std::optional<std::pair<double, double>> ordinary_lrt(const Dataset& u, const Dataset& v);

std::vector<CellResult> run_experiment(const std::vector<SimSpec>& grid, const ExperimentConfig& config);

}  // namespace hddiff
