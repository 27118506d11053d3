#include "hddiff/error.hpp"
#include "hddiff/io.hpp"
#include "hddiff/permtest.hpp"
#include "hddiff/simulate.hpp"
#include "hddiff/testing.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>

using namespace hddiff;
using nlohmann::json;

namespace {

struct DataOptions {
  std::string u, v, backtest;
  std::vector<std::string> x_cols;
  bool center = false;
};

struct ScreenOptions {
  int folds = 10;
  int grid_size = 50;
  double cap_multiplier = 0.2;
};

void add_data_options(CLI::App* app, DataOptions& d, bool regression_only) {
  app->add_option("--u", d.u, "CSV file of population U");
  app->add_option("--v", d.v, "CSV file of population V");
  app->add_option("--backtest", d.backtest, "CSV file split at random into two pseudo-populations");
  if (regression_only) {
    app->add_option("--x-cols", d.x_cols, "predictor columns to use (default: all but the first)")->delimiter(',');
  }
}

void add_screen_options(CLI::App* app, ScreenOptions& s) {
  app->add_option("--folds", s.folds, "cross-validation folds")->capture_default_str();
  app->add_option("--grid-size", s.grid_size, "lambda grid size")->capture_default_str();
  app->add_option("--cap-multiplier", s.cap_multiplier, "active-set cap per sample")->capture_default_str();
}

ScreeningConfig screening_config(const ScreenOptions& s) {
  ScreeningConfig c;
  c.n_folds = s.folds;
  c.lambda_grid_size = s.grid_size;
  c.cap_multiplier = s.cap_multiplier;
  return c;
}

Dataset load(const std::string& path, bool regression, const DataOptions& d) {
  const Table t = read_csv(path);
  if (regression) return regression_from_table(t, path, d.x_cols);
  Dataset g = ggm_from_table(t, path);
  return d.center ? g.centered() : g;
}

std::pair<Dataset, Dataset> load_pair(const DataOptions& d, bool regression, std::uint64_t seed) {
  if (!d.backtest.empty()) {
    if (!d.u.empty() || !d.v.empty()) throw InputError("--backtest cannot be combined with --u/--v");
    const Dataset pooled = load(d.backtest, regression, d);
    return backtest_split(pooled, seed);
  }
  if (d.u.empty() || d.v.empty()) throw InputError("both --u and --v are required (or --backtest)");
  Dataset u = load(d.u, regression, d);
  Dataset v = load(d.v, regression, d);
  if (u.labels() != v.labels()) throw InputError("'" + d.u + "' and '" + d.v + "' have different columns");
  require_compatible(u, v);
  return {std::move(u), std::move(v)};
}

json inputs_json(const DataOptions& d, bool regression) {
  json j = {{"u", d.u.empty() ? json(nullptr) : json(d.u)},
            {"v", d.v.empty() ? json(nullptr) : json(d.v)},
            {"backtest", d.backtest.empty() ? json(nullptr) : json(d.backtest)}};
  if (regression) j["x_cols"] = d.x_cols;
  else j["center"] = d.center;
  return j;
}

void emit(const json& report, const std::string& out, const std::string& summary) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
    std::cout << summary;
  }
}

std::vector<double> defaulted(const std::vector<double>& v, double d) { return v.empty() ? std::vector<double>{d} : v; }
std::vector<int> defaulted(const std::vector<int>& v, int d) { return v.empty() ? std::vector<int>{d} : v; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample testing of high-dimensional regression and graphical models"};
  app.require_subcommand(1);
  int threads = 0;
  bool timing = false;
  std::string out;
  std::uint64_t seed = 1;

  // diffregr / diffnet
  DataOptions dd;
  ScreenOptions ds;
  TestConfig tc;
  double agg_constant = 0.0;
  std::string b_estimator = "plugin";
  auto add_diff = [&](const char* name, const char* help, bool regression) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_data_options(sub, dd, regression);
    if (!regression) sub->add_flag("--center", dd.center, "centre every column before testing");
    add_screen_options(sub, ds);
    sub->add_option("--splits", tc.k_splits, "number of random splits")->capture_default_str();
    sub->add_option("--gamma-min", tc.gamma_min, "lower quantile bound for aggregation")->capture_default_str();
    sub->add_option("--agg-constant", agg_constant, "aggregation multiplier (default 1 - gamma_min)");
    sub->add_option("--b-estimator", b_estimator, "plugin or sample")->capture_default_str();
    sub->add_option("--screen-size", tc.screen_size, "rows per population used for screening (0: half)");
    sub->add_option("--seed", seed, "random seed")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (default: HDDIFF_THREADS or 1)");
    sub->add_option("--out", out, "JSON report path (default: stdout)");
    sub->add_flag("--timing", timing, "include wall-clock seconds in the report");
    return sub;
  };
  CLI::App* regr = add_diff("diffregr", "differential regression test", true);
  CLI::App* net = add_diff("diffnet", "differential network test", false);

  // permtest
  DataOptions pd;
  ScreenOptions ps;
  int n_perm = 100;
  std::string model = "regression";
  bool fixed_lambda = false;
  CLI::App* perm = app.add_subcommand("permtest", "permutation test on the symmetric KL divergence");
  add_data_options(perm, pd, true);
  perm->add_flag("--center", pd.center, "centre every column (graphical model)");
  add_screen_options(perm, ps);
  perm->add_option("--model", model, "regression or ggm")->capture_default_str();
  perm->add_option("--n-perm", n_perm, "number of permutations")->capture_default_str();
  perm->add_flag("--fixed-lambda", fixed_lambda, "reuse the observed lambdas for every permutation");
  perm->add_option("--seed", seed, "random seed")->capture_default_str();
  perm->add_option("--threads", threads, "worker threads (default: HDDIFF_THREADS or 1)");
  perm->add_option("--out", out, "JSON report path (default: stdout)");

  // simulate
  std::string setting = "1";
  std::vector<int> ls, ks, ns;
  std::vector<double> alphas;
  std::vector<std::string> hypotheses{"H0"};
  std::vector<std::string> methods{"multi-split"};
  int runs = 100;
  double level = 0.05;
  double snr = 0.0;
  std::string x_file, csv;
  ScreenOptions ss;
  TestConfig stc;
  int sim_perm = 100;
  CLI::App* sim = app.add_subcommand("simulate", "false/true positive rates on synthetic data");
  sim->add_option("--setting", setting, "1, 2, 4 or reg-external")->capture_default_str();
  sim->add_option("--l", ls, "predictor counts (settings 1, 2)")->delimiter(',');
  sim->add_option("--k", ks, "variable counts (setting 4)")->delimiter(',');
  sim->add_option("--n", ns, "samples per population")->delimiter(',');
  sim->add_option("--alpha", alphas, "alternative strengths")->delimiter(',');
  sim->add_option("--hypothesis", hypotheses, "H0, HA or both")->delimiter(',')->capture_default_str();
  sim->add_option("--snr", snr, "signal-to-noise ratio (default 10, or 5 for setting 2)");
  sim->add_option("--runs", runs, "replicates per cell")->capture_default_str();
  sim->add_option("--methods", methods, "ordinary-lrt, single-split, multi-split, permutation")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--level", level, "significance level")->capture_default_str();
  sim->add_option("--x-file", x_file, "predictor CSV for reg-external");
  sim->add_option("--splits", stc.k_splits, "splits per multi-split test")->capture_default_str();
  sim->add_option("--gamma-min", stc.gamma_min, "lower quantile bound for aggregation")->capture_default_str();
  sim->add_option("--n-perm", sim_perm, "permutations per permutation test")->capture_default_str();
  add_screen_options(sim, ss);
  sim->add_option("--seed", seed, "random seed")->capture_default_str();
  sim->add_option("--threads", threads, "worker threads (default: HDDIFF_THREADS or 1)");
  sim->add_option("--out", out, "JSON results path (default: stdout)");
  sim->add_option("--csv", csv, "CSV results path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (regr->parsed() || net->parsed()) {
      const bool regression = regr->parsed();
      tc.seed = seed;
      tc.threads = threads;
      tc.screening = screening_config(ds);
      tc.b_estimator = parse_b_estimator(b_estimator);
      if (agg_constant != 0.0) tc.agg_constant = agg_constant;
      tc.validate();
      const auto [u, v] = load_pair(dd, regression, seed);
      const TestReport rep = multi_split_test(u, v, tc);
      json report = {{"schema_version", kSchemaVersion},
                     {"command", regression ? "diffregr" : "diffnet"},
                     {"inputs", inputs_json(dd, regression)},
                     {"result", to_json(rep, u, timing)}};
      if (timing) std::cerr << "elapsed " << rep.seconds << " s\n";
      std::ostringstream summary;
      summary.precision(6);
      summary << "p_aggregated " << rep.p_aggregated << " (" << rep.n_valid << " of " << tc.k_splits
              << " splits valid)\n";
      emit(report, out, summary.str());
    } else if (perm->parsed()) {
      if (model != "regression" && model != "ggm") throw InputError("--model must be regression or ggm");
      const bool regression = model == "regression";
      PermConfig pc;
      pc.n_perm = n_perm;
      pc.seed = seed;
      pc.screening = screening_config(ps);
      pc.reselect_lambda = !fixed_lambda;
      pc.threads = threads;
      pc.validate();
      const auto [u, v] = load_pair(pd, regression, seed);
      const PermResult r = perm_test(u, v, pc);
      json report = {{"schema_version", kSchemaVersion},
                     {"command", "permtest"},
                     {"inputs", inputs_json(pd, regression)},
                     {"config",
                      {{"model", model},
                       {"n_perm", n_perm},
                       {"seed", seed},
                       {"reselect_lambda", !fixed_lambda},
                       {"screening", {{"n_folds", ps.folds}, {"lambda_grid_size", ps.grid_size}}}}},
                     {"result", to_json(r)}};
      std::ostringstream summary;
      summary.precision(6);
      summary << "statistic " << r.statistic << "\npvalue " << r.pvalue << "\nexceedances " << r.exceedances
              << " of " << r.n_perm << "\n";
      if (out.empty()) std::cerr << summary.str();
      emit(report, out, summary.str());
    } else {
      SimSpec base;
      base.seed = seed;
      if (setting == "1" || setting == "2") {
        base.setting = Setting::RegSynthetic;
        base.snr = setting == "1" ? 10.0 : 5.0;
      } else if (setting == "4") {
        base.setting = Setting::Ggm;
      } else if (setting == "reg-external") {
        base.setting = Setting::RegExternal;
        if (x_file.empty()) throw InputError("--setting reg-external requires --x-file");
        base.external_x = std::make_shared<const Matrix>(read_csv(x_file).values);
      } else {
        throw InputError("unknown setting '" + setting + "' (expected 1, 2, 4 or reg-external)");
      }
      if (snr != 0.0) base.snr = snr;
      if (base.setting != Setting::RegExternal && !x_file.empty()) throw InputError("--x-file needs --setting reg-external");
      std::vector<int> dims;
      if (base.setting == Setting::Ggm) {
        if (!ls.empty()) throw InputError("--l does not apply to setting 4");
        dims = defaulted(ks, 10);
      } else if (base.setting == Setting::RegExternal) {
        if (!ls.empty() || !ks.empty()) throw InputError("the external design fixes the predictor count");
        dims = {static_cast<int>(base.external_x->cols())};
      } else {
        if (!ks.empty()) throw InputError("--k applies to setting 4 only");
        dims = defaulted(ls, 10);
      }
      std::vector<SimSpec> grid;
      for (const auto& h : hypotheses) {
        if (h != "H0" && h != "HA") throw InputError("unknown hypothesis '" + h + "'");
        for (int n : defaulted(ns, 200))
          for (int dim : dims) {
            const std::vector<double> as = h == "H0" ? std::vector<double>{defaulted(alphas, 0.5).front()}
                                                     : defaulted(alphas, 0.5);
            for (double a : as) {
              SimSpec s = base;
              s.n = n;
              s.dim = dim;
              s.alpha = a;
              s.hypothesis = h == "H0" ? Hypothesis::H0 : Hypothesis::HA;
              grid.push_back(s);
            }
          }
      }
      ExperimentConfig ec;
      ec.runs = runs;
      ec.level = level;
      ec.threads = threads;
      ec.methods.clear();
      for (const auto& m : methods) ec.methods.push_back(parse_method(m));
      stc.screening = screening_config(ss);
      ec.test = stc;
      ec.perm.n_perm = sim_perm;
      ec.perm.screening = stc.screening;
      const auto cells = run_experiment(grid, ec);
      json report = {{"schema_version", kSchemaVersion},
                     {"command", "simulate"},
                     {"inputs", {{"setting", setting}, {"x_file", x_file.empty() ? json(nullptr) : json(x_file)}}},
                     {"result", to_json(cells, ec)}};
      const std::string table = cells_to_csv(cells);
      if (!csv.empty()) write_text(csv, table);
      emit(report, out, table);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
