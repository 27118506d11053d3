#include "hddiff/io.hpp"

#include "hddiff/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace hddiff {

using nlohmann::json;

namespace {

std::string where(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line) + ": "; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

json index_json(const IndexSet& idx, const ParamLayout& layout, const std::vector<std::string>& names) {
  json labels = json::array();
  for (int p : idx) labels.push_back(layout.label(p, names));
  return {{"positions", idx}, {"labels", labels}};
}

json vec(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

}  // namespace

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (t.header.empty()) {
      t.header = fields;
      for (const auto& h : t.header)
        if (h.empty()) throw InputError(where(path, lineno) + "empty column name in header");
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError(where(path, lineno) + "expected " + std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(value))
        throw InputError(where(path, lineno) + "column '" + t.header[j] + "': '" + f + "' is not a finite number");
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InputError("'" + path + "' is empty (a header row is required)");
  if (rows.empty()) throw InputError("'" + path + "' has no data rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

Dataset regression_from_table(const Table& t, const std::string& path, const std::vector<std::string>& x_cols) {
  if (t.header.size() < 2) throw InputError("'" + path + "' needs a response column and at least one predictor");
  std::vector<int> cols;
  if (x_cols.empty()) {
    for (int j = 1; j < static_cast<int>(t.header.size()); ++j) cols.push_back(j);
  } else {
    for (const auto& name : x_cols) {
      const auto it = std::find(t.header.begin() + 1, t.header.end(), name);
      if (it == t.header.end()) throw InputError("'" + path + "' has no predictor column '" + name + "'");
      cols.push_back(static_cast<int>(it - t.header.begin()));
    }
  }
  std::vector<std::string> labels{t.header[0]};
  for (int j : cols) labels.push_back(t.header[static_cast<std::size_t>(j)]);
  try {
    return Dataset::regression(t.values.col(0), select_cols(t.values, cols), labels);
  } catch (const InputError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

Dataset ggm_from_table(const Table& t, const std::string& path) {
  try {
    return Dataset::ggm(t.values, t.header);
  } catch (const InputError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

json to_json(const TestConfig& c) {
  return {{"k_splits", c.k_splits},
          {"gamma_min", c.gamma_min},
          {"aggregation_constant", c.aggregation_constant()},
          {"b_estimator", to_string(c.b_estimator)},
          {"seed", c.seed},
          {"screen_size", c.screen_size},
          {"screening",
           {{"n_folds", c.screening.n_folds},
            {"lambda_grid_size", c.screening.lambda_grid_size},
            {"lambda_min_ratio", c.screening.lambda_min_ratio},
            {"cap_multiplier", c.screening.cap_multiplier}}}};
}

json to_json(const SplitOutcome& s, const Dataset& layout_source) {
  const ParamLayout layout = ParamLayout::of(layout_source);
  const auto& names = layout_source.labels();
  const auto& d = s.diagnostics;
  json diag = {{"size_u", d.size_u},           {"size_v", d.size_v},
               {"size_uv", d.size_uv},         {"size_j", d.size_j},
               {"lambda_u", d.lambda_u},       {"lambda_v", d.lambda_v},
               {"lambda_uv", d.lambda_uv},     {"capped", d.capped},
               {"clamp_events", d.clamp_events}, {"max_clamp", d.max_clamp},
               {"jitter_events", d.jitter_events}};
  if (d.hit_u) diag["screening_hit_u"] = *d.hit_u;
  if (d.hit_v) diag["screening_hit_v"] = *d.hit_v;
  if (d.hit_uv) diag["screening_hit_uv"] = *d.hit_uv;
  json out = {{"split_id", s.split_id}, {"valid", s.valid}, {"diagnostics", diag}};
  out["active_sets"] = {{"i_u", index_json(s.sets.i_u, layout, names)},
                        {"i_v", index_json(s.sets.i_v, layout, names)},
                        {"i_uv", index_json(s.sets.i_uv, layout, names)},
                        {"j", index_json(s.sets.j, layout, names)}};
  if (!s.valid) {
    out["error"] = s.error;
    return out;
  }
  out["lr"] = s.lr;
  out["r"] = s.r;
  out["pvalue"] = s.pvalue;
  out["weights"] = {{"nu", vec(s.weights.nu)},
                    {"n_zero", s.weights.n_zero},
                    {"n_plus_one", s.weights.n_plus_one},
                    {"n_minus_one", s.weights.n_minus_one},
                    {"n_paired", s.weights.n_paired}};
  return out;
}

json to_json(const TestReport& r, const Dataset& layout_source, bool timing) {
  json splits = json::array();
  std::vector<int> counts(10, 0);
  for (const auto& s : r.splits) {
    splits.push_back(to_json(s, layout_source));
    if (s.valid) ++counts[static_cast<std::size_t>(std::min(9, static_cast<int>(s.pvalue * 10.0)))];
  }
  std::vector<double> edges;
  for (int i = 0; i <= 10; ++i) edges.push_back(i / 10.0);
  json out = {{"model", to_string(r.kind)},
              {"n_u", r.n_u},
              {"n_v", r.n_v},
              {"dim", r.dim},
              {"config", to_json(r.config)},
              {"p_aggregated", r.p_aggregated},
              {"n_valid", r.n_valid},
              {"n_invalid", r.n_invalid},
              {"pvalue_histogram", {{"edges", edges}, {"counts", counts}}},
              {"splits", splits}};
  if (timing) out["seconds"] = r.seconds;
  return out;
}

json to_json(const PermResult& r) {
  return {{"statistic", r.statistic}, {"pvalue", r.pvalue},     {"exceedances", r.exceedances},
          {"n_perm", r.n_perm},       {"lambda_u", r.lambda_u}, {"lambda_v", r.lambda_v},
          {"retries", r.retries},     {"permuted", r.permuted}};
}

json to_json(const std::vector<CellResult>& cells, const ExperimentConfig& config) {
  json methods = json::array();
  for (Method m : config.methods) methods.push_back(to_string(m));
  json out = {{"runs", config.runs}, {"methods", methods}, {"level", config.level}, {"test", to_json(config.test)}};
  out["permutation"] = {{"n_perm", config.perm.n_perm}, {"reselect_lambda", config.perm.reselect_lambda}};
  json arr = json::array();
  for (const auto& c : cells) {
    json recs = json::array();
    for (const auto& r : c.records) {
      json j = {{"run", r.run}, {"applicable", r.applicable}, {"ok", r.ok}};
      if (r.ok) {
        j["pvalue"] = r.pvalue;
        j["statistic"] = r.statistic;
      }
      if (!r.error.empty()) j["error"] = r.error;
      if (r.diagnostics) {
        const auto& d = *r.diagnostics;
        j["diagnostics"] = {{"size_u", d.size_u}, {"size_v", d.size_v}, {"size_uv", d.size_uv}, {"size_j", d.size_j}};
        if (d.hit_u) j["diagnostics"]["screening_hit_u"] = *d.hit_u;
        if (d.hit_v) j["diagnostics"]["screening_hit_v"] = *d.hit_v;
        if (d.hit_uv) j["diagnostics"]["screening_hit_uv"] = *d.hit_uv;
        j["n_valid_splits"] = r.n_valid_splits;
      }
      recs.push_back(j);
    }
    const bool h0 = c.spec.hypothesis == Hypothesis::H0;
    arr.push_back({{"setting", to_string(c.spec.setting)},
                   {"n", c.spec.n},
                   {"dim", c.spec.dim},
                   {"snr", c.spec.snr},
                   {"alpha", c.spec.alpha},
                   {"hypothesis", to_string(c.spec.hypothesis)},
                   {"seed", c.spec.seed},
                   {"method", to_string(c.method)},
                   {"metric", h0 ? "fpr" : "tpr"},
                   {"runs", c.runs},
                   {"n_ok", c.n_ok},
                   {"n_error", c.n_error},
                   {"n_not_applicable", c.n_not_applicable},
                   {"rejections", c.rejections},
                   {"rate", c.rate},
                   {"se", c.se},
                   {"records", recs}});
  }
  out["cells"] = arr;
  return out;
}

std::string cells_to_csv(const std::vector<CellResult>& cells) {
  std::ostringstream os;
  os.precision(17);
  os << "setting,n,dim,snr,alpha,hypothesis,method,metric,runs,n_ok,n_error,n_not_applicable,rejections,rate,se\n";
  for (const auto& c : cells) {
    os << to_string(c.spec.setting) << ',' << c.spec.n << ',' << c.spec.dim << ',' << c.spec.snr << ','
       << c.spec.alpha << ',' << to_string(c.spec.hypothesis) << ',' << to_string(c.method) << ','
       << (c.spec.hypothesis == Hypothesis::H0 ? "fpr" : "tpr") << ',' << c.runs << ',' << c.n_ok << ','
       << c.n_error << ',' << c.n_not_applicable << ',' << c.rejections << ',' << c.rate << ',' << c.se << '\n';
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace hddiff
