#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/permtest.hpp"
#include "hddiff/simulate.hpp"
#include "hddiff/testing.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace hddiff {

inline constexpr const char* kSchemaVersion = "1.0";

struct Table {
  std::vector<std::string> header;
  Matrix values;
};

// Comma-separated, header row required, no missing cells. Errors name the
// file and line.
Table read_csv(const std::string& path);

// First column is the response; `x_cols` selects predictors by name.
Dataset regression_from_table(const Table& t, const std::string& path, const std::vector<std::string>& x_cols = {});
Dataset ggm_from_table(const Table& t, const std::string& path);

nlohmann::json to_json(const SplitOutcome& s, const Dataset& layout_source);
nlohmann::json to_json(const TestReport& r, const Dataset& layout_source, bool timing);
nlohmann::json to_json(const TestConfig& c);
nlohmann::json to_json(const PermResult& r);
nlohmann::json to_json(const std::vector<CellResult>& cells, const ExperimentConfig& config);

// One row per (setting, dim, alpha, hypothesis, method).
std::string cells_to_csv(const std::vector<CellResult>& cells);

void write_text(const std::string& path, const std::string& text);

}  // namespace hddiff
