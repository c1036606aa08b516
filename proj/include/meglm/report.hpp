#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "meglm/fit.hpp"

namespace meglm {

/// Summary document: metadata plus one {parameter, method, mean, sd, q025,
/// q50, q975, marginal} entry per parameter. `seconds` is included only when given.
nlohmann::ordered_json report_json(const PosteriorReport& report, std::optional<double> seconds = std::nullopt);

/// Writes summary.json, marginals/<parameter>.csv (value,density) and, for
/// sampled reports, draws.csv into `dir`.
void write_report(const PosteriorReport& report, const std::filesystem::path& dir,
                  std::optional<double> seconds = std::nullopt);

/// Reads the parameter summaries of a summary.json.
std::vector<ParameterSummary> read_summary(const std::filesystem::path& summary_json);

/// Reads a marginal CSV with header value,density.
std::pair<std::vector<double>, std::vector<double>> read_marginal_csv(const std::filesystem::path& path);

struct ComparisonInput {
  std::string method;
  std::vector<ParameterSummary> parameters;
};

/// Side-by-side table, one row per parameter, mean/q025/q975 per method. With
/// a naive and a corrected column, beta_x is flagged "attenuated" when the
/// naive magnitude is smaller, otherwise "not-attenuated".
std::string comparison_csv(const std::vector<ComparisonInput>& inputs,
                           const std::map<std::string, double>& truth = {});

std::string format_double(double v);

}  // namespace meglm
