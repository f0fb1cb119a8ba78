// Report bundle: one JSON document per window plus flat TSV plot data.

#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

#include "rvtail/pipeline.hpp"

namespace rvtail {

inline constexpr int kReportSchemaVersion = 1;

/// What was actually read, recorded in every report.
struct InputSpan {
  std::string source;
  std::string first_date;
  std::string last_date;
  Eigen::Index n_prices = 0;
};

InputSpan input_span(const std::filesystem::path& path, const PriceSeries& prices);

nlohmann::json to_json(const GBParams<double>& params, Family family);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const LinearTailFit& fit);
nlohmann::json to_json(const DKReport& report);

FitResult fit_result_from_json(const nlohmann::json& j);
LinearTailFit linear_fit_from_json(const nlohmann::json& j);

nlohmann::json window_report(const WindowAnalysis& w, const RunConfig& config, const InputSpan& span);

/// report_n{n}.json, rv_n{n}_timeseries.tsv, ccdf_n{n}.tsv, tail_n{n}.tsv,
/// pvalues_n{n}.tsv and ci_n{n}_{mGB,GB2,LF}.tsv under config.output_dir.
void write_window_bundle(const WindowAnalysis& w, const RunConfig& config, const InputSpan& span);

/// summary.tsv: one row per requested n, failed windows included.
void write_summary(const RunOutcome& outcome, const RunConfig& config);

}  // namespace rvtail
