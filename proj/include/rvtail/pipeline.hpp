// End-to-end analysis: prices in, per-window fits, DK reports and plot data out.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "rvtail/dktest.hpp"
#include "rvtail/fit.hpp"
#include "rvtail/rvcalc.hpp"

namespace rvtail {

struct RunConfig {
  std::filesystem::path input_path;
  std::vector<int> n_list{1, 2, 3, 5, 7, 9, 13, 17, 21};
  double xmin = 40.0;
  double exclusion_fraction = 0.9;
  double confidence = 0.95;
  double dk_threshold = 0.05;
  double ndk_threshold = 0.95;
  double ts_threshold = 17.0;
  double ts_marker = 56.23413251903491;  // 10^1.75
  std::uint64_t seed = 1;
  int starts = 8;
  std::filesystem::path output_dir = "rvtail_out";
  WindowStride stride = WindowStride::Overlapping;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  Thresholds thresholds() const { return {dk_threshold, ndk_threshold}; }
};

/// Two-column CSV: ISO date, close. A first line that does not parse as a
/// row is taken as a header. `source` names the input in error messages.
PriceSeries parse_csv(std::istream& in, const std::string& source);
PriceSeries ingest_csv(const std::filesystem::path& path);

/// One positive value per line; blank lines and lines starting with '#' skipped.
Eigen::ArrayXd read_samples(const std::filesystem::path& path);

/// GARCH(1,1) closes with Student-t shocks on a weekday calendar, for demos
/// and end-to-end tests.
PriceSeries synthetic_prices(int days, std::uint64_t seed);

/// Seed for window n, derived from the run seed so that each n is
/// reproducible on its own.
std::uint64_t window_seed(std::uint64_t run_seed, int n);

struct WindowAnalysis {
  int window_n = 0;
  RVSeries rv;
  Eigen::ArrayXd samples;  // strictly positive RV values that were fitted
  Eigen::Index dropped_zero = 0;
  EmpiricalCcdf ccdf;
  ModelFits fits;
  Eigen::Index gb2_fit_count = 0;  // samples at or below the exclusion bound
  std::vector<DKReport> reports;   // mGB, GB2, LF
};

WindowAnalysis analyze_window(const ReturnSeries& returns, int n, const RunConfig& config);

struct WindowFailure {
  int window_n = 0;
  std::string message;
};

struct RunOutcome {
  std::vector<WindowAnalysis> windows;
  std::vector<WindowFailure> failures;

  /// Zero unless every window failed.
  int exit_code() const { return windows.empty() ? 1 : 0; }
};

/// Analyzes every n in the config and writes the bundle under output_dir.
/// A failing n is logged and skipped; the others still run.
RunOutcome run_pipeline(const RunConfig& config);

}  // namespace rvtail
