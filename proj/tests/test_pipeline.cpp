#include <gtest/gtest.h>

#include <fmt/core.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rvtail/pipeline.hpp"
#include "rvtail/report.hpp"

namespace rvtail {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rvtail_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

PriceSeries parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "prices.csv");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const std::runtime_error& e) {
    return e.what();
  }
  return "";
}

fs::path write_prices(const fs::path& dir, const PriceSeries& prices) {
  const fs::path p = dir / "prices.csv";
  std::ofstream out(p);
  out << "Date,Close\n";
  for (Eigen::Index i = 0; i < prices.size(); ++i)
    out << format_date(prices.dates()[std::size_t(i)]) << ',' << fmt::format("{:.17g}", prices.closes()[i]) << '\n';
  return p;
}

TEST(ParseCsv, RowsAndHeader) {
  const auto two = parse("2020-03-13,2711.02\n2020-03-16,2386.13\n");
  ASSERT_EQ(two.size(), 2);
  EXPECT_EQ(format_date(two.dates()[1]), "2020-03-16");
  EXPECT_EQ(two.closes()[1], 2386.13);
  const auto headed = parse("date,close\r\n\n2020-03-13, 2711.02\r\n2020-03-16,2386.13\r\n");
  EXPECT_EQ(headed.size(), 2);
  EXPECT_EQ(headed.closes()[0], 2711.02);
}

TEST(ParseCsv, ErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error("date,close\n2020-03-13,1\n2020-03-13,2\n").find("prices.csv:3: duplicate date 2020-03-13"),
            std::string::npos);
  EXPECT_NE(parse_error("2020-03-16,1\n2020-03-13,2\n").find(":2:"), std::string::npos);
  EXPECT_NE(parse_error("2020-03-13,1\n2020-03-16,0\n").find(":2: nonpositive"), std::string::npos);
  EXPECT_NE(parse_error("2020-03-13,1\n2020-03-16,abc\n").find(":2: malformed"), std::string::npos);
  EXPECT_NE(parse_error("2020-03-13,1\n2020-02-30,1\n").find(":2: malformed"), std::string::npos);
  EXPECT_FALSE(parse_error("2020-03-13,1\n").empty());
  EXPECT_THROW(ingest_csv("/nonexistent/prices.csv"), std::runtime_error);
}

TEST(ReadSamples, SkipsCommentsAndRejectsNonpositive) {
  const fs::path dir = scratch("samples");
  std::ofstream(dir / "ok.txt") << "# header\n1.5\n\n2.5\n";
  const Eigen::ArrayXd xs = read_samples(dir / "ok.txt");
  ASSERT_EQ(xs.size(), 2);
  EXPECT_EQ(xs[1], 2.5);
  std::ofstream(dir / "bad.txt") << "1.5\n-2\n";
  EXPECT_THROW(read_samples(dir / "bad.txt"), std::runtime_error);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.n_list, (std::vector<int>{1, 2, 3, 5, 7, 9, 13, 17, 21}));
  EXPECT_DOUBLE_EQ(c.ts_marker, std::pow(10.0, 1.75));
  for (auto bad : {+[](RunConfig& r) { r.n_list = {1, 0}; }, +[](RunConfig& r) { r.exclusion_fraction = 1.0; },
                   +[](RunConfig& r) { r.dk_threshold = 0.96; }, +[](RunConfig& r) { r.starts = 0; },
                   +[](RunConfig& r) { r.xmin = 0.0; }}) {
    RunConfig r;
    bad(r);
    EXPECT_THROW(r.validate(), std::invalid_argument);
  }
}

TEST(WindowSeed, DistinctAndStable) {
  EXPECT_EQ(window_seed(5, 7), window_seed(5, 7));
  EXPECT_NE(window_seed(5, 7), window_seed(5, 9));
  EXPECT_NE(window_seed(5, 7), window_seed(6, 7));
}

TEST(SyntheticPrices, DeterministicWithHeavyTails) {
  const auto a = synthetic_prices(3000, 11);
  const auto b = synthetic_prices(3000, 11);
  EXPECT_TRUE((a.closes() == b.closes()).all());
  const auto rv = realized_volatility(log_returns(a), 1);
  EXPECT_GT((rv.values > 40.0).count(), 20);
}

RunConfig small_config(const fs::path& dir, const fs::path& input) {
  RunConfig c;
  c.input_path = input;
  c.output_dir = dir / "out";
  c.n_list = {1, 7, 21};
  c.starts = 2;
  c.seed = 3;
  return c;
}

class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = scratch("pipeline");
    const fs::path input = write_prices(dir_, synthetic_prices(4000, 11));
    config_ = small_config(dir_, input);
    outcome_ = run_pipeline(config_);
  }
  static inline fs::path dir_;
  static inline RunConfig config_;
  static inline RunOutcome outcome_;
};

TEST_F(PipelineRun, OneReportSetPerWindowPlusSummary) {
  ASSERT_TRUE(outcome_.failures.empty()) << outcome_.failures.front().message;
  EXPECT_EQ(outcome_.exit_code(), 0);
  for (int n : config_.n_list) {
    for (const auto& name : {"report_n{}.json", "rv_n{}_timeseries.tsv", "ccdf_n{}.tsv", "tail_n{}.tsv",
                             "pvalues_n{}.tsv", "ci_n{}_mGB.tsv", "ci_n{}_GB2.tsv", "ci_n{}_LF.tsv"})
      EXPECT_TRUE(fs::exists(config_.output_dir / fmt::format(fmt::runtime(name), n))) << name << " n=" << n;
  }
  const auto summary = read_tsv(config_.output_dir / "summary.tsv");
  ASSERT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary[0][0], "n");
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(summary[i + 1][0], std::to_string(config_.n_list[i]));
    EXPECT_EQ(summary[i + 1][1], "ok");
    EXPECT_EQ(summary[i + 1].size(), summary[0].size());
  }
}

TEST_F(PipelineRun, ReportJsonMatchesAnalysis) {
  for (const WindowAnalysis& w : outcome_.windows) {
    std::ifstream in(config_.output_dir / fmt::format("report_n{}.json", w.window_n));
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
    EXPECT_EQ(j["window_n"], w.window_n);
    EXPECT_EQ(j["input"]["first_date"], "2000-01-03");
    EXPECT_EQ(j["input"]["n_prices"], 4000);
    EXPECT_EQ(j["reports"].size(), 3u);
    const FitResult mgb = fit_result_from_json(j["fits"]["mGB"]);
    EXPECT_EQ(mgb.params.beta1, w.fits.mgb.params.beta1);
    EXPECT_GT(mgb.params.beta1, w.samples.maxCoeff());
    EXPECT_EQ(j["samples"]["tail_count"], (w.samples > config_.xmin).count());
  }
}

TEST_F(PipelineRun, SummaryGb2SlopeIsTailExponent) {
  const auto summary = read_tsv(config_.output_dir / "summary.tsv");
  const auto col = std::find(summary[0].begin(), summary[0].end(), "gb2_slope") - summary[0].begin();
  const auto lf_col = std::find(summary[0].begin(), summary[0].end(), "lf_slope") - summary[0].begin();
  for (std::size_t i = 0; i < outcome_.windows.size(); ++i) {
    const WindowAnalysis& w = outcome_.windows[i];
    EXPECT_EQ(std::stod(summary[i + 1][std::size_t(col)]), -tail_exponent(w.fits.gb2.params, Family::GB2));
    EXPECT_EQ(std::stod(summary[i + 1][std::size_t(lf_col)]), w.fits.lf.slope);
  }
}

TEST_F(PipelineRun, LabelledPointsAppearInPValueFiles) {
  for (const WindowAnalysis& w : outcome_.windows) {
    const auto rows = read_tsv(config_.output_dir / fmt::format("pvalues_n{}.tsv", w.window_n));
    ASSERT_EQ(rows.size(), w.reports[0].points.size() + 1);
    for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_GT(std::stod(rows[r][0]), config_.xmin);
    for (std::size_t m = 0; m < 3; ++m) {
      for (std::size_t i = 0; i < w.reports[m].points.size(); ++i) {
        const PointTest& pt = w.reports[m].points[i];
        const auto& row = rows[i + 1];
        EXPECT_EQ(std::stod(row[0]), pt.value);
        EXPECT_EQ(row[3 + 2 * m], to_string(pt.label));
        const double p = std::stod(row[2 + 2 * m]);
        if (pt.label != Label::BS) EXPECT_TRUE(p < config_.dk_threshold || p > config_.ndk_threshold);
      }
    }
  }
}

TEST_F(PipelineRun, TailFileColumnsAndTimeSeriesFilter) {
  const auto tail = read_tsv(config_.output_dir / "tail_n1.tsv");
  ASSERT_GT(tail.size(), 3u);
  EXPECT_EQ(tail[0], (std::vector<std::string>{"log10_rv", "log10_ccdf_emp", "log10_ccdf_mGB", "log10_ccdf_GB2",
                                               "log10_ccdf_LF"}));
  for (std::size_t r = 1; r < tail.size(); ++r) EXPECT_GT(std::stod(tail[r][0]), std::log10(config_.xmin));

  const auto ts = read_tsv(config_.output_dir / "rv_n1_timeseries.tsv");
  for (std::size_t r = 1; r < ts.size(); ++r) {
    const double v = std::stod(ts[r][1]);
    EXPECT_GT(v, config_.ts_threshold);
    EXPECT_EQ(ts[r][2], v > config_.ts_marker ? "1" : "0");
  }
}

TEST_F(PipelineRun, RerunIsByteIdentical) {
  RunConfig again = config_;
  again.output_dir = dir_ / "again";
  ASSERT_EQ(run_pipeline(again).exit_code(), 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(config_.output_dir)) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(again.output_dir / entry.path().filename())) << entry.path();
  }
  EXPECT_EQ(files, 3u * 8u + 1u);
}

TEST(Pipeline, ConstantPricesAbortWithDiagnostic) {
  const fs::path dir = scratch("constant");
  std::vector<Date> dates = synthetic_prices(300, 1).dates();
  const fs::path input = write_prices(dir, PriceSeries(dates, Eigen::ArrayXd::Constant(300, 50.0)));
  RunConfig c = small_config(dir, input);
  c.n_list = {1, 5};
  const RunOutcome out = run_pipeline(c);
  EXPECT_EQ(out.exit_code(), 1);
  ASSERT_EQ(out.failures.size(), 2u);
  EXPECT_NE(out.failures[0].message.find("zero variance"), std::string::npos);
  const auto summary = read_tsv(c.output_dir / "summary.tsv");
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[1][1], "failed");
  EXPECT_EQ(summary[1].size(), summary[0].size());
}

TEST(Pipeline, FailingWindowDoesNotStopOthers) {
  const fs::path dir = scratch("partial");
  const fs::path input = write_prices(dir, synthetic_prices(1500, 4));
  RunConfig c = small_config(dir, input);
  c.n_list = {1, 5000};
  const RunOutcome out = run_pipeline(c);
  EXPECT_EQ(out.exit_code(), 0);
  ASSERT_EQ(out.windows.size(), 1u);
  ASSERT_EQ(out.failures.size(), 1u);
  EXPECT_EQ(out.failures[0].window_n, 5000);
}

}  // namespace
}  // namespace rvtail
