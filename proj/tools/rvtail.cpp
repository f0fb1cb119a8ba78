// rvtail: realized-volatility tail analysis from the command line.

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/os.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "rvtail/dktest.hpp"
#include "rvtail/pipeline.hpp"
#include "rvtail/report.hpp"

namespace {

using nlohmann::json;
using namespace rvtail;

// Flags that were given on the command line override the config file,
// which overrides RunConfig defaults.
struct AnalyzeFlags {
  std::string input;
  std::string config_file;
  std::vector<int> n_list;
  double xmin = 0, exclude_frac = 0, confidence = 0, dk = 0, ndk = 0, ts_threshold = 0, ts_marker = 0;
  std::uint64_t seed = 0;
  int starts = 0;
  std::string out;
  bool disjoint = false;
};

void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const json j = json::parse(in);
  if (j.contains("input")) c.input_path = j["input"].get<std::string>();
  if (j.contains("n_list")) c.n_list = j["n_list"].get<std::vector<int>>();
  c.xmin = j.value("xmin", c.xmin);
  c.exclusion_fraction = j.value("exclusion_fraction", c.exclusion_fraction);
  c.confidence = j.value("confidence", c.confidence);
  c.dk_threshold = j.value("dk_threshold", c.dk_threshold);
  c.ndk_threshold = j.value("ndk_threshold", c.ndk_threshold);
  c.ts_threshold = j.value("ts_threshold", c.ts_threshold);
  c.ts_marker = j.value("ts_marker", c.ts_marker);
  c.seed = j.value("seed", c.seed);
  c.starts = j.value("starts", c.starts);
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  if (j.value("disjoint", false)) c.stride = WindowStride::Disjoint;
}

void add_analyze(CLI::App& app, AnalyzeFlags& f, int& exit_code) {
  auto* cmd = app.add_subcommand("analyze", "RV sweep over window lengths: fits, DK tests, plot data");
  cmd->add_option("--input", f.input, "CSV of date,close rows");
  cmd->add_option("--config", f.config_file, "JSON config; flags override its values");
  cmd->add_option("--n", f.n_list, "Window lengths, comma separated")->delimiter(',');
  cmd->add_option("--xmin", f.xmin, "Tail threshold for LF and DK tests (default 40)");
  cmd->add_option("--exclude-frac", f.exclude_frac, "Exclude values above this fraction of the max (default 0.9)");
  cmd->add_option("--confidence", f.confidence, "CI band confidence (default 0.95)");
  cmd->add_option("--dk", f.dk, "DK threshold on p (default 0.05)");
  cmd->add_option("--ndk", f.ndk, "nDK threshold on p (default 0.95)");
  cmd->add_option("--ts-threshold", f.ts_threshold, "Time-series plot cutoff (default 17)");
  cmd->add_option("--ts-marker", f.ts_marker, "Time-series marker level (default 10^1.75)");
  cmd->add_option("--seed", f.seed, "Run seed");
  cmd->add_option("--starts", f.starts, "Optimizer starts per fit (default 8)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_flag("--disjoint", f.disjoint, "Non-overlapping windows");
  cmd->callback([cmd, &f, &exit_code] {
    RunConfig c;
    if (!f.config_file.empty()) apply_config_file(c, f.config_file);
    const auto given = [&](const char* name) { return cmd->count(name) > 0; };
    if (given("--input")) c.input_path = f.input;
    if (given("--n")) c.n_list = f.n_list;
    if (given("--xmin")) c.xmin = f.xmin;
    if (given("--exclude-frac")) c.exclusion_fraction = f.exclude_frac;
    if (given("--confidence")) c.confidence = f.confidence;
    if (given("--dk")) c.dk_threshold = f.dk;
    if (given("--ndk")) c.ndk_threshold = f.ndk;
    if (given("--ts-threshold")) c.ts_threshold = f.ts_threshold;
    if (given("--ts-marker")) c.ts_marker = f.ts_marker;
    if (given("--seed")) c.seed = f.seed;
    if (given("--starts")) c.starts = f.starts;
    if (given("--out")) c.output_dir = f.out;
    if (f.disjoint) c.stride = WindowStride::Disjoint;
    if (c.input_path.empty()) throw CLI::ValidationError("--input", "no input CSV given");
    exit_code = run_pipeline(c).exit_code();
  });
}

struct SynthFlags {
  std::string family = "gb2";
  GBParams<double> params{.alpha = 2.0, .beta1 = 150.0, .beta2 = 10.0, .p = 1.0, .q = 1.5};
  Eigen::Index count = 10000;
  std::uint64_t seed = 1;
  std::string out;
};

void write_lines(const std::string& out, const Eigen::ArrayXd& xs) {
  std::string text;
  for (double x : xs) text += fmt::format("{:.17g}\n", x);
  if (out.empty()) {
    std::cout << text;
  } else {
    auto f = fmt::output_file(out);
    f.print("{}", text);
  }
}

void write_json(const std::string& out, const json& j) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto f = fmt::output_file(out);
    f.print("{}\n", j.dump(2));
  }
}

void add_synth(CLI::App& app, SynthFlags& f) {
  auto* cmd = app.add_subcommand("synth", "Draw synthetic samples, one per line");
  cmd->add_option("--family", f.family, "gb2 or mgb")->check(CLI::IsMember({"gb2", "mgb"}, CLI::ignore_case));
  cmd->add_option("--alpha", f.params.alpha);
  cmd->add_option("--beta1", f.params.beta1, "Upper support end (mgb)");
  cmd->add_option("--beta2", f.params.beta2);
  cmd->add_option("--p", f.params.p);
  cmd->add_option("--q", f.params.q);
  cmd->add_option("--count", f.count)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--out", f.out, "Output file (default stdout)");
  cmd->callback([&f] {
    const Family family = parse_family(f.family);
    const Eigen::ArrayXd xs =
        family == Family::mGB ? mgb_sample(f.params, f.count, f.seed) : gb2_sample(f.params, f.count, f.seed);
    write_lines(f.out, xs);
  });
}

struct PricesFlags {
  int days = 5000;
  std::uint64_t seed = 1;
  std::string out;
};

void add_synth_prices(CLI::App& app, PricesFlags& f) {
  auto* cmd = app.add_subcommand("synth-prices", "Write a synthetic GARCH price series as date,close CSV");
  cmd->add_option("--days", f.days)->check(CLI::Range(2, 10000000));
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--out", f.out, "Output file (default stdout)");
  cmd->callback([&f] {
    const PriceSeries prices = synthetic_prices(f.days, f.seed);
    std::string text = "date,close\n";
    for (Eigen::Index i = 0; i < prices.size(); ++i)
      text += fmt::format("{},{:.17g}\n", format_date(prices.dates()[std::size_t(i)]), prices.closes()[i]);
    if (f.out.empty()) {
      std::cout << text;
    } else {
      auto file = fmt::output_file(f.out);
      file.print("{}", text);
    }
  });
}

struct FitFlags {
  std::string family = "mgb";
  std::string samples;
  double xmin = 40.0;
  double exclude_frac = 0.9;
  int starts = 8;
  std::uint64_t seed = 1;
  std::string out;
};

void add_fit(CLI::App& app, FitFlags& f) {
  auto* cmd = app.add_subcommand("fit", "Fit one model to a sample file and print the fit as JSON");
  cmd->add_option("--family", f.family, "mgb, gb2 or lf")->check(CLI::IsMember({"mgb", "gb2", "lf"}, CLI::ignore_case));
  cmd->add_option("--samples", f.samples, "One positive value per line")->required();
  cmd->add_option("--xmin", f.xmin, "LF tail threshold");
  cmd->add_option("--exclude-frac", f.exclude_frac, "LF upper exclusion as a fraction of the max");
  cmd->add_option("--starts", f.starts);
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--out", f.out, "Output file (default stdout)");
  cmd->callback([&f] {
    const Eigen::ArrayXd xs = read_samples(f.samples);
    if (f.family == "lf" || f.family == "LF") {
      write_json(f.out, to_json(linear_tail_fit(empirical_ccdf(xs), f.xmin,
                                                TailExclusion::fraction_of_max(f.exclude_frac))));
      return;
    }
    write_json(f.out, to_json(fit_mle(xs, parse_family(f.family), f.starts, f.seed)));
  });
}

struct DkFlags {
  std::string samples;
  std::string fit;
  double xmin = 40.0;
  double dk = 0.05;
  double ndk = 0.95;
  double confidence = 0.95;
  std::string out;
};

void add_dktest(CLI::App& app, DkFlags& f) {
  auto* cmd = app.add_subcommand("dktest", "U-test and CI bands for a sample against a saved fit");
  cmd->add_option("--samples", f.samples, "One positive value per line")->required();
  cmd->add_option("--fit", f.fit, "JSON written by the fit subcommand")->required();
  cmd->add_option("--xmin", f.xmin);
  cmd->add_option("--dk", f.dk);
  cmd->add_option("--ndk", f.ndk);
  cmd->add_option("--confidence", f.confidence);
  cmd->add_option("--out", f.out, "Output file (default stdout)");
  cmd->callback([&f] {
    const Eigen::ArrayXd xs = read_samples(f.samples);
    std::ifstream in(f.fit);
    if (!in) throw std::runtime_error("cannot open " + f.fit);
    const json j = json::parse(in);
    const DKOptions opts{.xmin = f.xmin, .thresholds = {f.dk, f.ndk}, .confidence = f.confidence};
    DKReport report;
    if (j.at("family").get<std::string>() == "LF") {
      const LinearTailFit lf = linear_fit_from_json(j);
      report = dk_report_single(xs, "LF", [&](double x) { return lf.ccdf(x); }, opts);
    } else {
      const FitResult fit = fit_result_from_json(j);
      report = dk_report_single(xs, std::string(to_string(fit.family)), [&](double x) { return fit.ccdf(x); }, opts);
    }
    write_json(f.out, to_json(report));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Realized-volatility tails: mGB/GB2 fits and Dragon King tests"};
  app.require_subcommand(1);
  int exit_code = 0;
  AnalyzeFlags analyze;
  SynthFlags synth;
  PricesFlags prices;
  FitFlags fit;
  DkFlags dk;
  add_analyze(app, analyze, exit_code);
  add_synth(app, synth);
  add_synth_prices(app, prices);
  add_fit(app, fit);
  add_dktest(app, dk);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "rvtail: error: {}\n", e.what());
    return 1;
  }
  return exit_code;
}
