#include "rvtail/report.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rvtail {

namespace {

using nlohmann::json;

std::string g17(double v) { return fmt::format("{:.17g}", v); }

double log10_or_minus_inf(double v) { return v > 0.0 ? std::log10(v) : -std::numeric_limits<double>::infinity(); }

fmt::ostream open_tsv(const RunConfig& config, const std::string& name) {
  try {
    return fmt::output_file((config.output_dir / name).string());
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("cannot write {}: {}", (config.output_dir / name).string(), e.what()));
  }
}

const char* stride_name(WindowStride s) { return s == WindowStride::Overlapping ? "overlapping" : "disjoint"; }

double sample_max(const WindowAnalysis& w) { return w.samples.maxCoeff(); }

void write_timeseries(const WindowAnalysis& w, const RunConfig& config) {
  auto out = open_tsv(config, fmt::format("rv_n{}_timeseries.tsv", w.window_n));
  out.print("date\trv\tmarked\n");
  const FilteredSeries f = threshold_filter(w.rv, config.ts_threshold, config.ts_marker);
  for (std::size_t i = 0; i < f.dates.size(); ++i)
    out.print("{}\t{}\t{}\n", format_date(f.dates[i]), g17(f.values[Eigen::Index(i)]), f.marked[i] ? 1 : 0);
}

void write_ccdf(const WindowAnalysis& w, const RunConfig& config, const std::string& name, double above) {
  auto out = open_tsv(config, name);
  out.print("log10_rv\tlog10_ccdf_emp\tlog10_ccdf_mGB\tlog10_ccdf_GB2\tlog10_ccdf_LF\n");
  for (Eigen::Index i = 0; i < w.ccdf.values.size(); ++i) {
    const double x = w.ccdf.values[i];
    if (!(x > above)) continue;
    if (i > 0 && x == w.ccdf.values[i - 1]) continue;  // ties share one CCDF value
    out.print("{}\t{}\t{}\t{}\t{}\n", g17(std::log10(x)), g17(std::log10(w.ccdf.ccdf[i])),
              g17(log10_or_minus_inf(w.fits.mgb.ccdf(x))), g17(log10_or_minus_inf(w.fits.gb2.ccdf(x))),
              g17(log10_or_minus_inf(w.fits.lf.ccdf(x))));
  }
}

void write_pvalues(const WindowAnalysis& w, const RunConfig& config) {
  auto out = open_tsv(config, fmt::format("pvalues_n{}.tsv", w.window_n));
  out.print("rv\trank\tp_mGB\tlabel_mGB\tp_GB2\tlabel_GB2\tp_LF\tlabel_LF\n");
  const auto& ref = w.reports.front().points;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    out.print("{}\t{}", g17(ref[i].value), ref[i].rank);
    for (const DKReport& r : w.reports) out.print("\t{}\t{}", g17(r.points[i].p_value), to_string(r.points[i].label));
    out.print("\n");
  }
}

void write_bands(const WindowAnalysis& w, const RunConfig& config) {
  for (const DKReport& r : w.reports) {
    auto out = open_tsv(config, fmt::format("ci_n{}_{}.tsv", w.window_n, r.model));
    out.print("rv\tccdf_emp\tccdf_model\tlower\tupper\tband_signal\n");
    for (const CIBand& b : r.bands)
      out.print("{}\t{}\t{}\t{}\t{}\t{}\n", g17(b.x), g17(b.empirical_ccdf), g17(b.model_ccdf), g17(b.lower),
                g17(b.upper), to_string(b.band_signal));
  }
}

json counts(const DKReport& r) {
  return {{"DK", r.count(Label::DK)}, {"BS", r.count(Label::BS)}, {"nDK", r.count(Label::nDK)}};
}

}  // namespace

InputSpan input_span(const std::filesystem::path& path, const PriceSeries& prices) {
  return {path.string(), format_date(prices.dates().front()), format_date(prices.dates().back()), prices.size()};
}

json to_json(const GBParams<double>& params, Family family) {
  json j{{"alpha", params.alpha}, {"beta2", params.beta2}, {"p", params.p}, {"q", params.q}};
  if (family != Family::GB2) j["beta1"] = params.beta1;
  return j;
}

json to_json(const FitResult& fit) {
  return {{"family", std::string(to_string(fit.family))},
          {"params", to_json(fit.params, fit.family)},
          {"tail_exponent", tail_exponent(fit.params, fit.family)},
          {"ks", fit.ks},
          {"log_likelihood", fit.log_likelihood},
          {"converged", fit.converged},
          {"n_samples", fit.n_samples},
          {"evaluations", fit.evaluations}};
}

json to_json(const LinearTailFit& fit) {
  json j{{"family", "LF"},        {"slope", fit.slope},       {"intercept", fit.intercept},
         {"xmin", fit.xmin},      {"n_points", fit.n_points}, {"slope_stderr", fit.slope_stderr}};
  j["excluded_above"] = std::isfinite(fit.excluded_above) ? json(fit.excluded_above) : json(nullptr);
  return j;
}

json to_json(const DKReport& report) {
  json points = json::array();
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const PointTest& p = report.points[i];
    json point{{"rank", p.rank},
               {"value", p.value},
               {"model_cdf", p.model_cdf},
               {"p_value", p.p_value},
               {"label", std::string(to_string(p.label))}};
    if (i < report.bands.size()) {
      const CIBand& b = report.bands[i];
      point["band"] = {{"empirical_ccdf", b.empirical_ccdf},
                       {"model_ccdf", b.model_ccdf},
                       {"lower", b.lower},
                       {"upper", b.upper},
                       {"confidence", b.confidence},
                       {"signal", std::string(to_string(b.band_signal))}};
    }
    points.push_back(std::move(point));
  }
  return {{"model", report.model}, {"window_n", report.window_n}, {"counts", counts(report)}, {"points", points}};
}

FitResult fit_result_from_json(const json& j) {
  FitResult fit;
  fit.family = parse_family(j.at("family").get<std::string>());
  const json& prm = j.at("params");
  fit.params.alpha = prm.at("alpha").get<double>();
  fit.params.beta2 = prm.at("beta2").get<double>();
  fit.params.p = prm.at("p").get<double>();
  fit.params.q = prm.at("q").get<double>();
  if (fit.family != Family::GB2) fit.params.beta1 = prm.at("beta1").get<double>();
  validate(fit.params, fit.family);
  fit.ks = j.value("ks", 1.0);
  fit.log_likelihood = j.value("log_likelihood", -std::numeric_limits<double>::infinity());
  fit.converged = j.value("converged", false);
  fit.n_samples = j.value("n_samples", Eigen::Index(0));
  fit.evaluations = j.value("evaluations", 0);
  return fit;
}

LinearTailFit linear_fit_from_json(const json& j) {
  LinearTailFit fit;
  fit.slope = j.at("slope").get<double>();
  fit.intercept = j.at("intercept").get<double>();
  fit.xmin = j.value("xmin", 0.0);
  fit.n_points = j.value("n_points", Eigen::Index(0));
  fit.slope_stderr = j.value("slope_stderr", 0.0);
  if (j.contains("excluded_above") && !j["excluded_above"].is_null())
    fit.excluded_above = j["excluded_above"].get<double>();
  return fit;
}

json window_report(const WindowAnalysis& w, const RunConfig& config, const InputSpan& span) {
  json reports = json::array();
  for (const DKReport& r : w.reports) reports.push_back(to_json(r));
  return {
      {"schema_version", kReportSchemaVersion},
      {"window_n", w.window_n},
      {"stride", stride_name(w.rv.stride)},
      {"input",
       {{"source", span.source},
        {"first_date", span.first_date},
        {"last_date", span.last_date},
        {"n_prices", span.n_prices}}},
      {"config",
       {{"xmin", config.xmin},
        {"exclusion_fraction", config.exclusion_fraction},
        {"confidence", config.confidence},
        {"dk_threshold", config.dk_threshold},
        {"ndk_threshold", config.ndk_threshold},
        {"seed", config.seed},
        {"window_seed", window_seed(config.seed, w.window_n)},
        {"starts", config.starts}}},
      {"samples",
       {{"rv_count", w.rv.values.size()},
        {"fitted", w.samples.size()},
        {"dropped_zero", w.dropped_zero},
        {"max", sample_max(w)},
        {"gb2_fit_count", w.gb2_fit_count},
        {"tail_count", w.reports.front().points.size()}}},
      {"fits", {{"mGB", to_json(w.fits.mgb)}, {"GB2", to_json(w.fits.gb2)}, {"LF", to_json(w.fits.lf)}}},
      {"reports", reports},
  };
}

void write_window_bundle(const WindowAnalysis& w, const RunConfig& config, const InputSpan& span) {
  {
    auto out = open_tsv(config, fmt::format("report_n{}.json", w.window_n));
    out.print("{}\n", window_report(w, config, span).dump(2));
  }
  write_timeseries(w, config);
  write_ccdf(w, config, fmt::format("ccdf_n{}.tsv", w.window_n), 0.0);
  write_ccdf(w, config, fmt::format("tail_n{}.tsv", w.window_n), config.xmin);
  write_pvalues(w, config);
  write_bands(w, config);
}

constexpr int kSummaryValueColumns = 17;

void write_summary(const RunOutcome& outcome, const RunConfig& config) {
  auto out = open_tsv(config, "summary.tsv");
  out.print(
      "n\tstatus\tfitted\tdropped_zero\ttail_count\tlf_slope\tlf_slope_stderr\tlf_points\tgb2_slope\tmgb_tail_slope\t"
      "ks_mGB\tks_GB2\tks_GB2_full\tnDK_mGB\tDK_mGB\tnDK_GB2\tDK_GB2\tnDK_LF\tDK_LF\n");
  for (int n : config.n_list) {
    const auto w = std::find_if(outcome.windows.begin(), outcome.windows.end(),
                                [&](const WindowAnalysis& a) { return a.window_n == n; });
    if (w == outcome.windows.end()) {
      out.print("{}\tfailed", n);
      for (int c = 0; c < kSummaryValueColumns; ++c) out.print("\tnan");
      out.print("\n");
      continue;
    }
    const double ks_full = ks_statistic(w->samples, [&](double x) { return w->fits.gb2.cdf(x); });
    out.print("{}\tok\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", n, w->samples.size(), w->dropped_zero,
              w->reports.front().points.size(), g17(w->fits.lf.slope), g17(w->fits.lf.slope_stderr),
              w->fits.lf.n_points, g17(-tail_exponent(w->fits.gb2.params, Family::GB2)),
              g17(-tail_exponent(w->fits.mgb.params, Family::mGB)), g17(w->fits.mgb.ks), g17(w->fits.gb2.ks),
              g17(ks_full));
    for (const DKReport& r : w->reports) out.print("\t{}\t{}", r.count(Label::nDK), r.count(Label::DK));
    out.print("\n");
  }
}

}  // namespace rvtail
