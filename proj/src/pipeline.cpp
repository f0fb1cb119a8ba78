#include "rvtail/pipeline.hpp"

#include <fmt/core.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "rvtail/report.hpp"

namespace rvtail {

namespace {

template <class... Args>
void log(fmt::format_string<Args...> format, Args&&... args) {
  fmt::print(stderr, "rvtail: {}\n", fmt::format(format, std::forward<Args>(args)...));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<Date> parse_date(std::string_view s) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  const auto field = [&](std::size_t at, std::size_t len, auto& out) {
    const auto r = std::from_chars(s.data() + at, s.data() + at + len, out);
    return r.ec == std::errc() && r.ptr == s.data() + at + len;
  };
  if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return std::nullopt;
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Row {
  Date date;
  double close;
};

std::optional<Row> parse_row(std::string_view line) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  const auto date = parse_date(trim(line.substr(0, comma)));
  const auto close = parse_number(trim(line.substr(comma + 1)));
  if (!date || !close) return std::nullopt;
  return Row{*date, *close};
}

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void RunConfig::validate() const {
  if (n_list.empty()) throw std::invalid_argument("config: n list is empty");
  for (int n : n_list)
    if (n < 1) throw std::invalid_argument(fmt::format("config: window length {} must be >= 1", n));
  if (!(xmin > 0.0)) throw std::invalid_argument("config: xmin must be positive");
  if (!(exclusion_fraction > 0.0 && exclusion_fraction < 1.0))
    throw std::invalid_argument("config: exclusion fraction must lie in (0, 1)");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("config: confidence must lie in (0, 1)");
  if (!(dk_threshold >= 0.0 && dk_threshold < ndk_threshold && ndk_threshold <= 1.0))
    throw std::invalid_argument("config: need 0 <= dk threshold < ndk threshold <= 1");
  if (!(ts_threshold >= 0.0 && ts_marker >= ts_threshold))
    throw std::invalid_argument("config: need 0 <= ts threshold <= ts marker");
  if (starts < 1) throw std::invalid_argument("config: starts must be >= 1");
}

PriceSeries parse_csv(std::istream& in, const std::string& source) {
  std::vector<Date> dates;
  std::vector<double> closes;
  std::string line;
  int lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto row = parse_row(text);
    if (!row) {
      if (!seen_content) {  // header
        seen_content = true;
        continue;
      }
      throw std::runtime_error(fmt::format("{}:{}: malformed row '{}'", source, lineno, text));
    }
    seen_content = true;
    if (!(row->close > 0.0) || !std::isfinite(row->close))
      throw std::runtime_error(fmt::format("{}:{}: nonpositive close {}", source, lineno, row->close));
    if (!dates.empty()) {
      if (row->date == dates.back())
        throw std::runtime_error(fmt::format("{}:{}: duplicate date {}", source, lineno, format_date(row->date)));
      if (row->date < dates.back())
        throw std::runtime_error(fmt::format("{}:{}: date {} is earlier than the previous row", source, lineno,
                                             format_date(row->date)));
    }
    dates.push_back(row->date);
    closes.push_back(row->close);
  }
  if (dates.size() < 2) throw std::runtime_error(fmt::format("{}: need at least two price rows", source));
  return {std::move(dates), Eigen::Map<Eigen::ArrayXd>(closes.data(), Eigen::Index(closes.size()))};
}

PriceSeries ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return parse_csv(in, path.string());
}

Eigen::ArrayXd read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::vector<double> xs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto v = parse_number(text);
    if (!v || !(*v > 0.0) || !std::isfinite(*v))
      throw std::runtime_error(fmt::format("{}:{}: expected a positive number, got '{}'", path.string(), lineno, text));
    xs.push_back(*v);
  }
  if (xs.empty()) throw std::runtime_error(fmt::format("{}: no samples", path.string()));
  return Eigen::Map<Eigen::ArrayXd>(xs.data(), Eigen::Index(xs.size()));
}

PriceSeries synthetic_prices(int days, std::uint64_t seed) {
  if (days < 2) throw std::invalid_argument("synthetic_prices: need at least two days");
  using namespace std::chrono;
  Rng rng(seed);
  std::student_t_distribution<double> shock(4.0);
  const double unit = std::sqrt(2.0 / 4.0);  // t(4) has variance 2
  const double omega = 2e-6, a = 0.09, b = 0.9;
  double var = omega / (1.0 - a - b);

  std::vector<Date> dates;
  Eigen::ArrayXd closes(days);
  sys_days d = sys_days{2000y / January / 3};
  double price = 100.0;
  for (int i = 0; i < days; ++i) {
    while (weekday{d} == Saturday || weekday{d} == Sunday) d += std::chrono::days{1};
    dates.emplace_back(d);
    d += std::chrono::days{1};
    if (i > 0) {
      const double r = std::sqrt(var) * unit * shock(rng);
      price *= std::exp(r);
      var = omega + a * r * r + b * var;
    }
    closes[i] = price;
  }
  return {std::move(dates), closes};
}

std::uint64_t window_seed(std::uint64_t run_seed, int n) { return mix(run_seed ^ mix(std::uint64_t(n))); }

WindowAnalysis analyze_window(const ReturnSeries& returns, int n, const RunConfig& config) {
  WindowAnalysis w;
  w.window_n = n;
  w.rv = realized_volatility(returns, n, config.stride);

  std::vector<double> positive;
  for (double v : w.rv.values)
    if (v > 0.0) positive.push_back(v);
  w.dropped_zero = w.rv.values.size() - Eigen::Index(positive.size());
  if (positive.empty())
    throw std::runtime_error("zero variance, every realized volatility value is 0");
  if (w.dropped_zero > 0) log("n={}: dropped {} zero RV values before fitting", n, w.dropped_zero);
  w.samples = Eigen::Map<Eigen::ArrayXd>(positive.data(), Eigen::Index(positive.size()));

  FitOptions options;
  options.starts = config.starts;
  options.seed = window_seed(config.seed, n);
  w.fits.mgb = fit_mle(w.samples, Family::mGB, options);

  const double bound = config.exclusion_fraction * w.samples.maxCoeff();
  std::vector<double> kept;
  for (double v : positive)
    if (v <= bound) kept.push_back(v);
  w.gb2_fit_count = Eigen::Index(kept.size());
  w.fits.gb2 = fit_mle(Eigen::Map<Eigen::ArrayXd>(kept.data(), w.gb2_fit_count), Family::GB2, options);

  w.ccdf = empirical_ccdf(w.samples);
  w.fits.lf = linear_tail_fit(w.ccdf, config.xmin, TailExclusion::fraction_of_max(config.exclusion_fraction));
  for (const FitResult* fit : {&w.fits.mgb, &w.fits.gb2})
    if (!fit->converged) log("n={}: {} fit did not meet the simplex tolerances", n, to_string(fit->family));

  const DKOptions dk{
      .window_n = n, .xmin = config.xmin, .thresholds = config.thresholds(), .confidence = config.confidence};
  w.reports = dk_report(w.samples, w.fits, dk);
  return w;
}

RunOutcome run_pipeline(const RunConfig& config) {
  config.validate();
  const PriceSeries prices = ingest_csv(config.input_path);
  log("read {} closes from {} ({} to {})", prices.size(), config.input_path.string(),
      format_date(prices.dates().front()), format_date(prices.dates().back()));
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec || !std::filesystem::is_directory(config.output_dir))
    throw std::runtime_error(fmt::format("cannot create output directory {}", config.output_dir.string()));

  const ReturnSeries returns = log_returns(prices);
  const InputSpan span = input_span(config.input_path, prices);
  RunOutcome outcome;
  for (int n : config.n_list) {
    try {
      log("n={}: fitting", n);
      WindowAnalysis w = analyze_window(returns, n, config);
      write_window_bundle(w, config, span);
      log("n={}: mGB nDK={} DK={}, GB2 nDK={} DK={}, LF nDK={} DK={}", n, w.reports[0].count(Label::nDK),
          w.reports[0].count(Label::DK), w.reports[1].count(Label::nDK), w.reports[1].count(Label::DK),
          w.reports[2].count(Label::nDK), w.reports[2].count(Label::DK));
      outcome.windows.push_back(std::move(w));
    } catch (const std::exception& e) {
      log("n={}: failed: {}", n, e.what());
      outcome.failures.push_back({n, e.what()});
    }
  }
  write_summary(outcome, config);
  if (outcome.windows.empty()) log("every window failed");
  return outcome;
}

}  // namespace rvtail
