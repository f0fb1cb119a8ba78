#include "rvtail/dktest.hpp"

#include <algorithm>
#include <stdexcept>

#include "rvtail/specfun.hpp"

namespace rvtail {

namespace {

void require_thresholds(const Thresholds& t) {
  if (!(t.dk < t.ndk)) throw std::invalid_argument("dk threshold must be below the nDK threshold");
}

void require_sorted(const Eigen::Ref<const Eigen::ArrayXd>& xs) {
  if (xs.size() < 1) throw std::invalid_argument("u_test: empty sample");
  for (Eigen::Index i = 1; i < xs.size(); ++i)
    if (!(xs[i - 1] <= xs[i])) throw std::invalid_argument("u_test: samples must be sorted ascending");
}

// p = 1 - I(F; k, N-k+1) = I(S; N-k+1, k) with S = 1 - F.
PointTest test_point(Eigen::Index k, Eigen::Index n, double value, double survival, const Thresholds& t) {
  const double s = std::clamp(survival, 0.0, 1.0);
  PointTest pt;
  pt.rank = k;
  pt.value = value;
  pt.model_cdf = 1.0 - s;
  pt.p_value = reg_inc_beta(s, double(n - k + 1), double(k));
  pt.label = classify(pt.p_value, t);
  return pt;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::BS: return "BS";
    case Label::DK: return "DK";
    case Label::nDK: return "nDK";
  }
  return "?";
}

int DKReport::count(Label label) const {
  return int(std::count_if(points.begin(), points.end(), [&](const PointTest& p) { return p.label == label; }));
}

Label classify(double p, const Thresholds& thresholds) {
  require_thresholds(thresholds);
  if (p < thresholds.dk) return Label::DK;
  if (p > thresholds.ndk) return Label::nDK;
  return Label::BS;
}

std::vector<PointTest> u_test(const Eigen::Ref<const Eigen::ArrayXd>& sorted_samples,
                              const std::function<double(double)>& model_cdf, const Thresholds& thresholds) {
  require_thresholds(thresholds);
  require_sorted(sorted_samples);
  const Eigen::Index n = sorted_samples.size();
  std::vector<PointTest> out;
  out.reserve(std::size_t(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = std::clamp(model_cdf(sorted_samples[i]), 0.0, 1.0);
    PointTest pt = test_point(i + 1, n, sorted_samples[i], 1.0 - f, thresholds);
    pt.model_cdf = f;
    out.push_back(pt);
  }
  return out;
}

std::vector<PointTest> u_test_tail(const Eigen::Ref<const Eigen::ArrayXd>& sorted_samples,
                                   const std::function<double(double)>& model_ccdf, double xmin,
                                   const Thresholds& thresholds) {
  require_thresholds(thresholds);
  require_sorted(sorted_samples);
  const Eigen::Index n = sorted_samples.size();
  std::vector<PointTest> out;
  const auto first = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), xmin) - sorted_samples.begin();
  for (Eigen::Index i = first; i < n; ++i)
    out.push_back(test_point(i + 1, n, sorted_samples[i], model_ccdf(sorted_samples[i]), thresholds));
  return out;
}

Band ci_band(double model_ccdf_at_x, std::int64_t n, double confidence) {
  if (n < 1) throw std::invalid_argument("ci_band: N must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("ci_band: confidence must lie in (0, 1)");
  const double s = std::clamp(model_ccdf_at_x, 0.0, 1.0);
  const double nn = double(n);
  return {double(binom_quantile(0.5 * (1.0 - confidence), n, s)) / nn,
          double(binom_quantile(0.5 * (1.0 + confidence), n, s)) / nn};
}

DKReport dk_report_single(const Eigen::Ref<const Eigen::ArrayXd>& samples, std::string model,
                          const std::function<double(double)>& model_ccdf, const DKOptions& options) {
  if (!(samples > 0.0).all()) throw std::invalid_argument("dk_report: samples must be positive");
  const EmpiricalCcdf emp = empirical_ccdf(samples);
  DKReport report;
  report.window_n = options.window_n;
  report.model = std::move(model);
  report.points = u_test_tail(emp.values, model_ccdf, options.xmin, options.thresholds);

  const Eigen::Index n = emp.values.size();
  report.bands.reserve(report.points.size());
  for (const PointTest& pt : report.points) {
    CIBand band;
    band.x = pt.value;
    band.empirical_ccdf = emp.ccdf[pt.rank - 1];
    band.model_ccdf = 1.0 - pt.model_cdf;
    const Band b = ci_band(band.model_ccdf, n, options.confidence);
    band.lower = b.lower;
    band.upper = b.upper;
    band.confidence = options.confidence;
    if (band.empirical_ccdf > band.upper) band.band_signal = Label::DK;
    else if (band.empirical_ccdf < band.lower) band.band_signal = Label::nDK;
    report.bands.push_back(band);
  }
  return report;
}

std::vector<DKReport> dk_report(const Eigen::Ref<const Eigen::ArrayXd>& samples, const ModelFits& fits,
                                const DKOptions& options) {
  std::vector<DKReport> out;
  out.push_back(dk_report_single(samples, "mGB", [&](double x) { return fits.mgb.ccdf(x); }, options));
  out.back().fit = fits.mgb;
  out.push_back(dk_report_single(samples, "GB2", [&](double x) { return fits.gb2.ccdf(x); }, options));
  out.back().fit = fits.gb2;
  out.push_back(dk_report_single(samples, "LF", [&](double x) { return fits.lf.ccdf(x); }, options));
  out.back().fit = fits.lf;
  return out;
}

}  // namespace rvtail
