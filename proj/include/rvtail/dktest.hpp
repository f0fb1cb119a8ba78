// Order-statistics outlier test for tail points and binomial confidence
// bands around fitted survival functions.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rvtail/fit.hpp"

namespace rvtail {

/// Black Swan (consistent with the fit), Dragon King (significantly above
/// it), negative Dragon King (significantly below it).
enum class Label { BS, DK, nDK };

std::string_view to_string(Label label);

struct Thresholds {
  double dk = 0.05;
  double ndk = 0.95;
};

struct PointTest {
  Eigen::Index rank = 0;  // 1-based ascending rank in the full sample
  double value = 0.0;
  double model_cdf = 0.0;
  double p_value = 0.0;
  Label label = Label::BS;
};

/// Pointwise band for the empirical CCDF at x under the model.
struct CIBand {
  double x = 0.0;
  double empirical_ccdf = 0.0;
  double model_ccdf = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double confidence = 0.95;
  /// Position of the empirical CCDF relative to the band: DK above it,
  /// nDK below it. Reported next to the U-test label, never merged with it.
  Label band_signal = Label::BS;
};

struct ModelFits {
  FitResult mgb;
  FitResult gb2;
  LinearTailFit lf;
};

struct DKReport {
  int window_n = 0;
  std::string model;  // "mGB", "GB2" or "LF"
  std::vector<PointTest> points;
  std::vector<CIBand> bands;
  std::variant<FitResult, LinearTailFit> fit;

  int count(Label label) const;
};

Label classify(double p, const Thresholds& thresholds = {});

/// U-test p-values for every order statistic of an ascending sample:
/// p_k = 1 - I(F(x_k); k, N - k + 1).
std::vector<PointTest> u_test(const Eigen::Ref<const Eigen::ArrayXd>& sorted_samples,
                              const std::function<double(double)>& model_cdf, const Thresholds& thresholds = {});

/// Tail form used by the reports: takes the model survival function, which
/// keeps precision where F is close to 1, and tests only points with
/// value > xmin. Ranks still count the full sample.
std::vector<PointTest> u_test_tail(const Eigen::Ref<const Eigen::ArrayXd>& sorted_samples,
                                   const std::function<double(double)>& model_ccdf, double xmin,
                                   const Thresholds& thresholds = {});

struct Band {
  double lower = 0.0;
  double upper = 0.0;
};

/// Binomial-inversion band for a survival probability s estimated from N points.
Band ci_band(double model_ccdf_at_x, std::int64_t n, double confidence);

struct DKOptions {
  int window_n = 0;
  double xmin = 40.0;
  Thresholds thresholds{};
  double confidence = 0.95;
};

/// One report per fit (mGB, GB2, LF), covering the sample points above xmin.
std::vector<DKReport> dk_report(const Eigen::Ref<const Eigen::ArrayXd>& samples, const ModelFits& fits,
                                const DKOptions& options);

/// Report for a single model given by its survival function.
DKReport dk_report_single(const Eigen::Ref<const Eigen::ArrayXd>& samples, std::string model,
                          const std::function<double(double)>& model_ccdf, const DKOptions& options);

}  // namespace rvtail
