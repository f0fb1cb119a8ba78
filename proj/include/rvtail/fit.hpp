// Maximum-likelihood fits of mGB and GB2, KS diagnostics, and log-log
// linear fits of the empirical tail.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rvtail/dist.hpp"
#include "rvtail/nelder_mead.hpp"

namespace rvtail {

struct FitResult {
  Family family = Family::GB2;
  GBParams<double> params;
  double ks = 1.0;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  bool converged = false;
  Eigen::Index n_samples = 0;
  int evaluations = 0;

  double ccdf(double x) const;
  double cdf(double x) const;
};

/// Empirical survival function: sorted values and, for the k-th smallest of
/// N, the fraction of the sample at or above it, (N - k + 1) / N. Tied values
/// share the fraction of the lowest tied rank.
struct EmpiricalCcdf {
  Eigen::ArrayXd values;
  Eigen::ArrayXd ccdf;
};

/// OLS line log10(CCDF) = intercept + slope * log10(x) over the tail.
struct LinearTailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double xmin = 0.0;
  double excluded_above = std::numeric_limits<double>::infinity();
  Eigen::Index n_points = 0;
  double slope_stderr = 0.0;

  /// Survival function implied by the line, clamped into [0, 1].
  double ccdf(double x) const;
  double cdf(double x) const { return 1.0 - ccdf(x); }
};

/// Upper cutoff for tail fits: none, a fixed value, or a fraction of the
/// sample maximum.
class TailExclusion {
 public:
  static TailExclusion none() { return TailExclusion(Kind::None, 0.0); }
  static TailExclusion above(double value) { return TailExclusion(Kind::Above, value); }
  static TailExclusion fraction_of_max(double fraction);

  double bound(double sample_max) const;

 private:
  enum class Kind { None, Above, FractionOfMax };
  TailExclusion(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

struct FitOptions {
  int starts = 8;
  std::uint64_t seed = 1;
  NelderMeadOptions<double> simplex{.max_evaluations = 6000, .f_tolerance = 1e-13, .x_tolerance = 1e-7};
};

EmpiricalCcdf empirical_ccdf(const Eigen::Ref<const Eigen::ArrayXd>& samples);

/// Total log-likelihood of the sample under a family (mGB or GB2).
double log_likelihood(const Eigen::Ref<const Eigen::ArrayXd>& samples, Family family, const GBParams<double>& params);

/// Multi-start simplex maximum likelihood. For mGB, beta1 is kept strictly
/// above the sample maximum. `converged` is false when no start met the
/// simplex tolerances; the best point found is still returned.
FitResult fit_mle(const Eigen::Ref<const Eigen::ArrayXd>& samples, Family family, const FitOptions& options);

inline FitResult fit_mle(const Eigen::Ref<const Eigen::ArrayXd>& samples, Family family, int starts,
                         std::uint64_t seed) {
  FitOptions opts;
  opts.starts = starts;
  opts.seed = seed;
  return fit_mle(samples, family, opts);
}

/// sup |F_emp - F_model| over both one-sided limits at every jump.
template <class ModelCdf>
double ks_statistic(const Eigen::Ref<const Eigen::ArrayXd>& samples, ModelCdf&& model_cdf) {
  if (samples.size() < 1) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i + 1;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    const double f = model_cdf(xs[i]);
    d = std::max({d, std::abs(f - double(i) / n), std::abs(double(j) / n - f)});
    i = j;
  }
  return std::min(d, 1.0);
}

LinearTailFit linear_tail_fit(const EmpiricalCcdf& ccdf, double xmin, const TailExclusion& exclusion);

}  // namespace rvtail
