#include "rvtail/fit.hpp"

#include <numeric>
#include <stdexcept>

namespace rvtail {

namespace {

using Vec = Eigen::VectorXd;

// The sample collapsed to distinct values with multiplicities. Likelihoods
// are computed from this form so that a sample and any exact replication of
// it give bit-identical objectives.
struct CompressedSample {
  Eigen::ArrayXd log_values;
  Eigen::ArrayXd counts;
  double total = 0.0;
  double log_min = 0.0;
  double log_max = 0.0;
  double log_median = 0.0;
};

CompressedSample compress(const Eigen::Ref<const Eigen::ArrayXd>& samples) {
  if (samples.size() < 1) throw std::invalid_argument("fit: empty sample");
  if (!(samples > 0.0).all() || !samples.allFinite())
    throw std::invalid_argument("fit: samples must be positive and finite");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  std::vector<double> uniq;
  std::vector<double> counts;
  for (double x : xs) {
    if (!uniq.empty() && uniq.back() == x) {
      counts.back() += 1.0;
    } else {
      uniq.push_back(x);
      counts.push_back(1.0);
    }
  }
  CompressedSample out;
  out.log_values = Eigen::Map<Eigen::ArrayXd>(uniq.data(), Eigen::Index(uniq.size())).log();
  out.counts = Eigen::Map<Eigen::ArrayXd>(counts.data(), Eigen::Index(counts.size()));
  out.total = double(xs.size());
  out.log_min = std::log(xs.front());
  out.log_max = std::log(xs.back());
  const std::size_t mid = xs.size() / 2;
  out.log_median = std::log(xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]));
  return out;
}

Eigen::ArrayXd softplus(const Eigen::ArrayXd& t) { return t.max(0.0) + (-t.abs()).exp().log1p(); }

double softplus(double t) { return detail::softplus(t); }

// Unconstrained coordinates: logs of alpha, beta2, p, q and, for mGB,
// log(beta1 / max - 1).
constexpr Eigen::Index kMinFitSamples = 100;
constexpr double kLogShapeMin = -7.0;
constexpr double kLogShapeMax = 7.0;
constexpr double kLogBeta1GapMin = -13.8;  // beta1 >= max * (1 + 1e-6)
constexpr double kLogBeta1GapMax = 7.0;

bool in_box(const Vec& th, const CompressedSample& s) {
  if (th[0] < -4.0 || th[0] > 4.0) return false;
  if (th[1] < s.log_min - 15.0 || th[1] > s.log_max + 15.0) return false;
  for (int i : {2, 3})
    if (th[i] < kLogShapeMin || th[i] > kLogShapeMax) return false;
  if (th.size() == 5 && (th[4] < kLogBeta1GapMin || th[4] > kLogBeta1GapMax)) return false;
  return true;
}

GBParams<double> to_params(const Vec& th, const CompressedSample& s) {
  GBParams<double> prm;
  prm.alpha = std::exp(th[0]);
  prm.beta2 = std::exp(th[1]);
  prm.p = std::exp(th[2]);
  prm.q = std::exp(th[3]);
  if (th.size() == 5) prm.beta1 = std::exp(s.log_max + softplus(th[4]));
  return prm;
}

double mean_log_likelihood_gb2(const CompressedSample& s, double alpha, double log_beta2, double p, double q) {
  const Eigen::ArrayXd t = s.log_values - log_beta2;
  const double sum = (s.counts * ((alpha * p - 1.0) * t - (p + q) * softplus(alpha * t))).sum();
  return sum / s.total + std::log(alpha) - log_beta2 - ln_beta(p, q);
}

double mean_log_likelihood_mgb(const CompressedSample& s, double alpha, double log_beta1, double log_beta2, double p,
                               double q) {
  const Eigen::ArrayXd t = s.log_values - log_beta2;
  const Eigen::ArrayXd log_1mu = (-(alpha * (s.log_values - log_beta1)).expm1()).log();
  const double log_c = alpha * (log_beta2 - log_beta1);
  const double sum =
      (s.counts * ((alpha * p - 1.0) * t - (p + q + 1.0) * softplus(alpha * t) + (q - 1.0) * log_1mu)).sum();
  return sum / s.total + std::log(alpha) + std::log(p + q) + (p + 1.0) * softplus(log_c) - log_beta2 -
         ln_beta(p, q) - detail::log_mgb_norm(log_c, p, q);
}

double mean_log_likelihood(const CompressedSample& s, Family family, const GBParams<double>& prm) {
  if (family == Family::GB2) return mean_log_likelihood_gb2(s, prm.alpha, std::log(prm.beta2), prm.p, prm.q);
  return mean_log_likelihood_mgb(s, prm.alpha, std::log(prm.beta1), std::log(prm.beta2), prm.p, prm.q);
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::log(lo) + (std::log(hi) - std::log(lo)) * uniform_open(rng);
}

}  // namespace

double FitResult::ccdf(double x) const {
  if (family == Family::mGB) return x >= params.beta1 ? 0.0 : mgb_ccdf(std::max(x, 0.0), params);
  return x <= 0.0 ? 1.0 : gb2_ccdf(x, params);
}

double FitResult::cdf(double x) const {
  if (family == Family::mGB) return x >= params.beta1 ? 1.0 : mgb_cdf(std::max(x, 0.0), params);
  return x <= 0.0 ? 0.0 : gb2_cdf(x, params);
}

double LinearTailFit::ccdf(double x) const {
  if (!(x > 0.0)) return 1.0;
  return std::clamp(std::pow(10.0, intercept + slope * std::log10(x)), 0.0, 1.0);
}

TailExclusion TailExclusion::fraction_of_max(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("TailExclusion: fraction must lie in (0, 1)");
  return TailExclusion(Kind::FractionOfMax, fraction);
}

double TailExclusion::bound(double sample_max) const {
  switch (kind_) {
    case Kind::None: return std::numeric_limits<double>::infinity();
    case Kind::Above: return value_;
    case Kind::FractionOfMax: return value_ * sample_max;
  }
  return std::numeric_limits<double>::infinity();
}

EmpiricalCcdf empirical_ccdf(const Eigen::Ref<const Eigen::ArrayXd>& samples) {
  if (samples.size() < 1) throw std::invalid_argument("empirical_ccdf: empty sample");
  std::vector<double> xs(samples.begin(), samples.end());
  std::stable_sort(xs.begin(), xs.end());
  const Eigen::Index n = Eigen::Index(xs.size());
  EmpiricalCcdf out;
  out.values = Eigen::Map<Eigen::ArrayXd>(xs.data(), n);
  out.ccdf.resize(n);
  Eigen::Index first_of_tie = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0 && xs[i] != xs[i - 1]) first_of_tie = i;
    out.ccdf[i] = double(n - first_of_tie) / double(n);
  }
  return out;
}

double log_likelihood(const Eigen::Ref<const Eigen::ArrayXd>& samples, Family family, const GBParams<double>& params) {
  if (family == Family::GB) throw std::invalid_argument("log_likelihood: GB is not a fitting family");
  validate(params, family);
  const CompressedSample s = compress(samples);
  if (family == Family::mGB && !(std::log(params.beta1) > s.log_max))
    return -std::numeric_limits<double>::infinity();
  return mean_log_likelihood(s, family, params) * s.total;
}

FitResult fit_mle(const Eigen::Ref<const Eigen::ArrayXd>& samples, Family family, const FitOptions& options) {
  if (family == Family::GB) throw std::invalid_argument("fit_mle: only mGB and GB2 are fitted");
  if (options.starts < 1) throw std::invalid_argument("fit_mle: need at least one start");
  if (samples.size() < kMinFitSamples) throw std::invalid_argument("fit_mle: need at least 100 samples");
  const CompressedSample s = compress(samples);
  if (s.counts.size() < 5) throw std::invalid_argument("fit_mle: need at least five distinct values");

  const bool bounded = family == Family::mGB;
  const auto objective = [&](const Vec& th) {
    if (!in_box(th, s)) return std::numeric_limits<double>::infinity();
    const GBParams<double> prm = to_params(th, s);
    return -mean_log_likelihood(s, family, prm);
  };

  const double median = std::exp(s.log_median);
  Rng rng(options.seed);
  FitResult best;
  best.family = family;
  best.n_samples = samples.size();
  double best_value = std::numeric_limits<double>::infinity();
  Vec best_theta;
  bool any_converged = false;
  int evaluations = 0;
  for (int start = 0; start < options.starts; ++start) {
    Vec th(bounded ? 5 : 4);
    th[0] = log_uniform(rng, 0.5, 5.0);
    th[1] = log_uniform(rng, 0.2 * median, 5.0 * median);
    th[2] = log_uniform(rng, 0.3, 5.0);
    th[3] = log_uniform(rng, 0.3, 5.0);
    // beta1 = 1.05 * max, i.e. log(beta1/max - 1) = log(0.05) up to softplus.
    if (bounded) th[4] = std::log(std::expm1(std::log1p(0.05)));

    auto run = nelder_mead<double>(objective, th, 0.3, options.simplex);
    evaluations += run.evaluations;
    // One restart from the optimum re-expands a simplex that may have
    // collapsed prematurely.
    auto again = nelder_mead<double>(objective, run.x, 0.05, options.simplex);
    evaluations += again.evaluations;
    if (again.value <= run.value) run = again;
    else run.converged = run.converged && again.converged;
    any_converged = any_converged || run.converged;
    if (run.value < best_value) {
      best_value = run.value;
      best_theta = run.x;
    }
  }
  best.evaluations = evaluations;
  if (!std::isfinite(best_value)) {
    best.converged = false;
    return best;
  }
  best.params = to_params(best_theta, s);
  best.log_likelihood = -best_value * s.total;
  best.converged = any_converged;
  best.ks = ks_statistic(samples, [&](double x) { return best.cdf(x); });
  return best;
}

LinearTailFit linear_tail_fit(const EmpiricalCcdf& ccdf, double xmin, const TailExclusion& exclusion) {
  if (!(xmin > 0.0)) throw std::invalid_argument("linear_tail_fit: xmin must be positive");
  if (ccdf.values.size() == 0) throw std::invalid_argument("linear_tail_fit: empty CCDF");
  const double upper = exclusion.bound(ccdf.values.maxCoeff());
  if (!(upper > xmin)) throw std::invalid_argument("linear_tail_fit: exclusion bound must exceed xmin");

  std::vector<double> lx;
  std::vector<double> ly;
  for (Eigen::Index i = 0; i < ccdf.values.size(); ++i) {
    const double x = ccdf.values[i];
    if (x > xmin && x <= upper && ccdf.ccdf[i] > 0.0) {
      lx.push_back(std::log10(x));
      ly.push_back(std::log10(ccdf.ccdf[i]));
    }
  }
  const Eigen::Index n = Eigen::Index(lx.size());
  if (n < 3) throw std::invalid_argument("linear_tail_fit: fewer than three points in the fitting range");

  const Eigen::Map<const Eigen::ArrayXd> x(lx.data(), n);
  const Eigen::Map<const Eigen::ArrayXd> y(ly.data(), n);
  const Eigen::ArrayXd dx = x - x.mean();
  const Eigen::ArrayXd dy = y - y.mean();
  const double sxx = dx.square().sum();
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_tail_fit: all fitting points share one value");

  LinearTailFit fit;
  fit.slope = (dx * dy).sum() / sxx;
  fit.intercept = y.mean() - fit.slope * x.mean();
  fit.xmin = xmin;
  fit.excluded_above = upper;
  fit.n_points = n;
  const double rss = (dy - fit.slope * dx).square().sum();
  fit.slope_stderr = n > 2 ? std::sqrt(rss / double(n - 2) / sxx) : 0.0;
  return fit;
}

}  // namespace rvtail
