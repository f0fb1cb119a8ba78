// Generalized beta family: GB and mGB on [0, beta1], GB2 on (0, inf).
//
// Every power of a scale ratio, e.g. (x/beta2)^alpha or (beta2/beta1)^alpha,
// is carried as its logarithm until the last step so that fitted parameters
// in extreme regimes cannot overflow intermediate quantities.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rvtail/specfun.hpp"

namespace rvtail {

enum class Family { GB, mGB, GB2 };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::GB: return "GB";
    case Family::mGB: return "mGB";
    case Family::GB2: return "GB2";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "GB" || s == "gb") return Family::GB;
  if (s == "mGB" || s == "mgb") return Family::mGB;
  if (s == "GB2" || s == "gb2") return Family::GB2;
  throw std::invalid_argument("unknown distribution family: " + std::string(s));
}

/// Shared parameter record. GB2 ignores beta1 (set it to +inf by convention).
template <std::floating_point Scalar = double>
struct GBParams {
  Scalar alpha = 1;
  Scalar beta1 = std::numeric_limits<Scalar>::infinity();
  Scalar beta2 = 1;
  Scalar p = 1;
  Scalar q = 1;
};

template <std::floating_point Scalar>
void validate(const GBParams<Scalar>& prm, Family family) {
  const auto ok = [](Scalar v) { return v > 0 && std::isfinite(v); };
  if (!ok(prm.alpha) || !ok(prm.beta2) || !ok(prm.p) || !ok(prm.q))
    throw std::domain_error("GBParams: alpha, beta2, p, q must be positive and finite");
  if (family != Family::GB2 && !ok(prm.beta1))
    throw std::domain_error("GBParams: beta1 must be positive and finite for bounded families");
}

namespace detail {

/// ln(1 + e^t) without overflow.
template <std::floating_point Scalar>
Scalar softplus(Scalar t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

/// 1 / (1 + e^t).
template <std::floating_point Scalar>
Scalar logistic_complement(Scalar t) {
  return t > 0 ? std::exp(-t) / (1 + std::exp(-t)) : 1 / (1 + std::exp(t));
}

template <std::floating_point Scalar>
void require_support(Scalar x, const GBParams<Scalar>& prm, const char* who) {
  if (!(x >= 0 && x <= prm.beta1)) throw std::domain_error(std::string(who) + ": x outside [0, beta1]");
}

template <std::floating_point Scalar>
void require_positive_x(Scalar x, const char* who) {
  if (!(x > 0)) throw std::domain_error(std::string(who) + ": x must be positive");
}

// Density value at x = 0 where the only x-dependence is (x/beta2)^(alpha p - 1).
template <std::floating_point Scalar>
Scalar pdf_at_origin(Scalar exponent, Scalar log_value_if_finite) {
  if (exponent > 0) return 0;
  if (exponent < 0) return std::numeric_limits<Scalar>::infinity();
  return std::exp(log_value_if_finite);
}

/// Log-space pieces shared by the GB and mGB expressions at a point x in (0, beta1].
template <std::floating_point Scalar>
struct BoundedTerms {
  Scalar log_v;      // ln (x/beta2)^alpha
  Scalar log_c;      // ln (beta2/beta1)^alpha
  Scalar log_1mu;    // ln (1 - (x/beta1)^alpha)
  Scalar w;          // (1 - (x/beta1)^alpha) / (1 + (x/beta2)^alpha)
  Scalar log_z;      // ln (1 - w) = ln[(1 + c) v / (1 + v)]

  BoundedTerms(Scalar x, const GBParams<Scalar>& prm) {
    log_v = prm.alpha * std::log(x / prm.beta2);
    log_c = prm.alpha * std::log(prm.beta2 / prm.beta1);
    const Scalar lu = prm.alpha * std::log(x / prm.beta1);
    log_1mu = std::log(-std::expm1(lu));
    w = -std::expm1(lu) * logistic_complement(log_v);
    log_z = softplus(log_c) + log_v - softplus(log_v);
  }
};

// ln(q + c (p + q)) with c given as ln c.
template <std::floating_point Scalar>
Scalar log_mgb_norm(Scalar log_c, Scalar p, Scalar q) {
  const Scalar a = std::log(q);
  const Scalar b = log_c + std::log(p + q);
  return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}

// Sum_{n>=0} t_n with t_0 = (a+b)/(a+1) y and t_{n+1}/t_n = (a+b+n+1)/(a+n+2) y,
// so that I(y;a,b) = y^a (1-y)^b / (a B(a,b)) (1 + sum).
template <std::floating_point Scalar>
Scalar incomplete_beta_series_tail(Scalar y, Scalar a, Scalar b) {
  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar term = (a + b) / (a + 1) * y;
  Scalar sum = term;
  for (int n = 0; n < 100000; ++n) {
    term *= (a + b + n + 1) / (a + n + 2) * y;
    sum += term;
    if (term < eps * sum) return sum;
  }
  throw ConvergenceError("incomplete beta series did not converge");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GB

/// Log density of GB on (0, beta1).
template <std::floating_point Scalar>
Scalar gb_log_pdf(Scalar x, const GBParams<Scalar>& prm) {
  const detail::BoundedTerms<Scalar> t(x, prm);
  return std::log(prm.alpha) + prm.p * detail::softplus(t.log_c) + (prm.alpha * prm.p - 1) * std::log(x / prm.beta2) -
         (prm.p + prm.q) * detail::softplus(t.log_v) + (prm.q - 1) * t.log_1mu - std::log(prm.beta2) -
         ln_beta(prm.p, prm.q);
}

template <std::floating_point Scalar>
Scalar gb_pdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::GB);
  detail::require_support(x, prm, "gb_pdf");
  if (x == 0) {
    const Scalar log_at_unit = std::log(prm.alpha) + prm.p * std::log1p(std::pow(prm.beta2 / prm.beta1, prm.alpha)) -
                               std::log(prm.beta2) - ln_beta(prm.p, prm.q);
    return detail::pdf_at_origin(prm.alpha * prm.p - 1, log_at_unit);
  }
  if (x == prm.beta1) return prm.q > 1 ? 0 : (prm.q < 1 ? std::numeric_limits<Scalar>::infinity() : std::exp(gb_log_pdf(x, prm)));
  return std::exp(gb_log_pdf(x, prm));
}

/// GB survival function, I(w; q, p). Only used as a reference curve for the
/// endpoint diagnostics; GB is not a fitting target.
template <std::floating_point Scalar>
Scalar gb_ccdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::GB);
  detail::require_support(x, prm, "gb_ccdf");
  if (x == 0) return 1;
  if (x == prm.beta1) return 0;
  return reg_inc_beta(detail::BoundedTerms<Scalar>(x, prm).w, prm.q, prm.p);
}

// ---------------------------------------------------------------------------
// mGB

template <std::floating_point Scalar>
Scalar mgb_log_pdf(Scalar x, const GBParams<Scalar>& prm) {
  const detail::BoundedTerms<Scalar> t(x, prm);
  return std::log(prm.alpha) + std::log(prm.p + prm.q) + (prm.p + 1) * detail::softplus(t.log_c) +
         (prm.alpha * prm.p - 1) * std::log(x / prm.beta2) - (prm.p + prm.q + 1) * detail::softplus(t.log_v) +
         (prm.q - 1) * t.log_1mu - std::log(prm.beta2) - ln_beta(prm.p, prm.q) -
         detail::log_mgb_norm(t.log_c, prm.p, prm.q);
}

template <std::floating_point Scalar>
Scalar mgb_pdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::mGB);
  detail::require_support(x, prm, "mgb_pdf");
  if (x == 0) {
    const Scalar log_c = prm.alpha * std::log(prm.beta2 / prm.beta1);
    const Scalar log_at_unit = std::log(prm.alpha) + std::log(prm.p + prm.q) + (prm.p + 1) * detail::softplus(log_c) -
                               std::log(prm.beta2) - ln_beta(prm.p, prm.q) - detail::log_mgb_norm(log_c, prm.p, prm.q);
    return detail::pdf_at_origin(prm.alpha * prm.p - 1, log_at_unit);
  }
  if (x == prm.beta1)
    return prm.q > 1 ? 0 : (prm.q < 1 ? std::numeric_limits<Scalar>::infinity() : std::exp(mgb_log_pdf(x, prm)));
  return std::exp(mgb_log_pdf(x, prm));
}

/// mGB survival function: the GB survival term minus the mGB correction.
///
/// Near beta1 the two pieces nearly cancel, so for small w the difference is
/// formed analytically from the incomplete-beta power series instead.
template <std::floating_point Scalar>
Scalar mgb_ccdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::mGB);
  detail::require_support(x, prm, "mgb_ccdf");
  if (x == 0) return 1;
  if (x == prm.beta1) return 0;
  const detail::BoundedTerms<Scalar> t(x, prm);
  const Scalar p = prm.p;
  const Scalar q = prm.q;
  const Scalar lnb = ln_beta(p, q);
  const Scalar log_front = q * std::log(t.w) + p * t.log_z - lnb;
  const Scalar log_norm = detail::log_mgb_norm(t.log_c, p, q);
  Scalar value;
  if (t.w * (p + q) / (q + 1) < Scalar(0.5)) {
    // c(p+q) / (q (q + c(p+q))) written as a logistic in ln c.
    const Scalar c_part = detail::logistic_complement(std::log(q) - t.log_c - std::log(p + q)) / q;
    const Scalar series = detail::incomplete_beta_series_tail(t.w, q, p) / q;
    value = std::exp(log_front) * (c_part + series);
  } else {
    value = reg_inc_beta(t.w, q, p) - std::exp(log_front - log_norm);
  }
  return std::clamp(value, Scalar(0), Scalar(1));
}

template <std::floating_point Scalar>
Scalar mgb_cdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::mGB);
  detail::require_support(x, prm, "mgb_cdf");
  if (x == 0) return 0;
  if (x == prm.beta1) return 1;
  const detail::BoundedTerms<Scalar> t(x, prm);
  const Scalar z = std::exp(t.log_z);
  if (z < Scalar(0.5)) {
    const Scalar log_front = prm.q * std::log(t.w) + prm.p * t.log_z - ln_beta(prm.p, prm.q);
    const Scalar value =
        reg_inc_beta(std::min(z, Scalar(1)), prm.p, prm.q) + std::exp(log_front - detail::log_mgb_norm(t.log_c, prm.p, prm.q));
    return std::clamp(value, Scalar(0), Scalar(1));
  }
  return 1 - mgb_ccdf(x, prm);
}

// ---------------------------------------------------------------------------
// GB2

template <std::floating_point Scalar>
Scalar gb2_log_pdf(Scalar x, const GBParams<Scalar>& prm) {
  const Scalar log_ratio = std::log(x / prm.beta2);
  return std::log(prm.alpha) + (prm.alpha * prm.p - 1) * log_ratio -
         (prm.p + prm.q) * detail::softplus(prm.alpha * log_ratio) - std::log(prm.beta2) - ln_beta(prm.p, prm.q);
}

template <std::floating_point Scalar>
Scalar gb2_pdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::GB2);
  detail::require_positive_x(x, "gb2_pdf");
  if (std::isinf(x)) return 0;
  return std::exp(gb2_log_pdf(x, prm));
}

/// GB2 survival function, I(1/(1 + (x/beta2)^alpha); q, p).
template <std::floating_point Scalar>
Scalar gb2_ccdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::GB2);
  detail::require_positive_x(x, "gb2_ccdf");
  if (std::isinf(x)) return 0;
  const Scalar log_v = prm.alpha * std::log(x / prm.beta2);
  return reg_inc_beta(detail::logistic_complement(log_v), prm.q, prm.p);
}

template <std::floating_point Scalar>
Scalar gb2_cdf(Scalar x, const GBParams<Scalar>& prm) {
  validate(prm, Family::GB2);
  detail::require_positive_x(x, "gb2_cdf");
  if (std::isinf(x)) return 1;
  const Scalar log_v = prm.alpha * std::log(x / prm.beta2);
  return reg_inc_beta(detail::logistic_complement(-log_v), prm.p, prm.q);
}

// ---------------------------------------------------------------------------
// Family dispatch

template <std::floating_point Scalar>
Scalar ccdf(Family family, Scalar x, const GBParams<Scalar>& prm) {
  switch (family) {
    case Family::GB: return gb_ccdf(x, prm);
    case Family::mGB: return mgb_ccdf(x, prm);
    case Family::GB2: return gb2_ccdf(x, prm);
  }
  throw std::invalid_argument("ccdf: bad family");
}

template <std::floating_point Scalar>
Scalar cdf(Family family, Scalar x, const GBParams<Scalar>& prm) {
  switch (family) {
    case Family::GB: return 1 - gb_ccdf(x, prm);
    case Family::mGB: return mgb_cdf(x, prm);
    case Family::GB2: return gb2_cdf(x, prm);
  }
  throw std::invalid_argument("cdf: bad family");
}

/// Magnitude of the log-log CCDF slope in the power-law stretch
/// beta2 << x << beta1: alpha q for GB and GB2, alpha (q + 1) for mGB.
template <std::floating_point Scalar>
Scalar tail_exponent(const GBParams<Scalar>& prm, Family family) {
  return family == Family::mGB ? prm.alpha * (prm.q + 1) : prm.alpha * prm.q;
}

/// Leading-order survival function close to beta1:
///   GB:  w^q / (q B(p,q))
///   mGB: (1 + p/q) (beta2/beta1)^alpha w^q / (q B(p,q))
/// with w = (1 - (x/beta1)^alpha) / (1 + (x/beta2)^alpha). The mGB form is
/// leading order in (beta2/beta1)^alpha as well, so it tracks mgb_ccdf only
/// in the beta2 << beta1 regime. GB2 has no endpoint and is rejected.
template <std::floating_point Scalar>
Scalar endpoint_asymptote(Scalar x, const GBParams<Scalar>& prm, Family family) {
  if (family == Family::GB2) throw std::invalid_argument("endpoint_asymptote: GB2 has no finite endpoint");
  validate(prm, family);
  detail::require_support(x, prm, "endpoint_asymptote");
  if (x == prm.beta1) return 0;
  if (x == 0) x = std::numeric_limits<Scalar>::min();
  const detail::BoundedTerms<Scalar> t(x, prm);
  const Scalar log_gb = prm.q * std::log(t.w) - std::log(prm.q) - ln_beta(prm.p, prm.q);
  if (family == Family::GB) return std::exp(log_gb);
  return std::exp(log_gb + std::log1p(prm.p / prm.q) + t.log_c);
}

// ---------------------------------------------------------------------------
// Sampling

/// Random engine for all sampling: 64-bit Mersenne Twister.
using Rng = std::mt19937_64;

/// Uniform draw on the open interval (0, 1) from the top 53 bits. Spelled out
/// rather than std::uniform_real_distribution so that sequences are identical
/// across standard library implementations.
inline double uniform_open(Rng& rng) { return (double(rng() >> 11) + 0.5) * 0x1.0p-53; }

/// GB2 draws by inverse transform: y = I^{-1}(u; q, p), x = beta2 ((1-y)/y)^(1/alpha).
template <std::floating_point Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> gb2_sample(const GBParams<Scalar>& prm, Eigen::Index count, std::uint64_t seed) {
  validate(prm, Family::GB2);
  if (count < 1) throw std::invalid_argument("gb2_sample: count must be >= 1");
  Rng rng(seed);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Scalar y = reg_inc_beta_inv(Scalar(uniform_open(rng)), prm.q, prm.p);
    out[i] = prm.beta2 * std::pow((1 - y) / y, 1 / prm.alpha);
  }
  return out;
}

/// x in [0, beta1] with mgb_ccdf(x) = u: safeguarded Newton inside a bracket.
template <std::floating_point Scalar>
Scalar mgb_ccdf_inverse(Scalar u, const GBParams<Scalar>& prm) {
  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar lo = 0;
  Scalar hi = prm.beta1;
  // GB2-like power-law guess, clipped into the support.
  Scalar x = prm.beta2 * std::pow(std::max(u, Scalar(1e-300)), -1 / tail_exponent(prm, Family::mGB));
  if (!(x > lo && x < hi)) x = Scalar(0.5) * hi;
  for (int it = 0; it < 500; ++it) {
    const Scalar g = mgb_ccdf(x, prm) - u;
    if (g == 0) return x;
    if (g > 0)
      lo = x;
    else
      hi = x;
    const Scalar density = mgb_pdf(x, prm);
    Scalar next = (density > 0 && std::isfinite(density)) ? x + g / density : lo - 1;
    if (!(next > lo && next < hi)) next = (lo > 0 && hi / lo > 4) ? std::sqrt(lo * hi) : Scalar(0.5) * (lo + hi);
    if (std::abs(next - x) <= 4 * eps * next || hi - lo <= 4 * eps * hi) return next;
    x = next;
  }
  throw ConvergenceError("mgb_sample: root finder did not converge");
}

template <std::floating_point Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> mgb_sample(const GBParams<Scalar>& prm, Eigen::Index count, std::uint64_t seed) {
  validate(prm, Family::mGB);
  if (count < 1) throw std::invalid_argument("mgb_sample: count must be >= 1");
  if (!(prm.beta2 < prm.beta1)) throw std::domain_error("mgb_sample: requires beta2 < beta1");
  Rng rng(seed);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = mgb_ccdf_inverse(Scalar(uniform_open(rng)), prm);
  return out;
}

}  // namespace rvtail
