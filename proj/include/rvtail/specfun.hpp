// Beta-family special functions: log-beta, regularized incomplete beta and
// its inverse, binomial CDF and quantile.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rvtail {

/// Raised when an iterative kernel fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <std::floating_point Scalar>
void require_shape(Scalar p, Scalar q, const char* who) {
  if (!(p > 0) || !(q > 0) || !std::isfinite(p) || !std::isfinite(q))
    throw std::domain_error(std::string(who) + ": shape parameters must be positive and finite");
}

template <std::floating_point Scalar>
void require_unit(Scalar y, const char* who) {
  if (!(y >= 0 && y <= 1))
    throw std::domain_error(std::string(who) + ": argument must lie in [0, 1]");
}

// Remainder of Stirling's series, lgamma(x) - [(x-0.5)ln x - x + ln sqrt(2pi)], x >= 10.
template <std::floating_point Scalar>
Scalar stirling_tail(Scalar x) {
  const Scalar r = 1 / x;
  const Scalar r2 = r * r;
  return r * (Scalar(1) / 12 +
              r2 * (Scalar(-1) / 360 +
                    r2 * (Scalar(1) / 1260 +
                          r2 * (Scalar(-1) / 1680 +
                                r2 * (Scalar(1) / 1188 +
                                      r2 * (Scalar(-691) / 360360 +
                                            r2 * (Scalar(1) / 156 + r2 * Scalar(-3617) / 122400)))))));
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
template <std::floating_point Scalar>
Scalar beta_continued_fraction(Scalar y, Scalar a, Scalar b) {
  constexpr Scalar tiny = std::numeric_limits<Scalar>::min() / std::numeric_limits<Scalar>::epsilon();
  constexpr Scalar eps = 2 * std::numeric_limits<Scalar>::epsilon();
  constexpr int max_iterations = 200000;

  const Scalar qab = a + b;
  const Scalar qap = a + 1;
  const Scalar qam = a - 1;
  Scalar c = 1;
  Scalar d = 1 - qab * y / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1 / d;
  Scalar h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const Scalar m2 = 2 * Scalar(m);
    Scalar aa = Scalar(m) * (b - m) * y / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * y / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    const Scalar del = d * c;
    h *= del;
    if (std::abs(del - 1) <= eps) return h;
  }
  throw ConvergenceError("reg_inc_beta: continued fraction did not converge");
}

}  // namespace detail

/// Natural log of the complete beta function B(p, q).
///
/// Large arguments go through Stirling-series corrections so that the
/// difference of three large log-gamma values does not eat the precision.
template <std::floating_point Scalar>
Scalar ln_beta(Scalar p, Scalar q) {
  detail::require_shape(p, q, "ln_beta");
  const Scalar a = std::min(p, q);
  const Scalar b = std::max(p, q);
  const Scalar ab = a + b;
  if (a >= 10) {
    const Scalar corr = detail::stirling_tail(a) + detail::stirling_tail(b) - detail::stirling_tail(ab);
    return Scalar(-0.5) * std::log(b) + Scalar(0.5) * std::log(2 * std::numbers::pi_v<Scalar>) + corr +
           (a - Scalar(0.5)) * std::log(a / ab) + b * std::log1p(-a / ab);
  }
  if (b >= 10) {
    const Scalar corr = detail::stirling_tail(b) - detail::stirling_tail(ab);
    return std::lgamma(a) + corr + a - a * std::log(ab) + (b - Scalar(0.5)) * std::log1p(-a / ab);
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(ab);
}

/// Regularized incomplete beta I(y; p, q).
///
/// Continued fraction on whichever side of (p+1)/(p+q+2) converges fastest;
/// the other side comes from the reflection I(y;p,q) = 1 - I(1-y;q,p).
template <std::floating_point Scalar>
Scalar reg_inc_beta(Scalar y, Scalar p, Scalar q) {
  detail::require_unit(y, "reg_inc_beta");
  detail::require_shape(p, q, "reg_inc_beta");
  if (y == 0) return 0;
  if (y == 1) return 1;
  const Scalar lnb = ln_beta(p, q);
  if (y < (p + 1) / (p + q + 2)) {
    const Scalar front = std::exp(p * std::log(y) + q * std::log1p(-y) - lnb);
    return std::clamp(front * detail::beta_continued_fraction(y, p, q) / p, Scalar(0), Scalar(1));
  }
  const Scalar yc = 1 - y;
  const Scalar front = std::exp(q * std::log(yc) + p * std::log(y) - lnb);
  return std::clamp(1 - front * detail::beta_continued_fraction(yc, q, p) / q, Scalar(0), Scalar(1));
}

/// Density of Beta(p, q) at y, i.e. dI/dy.
template <std::floating_point Scalar>
Scalar beta_density(Scalar y, Scalar p, Scalar q) {
  detail::require_unit(y, "beta_density");
  detail::require_shape(p, q, "beta_density");
  if (y == 0) return p < 1 ? std::numeric_limits<Scalar>::infinity() : (p == 1 ? std::exp(-ln_beta(p, q)) : 0);
  if (y == 1) return q < 1 ? std::numeric_limits<Scalar>::infinity() : (q == 1 ? std::exp(-ln_beta(p, q)) : 0);
  return std::exp((p - 1) * std::log(y) + (q - 1) * std::log1p(-y) - ln_beta(p, q));
}

/// Inverse of I(.; p, q): y with |I(y;p,q) - u| <= 1e-12.
///
/// Newton steps are kept inside a shrinking bracket on [0, 1]; a step that
/// leaves the bracket falls back to bisection, so convergence is guaranteed.
template <std::floating_point Scalar>
Scalar reg_inc_beta_inv(Scalar u, Scalar p, Scalar q) {
  detail::require_unit(u, "reg_inc_beta_inv");
  detail::require_shape(p, q, "reg_inc_beta_inv");
  if (u == 0) return 0;
  if (u == 1) return 1;

  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  constexpr int max_iterations = 2000;
  const Scalar lnb = ln_beta(p, q);

  // Leading-order tail inversions: I ~ y^p/(pB) near 0, 1-I ~ (1-y)^q/(qB) near 1.
  Scalar y = std::exp((std::log(u) + std::log(p) + lnb) / p);
  if (!(y > 0 && y < Scalar(0.5))) {
    y = -std::expm1((std::log1p(-u) + std::log(q) + lnb) / q);
    if (!(y > Scalar(0.5) && y < 1)) y = Scalar(0.5);
  }

  Scalar lo = 0;
  Scalar hi = 1;
  for (int it = 0; it < max_iterations; ++it) {
    const Scalar f = reg_inc_beta(y, p, q) - u;
    if (f == 0) return y;
    if (f < 0)
      lo = y;
    else
      hi = y;
    const Scalar slope = std::exp((p - 1) * std::log(y) + (q - 1) * std::log1p(-y) - lnb);
    Scalar next = (slope > 0 && std::isfinite(slope)) ? y - f / slope : lo - 1;
    if (!(next > lo && next < hi)) {
      next = (lo > 0 && hi / lo > 4) ? std::sqrt(lo * hi) : Scalar(0.5) * (lo + hi);
    }
    const Scalar tol = 4 * eps * std::max(next, Scalar(std::numeric_limits<Scalar>::min()));
    if (std::abs(next - y) <= tol || hi - lo <= tol) {
      y = next;
      break;
    }
    y = next;
  }
  if (std::abs(reg_inc_beta(y, p, q) - u) > Scalar(1e-12))
    throw ConvergenceError("reg_inc_beta_inv: failed to reach tolerance");
  return y;
}

namespace detail {

template <std::floating_point Scalar>
Scalar binom_log_pmf(std::int64_t k, std::int64_t n, Scalar s) {
  if (k == 0) return Scalar(n) * std::log1p(-s);
  if (k == n) return Scalar(n) * std::log(s);
  const Scalar log_choose = -std::log(Scalar(n) + 1) - ln_beta(Scalar(n - k + 1), Scalar(k + 1));
  return log_choose + Scalar(k) * std::log(s) + Scalar(n - k) * std::log1p(-s);
}

inline void require_binom(std::int64_t n, const char* who) {
  if (n < 1) throw std::domain_error(std::string(who) + ": n must be >= 1");
}

}  // namespace detail

/// P(X <= k) for X ~ Binomial(n, s).
///
/// Sums pmf terms outward from k toward the nearer tail, anchored by one
/// log-space pmf evaluation; each term follows from the previous by ratio.
template <std::floating_point Scalar>
Scalar binom_cdf(std::int64_t k, std::int64_t n, Scalar s) {
  detail::require_binom(n, "binom_cdf");
  detail::require_unit(s, "binom_cdf");
  if (k < 0 || k > n) throw std::domain_error("binom_cdf: k must lie in [0, n]");
  if (k == n || s == 0) return 1;
  if (s == 1) return 0;

  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const auto mode = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor(Scalar(n + 1) * s)));
  const Scalar odds = s / (1 - s);
  if (k < mode) {
    Scalar sum = 1;
    Scalar term = 1;
    for (std::int64_t j = k; j >= 1; --j) {
      term *= Scalar(j) / (Scalar(n - j + 1) * odds);
      sum += term;
      if (term * Scalar(j) < eps * sum) break;
    }
    return std::min(Scalar(1), std::exp(detail::binom_log_pmf(k, n, s)) * sum);
  }
  Scalar sum = 1;
  Scalar term = 1;
  for (std::int64_t j = k + 1; j < n; ++j) {
    term *= Scalar(n - j) * odds / Scalar(j + 1);
    sum += term;
    if (term * Scalar(n - j) < eps * sum) break;
  }
  return std::max(Scalar(0), 1 - std::exp(detail::binom_log_pmf(k + 1, n, s)) * sum);
}

/// Smallest k with binom_cdf(k, n, s) >= prob.
template <std::floating_point Scalar>
std::int64_t binom_quantile(Scalar prob, std::int64_t n, Scalar s) {
  detail::require_binom(n, "binom_quantile");
  detail::require_unit(s, "binom_quantile");
  if (!(prob > 0 && prob < 1)) throw std::domain_error("binom_quantile: prob must lie in (0, 1)");
  if (s == 0) return 0;
  if (s == 1) return n;

  // Walk from the mode with the pmf recurrence, then settle the boundary
  // with direct CDF evaluations.
  const Scalar odds = s / (1 - s);
  std::int64_t k = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor(Scalar(n + 1) * s)));
  Scalar cdf = binom_cdf(k, n, s);
  Scalar pmf = std::exp(detail::binom_log_pmf(k, n, s));
  if (cdf >= prob) {
    while (k > 0 && cdf - pmf >= prob) {
      cdf -= pmf;
      pmf *= Scalar(k) / (Scalar(n - k + 1) * odds);
      --k;
    }
  } else {
    while (k < n && cdf < prob) {
      pmf *= Scalar(n - k) * odds / Scalar(k + 1);
      ++k;
      cdf += pmf;
    }
  }
  while (k > 0 && binom_cdf(k - 1, n, s) >= prob) --k;
  while (k < n && binom_cdf(k, n, s) < prob) ++k;
  return k;
}

}  // namespace rvtail
