// Derivative-free simplex minimization.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numeric>
#include <vector>

namespace rvtail {

template <std::floating_point Scalar = double>
struct NelderMeadOptions {
  int max_evaluations = 20000;
  Scalar f_tolerance = Scalar(1e-12);  // spread of vertex values, relative to |f_best| + 1
  Scalar x_tolerance = Scalar(1e-8);   // simplex diameter in parameter units
};

template <std::floating_point Scalar = double>
struct NelderMeadResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar value = std::numeric_limits<Scalar>::infinity();
  int evaluations = 0;
  bool converged = false;
};

/// Minimize f from x0 with an axis-aligned initial simplex of edge `step`.
///
/// Uses the dimension-adaptive coefficients of Gao and Han, which keep the
/// simplex from degenerating in five or more dimensions. Non-finite objective
/// values are treated as +inf, so f may reject infeasible points that way.
template <std::floating_point Scalar, class Objective>
NelderMeadResult<Scalar> nelder_mead(Objective&& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0, Scalar step,
                                     const NelderMeadOptions<Scalar>& opts = {}) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index dim = x0.size();
  const Scalar nd = Scalar(dim);
  const Scalar reflect = 1;
  const Scalar expand = 1 + 2 / nd;
  const Scalar contract = Scalar(0.75) - 1 / (2 * nd);
  const Scalar shrink = 1 - 1 / nd;

  NelderMeadResult<Scalar> res;
  auto eval = [&](const Vec& x) {
    ++res.evaluations;
    const Scalar v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<Scalar>::infinity();
  };

  std::vector<Vec> simplex(dim + 1, x0);
  std::vector<Scalar> values(dim + 1);
  for (Eigen::Index i = 0; i < dim; ++i) simplex[i + 1][i] += step;
  for (Eigen::Index i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<Eigen::Index> order(dim + 1);
  while (res.evaluations < opts.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second_worst = order[dim - 1];

    Scalar diameter = 0;
    for (Eigen::Index i = 0; i <= dim; ++i)
      diameter = std::max(diameter, (simplex[i] - simplex[best]).cwiseAbs().maxCoeff());
    const Scalar spread = values[worst] - values[best];
    if (std::isfinite(values[best]) && spread <= opts.f_tolerance * (std::abs(values[best]) + 1) &&
        diameter <= opts.x_tolerance) {
      res.converged = true;
      break;
    }

    Vec centroid = Vec::Zero(dim);
    for (Eigen::Index i = 0; i <= dim; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= nd;

    const Vec xr = centroid + reflect * (centroid - simplex[worst]);
    const Scalar fr = eval(xr);
    if (fr < values[best]) {
      const Vec xe = centroid + expand * (xr - centroid);
      const Scalar fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second_worst]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vec xc = outside ? Vec(centroid + contract * (xr - centroid))
                           : Vec(centroid - contract * (centroid - simplex[worst]));
    const Scalar fc = eval(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (Eigen::Index i = 0; i <= dim; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + shrink * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  res.x = simplex[best];
  res.value = values[best];
  return res;
}

}  // namespace rvtail
