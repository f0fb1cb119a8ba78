#include "rvtail/rvcalc.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rvtail {

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
  return buf;
}

PriceSeries::PriceSeries(std::vector<Date> dates, Eigen::ArrayXd closes)
    : dates_(std::move(dates)), closes_(std::move(closes)) {
  if (Eigen::Index(dates_.size()) != closes_.size())
    throw std::invalid_argument("PriceSeries: dates and closes differ in length");
  if (closes_.size() < 2) throw std::invalid_argument("PriceSeries: need at least two closes");
  for (Eigen::Index i = 0; i < closes_.size(); ++i) {
    if (!(closes_[i] > 0) || !std::isfinite(closes_[i]))
      throw std::invalid_argument("PriceSeries: nonpositive close on " + format_date(dates_[i]));
    if (i > 0 && !(dates_[i - 1] < dates_[i]))
      throw std::invalid_argument("PriceSeries: dates not strictly increasing at " + format_date(dates_[i]));
  }
}

ReturnSeries log_returns(const PriceSeries& prices) {
  const Eigen::Index n = prices.size() - 1;
  ReturnSeries out;
  out.dates.assign(prices.dates().begin() + 1, prices.dates().end());
  out.returns = (prices.closes().tail(n) / prices.closes().head(n)).log();
  return out;
}

RVSeries realized_volatility(const ReturnSeries& returns, int n, WindowStride stride) {
  if (n < 1) throw std::invalid_argument("realized_volatility: window must be >= 1 day");
  const Eigen::Index len = returns.returns.size();
  if (len < n) throw std::invalid_argument("realized_volatility: window longer than the return series");

  const Eigen::Index step = stride == WindowStride::Overlapping ? 1 : n;
  const Eigen::Index count = (len - n) / step + 1;
  RVSeries out;
  out.window_n = n;
  out.stride = stride;
  out.values.resize(count);
  out.dates.reserve(count);
  const double scale = 100.0 * std::sqrt(kTradingDaysPerYear);
  for (Eigen::Index w = 0; w < count; ++w) {
    const Eigen::Index start = w * step;
    out.values[w] = scale * std::sqrt(returns.returns.segment(start, n).square().mean());
    out.dates.push_back(returns.dates[start + n - 1]);
  }
  return out;
}

FilteredSeries threshold_filter(const RVSeries& rv, double lo, double marker) {
  if (!(lo >= 0) || !(marker >= lo)) throw std::invalid_argument("threshold_filter: need 0 <= lo <= marker");
  FilteredSeries out;
  std::vector<double> kept;
  for (Eigen::Index i = 0; i < rv.values.size(); ++i) {
    if (rv.values[i] > lo) {
      out.dates.push_back(rv.dates[i]);
      kept.push_back(rv.values[i]);
      out.marked.push_back(rv.values[i] > marker);
    }
  }
  out.values = Eigen::Map<const Eigen::ArrayXd>(kept.data(), Eigen::Index(kept.size()));
  return out;
}

}  // namespace rvtail
