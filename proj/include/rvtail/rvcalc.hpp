// Realized volatility from daily closes.

#pragma once

#include <Eigen/Core>

#include <chrono>
#include <string>
#include <vector>

namespace rvtail {

using Date = std::chrono::year_month_day;

std::string format_date(const Date& d);

/// Dated closing prices. Dates strictly increase, closes are positive.
class PriceSeries {
 public:
  PriceSeries(std::vector<Date> dates, Eigen::ArrayXd closes);

  const std::vector<Date>& dates() const { return dates_; }
  const Eigen::ArrayXd& closes() const { return closes_; }
  Eigen::Index size() const { return closes_.size(); }

 private:
  std::vector<Date> dates_;
  Eigen::ArrayXd closes_;
};

/// Daily log returns, each dated by the later of its two closes.
struct ReturnSeries {
  std::vector<Date> dates;
  Eigen::ArrayXd returns;
};

enum class WindowStride {
  Overlapping,  // one window ending on every trading day
  Disjoint,     // consecutive non-overlapping blocks of n days
};

/// Annualized realized volatility in percent for an n-day window, dated by
/// each window's last day.
struct RVSeries {
  int window_n = 1;
  WindowStride stride = WindowStride::Overlapping;
  std::vector<Date> dates;
  Eigen::ArrayXd values;
};

/// Points kept by threshold_filter; marked entries exceed the marker level.
struct FilteredSeries {
  std::vector<Date> dates;
  Eigen::ArrayXd values;
  std::vector<bool> marked;
};

/// Trading days per year used for annualization.
inline constexpr double kTradingDaysPerYear = 252.0;

ReturnSeries log_returns(const PriceSeries& prices);

/// 100 * sqrt(252 * mean(r^2)) over each window of n consecutive returns.
RVSeries realized_volatility(const ReturnSeries& returns, int n, WindowStride stride = WindowStride::Overlapping);

/// Keep values > lo; mark those > marker.
FilteredSeries threshold_filter(const RVSeries& rv, double lo, double marker);

}  // namespace rvtail
