#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hitrun {

/// Least-squares fit of log(series[k]) = intercept + slope * k over
/// k in [begin, end). Points with a non-positive value are skipped; fewer
/// than two usable points leave the fit marked as coalesced.
struct DecayFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t points = 0;
  bool coalesced = false;

  /// Per-index decay rate -slope.
  double rate() const { return -slope; }
  /// Per-index multiplicative factor exp(slope).
  double factor() const;
};

DecayFit fit_log_decay(std::span<const double> series, std::size_t begin,
                       std::size_t end);

/// Same fit against explicit abscissae (e.g. thinned iteration indices).
DecayFit fit_log_decay(std::span<const double> abscissae,
                       std::span<const double> series, std::size_t begin,
                       std::size_t end);

/// Ordinary least-squares slope of y on x, with its standard error.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace hitrun
