#include "hitrun/stats.hpp"

#include "hitrun/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hitrun {

double DecayFit::factor() const { return std::exp(slope); }

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::BadInputs, "fit_line needs at least two paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

DecayFit fit_log_decay(std::span<const double> abscissae,
                       std::span<const double> series, std::size_t begin,
                       std::size_t end) {
  if (abscissae.size() != series.size())
    fail(ErrorCode::DimensionMismatch, "abscissae and series differ in length");
  end = std::min(end, series.size());
  DecayFit fit;
  fit.begin = begin;
  fit.end = end;

  std::vector<double> x, y;
  for (std::size_t k = begin; k < end; ++k) {
    if (series[k] > 0.0 && std::isfinite(series[k])) {
      x.push_back(abscissae[k]);
      y.push_back(std::log(series[k]));
    }
  }
  fit.points = x.size();
  if (x.size() < 2) {
    fit.coalesced = true;
    return fit;
  }
  const LineFit line = fit_line(x, y);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.slope_se = line.slope_se;
  return fit;
}

DecayFit fit_log_decay(std::span<const double> series, std::size_t begin,
                       std::size_t end) {
  std::vector<double> k(series.size());
  for (std::size_t i = 0; i < k.size(); ++i)
    k[i] = static_cast<double>(i);
  return fit_log_decay(k, series, begin, end);
}

} // namespace hitrun
