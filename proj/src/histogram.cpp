#include "photonstat/histogram.hpp"

#include <cmath>
#include <numeric>

#include "photonstat/error.hpp"

namespace photonstat {

void HistogramShape::validate() const {
  require(std::isfinite(t_min) && std::isfinite(t_max) && t_max > t_min,
          "histogram: t_max must exceed t_min");
  require(std::isfinite(bin_width) && bin_width > 0.0, "histogram: bin_width must be > 0");
  const double n = (t_max - t_min) / bin_width;
  const double rounded = std::round(n);
  require(rounded >= 1.0 && std::abs(n - rounded) <= 1e-9 * std::max(1.0, n),
          "histogram: (t_max - t_min)/bin_width must be a positive integer");
}

std::size_t HistogramShape::bins() const {
  return static_cast<std::size_t>(std::llround((t_max - t_min) / bin_width));
}

std::optional<std::size_t> HistogramShape::index(double x) const {
  if (!(x >= t_min) || !(x < t_max)) return std::nullopt;
  const auto i = static_cast<std::size_t>(std::floor((x - t_min) / bin_width));
  if (i >= bins()) return std::nullopt;
  return i;
}

Histogram Histogram::zeros(const HistogramShape& shape) {
  shape.validate();
  return Histogram{shape, std::vector<double>(shape.bins(), 0.0)};
}

void Histogram::validate() const {
  shape.validate();
  require(counts.size() == shape.bins(), "histogram: counts size does not match binning");
  for (double c : counts) {
    require(std::isfinite(c) && c >= 0.0, "histogram: counts must be finite and >= 0");
  }
}

double Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }

double Histogram::sum_centers_in(double lo, double hi) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = shape.center(i);
    if (c >= lo && c <= hi) sum += counts[i];
  }
  return sum;
}

Histogram Histogram::scaled(double factor) const {
  Histogram out = *this;
  for (double& c : out.counts) c *= factor;
  return out;
}

}  // namespace photonstat
