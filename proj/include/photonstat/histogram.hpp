#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace photonstat {

/// Uniform binning over [t_min, t_max) in ns.
struct HistogramShape {
  double t_min = -1.0;
  double t_max = 1.0;
  double bin_width = 0.05;

  /// (t_max - t_min)/bin_width must be a positive integer (to 1e-9 relative).
  void validate() const;
  std::size_t bins() const;
  double lower_edge(std::size_t i) const { return t_min + bin_width * static_cast<double>(i); }
  double center(std::size_t i) const { return lower_edge(i) + 0.5 * bin_width; }
  /// Bin containing x, or nullopt outside [t_min, t_max).
  std::optional<std::size_t> index(double x) const;

  friend bool operator==(const HistogramShape&, const HistogramShape&) = default;
};

struct Histogram {
  HistogramShape shape;
  std::vector<double> counts;

  static Histogram zeros(const HistogramShape& shape);

  void validate() const;
  std::size_t bins() const { return counts.size(); }
  double total() const;
  /// Sum of counts over bins whose center lies in [lo, hi].
  double sum_centers_in(double lo, double hi) const;
  Histogram scaled(double factor) const;
};

}  // namespace photonstat
