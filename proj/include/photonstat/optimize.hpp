#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace photonstat {

using Objective = std::function<double(std::span<const double>)>;

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct OptimizeOptions {
  int starts = 16;
  std::uint64_t seed = 0;
  int max_evaluations = 20000;  ///< per start
  double tolerance = 1e-8;      ///< simplex spread, relative to the bound range
  /// Explicit starts, used first. The rest are Halton points in the box.
  std::vector<std::vector<double>> initial_points;
  /// Optional per-dimension override applied to the quasi-random starts.
  std::vector<std::optional<double>> pinned_start;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
  int best_start = 0;
};

/// Multi-start bounded Nelder–Mead. Each start restarts its simplex around
/// the incumbent until a restart no longer improves. The winner is the
/// lowest value, ties broken by start index.
OptimizeResult optimize(const Objective& f, const Bounds& bounds, const OptimizeOptions& options = {});

/// Central-difference Hessian; steps are clipped to stay inside the bounds.
std::vector<std::vector<double>> numerical_hessian(const Objective& f, std::span<const double> x,
                                                   const Bounds& bounds);

/// Square roots of the diagonal of scale·H⁻¹. Entries whose curvature is not
/// positive come back as NaN.
std::vector<double> curvature_errors(const std::vector<std::vector<double>>& hessian, double scale = 1.0);

}  // namespace photonstat
