#include "photonstat/optimize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "photonstat/error.hpp"
#include "photonstat/parallel.hpp"
#include "photonstat/rng.hpp"

namespace photonstat {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

struct Scaled {
  const Objective& f;
  const Bounds& b;
  mutable std::vector<double> x;
  mutable int evaluations = 0;

  double operator()(const std::vector<double>& y) const {
    for (std::size_t d = 0; d < y.size(); ++d) {
      const double yc = std::clamp(y[d], 0.0, 1.0);
      x[d] = b.lower[d] + (b.upper[d] - b.lower[d]) * yc;
    }
    ++evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }
};

struct Vertex {
  std::vector<double> y;
  double v;
};

// One Nelder–Mead descent in the unit box. Returns the best vertex.
Vertex descend(const Scaled& g, std::vector<double> start, double step, double tol, int budget,
               bool& converged) {
  const std::size_t n = start.size();
  std::vector<Vertex> s;
  s.reserve(n + 1);
  s.push_back({start, g(start)});
  for (std::size_t d = 0; d < n; ++d) {
    auto y = start;
    y[d] += (y[d] + step <= 1.0) ? step : -step;
    s.push_back({y, g(y)});
  }
  auto clamp01 = [](std::vector<double>& y) {
    for (auto& c : y) c = std::clamp(c, 0.0, 1.0);
  };
  converged = false;
  const int stop = g.evaluations + budget;
  while (g.evaluations < stop) {
    std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.v < b.v; });
    double spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) spread = std::max(spread, std::abs(s[i].y[d] - s[0].y[d]));
    if (spread < tol) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += s[i].y[d] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> y(n);
      for (std::size_t d = 0; d < n; ++d) y[d] = centroid[d] + t * (s[n].y[d] - centroid[d]);
      clamp01(y);
      return y;
    };
    auto yr = along(-1.0);
    const double vr = g(yr);
    if (vr < s[0].v) {
      auto ye = along(-2.0);
      const double ve = g(ye);
      s[n] = ve < vr ? Vertex{ye, ve} : Vertex{yr, vr};
      continue;
    }
    if (vr < s[n - 1].v) {
      s[n] = {yr, vr};
      continue;
    }
    const bool outside = vr < s[n].v;
    auto yc = along(outside ? -0.5 : 0.5);
    const double vc = g(yc);
    if (vc < (outside ? vr : s[n].v)) {
      s[n] = {yc, vc};
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d) s[i].y[d] = s[0].y[d] + 0.5 * (s[i].y[d] - s[0].y[d]);
      s[i].v = g(s[i].y);
    }
  }
  std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.v < b.v; });
  return s[0];
}

}  // namespace

OptimizeResult optimize(const Objective& f, const Bounds& bounds, const OptimizeOptions& options) {
  const std::size_t n = bounds.lower.size();
  require(n > 0 && bounds.upper.size() == n, "optimize: bounds must be non-empty and consistent");
  for (std::size_t d = 0; d < n; ++d) {
    require(std::isfinite(bounds.lower[d]) && std::isfinite(bounds.upper[d]) &&
                bounds.lower[d] < bounds.upper[d],
            "optimize: each bound interval must be finite with lower < upper");
  }
  require(options.starts >= 1, "optimize: need at least one start");
  require(n <= std::size(kPrimes), "optimize: too many dimensions");

  const std::size_t total =
      std::max<std::size_t>(static_cast<std::size_t>(options.starts), options.initial_points.size());
  std::vector<std::vector<double>> starts;
  for (const auto& p : options.initial_points) {
    require(p.size() == n, "optimize: initial point has the wrong dimension");
    std::vector<double> y(n);
    for (std::size_t d = 0; d < n; ++d)
      y[d] = std::clamp((p[d] - bounds.lower[d]) / (bounds.upper[d] - bounds.lower[d]), 0.0, 1.0);
    starts.push_back(y);
  }
  // Cranley–Patterson rotation of a Halton sequence, seeded.
  Philox rng(options.seed, streams::tag(streams::kStarts, 0));
  std::vector<double> shift(n);
  for (auto& s : shift) s = rng.uniform();
  for (std::uint64_t i = 1; starts.size() < total; ++i) {
    std::vector<double> y(n);
    for (std::size_t d = 0; d < n; ++d) {
      y[d] = std::fmod(radical_inverse(i, kPrimes[d]) + shift[d], 1.0);
      if (d < options.pinned_start.size() && options.pinned_start[d]) {
        y[d] = std::clamp((*options.pinned_start[d] - bounds.lower[d]) / (bounds.upper[d] - bounds.lower[d]),
                          0.0, 1.0);
      }
    }
    starts.push_back(y);
  }

  struct StartResult {
    Vertex best;
    int evaluations = 0;
    bool converged = false;
  };
  std::vector<StartResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Scaled g{f, bounds, std::vector<double>(n)};
    bool conv = false;
    Vertex best = descend(g, starts[i], 0.05, options.tolerance, options.max_evaluations, conv);
    // Restart around the incumbent; stops once a restart does not improve.
    for (int r = 0; r < 8 && g.evaluations < options.max_evaluations; ++r) {
      bool c2 = false;
      Vertex again = descend(g, best.y, 1e-3, options.tolerance, options.max_evaluations - g.evaluations, c2);
      const bool improved = again.v < best.v - 1e-12 * std::abs(best.v);
      if (again.v <= best.v) best = again;
      conv = c2;
      if (!improved) break;
    }
    results[i] = {best, g.evaluations, conv};
  });

  OptimizeResult out;
  double best_v = std::numeric_limits<double>::infinity();
  int best_i = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.evaluations += results[i].evaluations;
    if (results[i].best.v < best_v) {
      best_v = results[i].best.v;
      best_i = static_cast<int>(i);
    }
  }
  if (best_i < 0) throw NumericalError("optimize: objective is non-finite at every start");
  out.best_start = best_i;
  out.value = best_v;
  out.converged = results[best_i].converged;
  out.x.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    out.x[d] = bounds.lower[d] +
               (bounds.upper[d] - bounds.lower[d]) * std::clamp(results[best_i].best.y[d], 0.0, 1.0);
  }
  return out;
}

std::vector<std::vector<double>> numerical_hessian(const Objective& f, std::span<const double> x0,
                                                   const Bounds& bounds) {
  const std::size_t n = x0.size();
  std::vector<double> h(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double range = bounds.upper[d] - bounds.lower[d];
    h[d] = std::min(std::max(1e-4 * std::abs(x0[d]), 1e-7 * range), 0.25 * range);
  }
  // Shift the centre inward where a step would leave the box.
  std::vector<double> centre(x0.begin(), x0.end());
  for (std::size_t d = 0; d < n; ++d)
    centre[d] = std::clamp(centre[d], bounds.lower[d] + h[d], bounds.upper[d] - h[d]);
  x0 = centre;
  std::vector<double> x(x0.begin(), x0.end());
  auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
    x.assign(x0.begin(), x0.end());
    x[i] += si * h[i];
    x[j] += sj * h[j];
    return f(x);
  };
  const double f0 = f(std::vector<double>(x0.begin(), x0.end()));
  std::vector<std::vector<double>> hess(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    x.assign(x0.begin(), x0.end());
    x[i] += h[i];
    const double fp = f(x);
    x[i] -= 2 * h[i];
    const double fm = f(x);
    hess[i][i] = (fp - 2 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i; ++j) {
      const double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
                       (4 * h[i] * h[j]);
      hess[i][j] = hess[j][i] = v;
    }
  }
  return hess;
}

std::vector<double> curvature_errors(const std::vector<std::vector<double>>& hessian, double scale) {
  const std::size_t n = hessian.size();
  Eigen::MatrixXd h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = hessian[i][j];
  std::vector<double> err(n, std::numeric_limits<double>::quiet_NaN());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
  if (!lu.isInvertible()) return err;
  const Eigen::MatrixXd cov = lu.inverse();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = scale * cov(i, i);
    if (std::isfinite(v) && v > 0.0) err[i] = std::sqrt(v);
  }
  return err;
}

}  // namespace photonstat
