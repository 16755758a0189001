#include "photonstat/thermal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "photonstat/error.hpp"
#include "photonstat/optimize.hpp"

namespace photonstat {

void ThermalModel::validate() const {
  require(std::isfinite(gamma0) && gamma0 >= 0.0, "thermal: gamma0 must be >= 0");
  require(std::isfinite(alpha) && alpha > 0.0, "thermal: alpha must be > 0");
  require(std::isfinite(gamma_sd) && gamma_sd >= 0.0, "thermal: gamma_sd must be >= 0");
  require(std::isfinite(purcell) && purcell >= 1.0, "thermal: purcell must be >= 1");
}

double bose_occupation(double temperature, double alpha) {
  require(temperature > 0.0, "thermal: temperature must be > 0");
  return 1.0 / std::expm1(alpha / temperature);
}

double phonon_rate(double temperature, const ThermalModel& model) {
  model.validate();
  const double n = bose_occupation(temperature, model.alpha);
  return model.gamma0 * n * (n + 1.0);
}

double tpi_visibility(double temperature, const EmitterParams& params, const ThermalModel& model) {
  params.validate();
  const double radiative = 0.5 / params.t1_a * model.purcell;
  return radiative / (model.gamma_sd + phonon_rate(temperature, model) + radiative);
}

namespace {

struct LinearSolve {
  double gamma0 = 0.0;
  double gamma_sd = 0.0;
};

// In y = Γ·Fp·(1/V - 1) = Γ_SD + γ0·n(n+1) the model is linear in the two
// rates once α is fixed.
LinearSolve solve_rates(std::span<const TemperaturePoint> points, double radiative, double alpha,
                        const ThermalModel& fixed, FreeThermalParameters free) {
  LinearSolve out{fixed.gamma0, fixed.gamma_sd};
  std::vector<int> cols;
  if (free.gamma_sd) cols.push_back(0);
  if (free.gamma0) cols.push_back(1);
  if (cols.empty()) return out;

  Eigen::MatrixXd a(points.size(), cols.size());
  Eigen::VectorXd y(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double n = bose_occupation(points[i].temperature, alpha);
    const double h = n * (n + 1.0);
    double target = radiative * (1.0 / points[i].visibility - 1.0);
    if (!free.gamma_sd) target -= fixed.gamma_sd;
    if (!free.gamma0) target -= fixed.gamma0 * h;
    y(i) = target;
    for (std::size_t c = 0; c < cols.size(); ++c) a(i, c) = cols[c] == 0 ? 1.0 : h;
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(y);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] == 0) out.gamma_sd = x(c);
    else out.gamma0 = x(c);
  }
  return out;
}

double sse(std::span<const TemperaturePoint> points, const EmitterParams& params,
           const ThermalModel& m) {
  double s = 0.0;
  for (const auto& p : points) {
    const double r = tpi_visibility(p.temperature, params, m) - p.visibility;
    s += r * r;
  }
  return s;
}

// Unclamped visibility so the optimiser sees a smooth objective even when a
// trial rate is negative.
double raw_visibility(double temperature, double radiative, double alpha, double gamma0,
                      double gamma_sd) {
  const double n = bose_occupation(temperature, alpha);
  return radiative / (gamma_sd + gamma0 * n * (n + 1.0) + radiative);
}

}  // namespace

ThermalCalibration calibrate_thermal(std::span<const TemperaturePoint> points,
                                     const EmitterParams& params, const ThermalModel& start,
                                     FreeThermalParameters free) {
  params.validate();
  start.validate();
  const int k = free.count();
  require(k >= 1, "calibrate_thermal: at least one parameter must be free");
  require(static_cast<int>(points.size()) >= k,
          "calibrate_thermal: fewer measurement points than free parameters");
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].temperature > 0.0, "calibrate_thermal: temperatures must be > 0");
    require(points[i].visibility > 0.0 && points[i].visibility <= 1.0,
            "calibrate_thermal: visibilities must lie in (0, 1]");
    for (std::size_t j = 0; j < i; ++j) {
      require(points[i].temperature != points[j].temperature,
              "calibrate_thermal: temperatures must be distinct");
    }
  }

  const double radiative = 0.5 / params.t1_a * start.purcell;
  const bool determined = static_cast<int>(points.size()) == k;
  ThermalModel model = start;

  auto residual_sse = [&](double alpha, const LinearSolve& rates) {
    double s = 0.0;
    for (const auto& p : points) {
      const double r =
          raw_visibility(p.temperature, radiative, alpha, rates.gamma0, rates.gamma_sd) - p.visibility;
      s += r * r;
    }
    return s;
  };

  if (!free.alpha) {
    const LinearSolve rates = solve_rates(points, radiative, start.alpha, start, free);
    model.gamma0 = rates.gamma0;
    model.gamma_sd = rates.gamma_sd;
    if (!determined) {
      // Refine in visibility space; the linearised solve weights points unevenly.
      std::vector<double> x0, lo, hi;
      const double scale = std::max({std::abs(rates.gamma0), std::abs(rates.gamma_sd), radiative});
      if (free.gamma_sd) { x0.push_back(rates.gamma_sd); lo.push_back(-10 * scale); hi.push_back(10 * scale); }
      if (free.gamma0) { x0.push_back(rates.gamma0); lo.push_back(-10 * scale); hi.push_back(10 * scale); }
      auto unpack = [&](std::span<const double> x) {
        LinearSolve r = rates;
        std::size_t i = 0;
        if (free.gamma_sd) r.gamma_sd = x[i++];
        if (free.gamma0) r.gamma0 = x[i++];
        return r;
      };
      OptimizeOptions opts;
      opts.starts = 1;
      opts.initial_points = {x0};
      const auto best = optimize([&](std::span<const double> x) { return residual_sse(start.alpha, unpack(x)); },
                                 {lo, hi}, opts);
      const LinearSolve r = unpack(best.x);
      model.gamma0 = r.gamma0;
      model.gamma_sd = r.gamma_sd;
    }
  } else {
    // α enters nonlinearly. For each trial α the rates are solved exactly
    // from all points but the last (determined case) or by least squares.
    const std::span<const TemperaturePoint> head =
        determined ? points.first(points.size() - 1) : points;
    auto rates_for = [&](double alpha) {
      if (head.empty()) return LinearSolve{start.gamma0, start.gamma_sd};
      return solve_rates(head, radiative, alpha, start, free);
    };
    double best_alpha = start.alpha;
    bool solved = false;
    if (determined) {
      const auto& last = points.back();
      auto mismatch = [&](double alpha) {
        const LinearSolve r = rates_for(alpha);
        const double n = bose_occupation(last.temperature, alpha);
        return r.gamma_sd + r.gamma0 * n * (n + 1.0) - radiative * (1.0 / last.visibility - 1.0);
      };
      // Log-spaced scan for a sign change, then bisection.
      double prev_a = 0.1, prev_m = mismatch(prev_a);
      for (int i = 1; i <= 400 && !solved; ++i) {
        const double a = 0.1 * std::pow(10.0, 4.0 * i / 400.0);
        const double m = mismatch(a);
        if (std::isfinite(prev_m) && std::isfinite(m) && prev_m * m <= 0.0) {
          double lo = prev_a, hi = a, mlo = prev_m;
          for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double mm = mismatch(mid);
            if (mlo * mm <= 0.0) hi = mid;
            else { lo = mid; mlo = mm; }
          }
          best_alpha = 0.5 * (lo + hi);
          solved = true;
        }
        prev_a = a;
        prev_m = m;
      }
    }
    if (!solved) {
      OptimizeOptions opts;
      opts.starts = 8;
      opts.initial_points = {{std::log(start.alpha)}};
      const auto best = optimize(
          [&](std::span<const double> x) {
            const double alpha = std::exp(x[0]);
            return residual_sse(alpha, rates_for(alpha));
          },
          {{std::log(0.1)}, {std::log(1000.0)}}, opts);
      best_alpha = std::exp(best.x[0]);
    }
    const LinearSolve r = rates_for(best_alpha);
    model.alpha = best_alpha;
    model.gamma0 = r.gamma0;
    model.gamma_sd = r.gamma_sd;
  }

  ThermalCalibration out;
  if (model.gamma0 < 0.0) { model.gamma0 = 0.0; out.clamped = true; }
  if (model.gamma_sd < 0.0) { model.gamma_sd = 0.0; out.clamped = true; }
  out.model = model;
  for (const auto& p : points) {
    out.max_residual = std::max(out.max_residual,
                                std::abs(tpi_visibility(p.temperature, params, model) - p.visibility));
  }
  (void)sse;
  return out;
}

double correct_visibility_multiphoton(double v_raw, double g2_zero, MultiphotonCorrection convention) {
  require(v_raw >= 0.0 && v_raw <= 1.0, "multiphoton correction: V must lie in [0, 1]");
  require(g2_zero >= 0.0, "multiphoton correction: g2(0) must be >= 0");
  require(g2_zero < 0.5, "multiphoton correction: g2(0) must be < 0.5");
  if (convention == MultiphotonCorrection::multiply) return v_raw * (1.0 + 2.0 * g2_zero);
  return v_raw / (1.0 - 2.0 * g2_zero);
}

double purity_from_g2(double g2_zero) {
  require(g2_zero >= 0.0 && g2_zero <= 1.0, "purity: g2(0) must lie in [0, 1]");
  return 1.0 - 0.5 * g2_zero;
}

}  // namespace photonstat
