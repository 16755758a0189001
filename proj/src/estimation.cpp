#include "photonstat/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "photonstat/error.hpp"
#include "photonstat/optimize.hpp"
#include "photonstat/units.hpp"

namespace photonstat {

double FitResult::value(const std::string& name) const {
  const auto it = parameters.find(name);
  require(it != parameters.end(), "fit result has no parameter '" + name + "'");
  return it->second.value;
}

double FitResult::error(const std::string& name) const {
  const auto it = parameters.find(name);
  require(it != parameters.end(), "fit result has no parameter '" + name + "'");
  return it->second.error;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Σ μ - n + n log(n/μ): the Poisson negative log-likelihood shifted so a
// perfect model scores 0.
double poisson_deviance(std::span<const double> model, std::span<const double> data) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double mu = model[i], n = data[i];
    if (!(mu > 0.0)) {
      if (n > 0.0 || mu < 0.0) return kInf;
      continue;
    }
    s += mu - n;
    if (n > 0.0) s += n * std::log(n / mu);
  }
  return s;
}

// Neyman χ² with σ² = n. Empty bins borrow the smallest positive count so
// the statistic scales linearly with the data (point estimates are then
// invariant under rescaling).
double neyman_chi2(std::span<const double> model, std::span<const double> data) {
  double floor = std::numeric_limits<double>::infinity();
  for (double n : data)
    if (n > 0.0) floor = std::min(floor, n);
  if (!std::isfinite(floor)) floor = 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data[i] - model[i];
    s += r * r / std::max(data[i], floor);
  }
  return s;
}

double histogram_objective(FitStatistic stat, std::span<const double> model, std::span<const double> data) {
  return stat == FitStatistic::poisson ? poisson_deviance(model, data) : neyman_chi2(model, data);
}

struct Problem {
  std::string model;
  std::vector<std::string> names;
  Bounds bounds;
  Objective objective;
  std::vector<std::vector<double>> initial;
  std::vector<std::optional<double>> pinned;
  std::string statistic;
  std::size_t n_points = 0;
};

// Hessian → covariance scale: NLL 1, χ² 2, SSE with σ² estimated from the
// residuals 2·SSE/dof.
double error_scale(const Problem& p, double objective) {
  if (p.statistic == "poisson") return 1.0;
  if (p.statistic == "chi2") return 2.0;
  const double dof = static_cast<double>(p.n_points) - static_cast<double>(p.names.size());
  return dof > 0.0 ? 2.0 * objective / dof : std::numeric_limits<double>::quiet_NaN();
}

FitResult run(const Problem& p, const FitOptions& options) {
  OptimizeOptions opt;
  opt.starts = options.starts;
  opt.seed = options.seed;
  opt.initial_points = p.initial;
  opt.pinned_start = p.pinned;
  const OptimizeResult best = optimize(p.objective, p.bounds, opt);
  if (!std::isfinite(best.value)) throw NumericalError(p.model + ": objective is not finite at the optimum");

  FitResult r;
  r.model = p.model;
  r.statistic = p.statistic;
  r.free_parameters = p.names;
  r.objective = best.value;
  r.n_points = p.n_points;
  r.evaluations = best.evaluations;
  r.starts = std::max<int>(options.starts, static_cast<int>(p.initial.size()));
  r.seed = options.seed;
  r.converged = best.converged;
  const auto hess = numerical_hessian(p.objective, best.x, p.bounds);
  const auto err = curvature_errors(hess, error_scale(p, best.value));
  for (std::size_t i = 0; i < p.names.size(); ++i) r.parameters[p.names[i]] = {best.x[i], err[i]};
  return r;
}

void require_same_shape(const Histogram& a, const Histogram& b, const std::string& who) {
  require(a.shape == b.shape, who + ": histograms must share the same binning");
}

double pre_pulse_level(const Histogram& h) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.shape.center(i) < -0.1) {
      s += h.counts[i];
      ++n;
    }
  }
  if (n > 0) return s / static_cast<double>(n);
  return *std::min_element(h.counts.begin(), h.counts.end());
}

}  // namespace

FitResult fit_trpl(const Histogram& data, const IrfModel& irf, const EmitterParams& start,
                   const TrplFitOptions& options) {
  data.validate();
  irf.validate();
  start.validate();
  const double total = data.total();
  require(total > 0.0, "fit_trpl: histogram is empty");

  const double bg0 = options.fit_background ? pre_pulse_level(data) : 0.0;
  const double amp0 = std::max(total - bg0 * static_cast<double>(data.bins()), 0.1 * total);
  const double nyquist = units::kPi * units::kHbar / data.shape.bin_width;  // Δ whose beat period is 2 bins
  const double delta_hi = std::min(50.0, 0.9 * nyquist);
  const double t1_lo = 0.05, t1_hi = 5.0;

  Problem p;
  p.model = "trpl";
  p.statistic = options.statistic == FitStatistic::poisson ? "poisson" : "chi2";
  p.n_points = data.bins();
  std::vector<double> x0;
  auto add = [&](const std::string& name, double lo, double hi, double init, std::optional<double> pin) {
    p.names.push_back(name);
    p.bounds.lower.push_back(lo);
    p.bounds.upper.push_back(hi);
    x0.push_back(std::clamp(init, lo, hi));
    p.pinned.push_back(pin);
  };
  if (options.equal_lifetimes) {
    add("t1", t1_lo, t1_hi, start.t1_a, std::nullopt);
  } else {
    add("t1_a", t1_lo, t1_hi, start.t1_a, std::nullopt);
    add("t1_b", t1_lo, t1_hi, start.t1_b, std::nullopt);
  }
  add("delta", 0.5, delta_hi, start.delta, std::nullopt);
  // Bounds proportional to the data keep chi-square fits scale-invariant.
  add("amplitude", 0.0, 5.0 * total, amp0, amp0);
  if (options.fit_background) {
    const double maxc = *std::max_element(data.counts.begin(), data.counts.end());
    add("background", 0.0, maxc, bg0, bg0);
  }
  p.initial = {x0};

  const bool equal = options.equal_lifetimes;
  const bool with_bg = options.fit_background;
  const FitStatistic stat = options.statistic;
  // Starts may run concurrently, so the model buffer is per call.
  p.objective = [&, equal, with_bg, stat](std::span<const double> x) {
    std::vector<double> local(data.bins());
    EmitterParams e = start;
    std::size_t i = 0;
    e.t1_a = x[i++];
    e.t1_b = equal ? e.t1_a : x[i++];
    e.delta = x[i++];
    const double amp = x[i++];
    const double bg = with_bg ? x[i++] : 0.0;
    const Histogram shape = trpl_histogram_model(e, irf, data.shape);
    const double norm = cumulative_intensity(e.integration_horizon(), e);
    if (!(norm > 0.0)) return kInf;
    for (std::size_t k = 0; k < local.size(); ++k) local[k] = amp * shape.counts[k] / norm + bg;
    return histogram_objective(stat, local, data.counts);
  };
  FitResult r = run(p, options);
  if (!equal) {
    r.parameters["t1"] = r.parameters["t1_a"];
  }
  return r;
}

FitResult fit_fringe(std::span<const FringePoint> data, const EmitterParams& params, const FitOptions& options) {
  params.validate();
  require(data.size() >= 3, "fit_fringe: need at least three points");
  double cmin = data[0].contrast, cmax = data[0].contrast;
  for (const auto& d : data) {
    require(std::isfinite(d.tau) && d.tau >= 0.0, "fit_fringe: delays must be >= 0");
    require(std::isfinite(d.contrast), "fit_fringe: non-finite contrast");
    cmin = std::min(cmin, d.contrast);
    cmax = std::max(cmax, d.contrast);
  }
  require(cmax > cmin, "fit_fringe: contrast is constant, T2* is not identifiable");

  // The overlap bracket does not depend on T2*; only the e^{-τ/T2*} factor does.
  EmitterParams coherent = params;
  coherent.t2_star = std::numeric_limits<double>::infinity();
  std::vector<double> base(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) base[i] = fringe_contrast(data[i].tau, coherent);

  Problem p;
  p.model = "fringe";
  p.statistic = "sse";
  p.n_points = data.size();
  p.names = {"t2_star"};
  p.bounds = {{0.005}, {50.0}};
  p.initial = {{std::clamp(params.t2_star, 0.005, 50.0)}};
  p.objective = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double r = base[i] * std::exp(-data[i].tau / x[0]) - data[i].contrast;
      s += r * r;
    }
    return s;
  };
  FitResult r = run(p, options);
  EmitterParams fitted = params;
  fitted.t2_star = r.value("t2_star");
  const double t2 = coherence_time(fitted);
  const double dt2 = t2 * t2 / (fitted.t2_star * fitted.t2_star) * r.error("t2_star");
  r.parameters["t2"] = {t2, dt2};
  return r;
}

FitResult fit_hom(const Histogram& h_par, const Histogram& h_perp, const IrfModel& irf,
                  const EmitterParams& params, const HomFitOptions& options) {
  h_par.validate();
  h_perp.validate();
  require_same_shape(h_par, h_perp, "fit_hom");
  params.validate();
  irf.validate();
  const double tot_perp = h_perp.total();
  const double tot_par = h_par.total();
  require(tot_perp > 0.0, "fit_hom: cross-polarised histogram is empty");

  const HomModelGrid grid(params, irf, h_perp.shape);
  const Histogram& perp = grid.perpendicular();
  const double perp_norm = perp.total();
  require(perp_norm > 0.0, "fit_hom: model has no weight inside the histogram window");

  Problem p;
  p.model = "hom";
  p.statistic = options.statistic == FitStatistic::poisson ? "poisson" : "chi2";
  p.n_points = 2 * h_perp.bins();
  std::vector<double> x0;
  auto add = [&](const std::string& name, double lo, double hi, double init, std::optional<double> pin) {
    p.names.push_back(name);
    p.bounds.lower.push_back(lo);
    p.bounds.upper.push_back(hi);
    x0.push_back(std::clamp(init, lo, hi));
    p.pinned.push_back(pin);
  };
  add("t2_star", 0.01, 20.0, std::isfinite(params.t2_star) ? params.t2_star : 1.0, std::nullopt);
  const double amp_hi = 5.0 * std::max(tot_perp, tot_par);
  if (options.shared_amplitude) {
    add("amplitude", 0.0, amp_hi, tot_perp, tot_perp);
  } else {
    add("amplitude_par", 0.0, amp_hi, tot_perp, tot_perp);
    add("amplitude_perp", 0.0, amp_hi, tot_perp, tot_perp);
  }
  if (options.fit_background) {
    const double mp = *std::max_element(h_par.counts.begin(), h_par.counts.end());
    const double mq = *std::max_element(h_perp.counts.begin(), h_perp.counts.end());
    add("background_par", 0.0, std::max(mp, 1e-300), 0.0, 0.0);
    add("background_perp", 0.0, mq, 0.0, 0.0);
  }
  p.initial = {x0};

  const bool shared = options.shared_amplitude;
  const bool with_bg = options.fit_background;
  const FitStatistic stat = options.statistic;
  p.objective = [&, shared, with_bg, stat](std::span<const double> x) {
    std::size_t i = 0;
    const double t2s = x[i++];
    const double a_par = x[i++];
    const double a_perp = shared ? a_par : x[i++];
    const double b_par = with_bg ? x[i++] : 0.0;
    const double b_perp = with_bg ? x[i++] : 0.0;
    const Histogram par = grid.parallel(t2s);
    std::vector<double> m(par.bins());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = a_par * par.counts[k] / perp_norm + b_par;
    double s = histogram_objective(stat, m, h_par.counts);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = a_perp * perp.counts[k] / perp_norm + b_perp;
    s += histogram_objective(stat, m, h_perp.counts);
    return s;
  };
  FitResult r = run(p, options);

  const Histogram par = grid.parallel(r.value("t2_star"));
  const double cpar = par.sum_centers_in(-1.0, 1.0);
  const double cperp = perp.sum_centers_in(-1.0, 1.0);
  if (cperp > 0.0) r.parameters["visibility"] = {1.0 - cpar / cperp, std::numeric_limits<double>::quiet_NaN()};
  return r;
}

G2Estimate extract_g2_zero(const Histogram& h, const PulseTrainSpec& train, G2Method method,
                           const IrfModel& irf, const FitOptions& options) {
  h.validate();
  train.validate();
  const double T = train.period;
  auto window_sum = [&](int m) -> std::optional<double> {
    const double lo = m * T - 0.5 * T, hi = m * T + 0.5 * T;
    if (lo < h.shape.t_min - 1e-9 * T || hi > h.shape.t_max + 1e-9 * T) return std::nullopt;
    double s = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
      const double c = h.shape.center(i);
      if (c >= lo && c < hi) s += h.counts[i];
    }
    return s;
  };

  const auto central = window_sum(0);
  require(central.has_value(), "extract_g2_zero: central peak window lies outside the histogram");
  double side_sum = 0.0;
  int n_side = 0;
  for (int m = 1; m <= 1000; ++m) {
    const auto a = window_sum(m), b = window_sum(-m);
    if (!a && !b) break;
    if (a) { side_sum += *a; ++n_side; }
    if (b) { side_sum += *b; ++n_side; }
  }
  require(n_side >= 2, "extract_g2_zero: fewer than two side peaks inside the histogram");
  require(side_sum > 0.0, "extract_g2_zero: side peaks are empty");
  const double side_mean = side_sum / n_side;

  G2Estimate out;
  out.value = *central / side_mean;
  out.std_error = std::sqrt(std::max(*central, 1.0) / (side_mean * side_mean) +
                            out.value * out.value / side_sum);
  if (method == G2Method::area_ratio) return out;

  irf.validate();
  PulseTrainSpec model_train = train;
  Problem p;
  p.model = "hbt";
  p.statistic = options.statistic == FitStatistic::poisson ? "poisson" : "chi2";
  p.n_points = h.bins();
  p.names = {"g2_zero", "tau_qd", "amplitude"};
  p.bounds = {{0.0, 0.01, 0.0}, {2.0, 0.25 * T, 10.0 * side_mean}};
  p.initial = {{std::clamp(out.value, 0.0, 2.0), std::min(1.0, 0.1 * T), side_mean}};
  p.pinned = {std::nullopt, std::nullopt, side_mean};
  const FitStatistic stat = options.statistic;
  p.objective = [&, stat](std::span<const double> x) {
    const Histogram m = hbt_histogram_model(x[0], x[1], model_train, irf, h.shape);
    std::vector<double> mu(m.bins());
    for (std::size_t k = 0; k < mu.size(); ++k) mu[k] = x[2] * m.counts[k];
    return histogram_objective(stat, mu, h.counts);
  };
  FitResult r = run(p, options);
  out.value = r.value("g2_zero");
  out.std_error = r.error("g2_zero");
  out.tau_qd = r.value("tau_qd");
  out.fit = std::move(r);
  return out;
}

FitResult fit_rabi(std::span<const RabiPoint> data, const RabiFitOptions& options) {
  require(data.size() >= 5, "fit_rabi: need at least five points");
  double xmax = 0.0, ymin = data[0].intensity, ymax = data[0].intensity;
  for (const auto& d : data) {
    require(std::isfinite(d.sqrt_power) && d.sqrt_power >= 0.0, "fit_rabi: √P must be >= 0");
    require(std::isfinite(d.intensity), "fit_rabi: non-finite intensity");
    xmax = std::max(xmax, d.sqrt_power);
    ymin = std::min(ymin, d.intensity);
    ymax = std::max(ymax, d.intensity);
  }
  require(xmax > 0.0, "fit_rabi: all powers are zero");
  require(ymax > ymin, "fit_rabi: intensity is constant");
  const double range = ymax - ymin;
  // sin²(kx) sampled on a grid with spacing h is identical at k and k + π/h.
  std::vector<double> xs;
  for (const auto& d : data) xs.push_back(d.sqrt_power);
  std::sort(xs.begin(), xs.end());
  double h = xmax;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] - xs[i - 1] > 1e-12 * xmax) h = std::min(h, xs[i] - xs[i - 1]);
  const double k_hi = std::min(20.0 * units::kPi / xmax, 0.5 * units::kPi / h);

  Problem p;
  p.model = "rabi";
  p.statistic = "sse";
  p.n_points = data.size();
  p.names = {"amplitude", "k", "offset"};
  p.bounds = {{0.0, units::kPi / (16.0 * xmax), ymin - range}, {4.0 * range, k_hi, ymax}};
  if (options.damping) {
    p.names.push_back("beta");
    p.bounds.lower.push_back(0.0);
    p.bounds.upper.push_back(5.0 / xmax);
  }
  p.pinned = {range, std::nullopt, ymin, std::nullopt};
  p.pinned.resize(p.names.size());
  const bool damping = options.damping;
  p.objective = [&, damping](std::span<const double> x) {
    double s = 0.0;
    for (const auto& d : data) {
      const double beta = damping ? x[3] : 0.0;
      const double m = x[0] * damped_rabi_population(x[1] * d.sqrt_power, d.sqrt_power, beta) + x[2];
      s += (m - d.intensity) * (m - d.intensity);
    }
    return s;
  };
  FitResult r = run(p, options);
  const double k = r.value("k");
  const double ppi = std::pow(units::kPi / (2.0 * k), 2);
  r.parameters["p_pi"] = {ppi, 2.0 * ppi / k * r.error("k")};
  r.low_confidence = k * xmax < 0.5 * units::kPi;
  return r;
}

void EfficiencyBudget::validate() const {
  require(std::isfinite(detected_rate) && detected_rate >= 0.0, "budget: detected rate must be >= 0");
  require(setup_efficiency > 0.0 && setup_efficiency <= 1.0, "budget: setup efficiency must lie in (0, 1]");
  require(collection_efficiency > 0.0 && collection_efficiency <= 1.0,
          "budget: collection efficiency must lie in (0, 1]");
  require(std::isfinite(rep_rate) && rep_rate > 0.0, "budget: repetition rate must be > 0");
}

double internal_quantum_efficiency(const EfficiencyBudget& b) {
  b.validate();
  return b.detected_rate / (b.setup_efficiency * b.collection_efficiency * b.rep_rate);
}

}  // namespace photonstat
