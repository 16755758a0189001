#include "photonstat/interferometry.hpp"

#include <algorithm>
#include <cmath>

#include "photonstat/error.hpp"
#include "photonstat/quadrature.hpp"
#include "photonstat/units.hpp"

namespace photonstat {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2√(2 ln 2))

double intensity_or_zero(double t, const EmitterParams& p) {
  return t < 0.0 ? 0.0 : time_resolved_intensity(t, p);
}

// Second antiderivative of the gaussian pdf: Ψ(u) = u Φ(u/σ) + σ φ(u/σ).
double gaussian_psi(double u, double sigma) {
  const double z = u / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * units::kPi);
  return u * cdf + sigma * pdf;
}

// Transfer weights between cells of width h when mass is uniform inside
// each source cell: w_k = [Ψ((k+1)h) - 2Ψ(kh) + Ψ((k-1)h)] / h.
std::vector<double> gaussian_cell_kernel(double sigma, double h, std::size_t& half_width) {
  half_width = static_cast<std::size_t>(std::ceil(6.0 * sigma / h)) + 1;
  std::vector<double> w(2 * half_width + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double k = static_cast<double>(i) - static_cast<double>(half_width);
    w[i] = (gaussian_psi((k + 1.0) * h, sigma) - 2.0 * gaussian_psi(k * h, sigma) +
            gaussian_psi((k - 1.0) * h, sigma)) /
           h;
    w[i] = std::max(w[i], 0.0);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

// Fits rebuild the same kernel thousands of times; keep the last one per thread.
const std::vector<double>& cached_cell_kernel(double sigma, double h, std::size_t& half_width) {
  thread_local double last_sigma = -1.0, last_h = -1.0;
  thread_local std::size_t last_hw = 0;
  thread_local std::vector<double> kernel;
  if (sigma != last_sigma || h != last_h) {
    kernel = gaussian_cell_kernel(sigma, h, last_hw);
    last_sigma = sigma;
    last_h = h;
  }
  half_width = last_hw;
  return kernel;
}

// Scatter form: each source cell spreads its mass over the kernel taps.
// The inner loop has no reduction, so it vectorises.
std::vector<double> convolve(const std::vector<double>& in, const std::vector<double>& kernel,
                             std::size_t half_width) {
  const std::size_t n = in.size();
  const std::size_t taps = kernel.size();
  std::vector<double> wide(n + 2 * half_width, 0.0);
  for (std::size_t src = 0; src < n; ++src) {
    const double v = in[src];
    if (v == 0.0) continue;
    double* out = wide.data() + src;
    for (std::size_t k = 0; k < taps; ++k) out[k] += v * kernel[k];
  }
  return {wide.begin() + static_cast<std::ptrdiff_t>(half_width),
          wide.begin() + static_cast<std::ptrdiff_t>(half_width + n)};
}

struct FineGrid {
  double origin = 0.0;
  double step = 0.0;
  std::size_t per_bin = 1;
  std::size_t pad = 0;
  std::size_t total = 0;

  double edge(std::size_t j) const { return origin + step * static_cast<double>(j); }
};

FineGrid make_fine_grid(const HistogramShape& shape, const IrfModel& irf, int fine_factor) {
  shape.validate();
  irf.validate();
  require(fine_factor >= 1, "fold: fine_factor must be >= 1");
  FineGrid g;
  g.per_bin = static_cast<std::size_t>(fine_factor);
  if (!irf.is_delta()) {
    const double sigma = irf.sigma_ns();
    const auto needed = static_cast<std::size_t>(std::ceil(shape.bin_width / (0.25 * sigma)));
    g.per_bin = std::max(g.per_bin, needed);
  }
  g.step = shape.bin_width / static_cast<double>(g.per_bin);
  g.pad = irf.is_delta() ? 0 : static_cast<std::size_t>(std::ceil(6.0 * irf.sigma_ns() / g.step));
  g.origin = shape.t_min - g.step * static_cast<double>(g.pad);
  g.total = shape.bins() * g.per_bin + 2 * g.pad;
  return g;
}

Histogram bin_fine_masses(const HistogramShape& shape, const IrfModel& irf, const FineGrid& g,
                          std::vector<double> masses) {
  if (!irf.is_delta()) {
    std::size_t hw = 0;
    const auto& kernel = cached_cell_kernel(irf.sigma_ns(), g.step, hw);
    masses = convolve(masses, kernel, hw);
  }
  Histogram h = Histogram::zeros(shape);
  for (std::size_t i = 0; i < h.bins(); ++i) {
    double acc = 0.0;
    const std::size_t first = g.pad + i * g.per_bin;
    for (std::size_t j = first; j < first + g.per_bin; ++j) acc += masses[j];
    h.counts[i] = std::max(acc, 0.0);
  }
  return h;
}

// Laplace CDF; beyond 40 scale lengths the tail (< 1e-17) is dropped.
double laplace_cdf(double x, double center, double scale) {
  const double z = (x - center) / scale;
  if (z < -40.0) return 0.0;
  if (z > 40.0) return 1.0;
  return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

// Same as fold_model, with cell masses taken as differences of a
// cumulative function evaluated once per edge.
Histogram fold_cumulative(const HistogramShape& shape, const IrfModel& irf,
                          const std::function<double(double)>& cumulative, int fine_factor = 5) {
  const FineGrid g = make_fine_grid(shape, irf, fine_factor);
  std::vector<double> masses(g.total);
  double prev = cumulative(g.edge(0));
  for (std::size_t j = 0; j < g.total; ++j) {
    const double next = cumulative(g.edge(j + 1));
    masses[j] = next - prev;
    prev = next;
  }
  return bin_fine_masses(shape, irf, g, std::move(masses));
}

}  // namespace

void IrfModel::validate() const {
  if (shape == Shape::gaussian) {
    require(std::isfinite(fwhm) && fwhm > 0.0, "irf: gaussian fwhm must be > 0");
  }
}

double IrfModel::sigma_ns() const { return is_delta() ? 0.0 : fwhm * 1e-3 * kFwhmToSigma; }

IrfModel IrfModel::coincidence() const {
  if (is_delta()) return *this;
  return gaussian(fwhm * std::sqrt(2.0));
}

void PulseTrainSpec::validate() const {
  require(std::isfinite(period) && period > 0.0, "pulse train: period must be > 0");
  require(double_pulse_delay >= 0.0 && double_pulse_delay < period,
          "pulse train: double_pulse_delay must lie in [0, period)");
  require(n_side_peaks >= 1, "pulse train: n_side_peaks must be >= 1");
}

double fringe_contrast(double tau_d, const EmitterParams& params) {
  params.validate();
  require(tau_d >= 0.0, "fringe_contrast: tau_d must be >= 0");
  const double dephasing = std::exp(-tau_d / params.t2_star);
  const double horizon = params.integration_horizon();

  if (params.equal_lifetimes()) {
    const double t1 = params.t1_a;
    if (params.delta == 0.0) {
      // Degenerate levels: single-exponential wavepacket e^{-t/2T1}.
      return std::exp(-0.5 * tau_d / t1) * dephasing;
    }
    const double w = params.beat_frequency();
    auto overlap = [&](double tau) {
      return integrate(
          [&](double t) {
            return std::exp(-t / t1) * std::sin(0.5 * w * t) * std::sin(0.5 * w * (t + tau));
          },
          0.0, horizon);
    };
    const double ratio = std::abs(overlap(tau_d)) / overlap(0.0);
    return std::clamp(ratio * std::exp(-0.5 * tau_d / t1) * dephasing, 0.0, 1.0);
  }

  auto component = [&](double tau, bool real) {
    return integrate(
        [&](double t) {
          const auto v = wavepacket_envelope(t, params) * std::conj(wavepacket_envelope(t + tau, params));
          return real ? v.real() : v.imag();
        },
        0.0, horizon);
  };
  const double norm = component(0.0, true);
  const double magnitude = std::hypot(component(tau_d, true), component(tau_d, false));
  return std::clamp(magnitude / norm * dephasing, 0.0, 1.0);
}

double coherence_time(const EmitterParams& params) {
  params.validate();
  return 1.0 / (0.5 / params.t1_a + 1.0 / params.t2_star);
}

double hom_g2_perp(double tau, const EmitterParams& params) {
  params.validate();
  const double a = std::abs(tau);
  require(std::isfinite(a), "hom_g2: tau must be finite");
  const double horizon = params.integration_horizon();
  if (params.equal_lifetimes()) {
    const double t1 = params.t1_a;
    const double w = params.beat_frequency();
    const double integral = integrate(
        [&](double t) {
          const double s1 = std::sin(0.5 * w * t);
          const double s2 = std::sin(0.5 * w * (t + a));
          return std::exp(-2.0 * t / t1) * s1 * s1 * s2 * s2;
        },
        0.0, horizon);
    return integral * std::exp(-a / t1);
  }
  return integrate(
             [&](double t) {
               return time_resolved_intensity(t, params) * time_resolved_intensity(t + a, params);
             },
             0.0, horizon) /
         16.0;
}

double hom_g2_parallel(double tau, const EmitterParams& params) {
  const double a = std::abs(tau);
  const double bracket = -std::expm1(-2.0 * a / params.t2_star);
  if (bracket == 0.0) return 0.0;
  return hom_g2_perp(tau, params) * bracket;
}

double hom_model_visibility(const EmitterParams& params, double lo, double hi) {
  params.validate();
  require(lo < hi, "hom_model_visibility: need lo < hi");
  // Both densities have a kink at τ = 0.
  auto over = [&](const std::function<double(double)>& f) {
    if (lo >= 0.0 || hi <= 0.0) return integrate(f, lo, hi);
    return integrate(f, lo, 0.0) + integrate(f, 0.0, hi);
  };
  const double perp = over([&](double t) { return hom_g2_perp(t, params); });
  require(perp > 0.0, "hom_model_visibility: empty window");
  return 1.0 - over([&](double t) { return hom_g2_parallel(t, params); }) / perp;
}

HomMapTerms hom_two_time_terms(double t1, double t2, const EmitterParams& params,
                               const PulseTrainSpec& train) {
  params.validate();
  train.validate();
  require(std::isfinite(t1) && std::isfinite(t2), "hom_two_time_map: times must be finite");
  const double dt = train.double_pulse_delay;
  auto i = [&](double t) { return intensity_or_zero(t, params); };

  HomMapTerms terms;
  terms.distinguishable = i(t1 - dt) * i(t2 - 2 * dt) + i(t2 - dt) * i(t1 - 2 * dt) +
                          i(t1) * i(t2 - 2 * dt) + i(t2) * i(t1 - 2 * dt) + i(t1) * i(t2 - dt) +
                          i(t2) * i(t1 - dt);
  const double bracket = -2.0 * std::expm1(-2.0 * std::abs(t1 - t2) / params.t2_star);
  terms.interference = i(t1 - dt) * i(t2 - dt) * bracket;
  return terms;
}

double hom_two_time_map(double t1, double t2, const EmitterParams& params,
                        const PulseTrainSpec& train) {
  return hom_two_time_terms(t1, t2, params, train).total();
}

Histogram fold_model(const HistogramShape& shape, const IrfModel& irf, const MassFunction& mass,
                     int fine_factor) {
  const FineGrid g = make_fine_grid(shape, irf, fine_factor);
  std::vector<double> masses(g.total);
  for (std::size_t j = 0; j < g.total; ++j) masses[j] = mass(g.edge(j), g.edge(j + 1));
  return bin_fine_masses(shape, irf, g, std::move(masses));
}

Histogram fold_density(const HistogramShape& shape, const IrfModel& irf,
                       const std::function<double(double)>& density, int fine_factor) {
  return fold_model(
      shape, irf,
      [&](double a, double b) {
        return (b - a) / 6.0 * (density(a) + 4.0 * density(0.5 * (a + b)) + density(b));
      },
      fine_factor);
}

Histogram hbt_histogram_model(double g2_zero, double tau_qd, const PulseTrainSpec& train,
                              const IrfModel& irf, const HistogramShape& shape) {
  require(std::isfinite(g2_zero) && g2_zero >= 0.0, "hbt model: g2_zero must be >= 0");
  require(std::isfinite(tau_qd) && tau_qd > 0.0, "hbt model: tau_qd must be > 0");
  train.validate();
  shape.validate();

  bool has_side_peak = false;
  for (int m = -train.n_side_peaks; m <= train.n_side_peaks; ++m) {
    const double c = m * train.period;
    if (m != 0 && c >= shape.t_min && c < shape.t_max) has_side_peak = true;
  }
  require(has_side_peak, "hbt model: window contains no side peak");

  // Cell masses of each Laplace peak. On a uniform grid the tail masses
  // form a geometric sequence, so only the cell holding the centre needs
  // the CDF; the rest are multiplications walking outward.
  const FineGrid g = make_fine_grid(shape, irf, 5);
  std::vector<double> masses(g.total, 0.0);
  const double ratio = std::exp(-g.step / tau_qd);
  const double edge_factor = 0.5 * -std::expm1(-g.step / tau_qd);
  for (int m = -train.n_side_peaks; m <= train.n_side_peaks; ++m) {
    const double weight = (m == 0) ? g2_zero : 1.0;
    if (weight == 0.0) continue;
    const double c = m * train.period;
    const double pos = (c - g.origin) / g.step;
    const auto jc = static_cast<std::ptrdiff_t>(std::floor(pos));
    const auto total = static_cast<std::ptrdiff_t>(g.total);
    if (jc >= 0 && jc < total) {
      masses[jc] += weight * (laplace_cdf(g.edge(jc + 1), c, tau_qd) - laplace_cdf(g.edge(jc), c, tau_qd));
    }
    // Right tail: cell j = jc + k has mass 0.5 e^{-(a_j - c)/τ}(1 - e^{-h/τ}).
    double v = weight * edge_factor * std::exp(-(g.edge(jc + 1) - c) / tau_qd);
    for (std::ptrdiff_t j = jc + 1; j < total && v > 1e-20 * weight; ++j, v *= ratio) {
      if (j >= 0) masses[j] += v;
    }
    // Left tail mirrors it.
    v = weight * edge_factor * std::exp(-(c - g.edge(jc)) / tau_qd);
    for (std::ptrdiff_t j = jc - 1; j >= 0 && v > 1e-20 * weight; --j, v *= ratio) {
      if (j < total) masses[j] += v;
    }
  }
  return bin_fine_masses(shape, irf, g, std::move(masses));
}

Histogram trpl_histogram_model(const EmitterParams& params, const IrfModel& irf,
                               const HistogramShape& shape) {
  params.validate();
  return fold_cumulative(shape, irf, [&](double x) { return x <= 0.0 ? 0.0 : cumulative_intensity(x, params); });
}

HomModelGrid::HomModelGrid(const EmitterParams& params, const IrfModel& irf,
                           const HistogramShape& shape, int fine_factor)
    : shape_(shape), irf_(irf) {
  params.validate();
  const FineGrid g = make_fine_grid(shape, irf, fine_factor);
  fine_step_ = g.step;
  fine_origin_ = g.origin;
  fine_bins_ = g.total;
  fine_per_bin_ = g.per_bin;
  pad_bins_ = g.pad;
  perp_nodes_.resize(2 * g.total + 1);
  abs_tau_nodes_.resize(2 * g.total + 1);
  for (std::size_t k = 0; k < perp_nodes_.size(); ++k) {
    const double tau = g.origin + 0.5 * g.step * static_cast<double>(k);
    abs_tau_nodes_[k] = std::abs(tau);
    perp_nodes_[k] = hom_g2_perp(tau, params);
  }
  std::vector<double> perp(fine_bins_);
  const double w = fine_step_ / 6.0;
  for (std::size_t j = 0; j < fine_bins_; ++j) {
    perp[j] = w * (perp_nodes_[2 * j] + 4.0 * perp_nodes_[2 * j + 1] + perp_nodes_[2 * j + 2]);
  }
  perpendicular_ = fold(std::move(perp));
}

Histogram HomModelGrid::fold(std::vector<double> masses) const {
  FineGrid g;
  g.origin = fine_origin_;
  g.step = fine_step_;
  g.per_bin = fine_per_bin_;
  g.pad = pad_bins_;
  g.total = fine_bins_;
  return bin_fine_masses(shape_, irf_, g, std::move(masses));
}

Histogram HomModelGrid::parallel(double t2_star) const {
  require(t2_star > 0.0, "hom model: t2_star must be > 0");
  std::vector<double> par(fine_bins_);
  auto bracket = [&](std::size_t k) { return -std::expm1(-2.0 * abs_tau_nodes_[k] / t2_star); };
  const double w = fine_step_ / 6.0;
  for (std::size_t j = 0; j < fine_bins_; ++j) {
    const std::size_t e0 = 2 * j, m = 2 * j + 1, e1 = 2 * j + 2;
    par[j] = w * (perp_nodes_[e0] * bracket(e0) + 4.0 * perp_nodes_[m] * bracket(m) +
                  perp_nodes_[e1] * bracket(e1));
  }
  return fold(std::move(par));
}

std::pair<Histogram, Histogram> HomModelGrid::histograms(double t2_star) const {
  return {parallel(t2_star), perpendicular_};
}

ConvolutionResult irf_convolve(const Histogram& h, const IrfModel& irf) {
  h.validate();
  irf.validate();
  if (irf.is_delta()) return {h, 0.0};
  require(h.shape.bin_width <= 0.5 * irf.fwhm * 1e-3,
          "irf_convolve: bin width must not exceed half the IRF fwhm");
  std::size_t hw = 0;
  const auto kernel = gaussian_cell_kernel(irf.sigma_ns(), h.shape.bin_width, hw);
  ConvolutionResult result{h, 0.0};
  result.histogram.counts = convolve(h.counts, kernel, hw);
  for (double& c : result.histogram.counts) c = std::max(c, 0.0);
  result.truncated = h.total() - result.histogram.total();
  return result;
}

VisibilityEstimate visibility_from_histograms(const Histogram& h_par, const Histogram& h_perp,
                                              double lo, double hi) {
  h_par.validate();
  h_perp.validate();
  require(h_par.shape == h_perp.shape, "visibility: histograms must share binning");
  require(lo < hi && lo >= h_par.shape.t_min && hi <= h_par.shape.t_max,
          "visibility: window must lie inside the histogram range");
  VisibilityEstimate v;
  v.c_parallel = h_par.sum_centers_in(lo, hi);
  v.c_perp = h_perp.sum_centers_in(lo, hi);
  if (v.c_perp <= 0.0) throw NumericalError("visibility: C_perp is zero, visibility undefined");
  v.value = (v.c_perp - v.c_parallel) / v.c_perp;
  const double cp = v.c_perp;
  v.std_error = std::sqrt(v.c_parallel / (cp * cp) + v.c_parallel * v.c_parallel / (cp * cp * cp));
  return v;
}

}  // namespace photonstat
