// Desk-scale reproductions of the published figures. Parameters are pinned
// here; only the seed and the output directory come from the settings.

#include <cmath>

#include "app.hpp"
#include "photonstat/error.hpp"
#include "photonstat/quadrature.hpp"
#include "photonstat/rng.hpp"
#include "photonstat/units.hpp"

namespace photonstat::cli {

namespace {

const IrfModel kDetector = IrfModel::gaussian(70.0);

class Checks {
 public:
  void range(const std::string& name, double value, double lo, double hi) {
    const bool pass = std::isfinite(value) && value >= lo && value <= hi;
    ok_ = ok_ && pass;
    list_.push_back({{"name", name}, {"value", value}, {"min", lo}, {"max", hi}, {"pass", pass}});
  }
  void near(const std::string& name, double value, double target, double rel) {
    range(name, value, target * (1.0 - rel), target * (1.0 + rel));
  }
  bool ok() const { return ok_; }
  const json& list() const { return list_; }

 private:
  json list_ = json::array();
  bool ok_ = true;
};

struct Bundle {
  Run& run;
  std::string figure;
  Checks checks;

  void input(const std::string& name, std::string_view content) { run.write(fs::path(figure) / "inputs" / name, content); }
  void output(const std::string& name, std::string_view content) { run.write(fs::path(figure) / "outputs" / name, content); }
  void output_json(const std::string& name, const json& j) { output(name, j.dump(2) + "\n"); }

  void finish() {
    json j;
    j["figure"] = figure;
    j["seed"] = run.s.seed;
    j["pass"] = checks.ok();
    j["checks"] = checks.list();
    run.write(fs::path(figure) / "check.json", j.dump(2) + "\n");
    run.results["figure"] = figure;
    run.results["pass"] = checks.ok();
    run.results["checks"] = checks.list();
    if (!checks.ok()) {
      std::string failed;
      for (const auto& c : checks.list())
        if (!c["pass"].get<bool>()) failed += (failed.empty() ? "" : ", ") + c["name"].get<std::string>();
      throw RecipeFailure(figure + ": check failed: " + failed);
    }
  }
};

FitOptions pinned(const Settings& s) {
  FitOptions o;
  o.seed = s.seed;
  return o;
}

HomFitOptions hom_pinned(const Settings& s) {
  HomFitOptions o;
  static_cast<FitOptions&>(o) = pinned(s);
  return o;
}

// Binned HOM data with `perp_counts` expected in the cross-polarised histogram.
std::pair<Histogram, Histogram> hom_data(const EmitterParams& p, const HistogramShape& shape,
                                         double perp_counts, std::uint64_t seed) {
  auto [par, perp] = HomModelGrid(p, kDetector.coincidence(), shape).histograms(p.t2_star);
  const double k = perp_counts / perp.total();
  return {sample_poisson_counts(par.scaled(k), seed),
          sample_poisson_counts(perp.scaled(k), seed ^ 0x9e3779b97f4a7c15ull)};
}

void fig2b(Bundle& b) {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4);
  const HistogramShape shape{-0.5, 4.5, 0.01};
  Histogram mean = trpl_histogram_model(p, kDetector, shape);
  const double norm = cumulative_intensity(p.integration_horizon(), p);
  for (auto& c : mean.counts) c = 1e5 * c / norm + 2.0;
  const Histogram data = sample_poisson_counts(mean, b.run.s.seed);
  const auto text = io::histogram_csv(data);
  b.input("trpl_histogram.csv", text);

  TrplFitOptions o;
  static_cast<FitOptions&>(o) = pinned(b.run.s);
  const auto r = fit_trpl(data, kDetector, EmitterParams::equal_lifetime(0.5, 5.0), o);
  b.output_json("fit_trpl.json", io::fit_report(r, {{"inputs/trpl_histogram.csv", io::sha256_hex(text)}}));

  auto q = EmitterParams::equal_lifetime(r.value("t1"), r.value("delta"));
  Histogram model = trpl_histogram_model(q, kDetector, shape);
  const double qn = cumulative_intensity(q.integration_horizon(), q);
  for (auto& c : model.counts) c = r.value("amplitude") * c / qn + r.value("background");
  b.output("trpl_model.csv", io::histogram_csv(model));

  b.checks.near("t1_ns", r.value("t1"), 0.35, 0.05);
  b.checks.near("delta_ueV", r.value("delta"), 6.4, 0.05);
}

void fig2c(Bundle& b) {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4, 0.2);
  std::vector<FringePoint> d;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= 50; ++i) {
    const double tau = 0.02 * i;
    Philox rng(b.run.s.seed, streams::tag(streams::kNoise, static_cast<std::uint64_t>(i)));
    d.push_back({tau, fringe_contrast(tau, p) + 0.005 * rng.normal()});
    rows.push_back({d.back().tau, d.back().contrast});
  }
  const auto text = io::table_csv({"tau_ns", "contrast"}, rows);
  b.input("fringe.csv", text);
  auto start = p;
  start.t2_star = 1.0;
  const auto r = fit_fringe(d, start, pinned(b.run.s));
  b.output_json("fit_fringe.json", io::fit_report(r, {{"inputs/fringe.csv", io::sha256_hex(text)}}));

  // Second local maximum of the model contrast.
  rows.clear();
  double peak_tau = NAN, peak = -1.0;
  double prev2 = fringe_contrast(0.0, p), prev = fringe_contrast(0.0005, p);
  rows.push_back({0.0, prev2});
  rows.push_back({0.0005, prev});
  for (int i = 2; i <= 2000; ++i) {
    const double tau = 0.0005 * i, c = fringe_contrast(tau, p);
    rows.push_back({tau, c});
    if (tau > 0.2 && prev > prev2 && prev >= c && std::isnan(peak_tau)) {
      peak_tau = tau - 0.0005;
      peak = prev;
    }
    prev2 = prev;
    prev = c;
  }
  b.output("fringe_model.csv", io::table_csv({"tau_ns", "contrast"}, rows));

  b.checks.near("t2_star_ns", r.value("t2_star"), 0.2, 0.03);
  b.checks.range("t2_ns", r.value("t2"), 0.150, 0.160);
  b.checks.range("second_peak_tau_ns", peak_tau, 0.40, 0.50);
  b.checks.range("second_peak_contrast", peak, 0.013, 0.027);
}

void hom_recipe(Bundle& b, double t2_star, const HistogramShape& shape, double v_target,
                double v_corrected_target, double v_tol) {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4, t2_star);
  const auto [par, perp] = hom_data(p, shape, 5e4, b.run.s.seed);
  const auto tp = io::histogram_csv(par), tq = io::histogram_csv(perp);
  b.input("hom_par.csv", tp);
  b.input("hom_perp.csv", tq);
  auto start = p;
  start.t2_star = 2.0 * t2_star + 0.5;
  const auto r = fit_hom(par, perp, kDetector.coincidence(), start, hom_pinned(b.run.s));
  json report = io::fit_report(r, {{"inputs/hom_par.csv", io::sha256_hex(tp)},
                                   {"inputs/hom_perp.csv", io::sha256_hex(tq)}});
  const auto v = visibility_from_histograms(par, perp);
  const double v_model = hom_model_visibility(p);
  report["data_visibility"] = v.value;
  report["data_visibility_error"] = v.std_error;
  report["model_visibility"] = v_model;
  report["model_visibility_corrected"] = correct_visibility_multiphoton(v_model, 0.015);
  b.output_json("fit_hom.json", report);

  b.checks.near("t2_star_ns", r.value("t2_star"), t2_star, 0.08);
  b.checks.range("model_visibility", v_model, v_target - v_tol, v_target + v_tol);
  b.checks.range("model_visibility_corrected", correct_visibility_multiphoton(v_model, 0.015),
                 v_corrected_target - v_tol, v_corrected_target + v_tol);
}

void fig2fg(Bundle& b) {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4, 0.58);
  PulseTrainSpec train;
  train.double_pulse_delay = 2.0;
  const std::uint64_t seed = b.run.s.seed;

  // Two-time map, model and sampled, on a common grid.
  const HistogramShape grid{0.0, 7.0, 0.1};
  const auto pairs = sample_two_time_pairs(p, train, 100000, seed, PairTerms::all);
  std::vector<double> counts(grid.bins() * grid.bins(), 0.0);
  for (const auto& [t1, t2] : pairs) {
    const auto i = grid.index(t1), k = grid.index(t2);
    if (i && k) counts[*i * grid.bins() + *k] += 1.0;
  }
  std::vector<std::vector<double>> data_rows, model_rows;
  for (std::size_t i = 0; i < grid.bins(); ++i)
    for (std::size_t k = 0; k < grid.bins(); ++k) {
      data_rows.push_back({grid.center(i), grid.center(k), counts[i * grid.bins() + k]});
      model_rows.push_back({grid.center(i), grid.center(k), hom_two_time_map(grid.center(i), grid.center(k), p, train)});
    }
  b.input("pairs_map.csv", io::table_csv({"t1_ns", "t2_ns", "counts"}, data_rows));
  b.output("model_map.csv", io::table_csv({"t1_ns", "t2_ns", "g2"}, model_rows));

  // Delay histogram of the interference term against g∥.
  const auto central = sample_two_time_pairs(p, train, 100000, seed + 1, PairTerms::central);
  const HistogramShape tau_shape{-1.0, 1.0, 0.05};
  Histogram h = Histogram::zeros(tau_shape);
  for (const auto& [t1, t2] : central)
    if (const auto i = tau_shape.index(t2 - t1)) h.counts[*i] += 1.0;
  const double horizon = p.integration_horizon();
  const auto g = [&](double t) { return hom_g2_parallel(t, p); };
  const double total = 2.0 * integrate(g, 0.0, horizon);
  double chi2 = 0.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double lo = tau_shape.lower_edge(i), hi = lo + tau_shape.bin_width;
    const double mass = lo < 0.0 && hi > 0.0 ? integrate(g, lo, 0.0) + integrate(g, 0.0, hi) : integrate(g, lo, hi);
    const double e = static_cast<double>(central.size()) * mass / total;
    chi2 += (h.counts[i] - e) * (h.counts[i] - e) / e;
    rows.push_back({tau_shape.center(i), h.counts[i], e});
  }
  b.output("central_term_tau.csv", io::table_csv({"tau_ns", "counts", "expected"}, rows));

  // ∫ interference dt2 at fixed τ against 32·g∥(τ).
  const double tau = 0.3;
  const double dT = train.double_pulse_delay;
  const double marginal = integrate(
      [&](double t2) {
        return t2 - tau < 0.0 ? 0.0 : hom_two_time_terms(t2 - tau, t2, p, train).interference;
      },
      dT + std::max(0.0, tau), dT + horizon + tau);
  // Goodness of fit at the two-sided 0.1% level (Wilson-Hilferty normal
  // approximation of the chi-square tail).
  const double dof = static_cast<double>(h.bins());
  const double wh = (std::cbrt(chi2 / dof) - (1.0 - 2.0 / (9.0 * dof))) / std::sqrt(2.0 / (9.0 * dof));
  b.run.results["central_term_chi2_per_dof"] = chi2 / dof;
  b.checks.range("central_term_chi2_z", wh, -3.29, 3.29);
  b.checks.near("map_marginal_over_g_parallel", marginal / (kHomMarginalConstant * hom_g2_parallel(tau, p)),
                1.0, 1e-6);
}

void fig3a(Bundle& b) {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4);
  const std::vector<TemperaturePoint> points{{19.5, 0.57}, {11.5, 0.82}};
  b.input("visibility_points.csv", io::table_csv({"T_K", "V"}, {{19.5, 0.57}, {11.5, 0.82}}));
  const auto cal = calibrate_thermal(points, p, ThermalModel{}, {true, false, true});
  ThermalModel fp5 = cal.model;
  fp5.purcell = 5.0;
  b.output_json("thermal.json", io::to_json(cal.model));
  std::vector<std::vector<double>> rows;
  for (int k = 0; k <= 56; ++k) {
    const double t = 2.0 + 0.5 * k;
    rows.push_back({t, tpi_visibility(t, p, cal.model), tpi_visibility(t, p, fp5)});
  }
  b.output("visibility_curve.csv", io::table_csv({"T_K", "V", "V_purcell5"}, rows));
  b.checks.range("V_4K", tpi_visibility(4.0, p, cal.model), 0.88, 0.92);
  b.checks.range("V_4K_purcell5", tpi_visibility(4.0, p, fp5), 0.97, 1.0);
}

void fig1g(Bundle& b) {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4);
  SimConfig c;
  c.seed = b.run.s.seed;
  c.n_pulses = 1000000;
  c.emission_prob = 0.5;
  c.double_emission_prob = double_prob_for_g2(0.015, c.emission_prob);
  c.irf = kDetector;
  const auto [a, d] = generate_hbt_stream(p, c);
  b.input("simulation.json", io::to_json(c).dump(2) + "\n");
  b.input("ch0.bin", io::timestamps_binary(a));
  b.input("ch1.bin", io::timestamps_binary(d));
  const HistogramShape shape{-3.5 * c.train.period, 3.5 * c.train.period, c.train.period / 256.0};
  const Histogram h = correlate(a, d, shape);
  b.output("hbt_histogram.csv", io::histogram_csv(h));
  const auto e = extract_g2_zero(h, c.train, G2Method::area_ratio);
  b.output_json("fit_hbt.json", g2_report(e, G2Method::area_ratio));
  b.checks.near("g2_zero", e.value, 0.015, 0.10);
}

}  // namespace

void cmd_reproduce(Run& run, const std::string& figure) {
  Bundle b{run, figure, {}};
  if (figure == "fig2b")
    fig2b(b);
  else if (figure == "fig2c")
    fig2c(b);
  else if (figure == "fig2de")
    hom_recipe(b, 0.58, {-2.0, 2.0, 0.016}, 0.55, 0.57, 0.03);
  else if (figure == "fig2fg")
    fig2fg(b);
  else if (figure == "fig3a")
    fig3a(b);
  else if (figure == "fig3b")
    hom_recipe(b, 1.16, {-5.0, 5.0, 0.04}, 0.80, 0.82, 0.04);
  else if (figure == "fig1g")
    fig1g(b);
  else
    throw InvalidInput("reproduce: unknown figure '" + figure + "'");
  b.finish();
}

}  // namespace photonstat::cli
