#include <algorithm>
#include <cmath>

#include "app.hpp"
#include "photonstat/array_analysis.hpp"
#include "photonstat/error.hpp"
#include "photonstat/units.hpp"

namespace photonstat::cli {

namespace {

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw InvalidInput(std::string("fit.") + key + ": expected true or false");
  return j.at(key).get<bool>();
}

FitSettings fit_from_json(const json& j, FitSettings f) {
  if (!j.is_object()) throw InvalidInput("fit: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    static const char* known[] = {"starts",        "statistic",      "method", "shared_amplitude",
                                  "fit_background", "damping", "equal_lifetimes"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
      throw InvalidInput("fit: unknown field '" + key + "'");
  }
  if (j.contains("starts")) {
    if (!j.at("starts").is_number_integer()) throw InvalidInput("fit.starts: expected an integer");
    f.starts = j.at("starts").get<int>();
  }
  if (j.contains("statistic")) {
    const auto& v = j.at("statistic");
    if (v == "poisson")
      f.statistic = FitStatistic::poisson;
    else if (v == "chi_square")
      f.statistic = FitStatistic::chi_square;
    else
      throw InvalidInput("fit.statistic: expected 'poisson' or 'chi_square'");
  }
  if (j.contains("method")) {
    const auto& v = j.at("method");
    if (v == "area_ratio")
      f.method = G2Method::area_ratio;
    else if (v == "model_fit")
      f.method = G2Method::model_fit;
    else
      throw InvalidInput("fit.method: expected 'area_ratio' or 'model_fit'");
  }
  f.shared_amplitude = get_bool(j, "shared_amplitude", f.shared_amplitude);
  f.fit_background = get_bool(j, "fit_background", f.fit_background);
  f.damping = get_bool(j, "damping", f.damping);
  f.equal_lifetimes = get_bool(j, "equal_lifetimes", f.equal_lifetimes);
  require(f.starts >= 1 && f.starts <= 1024, "fit.starts: must lie in [1, 1024]");
  return f;
}

json fit_json(const FitSettings& f) {
  json j;
  j["starts"] = f.starts;
  j["statistic"] = f.statistic == FitStatistic::poisson ? "poisson" : "chi_square";
  j["method"] = f.method == G2Method::area_ratio ? "area_ratio" : "model_fit";
  j["shared_amplitude"] = f.shared_amplitude;
  j["fit_background"] = f.fit_background;
  j["damping"] = f.damping;
  j["equal_lifetimes"] = f.equal_lifetimes;
  return j;
}

HistogramShape shape_or(const HistogramShape& base, std::optional<double> lo, std::optional<double> hi,
                        std::optional<double> dt) {
  HistogramShape s{lo.value_or(base.t_min), hi.value_or(base.t_max), dt.value_or(base.bin_width)};
  s.validate();
  return s;
}

Histogram sample_curve(const HistogramShape& shape, const std::function<double(double)>& f) {
  Histogram h = Histogram::zeros(shape);
  for (std::size_t i = 0; i < h.bins(); ++i) h.counts[i] = f(shape.center(i));
  return h;
}

std::string require_path(const std::optional<std::string>& p, const char* flag) {
  if (!p) throw InvalidInput(std::string("missing ") + flag);
  return *p;
}

}  // namespace

const std::vector<std::string> kFigures = {"fig2b", "fig2c", "fig2de", "fig2fg", "fig3a", "fig3b", "fig1g"};

void apply_config(Settings& s, const json& c) {
  if (!c.is_object()) throw InvalidInput("config: expected a JSON object");
  static const char* known[] = {"seed",  "out_dir", "emitter",   "pulse", "simulation",
                                "thermal", "irf",   "train", "histogram", "fit"};
  for (const auto& [key, value] : c.items())
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
      throw InvalidInput("config: unknown field '" + key + "'");
  // The simulation block may carry its own seed; a top-level seed wins.
  if (c.contains("emitter")) s.emitter = io::emitter_from_json(c.at("emitter"), s.emitter);
  if (c.contains("pulse")) s.pulse = io::pulse_from_json(c.at("pulse"), s.pulse);
  if (c.contains("thermal")) s.thermal = io::thermal_from_json(c.at("thermal"), s.thermal);
  if (c.contains("irf")) s.irf = io::irf_from_json(c.at("irf"), s.irf);
  if (c.contains("train")) s.train = io::train_from_json(c.at("train"), s.train);
  if (c.contains("histogram")) s.histogram = io::shape_from_json(c.at("histogram"), s.histogram);
  if (c.contains("fit")) s.fit = fit_from_json(c.at("fit"), s.fit);
  s.sim.train = s.train;
  s.sim.irf = s.irf;
  if (c.contains("simulation")) {
    s.sim = io::sim_config_from_json(c.at("simulation"), s.sim);
    if (c.at("simulation").contains("seed")) s.seed = s.sim.seed;
  }
  if (c.contains("seed")) {
    if (!c.at("seed").is_number_unsigned() &&
        !(c.at("seed").is_number_integer() && c.at("seed").get<std::int64_t>() >= 0))
      throw InvalidInput("seed: expected a non-negative integer");
    s.seed = c.at("seed").get<std::uint64_t>();
  }
  if (c.contains("out_dir")) {
    if (!c.at("out_dir").is_string()) throw InvalidInput("out_dir: expected a string");
    s.out_dir = c.at("out_dir").get<std::string>();
  }
}

json settings_json(const Settings& s) {
  json j;
  j["seed"] = s.seed;
  j["emitter"] = io::to_json(s.emitter);
  j["pulse"] = io::to_json(s.pulse);
  j["simulation"] = io::to_json(s.sim);
  j["thermal"] = io::to_json(s.thermal);
  j["irf"] = io::to_json(s.irf);
  j["train"] = io::to_json(s.train);
  j["histogram"] = io::to_json(s.histogram);
  j["fit"] = fit_json(s.fit);
  return j;
}

void Run::write(const fs::path& relative, std::string_view content) {
  const fs::path path = s.out_dir / relative;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create '" + path.parent_path().string() + "'");
  io::write_file_atomic(path, content);
  outputs.push_back(path.generic_string());
}

FitOptions base_options(const Settings& s) {
  FitOptions o;
  o.starts = s.fit.starts;
  o.seed = s.seed;
  o.statistic = s.fit.statistic;
  return o;
}

TrplFitOptions trpl_options(const Settings& s) {
  TrplFitOptions o;
  static_cast<FitOptions&>(o) = base_options(s);
  o.equal_lifetimes = s.fit.equal_lifetimes;
  o.fit_background = s.fit.fit_background;
  return o;
}

HomFitOptions hom_options(const Settings& s) {
  HomFitOptions o;
  static_cast<FitOptions&>(o) = base_options(s);
  o.shared_amplitude = s.fit.shared_amplitude;
  o.fit_background = s.fit.fit_background;
  return o;
}

RabiFitOptions rabi_options(const Settings& s) {
  RabiFitOptions o;
  static_cast<FitOptions&>(o) = base_options(s);
  o.damping = s.fit.damping;
  return o;
}

json g2_report(const G2Estimate& e, G2Method method) {
  json j;
  j["model"] = "hbt";
  j["method"] = method == G2Method::area_ratio ? "area_ratio" : "model_fit";
  j["g2_zero"] = e.value;
  j["g2_zero_error"] = e.std_error;
  j["purity"] = purity_from_g2(e.value);
  if (std::isfinite(e.tau_qd)) j["tau_qd"] = e.tau_qd;
  if (e.fit) j["fit"] = io::fit_report(*e.fit, {});
  return j;
}

// ---- model ----

void cmd_model(Run& run, const ModelFlags& f) {
  const Settings& s = run.s;
  const EmitterParams& p = s.emitter;
  const std::string& c = f.curve;
  if (c == "trpl") {
    const auto shape = shape_or({0.0, 5.0, 0.005}, f.t_min, f.t_max, f.dt);
    require(shape.t_min >= 0.0 || f.with_irf, "model trpl: --tmin must be >= 0 without --with-irf");
    const Histogram h = f.with_irf ? trpl_histogram_model(p, s.irf, shape)
                                   : sample_curve(shape, [&](double t) { return time_resolved_intensity(t, p); });
    run.write("model_trpl.csv", io::histogram_csv(h));
    run.results["beat_period_ns"] = units::beat_period(p.delta);
  } else if (c == "fringe") {
    const auto shape = shape_or({0.0, 1.0, 0.005}, f.t_min, f.t_max, f.dt);
    require(shape.t_min >= 0.0, "model fringe: --tmin must be >= 0");
    run.write("model_fringe.csv",
              io::histogram_csv(sample_curve(shape, [&](double t) { return fringe_contrast(t, p); })));
    run.results["t2_ns"] = coherence_time(p);
  } else if (c == "hom") {
    const double hi = f.t_max.value_or(2.0);
    const auto shape = shape_or({-hi, hi, 0.01}, f.t_min.value_or(-hi), hi, f.dt);
    Histogram par, perp;
    if (f.with_irf) {
      std::tie(par, perp) = HomModelGrid(p, s.irf.coincidence(), shape).histograms(p.t2_star);
    } else {
      par = sample_curve(shape, [&](double t) { return hom_g2_parallel(t, p); });
      perp = sample_curve(shape, [&](double t) { return hom_g2_perp(t, p); });
    }
    run.write("model_hom_par.csv", io::histogram_csv(par));
    run.write("model_hom_perp.csv", io::histogram_csv(perp));
    run.results["visibility"] = hom_model_visibility(p);
  } else if (c == "hbt") {
    const auto shape = shape_or(s.histogram, f.t_min, f.t_max, f.dt);
    const double g2 = f.g2.value_or(0.015);
    const double tau = f.tau_qd.value_or(p.t1_a);
    const IrfModel irf = f.with_irf ? s.irf.coincidence() : IrfModel::delta();
    run.write("model_hbt.csv", io::histogram_csv(hbt_histogram_model(g2, tau, s.train, irf, shape)));
    run.results["g2_zero"] = g2;
    run.results["purity"] = purity_from_g2(g2);
  } else if (c == "map") {
    const double dT = s.train.double_pulse_delay;
    require(dT > 0.0, "model map: train.double_pulse_delay must be > 0");
    const auto shape = shape_or({0.0, 2.0 * dT + 3.0, 0.05}, f.t_min, f.t_max, f.dt);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < shape.bins(); ++i)
      for (std::size_t k = 0; k < shape.bins(); ++k) {
        const double t1 = shape.center(i), t2 = shape.center(k);
        rows.push_back({t1, t2, hom_two_time_map(t1, t2, p, s.train)});
      }
    run.write("model_map.csv", io::table_csv({"t1_ns", "t2_ns", "g2"}, rows));
  } else {
    throw InvalidInput("model: unknown curve '" + c + "' (trpl, fringe, hom, hbt, map)");
  }
  run.results["curve"] = c;
}

// ---- simulate ----

void cmd_simulate(Run& run, const SimulateFlags& f) {
  Settings& s = run.s;
  s.sim.seed = s.seed;
  if (f.kind == "hbt") {
    require(f.format == "csv" || f.format == "binary", "simulate: --format must be csv or binary");
    if (f.g2) s.sim.double_emission_prob = double_prob_for_g2(*f.g2, s.sim.emission_prob);
    s.sim.validate();
    auto [a, b] = generate_hbt_stream(s.emitter, s.sim);
    if (f.format == "csv") {
      run.write("timestamps.csv", io::timestamps_csv(a, b));
    } else {
      run.write("ch0.bin", io::timestamps_binary(a));
      run.write("ch1.bin", io::timestamps_binary(b));
    }
    run.results["events_ch0"] = a.times.size();
    run.results["events_ch1"] = b.times.size();
    run.results["double_emission_prob"] = s.sim.double_emission_prob;
    run.results["duration_ns"] = a.meta.duration;
  } else if (f.kind == "hom") {
    require(f.pairs > 0, "simulate: --pairs must be > 0");
    const auto pairs = sample_two_time_pairs(s.emitter, s.train, f.pairs, s.seed);
    std::vector<std::vector<double>> rows;
    rows.reserve(pairs.size());
    for (const auto& [t1, t2] : pairs) rows.push_back({t1, t2});
    run.write("pairs.csv", io::table_csv({"t1_ns", "t2_ns"}, rows));
    run.results["pairs"] = pairs.size();
  } else {
    throw InvalidInput("simulate: --kind must be hbt or hom");
  }
  run.results["seed"] = s.seed;
}

// ---- correlate ----

void cmd_correlate(Run& run, const CorrelateFlags& f) {
  std::array<TimestampStream, 2> st;
  std::vector<io::InputDigest> digests;
  if (f.input) {
    require(!f.ch0 && !f.ch1, "correlate: use either --input or --ch0/--ch1");
    st = io::parse_timestamps_csv(io::read_file(*f.input));
    digests.push_back(io::digest_file(*f.input));
  } else {
    const auto p0 = require_path(f.ch0, "--ch0"), p1 = require_path(f.ch1, "--ch1");
    st[0] = io::parse_timestamps_binary(io::read_file(p0), 0);
    st[1] = io::parse_timestamps_binary(io::read_file(p1), 1);
    digests.push_back(io::digest_file(p0));
    digests.push_back(io::digest_file(p1));
  }
  const Histogram h = correlate(st[0], st[1], run.s.histogram);
  run.write("histogram.csv", io::histogram_csv(h));
  run.results["coincidences"] = h.total();
  json in = json::array();
  for (const auto& d : digests) in.push_back({{"path", d.path}, {"sha256", d.sha256}});
  run.results["inputs"] = in;
}

// ---- fit ----

void cmd_fit(Run& run, const FitFlags& f) {
  const Settings& s = run.s;
  const auto& m = f.model;
  json report;
  if (m == "trpl") {
    const auto path = require_path(f.input, "--input");
    const Histogram h = io::read_histogram_csv(path);
    report = io::fit_report(fit_trpl(h, s.irf, s.emitter, trpl_options(s)), {io::digest_file(path)});
  } else if (m == "fringe") {
    const auto path = require_path(f.input, "--input");
    const auto d = io::parse_fringe_csv(io::read_file(path));
    report = io::fit_report(fit_fringe(d, s.emitter, base_options(s)), {io::digest_file(path)});
  } else if (m == "hom") {
    const auto pp = require_path(f.par, "--par"), pq = require_path(f.perp, "--perp");
    const Histogram hp = io::read_histogram_csv(pp), hq = io::read_histogram_csv(pq);
    report = io::fit_report(fit_hom(hp, hq, s.irf.coincidence(), s.emitter, hom_options(s)),
                            {io::digest_file(pp), io::digest_file(pq)});
    const auto v = visibility_from_histograms(hp, hq);
    report["data_visibility"] = v.value;
    report["data_visibility_error"] = v.std_error;
  } else if (m == "hbt") {
    const auto path = require_path(f.input, "--input");
    const Histogram h = io::read_histogram_csv(path);
    const auto e = extract_g2_zero(h, s.train, s.fit.method, s.irf.coincidence(), base_options(s));
    report = g2_report(e, s.fit.method);
    const auto d = io::digest_file(path);
    report["inputs"] = json::array({{{"path", d.path}, {"sha256", d.sha256}}});
  } else if (m == "rabi") {
    const auto path = require_path(f.input, "--input");
    const auto d = io::parse_rabi_csv(io::read_file(path));
    report = io::fit_report(fit_rabi(d, rabi_options(s)), {io::digest_file(path)});
  } else {
    throw InvalidInput("fit: unknown model '" + m + "' (trpl, fringe, hom, hbt, rabi)");
  }
  run.write_json("fit_" + m + ".json", report);
  run.results = report;
}

// ---- visibility ----

void cmd_visibility(Run& run, const VisibilityFlags& f) {
  const Settings& s = run.s;
  auto points = io::parse_visibility_csv(io::read_file(f.input));
  if (f.g2)
    for (auto& p : points) p.visibility = correct_visibility_multiphoton(p.visibility, *f.g2);
  FreeThermalParameters free{true, f.free_alpha, true};
  ThermalModel start = s.thermal;
  start.purcell = 1.0;
  const auto cal = calibrate_thermal(points, s.emitter, start, free);
  ThermalModel enhanced = cal.model;
  enhanced.purcell = s.thermal.purcell;

  std::vector<std::vector<double>> rows;
  for (int k = 0; k <= 56; ++k) {
    const double t = 2.0 + 0.5 * k;
    rows.push_back({t, tpi_visibility(t, s.emitter, cal.model), tpi_visibility(t, s.emitter, enhanced)});
  }
  run.write("visibility_curve.csv", io::table_csv({"T_K", "V", "V_purcell"}, rows));
  json model = io::to_json(cal.model);
  run.write_json("thermal.json", model);

  json pred = json::array();
  for (double t : f.temps)
    pred.push_back({{"T_K", t},
                    {"V", tpi_visibility(t, s.emitter, cal.model)},
                    {"V_purcell", tpi_visibility(t, s.emitter, enhanced)}});
  run.results["thermal"] = model;
  run.results["purcell"] = enhanced.purcell;
  run.results["predictions"] = pred;
  run.results["max_residual"] = cal.max_residual;
  run.results["clamped"] = cal.clamped;
  run.results["input_sha256"] = io::digest_file(f.input).sha256;
}

// ---- array ----

void cmd_array(Run& run, const ArrayFlags& f) {
  const ArrayMap map = io::parse_array_csv(io::read_file(f.input));
  require(f.window_ueV >= 0.0, "array: --window must be >= 0");
  const auto st = spectral_stats(map);
  const auto pairs = find_resonant_pairs(map, f.window_ueV);
  const auto clusters = find_resonant_clusters(map, f.window_ueV);

  std::vector<std::vector<double>> rows;
  for (const auto& p : pairs)
    rows.push_back({double(p.first.row), double(p.first.col), *p.first.lambda_nm, double(p.second.row),
                    double(p.second.col), *p.second.lambda_nm, p.detuning_ueV});
  run.write("pairs.csv", io::table_csv({"row_a", "col_a", "lambda_a_nm", "row_b", "col_b", "lambda_b_nm",
                                        "detuning_ueV"},
                                       rows));
  rows.clear();
  for (std::size_t k = 0; k < clusters.size(); ++k)
    for (const auto& site : clusters[k])
      rows.push_back({double(k), double(site.row), double(site.col), *site.lambda_nm});
  run.write("clusters.csv", io::table_csv({"cluster", "row", "col", "lambda_nm"}, rows));

  json j;
  j["emitting"] = st.emitting;
  j["dark"] = st.dark;
  j["mean_nm"] = st.mean_nm;
  j["sigma_nm"] = st.sigma_nm;
  j["window_ueV"] = f.window_ueV;
  j["resonant_pairs"] = pairs.size();
  j["disjoint_pairs"] = count_disjoint_pairs(map, f.window_ueV);
  j["clusters"] = clusters.size();
  j["largest_cluster"] = clusters.empty() ? 0 : clusters.front().size();
  if (!pairs.empty()) {
    // Tuning plan for the widest resonant pair, the hardest one to close.
    const auto& w = pairs.back();
    const auto plan = stark_tuning_plan(w.first, w.second, f.stark_rate);
    j["stark_plan"] = {{"first", {w.first.row, w.first.col}},
                       {"second", {w.second.row, w.second.col}},
                       {"target_nm", plan.target_nm},
                       {"voltage_first", plan.voltage_first},
                       {"voltage_second", plan.voltage_second}};
  }
  run.write_json("stats.json", j);
  run.results = j;
}

// ---- budget ----

void cmd_budget(Run& run, const BudgetFlags& f) {
  const double iqe = internal_quantum_efficiency(f.budget);
  run.results["iqe"] = iqe;
  run.results["detected_rate"] = f.budget.detected_rate;
  run.results["setup_efficiency"] = f.budget.setup_efficiency;
  run.results["collection_efficiency"] = f.budget.collection_efficiency;
  run.results["rep_rate"] = f.budget.rep_rate;
}

}  // namespace photonstat::cli
