#include <chrono>
#include <ctime>
#include <iostream>

#include "CLI11.hpp"
#include "app.hpp"
#include "photonstat/error.hpp"

using namespace photonstat;
using namespace photonstat::cli;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config, out_dir;
  // emitter
  std::optional<double> t1, t1_b, delta, t2_star;
  // instrument
  std::optional<double> irf_fwhm, period;
  std::optional<std::string> irf_shape;
  // histogram
  std::optional<double> h_min, h_max, h_bin;
  // fit
  std::optional<int> starts;
  std::optional<std::string> statistic, method;
  std::optional<bool> shared_amplitude, background, damping;
  // simulation
  std::optional<std::uint64_t> pulses, chunk;
  std::optional<double> emission_prob, double_prob;
  std::optional<std::string> profile;
  // thermal
  std::optional<double> alpha, purcell;
};

void add_emitter(CLI::App* c, Overrides& o) {
  c->add_option("--t1", o.t1, "radiative lifetime T1 in ns (both levels)");
  c->add_option("--t1-b", o.t1_b, "lifetime of the second level in ns");
  c->add_option("--delta", o.delta, "fine-structure splitting in ueV");
  c->add_option("--t2-star", o.t2_star, "pure dephasing time in ns");
}

void add_instrument(CLI::App* c, Overrides& o) {
  c->add_option("--irf-fwhm", o.irf_fwhm, "per-detector jitter FWHM in ps");
  c->add_option("--irf-shape", o.irf_shape, "gaussian or delta")->check(CLI::IsMember({"gaussian", "delta"}));
  c->add_option("--period", o.period, "laser pulse spacing in ns");
}

void add_fit(CLI::App* c, Overrides& o) {
  c->add_option("--starts", o.starts, "optimizer starts");
  c->add_option("--statistic", o.statistic, "poisson or chi_square")
      ->check(CLI::IsMember({"poisson", "chi_square"}));
  c->add_option("--method", o.method, "g2 method: area_ratio or model_fit")
      ->check(CLI::IsMember({"area_ratio", "model_fit"}));
  c->add_option("--shared-amplitude", o.shared_amplitude, "hom: share amplitude between histograms");
  c->add_option("--background", o.background, "fit a constant background");
  c->add_option("--damping", o.damping, "rabi: fit the damping envelope");
}

void apply(Settings& s, const Overrides& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.out_dir) s.out_dir = *o.out_dir;
  if (o.t1) s.emitter.t1_a = s.emitter.t1_b = *o.t1;
  if (o.t1_b) s.emitter.t1_b = *o.t1_b;
  if (o.delta) s.emitter.delta = *o.delta;
  if (o.t2_star) s.emitter.t2_star = *o.t2_star;
  if (o.irf_shape) s.irf.shape = *o.irf_shape == "delta" ? IrfModel::Shape::delta : IrfModel::Shape::gaussian;
  if (o.irf_fwhm) s.irf.fwhm = *o.irf_fwhm;
  if (o.period) s.train.period = *o.period;
  if (o.h_min) s.histogram.t_min = *o.h_min;
  if (o.h_max) s.histogram.t_max = *o.h_max;
  if (o.h_bin) s.histogram.bin_width = *o.h_bin;
  if (o.starts) s.fit.starts = *o.starts;
  if (o.statistic) s.fit.statistic = *o.statistic == "poisson" ? FitStatistic::poisson : FitStatistic::chi_square;
  if (o.method) s.fit.method = *o.method == "area_ratio" ? G2Method::area_ratio : G2Method::model_fit;
  if (o.shared_amplitude) s.fit.shared_amplitude = *o.shared_amplitude;
  if (o.background) s.fit.fit_background = *o.background;
  if (o.damping) s.fit.damping = *o.damping;
  if (o.irf_shape || o.irf_fwhm) s.sim.irf = s.irf;
  if (o.period) s.sim.train = s.train;
  if (o.pulses) s.sim.n_pulses = *o.pulses;
  if (o.chunk) s.sim.chunk_pulses = *o.chunk;
  if (o.emission_prob) s.sim.emission_prob = *o.emission_prob;
  if (o.double_prob) s.sim.double_emission_prob = *o.double_prob;
  if (o.profile) s.sim.profile = *o.profile == "exponential" ? EmissionProfile::exponential : EmissionProfile::three_level;
  if (o.alpha) s.thermal.alpha = *o.alpha;
  if (o.purcell) s.thermal.purcell = *o.purcell;
  s.sim.seed = s.seed;

  s.emitter.validate();
  s.irf.validate();
  s.train.validate();
  s.histogram.validate();
  s.sim.validate();
  s.thermal.validate();
  require(s.fit.starts >= 1 && s.fit.starts <= 1024, "--starts must lie in [1, 1024]");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case Error::Category::invalid_input: return 2;
    case Error::Category::numerical: return 3;
    case Error::Category::io: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();

  CLI::App app{"Photon statistics toolkit for pulsed quantum emitters"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--seed", o.seed, "seed for every stochastic step");
  app.add_option("--config", o.config, "JSON config; flags override its fields");
  app.add_option("--out-dir", o.out_dir, "output directory (default: out)");

  ModelFlags model;
  auto* c_model = app.add_subcommand("model", "evaluate an analytic curve");
  c_model->add_option("--curve", model.curve, "trpl, fringe, hom, hbt or map")
      ->check(CLI::IsMember({"trpl", "fringe", "hom", "hbt", "map"}));
  c_model->add_option("--tmin", model.t_min, "range start, ns");
  c_model->add_option("--tmax", model.t_max, "range end, ns");
  c_model->add_option("--dt", model.dt, "step, ns");
  c_model->add_option("--g2", model.g2, "hbt: g2(0)");
  c_model->add_option("--tau-qd", model.tau_qd, "hbt: peak decay time, ns");
  c_model->add_flag("--with-irf", model.with_irf, "bin and fold with the IRF");
  add_emitter(c_model, o);
  add_instrument(c_model, o);

  SimulateFlags sim;
  auto* c_sim = app.add_subcommand("simulate", "generate timestamp streams or HOM pairs");
  c_sim->add_option("--kind", sim.kind, "hbt or hom")->check(CLI::IsMember({"hbt", "hom"}));
  c_sim->add_option("--format", sim.format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));
  c_sim->add_option("--pulses", o.pulses, "number of laser pulses");
  c_sim->add_option("--emission-prob", o.emission_prob, "P(at least one photon) per pulse");
  c_sim->add_option("--double-prob", o.double_prob, "P(two photons) per pulse");
  c_sim->add_option("--g2", sim.g2, "target g2(0); sets the two-photon probability");
  c_sim->add_option("--profile", o.profile, "three_level or exponential")
      ->check(CLI::IsMember({"three_level", "exponential"}));
  c_sim->add_option("--chunk", o.chunk, "pulses per work chunk");
  c_sim->add_option("--pairs", sim.pairs, "hom: number of detection pairs");
  add_emitter(c_sim, o);
  add_instrument(c_sim, o);

  CorrelateFlags corr;
  auto* c_corr = app.add_subcommand("correlate", "histogram of ch1 - ch0 delays");
  c_corr->add_option("--input", corr.input, "timestamp CSV with both channels");
  c_corr->add_option("--ch0", corr.ch0, "binary stream of channel 0");
  c_corr->add_option("--ch1", corr.ch1, "binary stream of channel 1");
  c_corr->add_option("--tmin", o.h_min, "histogram start, ns");
  c_corr->add_option("--tmax", o.h_max, "histogram end, ns");
  c_corr->add_option("--bin", o.h_bin, "bin width, ns");

  FitFlags fit;
  auto* c_fit = app.add_subcommand("fit", "fit a model to measured data");
  c_fit->require_subcommand(1);
  for (const char* m : {"trpl", "fringe", "hom", "hbt", "rabi"}) {
    auto* sub = c_fit->add_subcommand(m, std::string("fit the ") + m + " model");
    sub->fallthrough();
    if (std::string(m) == "hom") {
      sub->add_option("--par", fit.par, "co-polarised histogram CSV")->required();
      sub->add_option("--perp", fit.perp, "cross-polarised histogram CSV")->required();
    } else {
      sub->add_option("--input", fit.input, "data CSV")->required();
    }
  }
  add_emitter(c_fit, o);
  add_instrument(c_fit, o);
  add_fit(c_fit, o);

  VisibilityFlags vis;
  auto* c_vis = app.add_subcommand("visibility", "calibrate the thermal model and extrapolate");
  c_vis->add_option("--input", vis.input, "CSV with T_K,V")->required();
  c_vis->add_option("--g2", vis.g2, "correct the inputs for multiphoton events");
  c_vis->add_option("--temps", vis.temps, "temperatures to predict, K")->delimiter(',');
  c_vis->add_flag("--free-alpha", vis.free_alpha, "also fit the activation temperature");
  c_vis->add_option("--alpha", o.alpha, "activation temperature, K");
  c_vis->add_option("--purcell", o.purcell, "Purcell factor for the enhanced prediction");
  add_emitter(c_vis, o);

  ArrayFlags arr;
  auto* c_arr = app.add_subcommand("array", "spectral statistics of an emitter array");
  c_arr->add_option("--input", arr.input, "CSV with row,col,lambda_nm")->required();
  c_arr->add_option("--window", arr.window_ueV, "resonance window, ueV");
  c_arr->add_option("--stark-rate", arr.stark_rate, "Stark shift rate, nm/V");

  BudgetFlags bud;
  auto* c_bud = app.add_subcommand("budget", "internal quantum efficiency from the detection budget");
  c_bud->add_option("--rate", bud.budget.detected_rate, "detected counts per second");
  c_bud->add_option("--setup", bud.budget.setup_efficiency, "setup efficiency");
  c_bud->add_option("--collection", bud.budget.collection_efficiency, "collection efficiency");
  c_bud->add_option("--rep", bud.budget.rep_rate, "repetition rate, Hz");

  std::string figure;
  auto* c_rep = app.add_subcommand("reproduce", "run a figure recipe with its self-check");
  c_rep->add_option("figure", figure, "recipe name")->required()->check(CLI::IsMember(kFigures));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::string command;
  for (auto* sub : app.get_subcommands()) {
    command = sub->get_name();
    for (auto* inner : sub->get_subcommands()) command += " " + inner->get_name();
  }
  if (c_rep->parsed()) command += " " + figure;
  if (c_fit->parsed())
    for (auto* inner : c_fit->get_subcommands()) fit.model = inner->get_name();

  json summary;
  summary["command"] = command;
  int rc = 0;
  std::optional<Run> run;
  try {
    Settings s;
    if (o.config) apply_config(s, io::read_json_file(*o.config));
    apply(s, o);
    run.emplace(std::move(s));
    if (c_model->parsed()) cmd_model(*run, model);
    else if (c_sim->parsed()) cmd_simulate(*run, sim);
    else if (c_corr->parsed()) cmd_correlate(*run, corr);
    else if (c_fit->parsed()) cmd_fit(*run, fit);
    else if (c_vis->parsed()) cmd_visibility(*run, vis);
    else if (c_arr->parsed()) cmd_array(*run, arr);
    else if (c_bud->parsed()) cmd_budget(*run, bud);
    else if (c_rep->parsed()) cmd_reproduce(*run, figure);
    summary["status"] = "ok";
  } catch (const RecipeFailure& e) {
    rc = 5;
    summary["status"] = "check_failed";
    summary["message"] = e.what();
  } catch (const Error& e) {
    rc = exit_code(e);
    summary["status"] = "error";
    summary["message"] = e.what();
  } catch (const std::exception& e) {
    rc = 1;
    summary["status"] = "error";
    summary["message"] = e.what();
  }
  if (rc != 0) std::cerr << "photonstat: " << summary["message"].get<std::string>() << "\n";
  summary["exit_code"] = rc;
  if (run) {
    summary["outputs"] = run->outputs;
    summary["results"] = run->results;
  }
  summary["started_at"] = started;
  summary["elapsed_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << summary.dump() << std::endl;
  return rc;
}
