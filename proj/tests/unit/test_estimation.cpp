#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "photonstat/error.hpp"
#include "photonstat/estimation.hpp"
#include "synth.hpp"

using namespace photonstat;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<FringePoint> fringe_data(const EmitterParams& p) {
  std::vector<FringePoint> d;
  for (double tau = 0.0; tau <= 1.0; tau += 0.05) d.push_back({tau, fringe_contrast(tau, p)});
  return d;
}

std::vector<RabiPoint> rabi_data(double k, double amp, double beta, double offset, double xmax, int n) {
  std::vector<RabiPoint> d;
  for (int i = 0; i < n; ++i) {
    const double x = xmax * i / (n - 1);
    d.push_back({x, amp * damped_rabi_population(k * x, x, beta) + offset});
  }
  return d;
}

}  // namespace

TEST_CASE("trpl noise-free self-fit") {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4);
  HistogramShape s{-0.5, 4.5, 0.02};
  const auto data = synth::trpl_mean(p, IrfModel::gaussian(70), s, 1e5, 0.0);
  TrplFitOptions o;
  o.fit_background = false;
  const auto r = fit_trpl(data, IrfModel::gaussian(70), EmitterParams::equal_lifetime(0.5, 5.0), o);
  CHECK(r.converged);
  CHECK(r.value("t1") == doctest::Approx(0.35).epsilon(1e-6));
  CHECK(r.value("delta") == doctest::Approx(6.4).epsilon(1e-6));
  CHECK(r.value("amplitude") == doctest::Approx(1e5).epsilon(1e-6));
}

TEST_CASE("trpl poisson round trip and error scaling") {
  const auto p = EmitterParams::equal_lifetime(0.55, 3.8);
  HistogramShape s{-0.5, 5.5, 0.02};
  const auto irf = IrfModel::gaussian(70);
  const auto start = EmitterParams::equal_lifetime(0.3, 8.0);
  const auto lo = fit_trpl(synth::poisson(synth::trpl_mean(p, irf, s, 1e4, 0.5), 7), irf, start);
  const auto hi = fit_trpl(synth::poisson(synth::trpl_mean(p, irf, s, 1e6, 50.0), 7), irf, start);
  CHECK(hi.value("t1") == doctest::Approx(0.55).epsilon(0.05));
  CHECK(hi.value("delta") == doctest::Approx(3.8).epsilon(0.05));
  CHECK(lo.error("t1") / hi.error("t1") == doctest::Approx(10.0).epsilon(0.2));
  CHECK(lo.error("delta") / hi.error("delta") == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("chi-square point estimates are invariant under count rescaling") {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4);
  HistogramShape s{-0.5, 4.5, 0.02};
  const auto irf = IrfModel::gaussian(70);
  const auto data = synth::poisson(synth::trpl_mean(p, irf, s, 2e4, 1.0), 3);
  TrplFitOptions o;
  o.statistic = FitStatistic::chi_square;
  o.starts = 4;
  const auto a = fit_trpl(data, irf, p, o);
  const auto b = fit_trpl(data.scaled(4.0), irf, p, o);
  CHECK(a.value("t1") == b.value("t1"));
  CHECK(a.value("delta") == b.value("delta"));
  CHECK(4.0 * a.value("amplitude") == b.value("amplitude"));
  // Poisson mode reads the scaled counts as more information.
  TrplFitOptions q;
  q.starts = 4;
  const auto pa = fit_trpl(data, irf, p, q);
  const auto pb = fit_trpl(data.scaled(4.0), irf, p, q);
  CHECK(pa.error("t1") / pb.error("t1") == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("fringe fit") {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4, 0.2);
  auto start = p;
  start.t2_star = 1.0;
  const auto data = fringe_data(p);
  const auto r = fit_fringe(data, start);
  CHECK(r.value("t2_star") == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(r.objective < 1e-8);
  CHECK(r.value("t2") == doctest::Approx(0.1556).epsilon(0.002));

  std::mt19937_64 g(1);
  std::normal_distribution<double> noise(0.0, 0.005);
  auto noisy = data;
  for (auto& d : noisy) d.contrast += noise(g);
  const auto rn = fit_fringe(noisy, start);
  CHECK(rn.value("t2_star") == doctest::Approx(0.2).epsilon(0.03));
  CHECK(rn.error("t2_star") > 0.0);

  std::vector<FringePoint> flat{{0.1, 0.5}, {0.2, 0.5}, {0.3, 0.5}};
  CHECK_THROWS_AS(fit_fringe(flat, start), InvalidInput);
  CHECK_THROWS_AS(fit_fringe(std::vector<FringePoint>{{0.1, 0.5}, {0.2, 0.4}}, start), InvalidInput);
}

TEST_CASE("hom fit") {
  const auto p = EmitterParams::equal_lifetime(0.35, 6.4, 0.58);
  HistogramShape s{-1.5, 1.5, 0.02};
  const auto irf = IrfModel::gaussian(70);
  auto [par, perp] = synth::hom_mean(p, irf, s, 1e5);
  auto start = p;
  start.t2_star = 1.5;
  HomFitOptions o;
  o.fit_background = false;
  const auto exact = fit_hom(par, perp, irf, start, o);
  CHECK(exact.value("t2_star") == doctest::Approx(0.58).epsilon(1e-6));

  const auto dp = synth::poisson(par, 11), dq = synth::poisson(perp, 12);
  const auto r = fit_hom(dp, dq, irf, start);
  CHECK(r.value("t2_star") == doctest::Approx(0.58).epsilon(0.08));
  const auto v = visibility_from_histograms(dp, dq);
  CHECK(std::abs(r.value("visibility") - v.value) <= v.std_error);

  HomFitOptions sep;
  sep.shared_amplitude = false;
  const auto rs = fit_hom(dp, dq, irf, start, sep);
  CHECK(rs.value("t2_star") == doctest::Approx(0.58).epsilon(0.08));
  CHECK(rs.parameters.count("amplitude_par") == 1);

  HistogramShape other{-1.0, 1.0, 0.02};
  CHECK_THROWS_AS(fit_hom(Histogram::zeros(other), dq, irf, start), InvalidInput);
}

TEST_CASE("g2 extraction") {
  PulseTrainSpec tr;
  HistogramShape s{-3.5 * tr.period, 3.5 * tr.period, tr.period / 256};
  const auto irf = IrfModel::gaussian(70).coincidence();
  const auto model = hbt_histogram_model(0.015, 0.35, tr, irf, s).scaled(2e4);
  const auto a = extract_g2_zero(model, tr, G2Method::area_ratio);
  CHECK(a.value == doctest::Approx(0.015).epsilon(1e-5));
  const auto m = extract_g2_zero(model, tr, G2Method::model_fit, irf);
  CHECK(m.value == doctest::Approx(0.015).epsilon(1e-5));
  CHECK(m.tau_qd == doctest::Approx(0.35).epsilon(1e-5));

  const auto noisy = synth::poisson(hbt_histogram_model(0.05, 0.35, tr, irf, s).scaled(2e4), 5);
  const auto an = extract_g2_zero(noisy, tr, G2Method::area_ratio);
  const auto mn = extract_g2_zero(noisy, tr, G2Method::model_fit, irf);
  CHECK(an.value == doctest::Approx(0.05).epsilon(0.1));
  CHECK(std::abs(an.value - mn.value) <= 1.5 * std::hypot(an.std_error, mn.std_error));

  const auto zero = synth::poisson(hbt_histogram_model(0.0, 0.35, tr, irf, s).scaled(2e4), 6);
  const auto z = extract_g2_zero(zero, tr, G2Method::area_ratio);
  CHECK(z.value <= 2 * z.std_error);

  HistogramShape narrow{-1.5 * tr.period, 1.5 * tr.period, tr.period / 256};
  CHECK_THROWS_AS(extract_g2_zero(Histogram::zeros(narrow), tr, G2Method::area_ratio), InvalidInput);
  CHECK_THROWS_AS(extract_g2_zero(Histogram::zeros(s), tr, G2Method::area_ratio), InvalidInput);
}

TEST_CASE("rabi fit") {
  // k from the π/2 power: k·√19.6 = π/4.
  const double k = kPi / 4 / std::sqrt(19.6);
  const auto clean = rabi_data(k, 1000.0, 0.0, 20.0, 3.0 * std::sqrt(78.4), 40);
  RabiFitOptions o;
  o.damping = false;
  const auto r = fit_rabi(clean, o);
  CHECK(r.value("p_pi") == doctest::Approx(78.4).epsilon(0.02));
  CHECK(r.objective < 1e-8);
  CHECK_FALSE(r.low_confidence);

  const auto damped = rabi_data(k, 1000.0, 0.05, 20.0, 3.0 * std::sqrt(78.4), 40);
  const auto rd = fit_rabi(damped);
  CHECK(rd.value("k") == doctest::Approx(k).epsilon(0.03));
  CHECK(rd.value("beta") == doctest::Approx(0.05).epsilon(0.03));

  const auto short_range = rabi_data(k, 1000.0, 0.0, 20.0, 0.5 * std::sqrt(78.4), 10);
  CHECK(fit_rabi(short_range, o).low_confidence);
  CHECK_THROWS_AS(fit_rabi(std::vector<RabiPoint>(3), o), InvalidInput);
}

TEST_CASE("efficiency budget") {
  EfficiencyBudget b;
  CHECK(internal_quantum_efficiency(b) == doctest::Approx(1.00345).epsilon(1e-5));
  auto z = b;
  z.detected_rate = 0;
  CHECK(internal_quantum_efficiency(z) == 0.0);
  auto d = b;
  d.collection_efficiency *= 2;
  CHECK(internal_quantum_efficiency(d) == doctest::Approx(internal_quantum_efficiency(b) / 2).epsilon(1e-15));
  auto s = b;
  s.setup_efficiency *= 4;
  CHECK(internal_quantum_efficiency(s) * 4 == doctest::Approx(internal_quantum_efficiency(b)).epsilon(1e-15));
  auto bad = b;
  bad.setup_efficiency = 0;
  CHECK_THROWS_AS(internal_quantum_efficiency(bad), InvalidInput);
}
