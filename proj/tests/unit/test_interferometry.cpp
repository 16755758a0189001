#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "photonstat/error.hpp"
#include "photonstat/interferometry.hpp"
#include "photonstat/quadrature.hpp"

using namespace photonstat;

namespace {

EmitterParams paper(double t2s) { return EmitterParams::equal_lifetime(0.35, 6.4, t2s); }

}  // namespace

TEST_CASE("fringe contrast is one at zero delay") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> ut1(0.05, 2.0), ud(0.1, 40.0), ut2(0.01, 20.0);
  for (int i = 0; i < 100; ++i) {
    EmitterParams p;
    p.t1_a = ut1(g);
    p.t1_b = (i % 3 == 0) ? ut1(g) : p.t1_a;
    p.delta = ud(g);
    p.t2_star = ut2(g);
    CHECK(std::abs(fringe_contrast(0.0, p) - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(fringe_contrast(-0.1, paper(0.2)), InvalidInput);
}

TEST_CASE("fringe contrast against direct quadrature") {
  const auto p = paper(0.2);
  for (double tau : {0.1, 0.3, 0.515, 0.9}) {
    CHECK(fringe_contrast(tau, p) == doctest::Approx(oracle::fringe(tau, 0.35, 6.4, 0.2)).epsilon(1e-7));
  }
}

TEST_CASE("fringe second peak location") {
  // Grid search on the library, cross-checked against the oracle.
  const auto p = paper(0.2);
  double best_tau = 0, best = 0;
  double prev2 = fringe_contrast(0.299, p), prev = fringe_contrast(0.3, p);
  for (double tau = 0.301; tau <= 0.7; tau += 0.001) {
    const double c = fringe_contrast(tau, p);
    if (prev > prev2 && prev > c && prev > best) { best = prev; best_tau = tau - 0.001; }
    prev2 = prev;
    prev = c;
  }
  CHECK(best_tau == doctest::Approx(0.515).epsilon(0.003 / 0.515));
  CHECK(best == doctest::Approx(0.0229).epsilon(0.001 / 0.0229));
  CHECK(oracle::fringe(best_tau, 0.35, 6.4, 0.2) == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("fringe single-exponential limit") {
  EmitterParams p = EmitterParams::equal_lifetime(0.35, 0.0, std::numeric_limits<double>::infinity());
  double prev = 2.0;
  for (double tau = 0.0; tau < 3.0; tau += 0.1) {
    const double c = fringe_contrast(tau, p);
    CHECK(c == doctest::Approx(std::exp(-tau / 0.7)).epsilon(1e-12));
    CHECK(c <= prev);
    prev = c;
  }
  p.t2_star = 0.4;
  prev = 2.0;
  for (double tau = 0.0; tau < 3.0; tau += 0.1) {
    const double c = fringe_contrast(tau, p);
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("coherence time") {
  CHECK(coherence_time(paper(0.2)) == doctest::Approx(0.15556).epsilon(1e-4));
  CHECK(coherence_time(paper(std::numeric_limits<double>::infinity())) == doctest::Approx(0.7));
  CHECK(coherence_time(paper(0.7)) == doctest::Approx(0.35));
}

TEST_CASE("HOM densities") {
  const auto p = paper(0.58);
  CHECK(hom_g2_parallel(0.0, p) == 0.0);
  CHECK(hom_g2_perp(0.0, p) > 0.0);
  CHECK(hom_g2_perp(0.0, p) == doctest::Approx(oracle::g_perp(0.0, 0.35, 6.4)).epsilon(1e-7));
  for (double tau = -2.0; tau <= 2.0; tau += 0.05) {
    const double par = hom_g2_parallel(tau, p), perp = hom_g2_perp(tau, p);
    CHECK(par >= 0.0);
    CHECK(par <= perp);
    CHECK(par == doctest::Approx(hom_g2_parallel(-tau, p)).epsilon(1e-14));
    CHECK(perp == doctest::Approx(oracle::g_perp(tau, 0.35, 6.4)).epsilon(1e-6));
  }
  CHECK(hom_g2_parallel(6.0, p) / hom_g2_perp(6.0, p) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(hom_g2_perp(40.0, p) < 1e-40);
  const auto d0 = EmitterParams::equal_lifetime(0.35, 0.0, 0.58);
  CHECK(hom_g2_perp(0.3, d0) == 0.0);
}

TEST_CASE("HOM side features near the beat period") {
  const auto p = paper(0.58);
  double best_tau = 0, best = 0;
  for (double tau = 0.45; tau <= 0.9; tau += 0.001) {
    const double v = hom_g2_perp(tau, p);
    if (v > best) { best = v; best_tau = tau; }
  }
  CHECK(best_tau == doctest::Approx(0.646).epsilon(0.01));
}

TEST_CASE("unequal-lifetime HOM reduces to the equal case") {
  auto p = paper(0.58);
  auto q = p;
  q.t1_b = 0.35 * (1 + 1e-12);
  for (double tau : {0.0, 0.2, 0.7}) {
    CHECK(hom_g2_perp(tau, q) == doctest::Approx(hom_g2_perp(tau, p)).epsilon(1e-7));
  }
}

TEST_CASE("two-time map") {
  const auto p = paper(0.58);
  PulseTrainSpec train;
  train.double_pulse_delay = 10.0;
  CHECK(hom_two_time_terms(10.3, 10.3, p, train).interference == 0.0);
  CHECK(hom_two_time_map(10.3, 10.4, p, train) >= 0.0);

  // Marginal over t1 at fixed τ of the interference term: 32·g∥(τ).
  for (double tau : {0.1, 0.3, 0.65}) {
    QuadratureOptions o;
    o.rel_tol = 1e-11;
    const double m = integrate(
        [&](double t1) { return hom_two_time_terms(t1, t1 + tau, p, train).interference; }, 10.0, 10.0 + 20 * 0.35,
        o);
    CHECK(m == doctest::Approx(kHomMarginalConstant * hom_g2_parallel(tau, p)).epsilon(1e-6));
    // The full map agrees when ΔT ≫ T1.
    const double full = integrate([&](double t1) { return hom_two_time_map(t1, t1 + tau, p, train); }, 10.0,
                                  10.0 + 20 * 0.35, o);
    CHECK(full == doctest::Approx(m).epsilon(1e-6));
  }

  // Isolated peaks along t2 at ΔT spacing for t1 in slot 0.
  CHECK(hom_two_time_map(0.3, 5.0, p, train) < 1e-6 * hom_two_time_map(0.3, 10.3, p, train));
  CHECK(hom_two_time_map(0.3, 20.3, p, train) > 0.0);
}

TEST_CASE("fold_model conserves interior mass") {
  HistogramShape s{-2.0, 2.0, 0.05};
  for (const auto& irf : {IrfModel::delta(), IrfModel::gaussian(70.0)}) {
    const auto h = fold_density(s, irf, [](double t) { return std::exp(-t * t / 0.02); });
    const double expected = std::sqrt(oracle::kPi * 0.02);
    CHECK(h.total() == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("fold_model of a box against the analytic gaussian blur") {
  // Unit-density box on [0, 0.5) convolved with a gaussian of σ: exact bin
  // masses from the integrated error function.
  HistogramShape s{-0.5, 1.0, 0.02};
  const auto irf = IrfModel::gaussian(60.0);
  const double sigma = irf.sigma_ns();
  const auto h = fold_model(s, irf, [](double a, double b) {
    return std::max(0.0, std::min(b, 0.5) - std::max(a, 0.0));
  });
  auto psi = [&](double u) {
    return u * 0.5 * std::erfc(-u / (sigma * std::sqrt(2.0))) +
           sigma / std::sqrt(2 * oracle::kPi) * std::exp(-u * u / (2 * sigma * sigma));
  };
  // Mass of [x0, x1) under box⊗gauss = ∫_{x0}^{x1} [Φ((x)/σ) - Φ((x-0.5)/σ)] dx.
  auto mass = [&](double x0, double x1) { return psi(x1) - psi(x0) - psi(x1 - 0.5) + psi(x0 - 0.5); };
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double lo = s.lower_edge(i);
    CHECK(std::abs(h.counts[i] - mass(lo, lo + 0.02)) < 1e-9);
  }
}

TEST_CASE("HBT model area ratio") {
  PulseTrainSpec train;
  HistogramShape s{-3.5 * train.period, 3.5 * train.period, train.period / 256};
  for (double g2 : {0.0, 0.015, 0.05, 0.4}) {
    const auto h = hbt_histogram_model(g2, 0.35, train, IrfModel::delta(), s);
    auto area = [&](int m) { return h.sum_centers_in(m * train.period - train.period / 2, m * train.period + train.period / 2 - 1e-12); };
    double side = 0;
    for (int m : {-3, -2, -1, 1, 2, 3}) side += area(m);
    side /= 6;
    CHECK(side == doctest::Approx(1.0).epsilon(1e-6));
    // Only the Laplace tails of the neighbouring peaks reach the central
    // window, ~e^{-T/2τ}.
    if (g2 == 0.0) CHECK(area(0) < 2 * std::exp(-train.period / (2 * 0.35)));
    else CHECK(area(0) / side == doctest::Approx(g2).epsilon(1e-6));
  }
  HistogramShape tiny{-2.0, 2.0, 0.05};
  CHECK_THROWS_AS(hbt_histogram_model(0.1, 0.35, train, IrfModel::delta(), tiny), InvalidInput);
}

TEST_CASE("irf_convolve") {
  HistogramShape s{-1.0, 1.0, 0.01};
  Histogram spike = Histogram::zeros(s);
  spike.counts[100] = 1000.0;
  const auto id = irf_convolve(spike, IrfModel::delta());
  CHECK(id.histogram.counts == spike.counts);

  const auto r = irf_convolve(spike, IrfModel::gaussian(70.0));
  CHECK(r.histogram.total() + r.truncated == doctest::Approx(1000.0).epsilon(1e-9));
  const double peak = *std::max_element(r.histogram.counts.begin(), r.histogram.counts.end());
  std::size_t above = 0;
  for (double c : r.histogram.counts) above += c >= peak / 2 ? 1 : 0;
  CHECK(std::abs(static_cast<double>(above) * 0.01 - 0.070) <= 0.01 + 1e-12);

  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(0, 100);
  Histogram rnd = Histogram::zeros(s);
  for (std::size_t i = 30; i < rnd.bins() - 30; ++i) rnd.counts[i] = u(g);
  const auto rr = irf_convolve(rnd, IrfModel::gaussian(70.0));
  CHECK(rr.histogram.total() == doctest::Approx(rnd.total()).epsilon(1e-9));
  CHECK(rr.truncated < 1e-9 * rnd.total());

  HistogramShape coarse{-1.0, 1.0, 0.05};
  CHECK_THROWS_AS(irf_convolve(Histogram::zeros(coarse), IrfModel::gaussian(70.0)), InvalidInput);
}

TEST_CASE("visibility from histograms") {
  HistogramShape s{-2.0, 2.0, 0.05};
  Histogram perp = Histogram::zeros(s), par = Histogram::zeros(s);
  for (auto& c : perp.counts) c = 10.0;
  CHECK(visibility_from_histograms(par, perp).value == 1.0);
  CHECK(visibility_from_histograms(perp, perp).value == 0.0);
  CHECK_THROWS_AS(visibility_from_histograms(perp, par), NumericalError);

  // Eqs. 3–4 binned over [−1, 1] ns; oracle sums Simpson integrals per bin.
  const auto p = paper(0.58);
  HistogramShape w{-1.0, 1.0, 0.05};
  HomModelGrid grid(p, IrfModel::delta(), w);
  const auto [hp, hq] = grid.histograms(0.58);
  const double v = visibility_from_histograms(hp, hq).value;
  const double num = oracle::simpson([&](double t) { return oracle::g_par(t, 0.35, 6.4, 0.58); }, -1.0, 1.0, 400);
  const double den = oracle::simpson([&](double t) { return oracle::g_perp(t, 0.35, 6.4); }, -1.0, 1.0, 400);
  CHECK(v == doctest::Approx(1.0 - num / den).epsilon(1e-5));
  CHECK(v == doctest::Approx(0.539).epsilon(0.002 / 0.539));
  CHECK(std::abs(v - 0.55) <= 0.03);
}

TEST_CASE("HomModelGrid matches fold_density") {
  const auto p = paper(0.58);
  HistogramShape w{-2.0, 2.0, 0.05};
  const auto irf = IrfModel::gaussian(70.0);
  HomModelGrid grid(p, irf, w);
  const auto [hp, hq] = grid.histograms(0.58);
  const auto fp = fold_density(w, irf, [&](double t) { return hom_g2_parallel(t, p); });
  for (std::size_t i = 0; i < w.bins(); ++i) {
    CHECK(std::abs(hp.counts[i] - fp.counts[i]) < 1e-6 * hp.total() / static_cast<double>(w.bins()));
  }
}

TEST_CASE("trpl model integrates the intensity") {
  const auto p = paper(1.0);
  HistogramShape s{-0.5, 8.0, 0.01};
  const auto h = trpl_histogram_model(p, IrfModel::delta(), s);
  CHECK(h.total() == doctest::Approx(wavepacket_norm(p)).epsilon(1e-9));
  for (std::size_t i = 0; i < 50; ++i) CHECK(h.counts[i] == 0.0);
  const auto hg = trpl_histogram_model(p, IrfModel::gaussian(50.0), s);
  CHECK(hg.total() == doctest::Approx(wavepacket_norm(p)).epsilon(1e-9));
}
