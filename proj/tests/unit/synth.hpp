#pragma once

// Synthetic data generators shared by the estimation tests and the
// acceptance suite.

#include <random>

#include "photonstat/estimation.hpp"

namespace synth {

inline photonstat::Histogram poisson(const photonstat::Histogram& mean, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  photonstat::Histogram h = mean;
  for (auto& c : h.counts) {
    c = c > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(c)(g)) : 0.0;
  }
  return h;
}

inline photonstat::Histogram trpl_mean(const photonstat::EmitterParams& p, const photonstat::IrfModel& irf,
                                       const photonstat::HistogramShape& s, double counts, double background) {
  auto h = photonstat::trpl_histogram_model(p, irf, s);
  const double norm = photonstat::cumulative_intensity(p.integration_horizon(), p);
  for (auto& c : h.counts) c = counts * c / norm + background;
  return h;
}

// Co/cross-polarised HOM means with `perp_counts` expected in the cross
// histogram.
inline std::pair<photonstat::Histogram, photonstat::Histogram> hom_mean(const photonstat::EmitterParams& p,
                                                                        const photonstat::IrfModel& irf,
                                                                        const photonstat::HistogramShape& s,
                                                                        double perp_counts) {
  photonstat::HomModelGrid grid(p, irf, s);
  auto [par, perp] = grid.histograms(p.t2_star);
  const double k = perp_counts / perp.total();
  return {par.scaled(k), perp.scaled(k)};
}

}  // namespace synth
