#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "photonstat/emitter.hpp"
#include "photonstat/histogram.hpp"
#include "photonstat/interferometry.hpp"
#include "photonstat/rng.hpp"

namespace photonstat {

/// Sorted detection times (ns) of one detector channel.
struct TimestampStream {
  int channel = 0;
  std::vector<double> times;
  struct Meta {
    std::uint64_t seed = 0;
    double duration = 0.0;  ///< acquisition window [0, duration), ns
    std::string source;
  } meta;

  /// Throws InvalidInput unless times are sorted and inside [0, duration).
  void validate() const;
};

enum class EmissionProfile {
  three_level,  ///< beating wavepacket I(t)
  exponential,  ///< single exponential with τ = t1_a
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::uint64_t n_pulses = 1000000;
  double emission_prob = 0.1;         ///< P(at least one photon per pulse)
  double double_emission_prob = 0.0;  ///< P(two photons per pulse)
  PulseTrainSpec train;
  IrfModel irf;  ///< per-detector jitter
  EmissionProfile profile = EmissionProfile::three_level;
  std::uint64_t chunk_pulses = 1 << 16;

  void validate() const;
};

/// Inverse-CDF sampler for the emission delay after the pulse. The closed
/// form cumulative intensity is tabulated on a grid much finer than the
/// beat period, interpolated by a monotone cubic Hermite spline and inverted
/// per draw.
class EmissionSampler {
 public:
  explicit EmissionSampler(const EmitterParams& params);

  double quantile(double u) const;
  double operator()(Philox& rng) const { return quantile(rng.uniform()); }
  /// Normalised CDF of the spline.
  double cdf(double t) const;
  double horizon() const { return t_.back(); }

 private:
  std::vector<double> t_;
  std::vector<double> f_;
  std::vector<double> d_;
};

/// One delay drawn from I(t)/I₀. Builds a sampler per call; use
/// EmissionSampler directly for many draws.
double sample_emission_time(const EmitterParams& params, Philox& rng);

/// Wiener phase path φ(t_i) with φ(t_0) = 0 and increments of variance
/// 2Δt/T2*, so ⟨e^{i(φ(t+τ)-φ(t))}⟩ = e^{-τ/T2*}.
std::vector<double> sample_phase_path(const std::vector<double>& t_grid, double t2_star, Philox& rng);

/// Two-detector HBT stream: 50/50 beam splitter, per-detector Gaussian
/// jitter, pulses at k·period. Output is identical for any thread count.
std::pair<TimestampStream, TimestampStream> generate_hbt_stream(const EmitterParams& params,
                                                                const SimConfig& config);

enum class PairTerms {
  all,      ///< the seven terms of the double-pulse HOM map
  central,  ///< only the slot-ΔT/slot-ΔT interference term
};

/// Detection-time pairs (t1, t2) drawn from the co-polarised HOM two-time
/// map by mixture rejection sampling.
std::vector<std::pair<double, double>> sample_two_time_pairs(const EmitterParams& params,
                                                             const PulseTrainSpec& train,
                                                             std::size_t n, std::uint64_t seed,
                                                             PairTerms terms = PairTerms::all);

/// Adds Gaussian jitter; events pushed outside [0, duration) are dropped.
TimestampStream apply_irf_jitter(const TimestampStream& stream, const IrfModel& irf, std::uint64_t seed);

/// double_emission_prob that makes the HBT area ratio equal g2 for the
/// given emission_prob: solves g2 = 2 p2 / (p1 + p2)².
double double_prob_for_g2(double g2, double emission_prob);

/// Poisson counts with the given per-bin means; bin i draws from its own
/// stream so the result does not depend on evaluation order.
Histogram sample_poisson_counts(const Histogram& mean, std::uint64_t seed);

/// Start-stop histogram of b relative to a: every pair with
/// b_j - a_i in [t_min, t_max) is counted once.
Histogram correlate(const TimestampStream& a, const TimestampStream& b, const HistogramShape& shape);

}  // namespace photonstat
