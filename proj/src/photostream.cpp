#include "photonstat/photostream.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "photonstat/error.hpp"
#include "photonstat/parallel.hpp"
#include "photonstat/units.hpp"

namespace photonstat {

void TimestampStream::validate() const {
  require(std::isfinite(meta.duration) && meta.duration >= 0.0, "stream: duration must be >= 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]), "stream: non-finite timestamp");
    require(i == 0 || times[i - 1] <= times[i], "stream: timestamps must be sorted");
    require(times[i] >= 0.0 && times[i] < meta.duration, "stream: timestamp outside [0, duration)");
  }
}

void SimConfig::validate() const {
  require(n_pulses > 0, "sim: n_pulses must be > 0");
  require(emission_prob > 0.0 && emission_prob <= 1.0, "sim: emission_prob must lie in (0, 1]");
  require(double_emission_prob >= 0.0 && double_emission_prob <= emission_prob,
          "sim: double_emission_prob must lie in [0, emission_prob]");
  require(chunk_pulses > 0, "sim: chunk_pulses must be > 0");
  train.validate();
  irf.validate();
}

EmissionSampler::EmissionSampler(const EmitterParams& params) {
  params.validate();
  const double total = wavepacket_norm(params);
  if (!(total > 0.0)) throw NumericalError("sampler: wavepacket has zero norm (Δ = 0 with equal lifetimes)");
  const double horizon = params.integration_horizon();
  std::size_t n = 8192;
  if (params.delta != 0.0) {
    const double period = units::beat_period(params.delta);
    n = std::max<std::size_t>(n, static_cast<std::size_t>(std::ceil(64.0 * horizon / period)));
  }
  require(n < 50'000'000, "sampler: beat period too short relative to the lifetime");
  t_.resize(n + 1);
  f_.resize(n + 1);
  d_.resize(n + 1);
  const double h = horizon / static_cast<double>(n);
  const double end = cumulative_intensity(horizon, params);
  for (std::size_t i = 0; i <= n; ++i) {
    t_[i] = h * static_cast<double>(i);
    f_[i] = cumulative_intensity(t_[i], params) / end;
    d_[i] = time_resolved_intensity(t_[i], params) / end;
  }
  f_.front() = 0.0;
  f_.back() = 1.0;
  for (std::size_t i = 1; i <= n; ++i) f_[i] = std::max(f_[i], f_[i - 1]);
  // Fritsch–Carlson limiter keeps each Hermite segment monotone.
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (f_[i + 1] - f_[i]) / h;
    if (s <= 0.0) {
      d_[i] = d_[i + 1] = 0.0;
      continue;
    }
    const double a = d_[i] / s, b = d_[i + 1] / s;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      d_[i] = tau * a * s;
      d_[i + 1] = tau * b * s;
    }
  }
}

namespace {

double hermite(double f0, double f1, double d0, double d1, double h, double x) {
  const double x2 = x * x, x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * h * d0 + (-2 * x3 + 3 * x2) * f1 +
         (x3 - x2) * h * d1;
}

}  // namespace

double EmissionSampler::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= t_.back()) return 1.0;
  const double h = t_[1] - t_[0];
  const std::size_t i = std::min(static_cast<std::size_t>(t / h), t_.size() - 2);
  return hermite(f_[i], f_[i + 1], d_[i], d_[i + 1], h, (t - t_[i]) / h);
}

double EmissionSampler::quantile(double u) const {
  require(u > 0.0 && u < 1.0, "sampler: u must lie in (0, 1)");
  const auto it = std::upper_bound(f_.begin(), f_.end(), u);
  const std::size_t i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - f_.begin() - 1, 0,
                                                                            std::ptrdiff_t(f_.size()) - 2));
  const double h = t_[i + 1] - t_[i];
  // Safeguarded Newton on the monotone segment.
  double lo = 0.0, hi = 1.0;
  double x = f_[i + 1] > f_[i] ? (u - f_[i]) / (f_[i + 1] - f_[i]) : 0.5;
  for (int it2 = 0; it2 < 60; ++it2) {
    const double g = hermite(f_[i], f_[i + 1], d_[i], d_[i + 1], h, x) - u;
    if (g > 0.0) hi = x;
    else lo = x;
    const double x2 = x * x;
    const double dg = (6 * x2 - 6 * x) * f_[i] + (3 * x2 - 4 * x + 1) * h * d_[i] +
                      (-6 * x2 + 6 * x) * f_[i + 1] + (3 * x2 - 2 * x) * h * d_[i + 1];
    double next = dg > 0.0 ? x - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15) {
      x = next;
      break;
    }
    x = next;
  }
  return t_[i] + h * x;
}

double sample_emission_time(const EmitterParams& params, Philox& rng) {
  return EmissionSampler(params)(rng);
}

std::vector<double> sample_phase_path(const std::vector<double>& t_grid, double t2_star, Philox& rng) {
  require(t2_star > 0.0, "phase path: t2_star must be > 0");
  std::vector<double> phi(t_grid.size(), 0.0);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    const double dt = t_grid[i] - t_grid[i - 1];
    require(dt >= 0.0, "phase path: time grid must be sorted");
    const double sd = std::isinf(t2_star) ? 0.0 : std::sqrt(2.0 * dt / t2_star);
    phi[i] = phi[i - 1] + sd * rng.normal();
  }
  return phi;
}

std::pair<TimestampStream, TimestampStream> generate_hbt_stream(const EmitterParams& params,
                                                                const SimConfig& config) {
  params.validate();
  config.validate();
  std::optional<EmissionSampler> sampler;
  if (config.profile == EmissionProfile::three_level) sampler.emplace(params);
  const double period = config.train.period;
  const double duration = period * static_cast<double>(config.n_pulses);
  const double sigma = config.irf.sigma_ns();
  const double p1 = config.emission_prob;
  const double p2 = config.double_emission_prob;

  const std::size_t chunks = (config.n_pulses + config.chunk_pulses - 1) / config.chunk_pulses;
  std::vector<std::array<std::vector<double>, 2>> out(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t first = c * config.chunk_pulses;
    const std::uint64_t last = std::min<std::uint64_t>(first + config.chunk_pulses, config.n_pulses);
    auto& buf = out[c];
    for (std::uint64_t k = first; k < last; ++k) {
      Philox rng(config.seed, streams::tag(streams::kHbt, k));
      const double u = rng.uniform();
      const int photons = u < p2 ? 2 : (u < p1 ? 1 : 0);
      for (int p = 0; p < photons; ++p) {
        double delay = sampler ? (*sampler)(rng) : rng.exponential(params.t1_a);
        if (sigma > 0.0) delay += sigma * rng.normal();
        const int ch = rng.uniform() < 0.5 ? 0 : 1;
        const double t = period * static_cast<double>(k) + delay;
        if (t >= 0.0 && t < duration) buf[ch].push_back(t);
      }
    }
  });

  std::pair<TimestampStream, TimestampStream> result;
  auto fill = [&](TimestampStream& s, int ch) {
    s.channel = ch;
    s.meta = {config.seed, duration, "generate_hbt_stream"};
    std::size_t n = 0;
    for (const auto& b : out) n += b[ch].size();
    s.times.reserve(n);
    for (const auto& b : out) s.times.insert(s.times.end(), b[ch].begin(), b[ch].end());
    std::sort(s.times.begin(), s.times.end());
  };
  fill(result.first, 0);
  fill(result.second, 1);
  return result;
}

std::vector<std::pair<double, double>> sample_two_time_pairs(const EmitterParams& params,
                                                             const PulseTrainSpec& train,
                                                             std::size_t n, std::uint64_t seed,
                                                             PairTerms terms) {
  params.validate();
  train.validate();
  require(train.double_pulse_delay > 0.0, "pairs: double_pulse_delay must be > 0");
  const EmissionSampler sampler(params);
  const double dT = train.double_pulse_delay;
  const double t2s = params.t2_star;
  constexpr std::size_t kChunk = 1 << 14;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<std::pair<double, double>>> out(chunks);
  std::vector<std::uint64_t> proposals(chunks, 0);

  parallel_for(chunks, [&](std::size_t c) {
    Philox rng(seed, streams::tag(streams::kPairs, c));
    const std::size_t want = std::min(kChunk, n - c * kChunk);
    auto& buf = out[c];
    buf.reserve(want);
    while (buf.size() < want) {
      ++proposals[c];
      if (proposals[c] > 10000 && buf.size() < proposals[c] / 10000) {
        throw NumericalError("pairs: rejection efficiency below 1e-4");
      }
      const double s1 = sampler(rng), s2 = sampler(rng);
      // Mixture weights 1:1:1:1:1:1:2 (the central term carries the factor 2).
      const int term = terms == PairTerms::central ? 6
                                                   : std::min(7, static_cast<int>(rng.uniform() * 8.0));
      double t1 = 0, t2 = 0;
      switch (term) {
        case 0: t1 = s1 + dT; t2 = s2 + 2 * dT; break;
        case 1: t2 = s1 + dT; t1 = s2 + 2 * dT; break;
        case 2: t1 = s1; t2 = s2 + 2 * dT; break;
        case 3: t2 = s1; t1 = s2 + 2 * dT; break;
        case 4: t1 = s1; t2 = s2 + dT; break;
        case 5: t2 = s1; t1 = s2 + dT; break;
        default: {
          const double keep = std::isinf(t2s) ? 0.0 : 1.0 - std::exp(-2.0 * std::abs(s2 - s1) / t2s);
          if (rng.uniform() >= keep) continue;
          t1 = s1 + dT;
          t2 = s2 + dT;
        }
      }
      buf.emplace_back(t1, t2);
    }
  });

  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(n);
  for (auto& b : out) pairs.insert(pairs.end(), b.begin(), b.end());
  return pairs;
}

TimestampStream apply_irf_jitter(const TimestampStream& stream, const IrfModel& irf, std::uint64_t seed) {
  irf.validate();
  TimestampStream out = stream;
  out.times.clear();
  const double sigma = irf.sigma_ns();
  Philox rng(seed, streams::tag(streams::kJitter, static_cast<std::uint64_t>(stream.channel)));
  for (double t : stream.times) {
    const double j = t + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
    if (j >= 0.0 && j < stream.meta.duration) out.times.push_back(j);
  }
  std::sort(out.times.begin(), out.times.end());
  return out;
}

double double_prob_for_g2(double g2, double emission_prob) {
  require(emission_prob > 0.0 && emission_prob <= 1.0, "double_prob_for_g2: emission_prob must lie in (0, 1]");
  require(g2 >= 0.0, "double_prob_for_g2: g2 must be >= 0");
  // g2 (p1 + p2)² = 2 p2  →  g2 p2² + (2 g2 p1 - 2) p2 + g2 p1² = 0, small root.
  if (g2 == 0.0) return 0.0;
  const double p1 = emission_prob;
  const double b = 2.0 * g2 * p1 - 2.0;
  const double disc = b * b - 4.0 * g2 * g2 * p1 * p1;
  require(disc >= 0.0, "double_prob_for_g2: g2 not reachable");
  const double p2 = (2.0 * g2 * p1 * p1) / (-b + std::sqrt(disc));
  require(p2 <= p1, "double_prob_for_g2: g2 not reachable for this emission_prob");
  return p2;
}

Histogram correlate(const TimestampStream& a, const TimestampStream& b, const HistogramShape& shape) {
  shape.validate();
  for (const auto* s : {&a, &b}) {
    for (std::size_t i = 1; i < s->times.size(); ++i) {
      require(s->times[i - 1] <= s->times[i], "correlate: timestamps must be sorted");
    }
  }
  const std::size_t nb = shape.bins();
  std::vector<std::uint64_t> counts(nb, 0);
  std::size_t lo = 0;
  const auto& bt = b.times;
  for (double ta : a.times) {
    while (lo < bt.size() && bt[lo] - ta < shape.t_min) ++lo;
    for (std::size_t j = lo; j < bt.size(); ++j) {
      const double d = bt[j] - ta;
      if (d >= shape.t_max) break;
      const auto k = static_cast<std::size_t>(std::floor((d - shape.t_min) / shape.bin_width));
      if (k < nb) ++counts[k];
    }
  }
  Histogram h = Histogram::zeros(shape);
  for (std::size_t k = 0; k < nb; ++k) h.counts[k] = static_cast<double>(counts[k]);
  return h;
}

Histogram sample_poisson_counts(const Histogram& mean, std::uint64_t seed) {
  mean.validate();
  Histogram out = mean;
  for (std::size_t i = 0; i < out.bins(); ++i) {
    const double m = mean.counts[i];
    if (m <= 0.0) {
      out.counts[i] = 0.0;
      continue;
    }
    Philox rng(seed, streams::tag(streams::kCounts, i));
    out.counts[i] = static_cast<double>(std::poisson_distribution<long long>(m)(rng));
  }
  return out;
}

}  // namespace photonstat
