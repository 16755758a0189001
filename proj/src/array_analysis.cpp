#include "photonstat/array_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <utility>

#include "photonstat/error.hpp"
#include "photonstat/units.hpp"

namespace photonstat {

double ArraySite::energy_ueV() const {
  require(lambda_nm.has_value(), "array: dark site has no energy");
  return units::wavelength_to_energy_eV(*lambda_nm) * 1e6;
}

void ArrayMap::validate() const {
  require(rows > 0 && cols > 0, "array: grid dimensions must be positive");
  std::set<std::pair<int, int>> seen;
  for (const auto& s : sites) {
    require(s.row >= 0 && s.row < rows && s.col >= 0 && s.col < cols, "array: site index outside the grid");
    require(seen.emplace(s.row, s.col).second, "array: duplicate site");
    if (s.lambda_nm) require(std::isfinite(*s.lambda_nm) && *s.lambda_nm > 0.0, "array: wavelength must be > 0");
  }
}

namespace {

bool site_less(const ArraySite& a, const ArraySite& b) {
  return std::tie(a.row, a.col) < std::tie(b.row, b.col);
}

struct Emitter {
  ArraySite site;
  double energy;
};

std::vector<Emitter> sorted_emitters(const ArrayMap& map) {
  map.validate();
  std::vector<Emitter> e;
  for (const auto& s : map.sites)
    if (s.lambda_nm) e.push_back({s, s.energy_ueV()});
  std::sort(e.begin(), e.end(), [](const Emitter& a, const Emitter& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return site_less(a.site, b.site);
  });
  return e;
}

void check_window(double w) {
  require(std::isfinite(w) && w >= 0.0, "array: window must be >= 0");
}

}  // namespace

SpectralStats spectral_stats(const ArrayMap& map) {
  map.validate();
  SpectralStats st;
  double sum = 0.0;
  for (const auto& s : map.sites) {
    if (s.lambda_nm) {
      ++st.emitting;
      sum += *s.lambda_nm;
    } else {
      ++st.dark;
    }
  }
  require(st.emitting > 0, "array: no emitting sites");
  st.mean_nm = sum / static_cast<double>(st.emitting);
  double ss = 0.0;
  for (const auto& s : map.sites)
    if (s.lambda_nm) ss += (*s.lambda_nm - st.mean_nm) * (*s.lambda_nm - st.mean_nm);
  st.sigma_nm = std::sqrt(ss / static_cast<double>(st.emitting));
  return st;
}

std::vector<ResonantPair> find_resonant_pairs(const ArrayMap& map, double window_ueV) {
  check_window(window_ueV);
  const auto e = sorted_emitters(map);
  std::vector<ResonantPair> out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size() && e[j].energy - e[i].energy <= window_ueV; ++j) {
      ResonantPair p{e[i].site, e[j].site, e[j].energy - e[i].energy};
      if (site_less(p.second, p.first)) std::swap(p.first, p.second);
      out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end(), [](const ResonantPair& a, const ResonantPair& b) {
    if (a.detuning_ueV != b.detuning_ueV) return a.detuning_ueV < b.detuning_ueV;
    if (site_less(a.first, b.first) || site_less(b.first, a.first)) return site_less(a.first, b.first);
    return site_less(a.second, b.second);
  });
  return out;
}

std::size_t count_disjoint_pairs(const ArrayMap& map, double window_ueV) {
  check_window(window_ueV);
  const auto e = sorted_emitters(map);
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < e.size();) {
    if (e[i + 1].energy - e[i].energy <= window_ueV) {
      ++n;
      i += 2;
    } else {
      ++i;
    }
  }
  return n;
}

std::vector<std::vector<ArraySite>> find_resonant_clusters(const ArrayMap& map, double window_ueV) {
  check_window(window_ueV);
  const auto e = sorted_emitters(map);
  struct Range {
    std::size_t lo, hi;  // inclusive
  };
  std::vector<Range> ranges;
  std::size_t prev_hi = 0;
  for (std::size_t i = 0, j = 0; i < e.size(); ++i) {
    j = std::max(j, i);
    while (j + 1 < e.size() && e[j + 1].energy - e[i].energy <= window_ueV) ++j;
    // Maximal unless the previous window already reached this far.
    if (j > i && (ranges.empty() || j > prev_hi)) ranges.push_back({i, j});
    prev_hi = std::max(prev_hi, j);
  }
  std::stable_sort(ranges.begin(), ranges.end(),
                   [](const Range& a, const Range& b) { return a.hi - a.lo > b.hi - b.lo; });
  std::vector<std::vector<ArraySite>> out;
  for (const auto& r : ranges) {
    std::vector<ArraySite> c;
    for (std::size_t k = r.lo; k <= r.hi; ++k) c.push_back(e[k].site);
    out.push_back(std::move(c));
  }
  return out;
}

StarkPlan stark_tuning_plan(const ArraySite& a, const ArraySite& b, double rate_nm_per_V) {
  require(a.lambda_nm && b.lambda_nm, "stark: both sites must be emitting");
  require(std::isfinite(rate_nm_per_V) && rate_nm_per_V > 0.0, "stark: rate must be > 0");
  const double half = 0.5 * (*b.lambda_nm - *a.lambda_nm);
  StarkPlan p;
  p.target_nm = *a.lambda_nm + half;
  p.voltage_first = half / rate_nm_per_V;
  p.voltage_second = -half / rate_nm_per_V;
  return p;
}

}  // namespace photonstat
