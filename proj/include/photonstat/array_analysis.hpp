#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace photonstat {

struct ArraySite {
  int row = 0;
  int col = 0;
  std::optional<double> lambda_nm;  ///< empty for a dark site

  double energy_ueV() const;  ///< hc/λ in µeV; throws for a dark site
};

struct ArrayMap {
  int rows = 0;
  int cols = 0;
  std::vector<ArraySite> sites;

  /// Grid indices in range, no duplicate sites, wavelengths finite and > 0.
  void validate() const;
};

struct SpectralStats {
  double mean_nm = 0.0;
  double sigma_nm = 0.0;  ///< population standard deviation
  std::size_t emitting = 0;
  std::size_t dark = 0;
};

SpectralStats spectral_stats(const ArrayMap& map);

struct ResonantPair {
  ArraySite first;   ///< lower (row, col)
  ArraySite second;
  double detuning_ueV = 0.0;
};

/// Every pair of emitting sites with |E_i - E_j| <= window, sorted by
/// detuning, ties by the (row, col) of the first then second site.
std::vector<ResonantPair> find_resonant_pairs(const ArrayMap& map, double window_ueV);

/// Largest set of disjoint resonant pairs (greedy over energy-sorted sites).
std::size_t count_disjoint_pairs(const ArrayMap& map, double window_ueV);

/// Maximal groups of at least two sites whose energies span <= window.
/// Largest first, ties by the lowest energy in the group.
std::vector<std::vector<ArraySite>> find_resonant_clusters(const ArrayMap& map, double window_ueV);

struct StarkPlan {
  double target_nm = 0.0;
  double voltage_first = 0.0;   ///< V; positive red-shifts the site
  double voltage_second = 0.0;
};

/// Meet-in-the-middle Stark tuning with a linear shift rate (nm/V).
StarkPlan stark_tuning_plan(const ArraySite& a, const ArraySite& b, double rate_nm_per_V = 1.0);

}  // namespace photonstat
