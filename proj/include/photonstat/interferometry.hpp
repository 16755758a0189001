#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "photonstat/emitter.hpp"
#include "photonstat/histogram.hpp"

namespace photonstat {

/// Timing response of the detection chain. fwhm is in ps.
struct IrfModel {
  enum class Shape { gaussian, delta };

  Shape shape = Shape::gaussian;
  double fwhm = 70.0;

  static IrfModel delta() { return {Shape::delta, 0.0}; }
  static IrfModel gaussian(double fwhm_ps) { return {Shape::gaussian, fwhm_ps}; }

  void validate() const;
  bool is_delta() const { return shape == Shape::delta; }
  /// Gaussian standard deviation in ns (fwhm / 2√(2 ln 2)).
  double sigma_ns() const;
  /// Response of a coincidence between two detectors that each have this IRF.
  IrfModel coincidence() const;
};

/// Pulsed excitation timing.
struct PulseTrainSpec {
  double period = 1000.0 / 78.0;   ///< laser pulse spacing, ns
  double double_pulse_delay = 0.0; ///< HOM double-pulse separation ΔT, ns (0 = single pulse)
  int n_side_peaks = 3;            ///< side peaks kept on each side in histogram models

  void validate() const;
};

/// Michelson fringe contrast versus arm delay τ_d (ns).
///
/// For equal lifetimes this is the closed bracket
///   |∫ e^{-t/T1} sin(Δωt/2) sin(Δω(t+τ)/2) dt| e^{-τ/2T1} e^{-τ/T2*}
/// normalised by the same integral at τ = 0, which makes contrast(0) = 1
/// exactly. Unequal lifetimes use the complex overlap |∫ f(t) f*(t+τ) dt|.
double fringe_contrast(double tau_d, const EmitterParams& params);

/// Total coherence time T2 from 1/T2 = 1/(2 T1) + 1/T2*, with T1 = t1_a.
double coherence_time(const EmitterParams& params);

/// Cross-polarised (distinguishable) HOM central-peak density.
double hom_g2_perp(double tau, const EmitterParams& params);
/// Co-polarised HOM central-peak density: g⊥(τ)·[1 - e^{-2|τ|/T2*}].
double hom_g2_parallel(double tau, const EmitterParams& params);

/// 1 - ∫g∥/∫g⊥ over [lo, hi] by quadrature, without IRF.
double hom_model_visibility(const EmitterParams& params, double lo = -1.0, double hi = 1.0);

/// The two groups of terms of the two-time HOM correlation map.
struct HomMapTerms {
  /// Six terms pairing photons from different pulse slots.
  double distinguishable = 0.0;
  /// Slot-ΔT/slot-ΔT term weighted by [2 - 2e^{-2|t2-t1|/T2*}].
  double interference = 0.0;

  double total() const { return distinguishable + interference; }
};

HomMapTerms hom_two_time_terms(double t1, double t2, const EmitterParams& params,
                               const PulseTrainSpec& train);
/// g2(t1, t2) for the double-pulse HOM geometry, in units of I(t)².
double hom_two_time_map(double t1, double t2, const EmitterParams& params,
                        const PulseTrainSpec& train);

/// ∫ dt2 of the interference term at fixed τ equals this constant times
/// hom_g2_parallel(τ).
inline constexpr double kHomMarginalConstant = 32.0;

/// Mass of a model density over [a, b).
using MassFunction = std::function<double(double a, double b)>;

/// Bins a model given as interval masses, folding in the IRF on a grid
/// `fine_factor` times finer than the histogram binning (refined further
/// when the IRF is narrow). The model is evaluated on a padded range so no
/// mass is lost at the window edges.
Histogram fold_model(const HistogramShape& shape, const IrfModel& irf, const MassFunction& mass,
                     int fine_factor = 5);

/// Same, for a model known only as a pointwise density (Simpson per sub-bin).
Histogram fold_density(const HistogramShape& shape, const IrfModel& irf,
                       const std::function<double(double)>& density, int fine_factor = 5);

/// Pulsed HBT coincidence model
///   h(τ) = A ∫ IRF(t)[Σ_{m≠0} e^{-|τ-t-mT|/τQD} + g2(0) e^{-|τ-t|/τQD}] dt
/// with A chosen so each side peak has unit area. |m| ≤ train.n_side_peaks.
Histogram hbt_histogram_model(double g2_zero, double tau_qd, const PulseTrainSpec& train,
                              const IrfModel& irf, const HistogramShape& shape);

/// Time-resolved intensity I(t) binned and folded with the IRF. The pulse
/// arrives at t = 0; I(t) = 0 before it.
Histogram trpl_histogram_model(const EmitterParams& params, const IrfModel& irf,
                               const HistogramShape& shape);

/// Caches g⊥ on the fine grid of a histogram shape so HOM histograms for
/// many T2* values (fits, parameter scans) cost one pass each.
class HomModelGrid {
 public:
  HomModelGrid(const EmitterParams& params, const IrfModel& irf, const HistogramShape& shape,
               int fine_factor = 5);

  /// Binned (parallel, perpendicular) model for unit amplitude.
  std::pair<Histogram, Histogram> histograms(double t2_star) const;
  Histogram parallel(double t2_star) const;
  /// Does not depend on T2*; computed once.
  const Histogram& perpendicular() const { return perpendicular_; }
  const HistogramShape& shape() const { return shape_; }

 private:
  Histogram fold(std::vector<double> masses) const;

  HistogramShape shape_;
  IrfModel irf_;
  double fine_step_ = 0.0;
  double fine_origin_ = 0.0;
  std::size_t fine_bins_ = 0;
  std::size_t fine_per_bin_ = 0;
  std::size_t pad_bins_ = 0;
  // g⊥ at fine-bin edges and midpoints: index 2k is edge k, 2k+1 the midpoint.
  std::vector<double> perp_nodes_;
  std::vector<double> abs_tau_nodes_;
  Histogram perpendicular_;
};

struct ConvolutionResult {
  Histogram histogram;
  /// Counts pushed outside the histogram window by the kernel.
  double truncated = 0.0;
};

/// Discrete convolution of a histogram with the IRF (delta = identity).
/// Requires bin_width <= fwhm/2 for a gaussian IRF.
ConvolutionResult irf_convolve(const Histogram& h, const IrfModel& irf);

struct VisibilityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double c_parallel = 0.0;
  double c_perp = 0.0;
};

/// V = (C⊥ - C∥)/C⊥ over bins with centers in [lo, hi]; Poisson error.
VisibilityEstimate visibility_from_histograms(const Histogram& h_par, const Histogram& h_perp,
                                              double lo = -1.0, double hi = 1.0);

}  // namespace photonstat
