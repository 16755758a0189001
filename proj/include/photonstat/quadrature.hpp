#pragma once

#include <functional>

namespace photonstat {

struct QuadratureOptions {
  double rel_tol = 1e-9;
  /// Initial uniform panels; each is refined adaptively. Oscillatory
  /// integrands need enough panels that no period hides between samples.
  int panels = 64;
  int max_depth = 48;
};

/// Adaptive Simpson integration of f over [a, b].
///
/// The error target is rel_tol times the integral of |f|, so integrals that
/// cancel to (nearly) zero still terminate. Throws NumericalError when the
/// recursion depth is exhausted or the integrand is not finite.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options = {});

}  // namespace photonstat
