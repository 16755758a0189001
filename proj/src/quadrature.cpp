#include "photonstat/quadrature.hpp"

#include <cmath>
#include <vector>

#include "photonstat/error.hpp"

namespace photonstat {
namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(const std::function<double(double)>& f, const Panel& p, double tol, int depth) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m);
  const double rm = 0.5 * (m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm)) {
    throw NumericalError("quadrature: integrand is not finite");
  }
  const double left = simpson(p.a, m, p.fa, flm, p.fm);
  const double right = simpson(m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) throw NumericalError("quadrature: maximum refinement depth reached");
  return refine(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
         refine(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, options);
  require(options.panels >= 1, "quadrature: panels must be positive");

  const int n = options.panels;
  const double h = (b - a) / n;
  std::vector<double> fx(2 * n + 1);
  for (int i = 0; i <= 2 * n; ++i) {
    fx[i] = f(a + 0.5 * h * i);
    if (!std::isfinite(fx[i])) throw NumericalError("quadrature: integrand is not finite");
  }

  std::vector<Panel> panels;
  panels.reserve(n);
  double abs_estimate = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pa = a + h * i;
    const double pb = (i + 1 == n) ? b : a + h * (i + 1);
    const double fa = fx[2 * i], fm = fx[2 * i + 1], fb = fx[2 * i + 2];
    panels.push_back({pa, pb, fa, fm, fb, simpson(pa, pb, fa, fm, fb)});
    abs_estimate += simpson(pa, pb, std::abs(fa), std::abs(fm), std::abs(fb));
  }
  if (abs_estimate == 0.0) abs_estimate = 1e-300;

  const double tol = options.rel_tol * abs_estimate / n;
  double total = 0.0;
  for (const auto& p : panels) total += refine(f, p, tol, options.max_depth);
  return total;
}

}  // namespace photonstat
