#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace bfbin {

struct QuadratureSettings {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
      throw DomainError("quadrature tolerances must be positive");
    if (max_subdivisions < 1)
      throw DomainError("max_subdivisions must be at least 1");
  }
};

namespace detail {

// No promotion to long double: double is accurate enough here and the
// lattice loops call these a lot.
using math_policy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>>;

inline double lgamma(double x) { return boost::math::lgamma(x, math_policy{}); }

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log(exp(a) - exp(b)) for a >= b.
inline double log_sub_exp(double a, double b) {
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double d = b - a;
  if (d > 0.0) d = 0.0;  // rounding noise
  return a + (d > -0.693 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

}  // namespace detail

/// ln B(a,b) via log-gamma.
inline double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("log_beta: shapes must be positive and finite");
  return detail::lgamma(a) + detail::lgamma(b) - detail::lgamma(a + b);
}

/// Regularized incomplete beta I_x(a,b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("reg_inc_beta: shapes must be positive and finite");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  return boost::math::ibeta(a, b, x, detail::math_policy{});
}

/// Upper tail 1 - I_x(a,b), without cancellation.
inline double reg_inc_beta_upper(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("reg_inc_beta_upper: shapes must be positive and finite");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta_upper: x outside [0,1]");
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  return boost::math::ibetac(a, b, x, detail::math_policy{});
}

inline double log_binom_coeff(std::int64_t n, std::int64_t y) {
  if (n < 0 || y < 0 || y > n) throw DomainError("log_binom_coeff: need 0 <= y <= n");
  if (y == 0 || y == n) return 0.0;
  return detail::lgamma(double(n) + 1.0) - detail::lgamma(double(y) + 1.0) -
         detail::lgamma(double(n - y) + 1.0);
}

/// Beta(a,b) log density at interior x.
inline double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
}

namespace detail {

struct GaussKronrod15 {
  // Kronrod abscissae in decreasing order, last one is the centre.
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for xgk[1], xgk[3], xgk[5], centre.
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// Whether a 15-point rule on [lo,hi] keeps all nodes strictly inside.
inline bool resolvable(double lo, double hi) {
  const double c = 0.5 * (lo + hi), dx = 0.5 * (hi - lo) * GaussKronrod15::xgk[0];
  return c - dx > lo && c + dx < hi;
}

// QUADPACK qk15 error estimate: |K - G| is inflated when the segment is
// poorly resolved relative to the spread of the integrand, and never allowed
// below a roundoff floor.
template <class F>
Segment gk15(F& f, double lo, double hi) {
  using G = GaussKronrod15;
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  double fv[15];
  fv[7] = f(c);
  for (int j = 0; j < 7; ++j) {
    double dx = h * G::xgk[j];
    fv[j] = f(c - dx);
    fv[14 - j] = f(c + dx);
  }
  double k = fv[7] * G::wgk[7];
  double g = fv[7] * G::wg[3];
  double kabs = std::abs(k);
  for (int j = 0; j < 7; ++j) {
    double s = fv[j] + fv[14 - j];
    k += G::wgk[j] * s;
    kabs += G::wgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
    if (j % 2 == 1) g += G::wg[j / 2] * s;
  }
  const double mean = 0.5 * k;
  double asc = G::wgk[7] * std::abs(fv[7] - mean);
  for (int j = 0; j < 7; ++j)
    asc += G::wgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  k *= h;
  g *= h;
  kabs *= h;
  asc *= h;
  if (!std::isfinite(k)) throw DomainError("integrate_01: integrand not finite");
  double err = std::abs(k - g);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (kabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(err, 50.0 * eps * kabs);
  return {lo, hi, k, err};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on [0,1]. Nodes are strictly interior so
/// integrable endpoint singularities are fine. Optional breakpoints seed the
/// initial partition; they are sorted and clipped to (0,1).
template <class F>
double integrate_01(F&& f, const QuadratureSettings& settings = {},
                    std::vector<double> breakpoints = {}) {
  settings.validate();
  std::vector<double> cuts{0.0};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double b : breakpoints)
    if (b > cuts.back() + 1e-12 && b < 1.0 - 1e-12) cuts.push_back(b);
  cuts.push_back(1.0);

  std::priority_queue<detail::Segment> heap;
  double total = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto s = detail::gk15(f, cuts[i], cuts[i + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  std::vector<detail::Segment> frozen;
  int splits = 0;
  while (err > std::max(settings.abs_tol, settings.rel_tol * std::abs(total))) {
    if (splits >= settings.max_subdivisions) {
      std::ostringstream msg;
      msg << "integrate_01: no convergence after " << splits
          << " subdivisions (estimate " << total << ", error " << err << ")";
      throw ConvergenceError(msg.str(), total, err);
    }
    if (heap.empty()) break;
    auto worst = heap.top();
    heap.pop();
    double mid = 0.5 * (worst.lo + worst.hi);
    if (!detail::resolvable(worst.lo, mid) || !detail::resolvable(mid, worst.hi)) {
      // Below double resolution; keep the segment as is and stop charging
      // its error against the tolerance.
      frozen.push_back(worst);
      err -= worst.error;
      continue;
    }
    auto left = detail::gk15(f, worst.lo, mid);
    auto right = detail::gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-add from scratch so the result doesn't carry the running-sum drift.
  double sum = 0.0;
  std::vector<detail::Segment> parts = std::move(frozen);
  while (!heap.empty()) {
    parts.push_back(heap.top());
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(),
            [](const detail::Segment& a, const detail::Segment& b) { return a.lo < b.lo; });
  for (const auto& p : parts) sum += p.value;
  return sum;
}

}  // namespace bfbin
