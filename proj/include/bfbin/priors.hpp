#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace bfbin {

/// Beta(a, b) prior for one success probability.
struct PriorSpec {
  double a = 1.0;
  double b = 1.0;

  void validate(const char* what = "prior") const {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
      throw DomainError(std::string(what) + ": Beta shapes must be positive and finite");
  }
  bool operator==(const PriorSpec&) const = default;
};

enum class TestKind {
  TwoSided,      // H0: p1 = p2 vs H1: p1 != p2
  PlusVsPoint,   // H0: p1 = p2 vs H+: p2 > p1
  MinusVsPoint,  // H0: p1 = p2 vs H-: p2 < p1
  PlusVsMinus,   // H-: p2 <= p1 vs H+: p2 > p1
};

enum class PriorRole { Design, Analysis };

inline const char* to_string(TestKind t) {
  switch (t) {
    case TestKind::TwoSided: return "two-sided";
    case TestKind::PlusVsPoint: return "plus0";
    case TestKind::MinusVsPoint: return "minus0";
    case TestKind::PlusVsMinus: return "plusminus";
  }
  return "?";
}

inline const char* to_string(PriorRole r) { return r == PriorRole::Design ? "design" : "analysis"; }

/// Priors for one test in one role. For the composite test the null side
/// has its own pair of arm priors (truncated to p2 <= p1); point nulls use
/// null_prior for the common success probability.
struct HypothesisSpec {
  TestKind test = TestKind::TwoSided;
  PriorSpec null_prior{};
  PriorSpec arm1_prior{};
  PriorSpec arm2_prior{};
  std::optional<PriorSpec> arm1_prior_null_side;
  std::optional<PriorSpec> arm2_prior_null_side;
  PriorRole role = PriorRole::Analysis;

  bool composite() const { return test == TestKind::PlusVsMinus; }

  void validate() const {
    arm1_prior.validate("arm1 prior");
    arm2_prior.validate("arm2 prior");
    null_prior.validate("null prior");
    bool has_null_side = arm1_prior_null_side.has_value() || arm2_prior_null_side.has_value();
    if (composite()) {
      if (!arm1_prior_null_side || !arm2_prior_null_side)
        throw ConfigError("plus-vs-minus test needs both null-side arm priors");
      arm1_prior_null_side->validate("arm1 null-side prior");
      arm2_prior_null_side->validate("arm2 null-side prior");
    } else if (has_null_side) {
      throw ConfigError("null-side arm priors only apply to the plus-vs-minus test");
    }
    if (test == TestKind::TwoSided && role == PriorRole::Analysis) {
      if (!(arm1_prior.a + arm2_prior.a > 1.0) || !(arm1_prior.b + arm2_prior.b > 1.0))
        throw ConfigError("two-sided analysis priors need a1+a2 > 1 and b1+b2 > 1");
    }
  }

  /// Point-null prior that makes the predictive ratio equal the closed-form
  /// two-sided Bayes factor.
  PriorSpec implied_two_sided_null() const {
    return {arm1_prior.a + arm2_prior.a - 1.0, arm1_prior.b + arm2_prior.b - 1.0};
  }
};

enum class SumMethod { Automatic, FiniteSum, Quadrature };

inline bool is_integer_shape(double a) { return std::abs(a - std::round(a)) < 1e-9; }

namespace detail {

// log P(Y > X) for X ~ Beta(ax,bx), Y ~ Beta(ay,by), integer ay.
// Uses 1 - I_x(ay,by) = (1-x)^by sum_{k<ay} Gamma(by+k)/(Gamma(by) k!) x^k
// and integrates term by term against the density of X.
inline double log_greater_sum(double ax, double bx, double ay, double by) {
  const long terms = std::lround(ay);
  double log_t0 = log_beta(ax, bx + by) - log_beta(ax, bx);
  double offset = 0.0, term = 1.0, sum = 1.0;
  for (long k = 0; k + 1 < terms; ++k) {
    double kk = double(k);
    term *= (by + kk) / (kk + 1.0) * (ax + kk) / (ax + bx + by + kk);
    sum += term;
    if (sum > 1e250) {
      offset += std::log(sum);
      term /= sum;
      sum = 1.0;
    }
  }
  return log_t0 + offset + std::log(sum);
}

struct SumRoute {
  long length = -1;  // -1: unavailable
  double ax, bx, ay, by;
};

// Best direct-sum route for log P(Y > X).
inline SumRoute direct_route(const PriorSpec& x, const PriorSpec& y) {
  SumRoute best;
  if (is_integer_shape(y.a)) best = {std::lround(y.a), x.a, x.b, y.a, y.b};
  // P(Y > X) = P(1-X > 1-Y), 1-X ~ Beta(bx, ax).
  if (is_integer_shape(x.b) && (best.length < 0 || std::lround(x.b) < best.length))
    best = {std::lround(x.b), y.b, y.a, x.b, x.a};
  return best;
}

inline double log_greater_quadrature(const PriorSpec& x, const PriorSpec& y,
                                     const QuadratureSettings& qs) {
  const double lbx = log_beta(x.a, x.b);
  auto log_integrand = [&](double t) {
    double s = reg_inc_beta_upper(t, y.a, y.b);
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    return (x.a - 1.0) * std::log(t) + (x.b - 1.0) * std::log1p(-t) - lbx + std::log(s);
  };
  // Probe for the peak so the scaled integrand is O(1) there.
  constexpr int probes = 256;
  double peak = -std::numeric_limits<double>::infinity(), at = 0.5;
  for (int i = 0; i <= probes; ++i) {
    double t = std::clamp(double(i) / probes, 1e-9, 1.0 - 1e-9);
    double v = log_integrand(t);
    if (v > peak) {
      peak = v;
      at = t;
    }
  }
  if (!std::isfinite(peak)) return -std::numeric_limits<double>::infinity();
  // Golden-section polish inside the probe bracket.
  double lo = std::max(1e-12, at - 1.0 / probes), hi = std::min(1.0 - 1e-12, at + 1.0 / probes);
  const double g = 0.6180339887498949;
  for (int it = 0; it < 60; ++it) {
    double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (log_integrand(m1) < log_integrand(m2)) lo = m1; else hi = m2;
  }
  at = 0.5 * (lo + hi);
  peak = std::max(peak, log_integrand(at));

  std::vector<double> cuts{at};
  auto add_spread = [&](double a, double b) {
    double m = a / (a + b), sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
    for (double z : {1.0, 3.0, 6.0}) {
      cuts.push_back(m - z * sd);
      cuts.push_back(m + z * sd);
    }
  };
  add_spread(x.a, x.b);
  add_spread(y.a, y.b);
  for (double w : {1e-3, 1e-2, 5e-2}) {
    cuts.push_back(at - w);
    cuts.push_back(at + w);
  }
  // abs_tol is meant in probability units; after dividing by exp(peak) it
  // must not get looser than that, or endpoint peaks swamp the result.
  QuadratureSettings scaled_qs = qs;
  scaled_qs.abs_tol = std::min(qs.abs_tol, qs.abs_tol * std::exp(-peak));
  double scaled = integrate_01(
      [&](double t) {
        double v = log_integrand(t);
        return std::isfinite(v) ? std::exp(v - peak) : 0.0;
      },
      scaled_qs, cuts);
  if (!(scaled > 0.0)) return -std::numeric_limits<double>::infinity();
  return peak + std::log(scaled);
}

}  // namespace detail

/// log P(Y > X) for independent X ~ Beta(x), Y ~ Beta(y).
/// Automatic takes the shortest exact finite sum when some shape is an
/// integer, falls back to 1 - P(X > Y) when that sum is available and not
/// close to 1, and integrates otherwise.
inline double log_prob_greater(const PriorSpec& x, const PriorSpec& y,
                               const QuadratureSettings& qs = {},
                               SumMethod method = SumMethod::Automatic) {
  x.validate();
  y.validate();
  if (method == SumMethod::Quadrature) return detail::log_greater_quadrature(x, y, qs);
  auto direct = detail::direct_route(x, y);
  if (direct.length > 0)
    return detail::log_greater_sum(direct.ax, direct.bx, direct.ay, direct.by);
  auto other = detail::direct_route(y, x);
  if (other.length > 0) {
    double c = std::exp(detail::log_greater_sum(other.ax, other.bx, other.ay, other.by));
    if (method == SumMethod::FiniteSum || c <= 1.0 - 1e-3) {
      if (c >= 1.0) return -std::numeric_limits<double>::infinity();
      return std::log1p(-c);
    }
  } else if (method == SumMethod::FiniteSum) {
    throw DomainError("finite sum needs an integer shape");
  }
  return detail::log_greater_quadrature(x, y, qs);
}

namespace detail {

enum class TruncKind { Plus, Minus };

// Constants depend only on prior shapes, so the design search hits this a lot.
class TruncationCache {
public:
  using Key = std::tuple<int, double, double, double, double, int, double, double, int>;

  static TruncationCache& instance() {
    static TruncationCache cache;
    return cache;
  }

  template <class Compute>
  double get(const Key& key, Compute&& compute) {
    {
      std::shared_lock lock(mutex_);
      auto it = values_.find(key);
      if (it != values_.end()) return it->second;
    }
    double v = compute();  // deterministic, so racing inserts agree
    std::unique_lock lock(mutex_);
    values_.emplace(key, v);
    return v;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return values_.size();
  }

private:
  mutable std::shared_mutex mutex_;
  std::map<Key, double> values_;
};

inline double log_trunc(TruncKind kind, const PriorSpec& arm1, const PriorSpec& arm2,
                        const QuadratureSettings& qs, SumMethod method) {
  TruncationCache::Key key{int(kind), arm1.a, arm1.b, arm2.a, arm2.b, int(method),
                           qs.abs_tol, qs.rel_tol, qs.max_subdivisions};
  return TruncationCache::instance().get(key, [&] {
    return kind == TruncKind::Plus ? log_prob_greater(arm1, arm2, qs, method)
                                   : log_prob_greater(arm2, arm1, qs, method);
  });
}

}  // namespace detail

/// C = P(p2 > p1) under independent Beta priors.
inline double trunc_const_plus(const PriorSpec& arm1, const PriorSpec& arm2,
                               const QuadratureSettings& qs = {},
                               SumMethod method = SumMethod::Automatic) {
  return std::exp(detail::log_trunc(detail::TruncKind::Plus, arm1, arm2, qs, method));
}

/// C- = P(p2 < p1).
inline double trunc_const_minus(const PriorSpec& arm1, const PriorSpec& arm2,
                                const QuadratureSettings& qs = {},
                                SumMethod method = SumMethod::Automatic) {
  return std::exp(detail::log_trunc(detail::TruncKind::Minus, arm1, arm2, qs, method));
}

/// C0 = 1 - C, the mass of the closed region p2 <= p1.
inline double trunc_const_leq(const PriorSpec& arm1, const PriorSpec& arm2,
                              const QuadratureSettings& qs = {},
                              SumMethod method = SumMethod::Automatic) {
  return 1.0 - trunc_const_plus(arm1, arm2, qs, method);
}

}  // namespace bfbin
