#pragma once

#include <cmath>
#include <string>

#include "numerics.hpp"
#include "predictive.hpp"
#include "priors.hpp"

namespace bfbin {

enum class Orientation {
  NullOverAlt,    // BF01, small values are evidence against the point null
  PlusOverNull,   // BF+0
  MinusOverNull,  // BF-0
  PlusOverMinus,  // BF+-
};

inline const char* to_string(Orientation o) {
  switch (o) {
    case Orientation::NullOverAlt: return "BF01";
    case Orientation::PlusOverNull: return "BF+0";
    case Orientation::MinusOverNull: return "BF-0";
    case Orientation::PlusOverMinus: return "BF+-";
  }
  return "?";
}

struct BayesFactor {
  double log_value = 0.0;
  Orientation orientation = Orientation::NullOverAlt;

  double value() const { return std::exp(log_value); }
  /// Null-over-alternative on the log scale, whatever the native orientation.
  double log_null_over_alt() const {
    return orientation == Orientation::NullOverAlt ? log_value : -log_value;
  }
};

/// Natural orientation of the reported Bayes factor for each test.
inline Orientation native_orientation(TestKind t) {
  switch (t) {
    case TestKind::TwoSided: return Orientation::NullOverAlt;
    case TestKind::PlusVsPoint: return Orientation::PlusOverNull;
    case TestKind::MinusVsPoint: return Orientation::MinusOverNull;
    case TestKind::PlusVsMinus: return Orientation::PlusOverMinus;
  }
  return Orientation::NullOverAlt;
}

namespace detail {

inline void require_test(const HypothesisSpec& spec, TestKind t, const char* fn) {
  spec.validate();
  if (spec.test != t)
    throw ConfigError(std::string(fn) + ": analysis spec is for the " + to_string(spec.test) +
                      " test");
}

// The two predictive pmfs whose ratio is the null-over-alternative BF.
struct PredictivePair {
  Branch null_branch;
  PriorSpec null_first, null_second;
  Branch alt_branch;
  PriorSpec alt_first, alt_second;
};

inline PredictivePair analysis_pair(const HypothesisSpec& a) {
  switch (a.test) {
    case TestKind::TwoSided:
      return {Branch::PointNull, a.implied_two_sided_null(), {}, Branch::Independent,
              a.arm1_prior, a.arm2_prior};
    case TestKind::PlusVsPoint:
      return {Branch::PointNull, a.null_prior, {}, Branch::Plus, a.arm1_prior, a.arm2_prior};
    case TestKind::MinusVsPoint:
      return {Branch::PointNull, a.null_prior, {}, Branch::Minus, a.arm1_prior, a.arm2_prior};
    case TestKind::PlusVsMinus:
      return {Branch::Leq, *a.arm1_prior_null_side, *a.arm2_prior_null_side, Branch::Plus,
              a.arm1_prior, a.arm2_prior};
  }
  throw ConfigError("unknown test");
}

inline double log_bf01_point(int y1, int y2, const TrialLayout& layout, const HypothesisSpec& a,
                             const QuadratureSettings& qs, SumMethod method) {
  check_counts(y1, y2, layout);
  auto p = analysis_pair(a);
  double ln = detail::PredictiveKernel(p.null_branch, layout, p.null_first, p.null_second, qs,
                                       method)(y1, y2);
  double la = detail::PredictiveKernel(p.alt_branch, layout, p.alt_first, p.alt_second, qs,
                                       method)(y1, y2);
  return ln - la;
}

}  // namespace detail

/// Two-sided BF01 through the predictive ratio with the implied point-null
/// prior Beta(a1+a2-1, b1+b2-1).
inline BayesFactor bf01_two_sided(int y1, int y2, const TrialLayout& layout,
                                  const HypothesisSpec& analysis) {
  detail::require_test(analysis, TestKind::TwoSided, "bf01_two_sided");
  return {detail::log_bf01_point(y1, y2, layout, analysis, {}, SumMethod::Automatic),
          Orientation::NullOverAlt};
}

/// Closed form: B(a1+a2-1+y1+y2, b1+b2-1+n-y1-y2) B(a1,b1) B(a2,b2)
///              / [B(a1+a2-1, b1+b2-1) B(A1,B1) B(A2,B2)].
inline BayesFactor bf01_two_sided_closed_form(int y1, int y2, const TrialLayout& layout,
                                              const HypothesisSpec& analysis) {
  detail::require_test(analysis, TestKind::TwoSided, "bf01_two_sided_closed_form");
  check_counts(y1, y2, layout);
  const auto& p = analysis.arm1_prior;
  const auto& q = analysis.arm2_prior;
  const int n = layout.n1 + layout.n2, s = y1 + y2;
  auto post = UpdatedShapes::from(y1, y2, layout, p, q);
  double v = log_beta(p.a + q.a - 1.0 + s, p.b + q.b - 1.0 + n - s) + log_beta(p.a, p.b) +
             log_beta(q.a, q.b) - log_beta(p.a + q.a - 1.0, p.b + q.b - 1.0) -
             log_beta(post.A1, post.B1) - log_beta(post.A2, post.B2);
  return {v, Orientation::NullOverAlt};
}

inline BayesFactor bf_plus_over_null(int y1, int y2, const TrialLayout& layout,
                                     const HypothesisSpec& analysis,
                                     const QuadratureSettings& qs = {},
                                     SumMethod method = SumMethod::Automatic) {
  detail::require_test(analysis, TestKind::PlusVsPoint, "bf_plus_over_null");
  return {-detail::log_bf01_point(y1, y2, layout, analysis, qs, method),
          Orientation::PlusOverNull};
}

inline BayesFactor bf_minus_over_null(int y1, int y2, const TrialLayout& layout,
                                      const HypothesisSpec& analysis,
                                      const QuadratureSettings& qs = {},
                                      SumMethod method = SumMethod::Automatic) {
  detail::require_test(analysis, TestKind::MinusVsPoint, "bf_minus_over_null");
  return {-detail::log_bf01_point(y1, y2, layout, analysis, qs, method),
          Orientation::MinusOverNull};
}

inline BayesFactor bf_plus_over_minus(int y1, int y2, const TrialLayout& layout,
                                      const HypothesisSpec& analysis,
                                      const QuadratureSettings& qs = {},
                                      SumMethod method = SumMethod::Automatic) {
  detail::require_test(analysis, TestKind::PlusVsMinus, "bf_plus_over_minus");
  return {-detail::log_bf01_point(y1, y2, layout, analysis, qs, method),
          Orientation::PlusOverMinus};
}

/// Dispatch on analysis.test; result is in the test's native orientation.
inline BayesFactor bayes_factor(int y1, int y2, const TrialLayout& layout,
                                const HypothesisSpec& analysis, const QuadratureSettings& qs = {},
                                SumMethod method = SumMethod::Automatic) {
  switch (analysis.test) {
    case TestKind::TwoSided: return bf01_two_sided(y1, y2, layout, analysis);
    case TestKind::PlusVsPoint: return bf_plus_over_null(y1, y2, layout, analysis, qs, method);
    case TestKind::MinusVsPoint: return bf_minus_over_null(y1, y2, layout, analysis, qs, method);
    case TestKind::PlusVsMinus: return bf_plus_over_minus(y1, y2, layout, analysis, qs, method);
  }
  throw ConfigError("unknown test");
}

/// ln BF(null over alternative) at every lattice point.
inline LatticeMatrix log_bf01_matrix(const TrialLayout& layout, const HypothesisSpec& analysis,
                                     const QuadratureSettings& qs = {},
                                     SumMethod method = SumMethod::Automatic,
                                     unsigned threads = 1) {
  analysis.validate();
  layout.validate();
  auto p = detail::analysis_pair(analysis);
  detail::PredictiveKernel null_k(p.null_branch, layout, p.null_first, p.null_second, qs, method);
  detail::PredictiveKernel alt_k(p.alt_branch, layout, p.alt_first, p.alt_second, qs, method);
  LatticeMatrix m(layout);
  parallel_for(std::size_t(layout.n1 + 1), threads, [&](std::size_t y1) {
    double* row = m.row(int(y1));
    for (int y2 = 0; y2 <= layout.n2; ++y2) row[y2] = null_k(int(y1), y2) - alt_k(int(y1), y2);
  });
  return m;
}

/// Jeffreys-style wording for a BF in the alternative-over-null direction.
inline std::string jeffreys_label(double bf_alt_over_null) {
  const bool for_alt = bf_alt_over_null >= 1.0;
  const double x = for_alt ? bf_alt_over_null : 1.0 / bf_alt_over_null;
  std::string strength;
  if (x < 3.0) strength = "anecdotal";
  else if (x < 10.0) strength = "moderate";
  else if (x < 30.0) strength = "strong";
  else if (x < 100.0) strength = "very strong";
  else strength = "extreme";
  if (x == 1.0) return "no evidence either way";
  return strength + " evidence for the " + (for_alt ? "alternative" : "null");
}

}  // namespace bfbin
