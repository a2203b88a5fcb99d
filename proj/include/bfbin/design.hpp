#pragma once

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <optional>
#include <vector>

#include "oc.hpp"

namespace bfbin {

struct CalibrationTargets {
  double power_target = 0.8;
  double alpha_target = 0.05;
  double pce_target = 0.8;
  Thresholds thresholds{};
  std::optional<GridPoint> freq_power_point;  // also calibrated to power_target
  bool compute_freq_t1e = false;
  double grid_step = 0.005;

  void validate() const {
    for (double t : {power_target, alpha_target, pce_target})
      if (!(t > 0.0 && t < 1.0)) throw ConfigError("calibration targets must lie in (0,1)");
    thresholds.validate();
    if (freq_power_point) {
      auto [p1, p2] = *freq_power_point;
      if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
        throw ConfigError("frequentist power point outside [0,1]");
    }
    if (compute_freq_t1e && !(grid_step > 0.0 && grid_step <= 0.1))
      throw ConfigError("grid step must lie in (0, 0.1]");
  }
};

/// Candidate totals n_min, n_min + n_step, ... <= n_max.
struct SearchRange {
  int n_min = 2;
  int n_max = 100;
  int n_step = 1;
  double alloc1 = 0.5;
  double alloc2 = 0.5;
  int lookahead = 10;

  void validate() const {
    if (n_min < 2) throw ConfigError("n_min must be at least 2");
    if (n_max < n_min) throw ConfigError("empty search range: n_max < n_min");
    if (n_step < 1) throw ConfigError("n_step must be at least 1");
    if (!(alloc1 > 0.0 && alloc1 < 1.0 && alloc2 > 0.0 && alloc2 < 1.0))
      throw ConfigError("allocation fractions must lie in (0,1)");
    if (std::abs(alloc1 + alloc2 - 1.0) > 1e-12)
      throw ConfigError("allocation fractions must sum to 1");
    if (lookahead < 0) throw ConfigError("lookahead must be nonnegative");
  }

  std::vector<int> candidates() const {
    std::vector<int> out;
    for (int n = n_min; n <= n_max; n += n_step) out.push_back(n);
    return out;
  }
};

/// n1 = round-half-even(alloc1 * n) clamped to [1, n-1], n2 = n - n1.
inline TrialLayout allocate(int n_total, double alloc1, double alloc2) {
  if (n_total < 2) throw DomainError("allocate: need at least 2 patients");
  if (!(alloc1 > 0.0 && alloc2 > 0.0)) throw DomainError("allocate: fractions must be positive");
  const int old = std::fegetround();
  std::fesetround(FE_TONEAREST);
  long n1 = std::lrint(alloc1 / (alloc1 + alloc2) * n_total);
  std::fesetround(old);
  n1 = std::clamp<long>(n1, 1, n_total - 1);
  return {int(n1), int(n_total - n1)};
}

struct DesignSpecs {
  HypothesisSpec analysis;
  HypothesisSpec design;
};

struct CurveRow {
  int n_total = 0;
  TrialLayout layout;
  OCResult oc;
};

struct FreqT1EMax {
  double value = 0.0;
  int n_total = 0;
  TrialLayout layout;
  GridPoint argmax;
};

struct DesignResult {
  std::optional<int> n_power, n_alpha, n_pce, n_freq_power;
  std::vector<CurveRow> curves;
  std::optional<FreqT1EMax> freq_t1e_max;  // largest grid supremum along the curve
  DesignSpecs specs;
  CalibrationTargets targets;
  SearchRange range;
};

inline void validate_specs(const DesignSpecs& s) {
  if (s.analysis.role != PriorRole::Analysis || s.design.role != PriorRole::Design)
    throw ConfigError("spec roles must be analysis and design");
  if (s.analysis.test != s.design.test)
    throw ConfigError("design and analysis specs must be for the same test");
  s.analysis.validate();
  s.design.validate();
}

/// One row per candidate total; candidates run in parallel, each on one thread.
inline std::vector<CurveRow> oc_curve(const DesignSpecs& specs, const CalibrationTargets& targets,
                                      const SearchRange& range, const QuadratureSettings& qs = {},
                                      unsigned threads = 0) {
  validate_specs(specs);
  targets.validate();
  range.validate();
  auto ns = range.candidates();
  std::vector<CurveRow> rows(ns.size());
  OCOptions opt{targets.compute_freq_t1e, targets.grid_step, targets.freq_power_point};
  parallel_for(ns.size(), threads, [&](std::size_t i) {
    auto layout = allocate(ns[i], range.alloc1, range.alloc2);
    rows[i] = {ns[i], layout,
               evaluate_oc(layout, specs.analysis, specs.design, targets.thresholds, opt, qs, 1)};
  });
  return rows;
}

/// First index whose value and next `lookahead` successors (those inside the
/// range) all satisfy the criterion.
template <class Pred>
std::optional<std::size_t> first_stable(std::size_t count, int lookahead, Pred ok) {
  for (std::size_t i = 0; i < count; ++i) {
    bool good = true;
    for (std::size_t j = i; j < count && j <= i + std::size_t(lookahead); ++j)
      if (!ok(j)) {
        good = false;
        break;
      }
    if (good) return i;
  }
  return std::nullopt;
}

inline DesignResult calibrate_from_curve(std::vector<CurveRow> rows, const DesignSpecs& specs,
                                         const CalibrationTargets& t, const SearchRange& range) {
  DesignResult r;
  r.specs = specs;
  r.targets = t;
  r.range = range;
  const std::size_t m = rows.size();
  auto pick = [&](auto ok) -> std::optional<int> {
    auto i = first_stable(m, range.lookahead, ok);
    if (!i) return std::nullopt;
    return rows[*i].n_total;
  };
  r.n_power = pick([&](std::size_t i) { return rows[i].oc.bayes_power >= t.power_target; });
  r.n_alpha = pick([&](std::size_t i) { return rows[i].oc.bayes_t1e <= t.alpha_target; });
  r.n_pce = pick([&](std::size_t i) { return rows[i].oc.pce_null >= t.pce_target; });
  if (t.freq_power_point)
    r.n_freq_power = pick([&](std::size_t i) { return *rows[i].oc.freq_power >= t.power_target; });
  if (t.compute_freq_t1e) {
    for (const auto& row : rows)
      if (!r.freq_t1e_max || *row.oc.freq_t1e_sup > r.freq_t1e_max->value)
        r.freq_t1e_max = FreqT1EMax{*row.oc.freq_t1e_sup, row.n_total, row.layout,
                                    *row.oc.freq_t1e_argmax};
  }
  r.curves = std::move(rows);
  return r;
}

inline DesignResult calibrate(const DesignSpecs& specs, const CalibrationTargets& targets,
                              const SearchRange& range, const QuadratureSettings& qs = {},
                              unsigned threads = 0) {
  return calibrate_from_curve(oc_curve(specs, targets, range, qs, threads), specs, targets, range);
}

}  // namespace bfbin
