#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "bayes_factor.hpp"
#include "parallel.hpp"
#include "predictive.hpp"
#include "priors.hpp"

namespace bfbin {

struct Thresholds {
  double k = 1.0 / 3.0;  // reject the null when BF01 < k
  double k_f = 3.0;      // compelling evidence for the null when BF01 > k_f

  void validate() const {
    if (!(k > 0.0 && k < 1.0)) throw ConfigError("k must lie in (0,1)");
    if (!(k_f > 1.0) || !std::isfinite(k_f)) throw ConfigError("k_f must be greater than 1");
  }
};

struct RejectionSet {
  TrialLayout layout;
  double k = 0.0;
  std::vector<std::pair<int, int>> members;  // row-major order
  std::vector<unsigned char> mask;           // lattice-shaped, 1 = reject

  bool contains(int y1, int y2) const {
    return mask[std::size_t(y1) * (layout.n2 + 1) + std::size_t(y2)] != 0;
  }
  std::size_t size() const { return members.size(); }
};

struct GridPoint {
  double p1 = 0.0, p2 = 0.0;
};

struct FreqT1E {
  double value = 0.0;
  GridPoint argmax;
};

struct OCResult {
  double bayes_power = 0.0;
  double bayes_t1e = 0.0;
  double pce_null = 0.0;
  std::optional<double> freq_t1e_sup;
  std::optional<GridPoint> freq_t1e_argmax;
  std::optional<double> freq_power;
  std::size_t rejection_set_size = 0;
};

/// Points (y1,y2) with BF01 < k strictly, compared on the log scale.
inline RejectionSet rejection_set_from(const LatticeMatrix& log_bf01, double k) {
  if (!(k > 0.0)) throw ConfigError("k must be positive");
  RejectionSet r;
  r.layout = log_bf01.layout();
  r.k = k;
  r.mask.assign(r.layout.lattice_size(), 0);
  const double lk = std::log(k);
  for (int y1 = 0; y1 <= r.layout.n1; ++y1)
    for (int y2 = 0; y2 <= r.layout.n2; ++y2)
      if (log_bf01(y1, y2) < lk) {
        r.members.emplace_back(y1, y2);
        r.mask[std::size_t(y1) * (r.layout.n2 + 1) + y2] = 1;
      }
  return r;
}

inline RejectionSet rejection_set(const TrialLayout& layout, const HypothesisSpec& analysis,
                                  double k, const QuadratureSettings& qs = {},
                                  unsigned threads = 1) {
  return rejection_set_from(log_bf01_matrix(layout, analysis, qs, SumMethod::Automatic, threads),
                            k);
}

/// Design predictive under the alternative / under the null, log scale.
inline LatticeMatrix log_design_alternative(const TrialLayout& layout, const HypothesisSpec& d,
                                            const QuadratureSettings& qs = {},
                                            unsigned threads = 1) {
  d.validate();
  Branch b = d.test == TestKind::TwoSided       ? Branch::Independent
             : d.test == TestKind::MinusVsPoint ? Branch::Minus
                                                : Branch::Plus;
  return log_predictive_matrix(b, layout, d.arm1_prior, d.arm2_prior, qs, SumMethod::Automatic,
                               threads);
}

inline LatticeMatrix log_design_null(const TrialLayout& layout, const HypothesisSpec& d,
                                     const QuadratureSettings& qs = {}, unsigned threads = 1) {
  d.validate();
  if (d.composite())
    return log_predictive_matrix(Branch::Leq, layout, *d.arm1_prior_null_side,
                                 *d.arm2_prior_null_side, qs, SumMethod::Automatic, threads);
  return log_predictive_matrix(Branch::PointNull, layout, d.null_prior, {}, qs,
                               SumMethod::Automatic, threads);
}

/// Sum of exp(log_pmf) over the rejection set, row-major.
inline double mass_over(const RejectionSet& r, const LatticeMatrix& log_pmf) {
  double s = 0.0;
  for (auto [y1, y2] : r.members) s += std::exp(log_pmf(y1, y2));
  return std::min(s, 1.0);
}

inline double bayes_power(const RejectionSet& r, const HypothesisSpec& design,
                          const QuadratureSettings& qs = {}, unsigned threads = 1) {
  if (r.members.empty()) return 0.0;
  return mass_over(r, log_design_alternative(r.layout, design, qs, threads));
}

inline double bayes_t1e(const RejectionSet& r, const HypothesisSpec& design,
                        const QuadratureSettings& qs = {}, unsigned threads = 1) {
  if (r.members.empty()) return 0.0;
  return mass_over(r, log_design_null(r.layout, design, qs, threads));
}

/// Null-side design mass over BF01 > k_f strictly.
inline double pce_from(const LatticeMatrix& log_bf01, const LatticeMatrix& log_null_pmf,
                       double k_f) {
  const double lk = std::log(k_f);
  double s = 0.0;
  const auto& L = log_bf01.layout();
  for (int y1 = 0; y1 <= L.n1; ++y1)
    for (int y2 = 0; y2 <= L.n2; ++y2)
      if (log_bf01(y1, y2) > lk) s += std::exp(log_null_pmf(y1, y2));
  return std::min(s, 1.0);
}

inline double pce_null(const TrialLayout& layout, const HypothesisSpec& analysis,
                       const HypothesisSpec& design, double k_f,
                       const QuadratureSettings& qs = {}, unsigned threads = 1) {
  if (!(k_f > 0.0)) throw ConfigError("k_f must be positive");
  return pce_from(log_bf01_matrix(layout, analysis, qs, SumMethod::Automatic, threads),
                  log_design_null(layout, design, qs, threads), k_f);
}

namespace detail {

// Bin(y; n, p) for y = 0..n, exact at p = 0 and p = 1.
inline std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> v(n + 1, 0.0);
  if (p <= 0.0) {
    v[0] = 1.0;
    return v;
  }
  if (p >= 1.0) {
    v[n] = 1.0;
    return v;
  }
  const double lp = std::log(p), lq = std::log1p(-p);
  for (int y = 0; y <= n; ++y) v[y] = std::exp(log_binom_coeff(n, y) + y * lp + (n - y) * lq);
  return v;
}

inline std::vector<double> probability_grid(double step) {
  if (!(step > 0.0 && step <= 0.1)) throw ConfigError("grid step must lie in (0, 0.1]");
  std::vector<double> g;
  const long count = long(std::floor(1.0 / step + 1e-9));
  for (long i = 0; i <= count; ++i) g.push_back(std::min(1.0, double(i) * step));
  if (g.back() < 1.0 - 1e-12) g.push_back(1.0);
  return g;
}

// sum over y1 of b1[y1] times the b2 mass of the rejected cells in row y1
inline double reject_prob(const RejectionSet& r, const std::vector<double>& b1,
                          const std::vector<double>& b2) {
  const int n2 = r.layout.n2;
  double total = 0.0;
  for (int y1 = 0; y1 <= r.layout.n1; ++y1) {
    if (b1[y1] == 0.0) continue;
    const unsigned char* m = r.mask.data() + std::size_t(y1) * (n2 + 1);
    double s = 0.0;
    for (int y2 = 0; y2 <= n2; ++y2)
      if (m[y2]) s += b2[y2];
    total += b1[y1] * s;
  }
  return total;
}

}  // namespace detail

/// Exact P(reject) at fixed (p1, p2).
inline double freq_power(const RejectionSet& r, double p1, double p2) {
  if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
    throw DomainError("freq_power: probabilities outside [0,1]");
  if (r.members.empty()) return 0.0;
  return std::min(1.0, detail::reject_prob(r, detail::binomial_pmf(r.layout.n1, p1),
                                           detail::binomial_pmf(r.layout.n2, p2)));
}

/// Grid maximum of P(reject) over the null set: the diagonal p1 = p2 for
/// point nulls, the closed triangle p2 <= p1 for the composite null. Ties go
/// to the first grid point in (p1, p2) lexicographic order.
inline FreqT1E freq_t1e_sup(const RejectionSet& r, TestKind test, double grid_step = 0.005,
                            unsigned threads = 1) {
  const auto grid = detail::probability_grid(grid_step);
  const std::size_t G = grid.size();
  const int n1 = r.layout.n1, n2 = r.layout.n2;
  if (r.members.empty()) return {0.0, {grid[0], grid[0]}};

  std::vector<FreqT1E> best(G);
  if (test != TestKind::PlusVsMinus) {
    parallel_for(G, threads, [&](std::size_t i) {
      double p = grid[i];
      best[i] = {detail::reject_prob(r, detail::binomial_pmf(n1, p), detail::binomial_pmf(n2, p)),
                 {p, p}};
    });
  } else {
    std::vector<std::vector<double>> b2(G);
    parallel_for(G, threads, [&](std::size_t j) { b2[j] = detail::binomial_pmf(n2, grid[j]); });
    parallel_for(G, threads, [&](std::size_t i) {
      auto b1 = detail::binomial_pmf(n1, grid[i]);
      // v[y2] = sum over rejected y1 of b1[y1]
      std::vector<double> v(n2 + 1, 0.0);
      for (int y1 = 0; y1 <= n1; ++y1) {
        if (b1[y1] == 0.0) continue;
        const unsigned char* m = r.mask.data() + std::size_t(y1) * (n2 + 1);
        for (int y2 = 0; y2 <= n2; ++y2)
          if (m[y2]) v[y2] += b1[y1];
      }
      FreqT1E local{-1.0, {}};
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int y2 = 0; y2 <= n2; ++y2) s += v[y2] * b2[j][y2];
        if (s > local.value) local = {s, {grid[i], grid[j]}};
      }
      best[i] = local;
    });
  }
  FreqT1E out = best[0];
  for (std::size_t i = 1; i < G; ++i)
    if (best[i].value > out.value) out = best[i];
  out.value = std::min(out.value, 1.0);
  return out;
}

inline FreqT1E freq_t1e_sup(const TrialLayout& layout, const HypothesisSpec& analysis, double k,
                            double grid_step = 0.005, const QuadratureSettings& qs = {},
                            unsigned threads = 1) {
  return freq_t1e_sup(rejection_set(layout, analysis, k, qs, threads), analysis.test, grid_step,
                      threads);
}

struct OCOptions {
  bool freq_t1e = false;
  double grid_step = 0.005;
  std::optional<GridPoint> freq_power_point;
};

/// All operating characteristics at one layout, sharing the BF matrix and
/// the design predictives.
inline OCResult evaluate_oc(const TrialLayout& layout, const HypothesisSpec& analysis,
                            const HypothesisSpec& design, const Thresholds& th,
                            const OCOptions& opt = {}, const QuadratureSettings& qs = {},
                            unsigned threads = 1) {
  th.validate();
  analysis.validate();
  design.validate();
  if (analysis.test != design.test)
    throw ConfigError("design and analysis specs must be for the same test");
  auto lbf = log_bf01_matrix(layout, analysis, qs, SumMethod::Automatic, threads);
  auto rej = rejection_set_from(lbf, th.k);
  auto alt = log_design_alternative(layout, design, qs, threads);
  auto null = log_design_null(layout, design, qs, threads);
  OCResult r;
  r.rejection_set_size = rej.size();
  r.bayes_power = rej.members.empty() ? 0.0 : mass_over(rej, alt);
  r.bayes_t1e = rej.members.empty() ? 0.0 : mass_over(rej, null);
  r.pce_null = pce_from(lbf, null, th.k_f);
  if (opt.freq_t1e) {
    auto f = freq_t1e_sup(rej, analysis.test, opt.grid_step, threads);
    r.freq_t1e_sup = f.value;
    r.freq_t1e_argmax = f.argmax;
  }
  if (opt.freq_power_point)
    r.freq_power = freq_power(rej, opt.freq_power_point->p1, opt.freq_power_point->p2);
  return r;
}

}  // namespace bfbin
