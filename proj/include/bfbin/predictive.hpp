#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "priors.hpp"

namespace bfbin {

struct TrialLayout {
  int n1 = 1;  // control arm
  int n2 = 1;  // treatment arm

  void validate() const {
    if (n1 < 1 || n2 < 1) throw DomainError("arm sizes must be at least 1");
  }
  std::size_t lattice_size() const { return std::size_t(n1 + 1) * std::size_t(n2 + 1); }
  bool operator==(const TrialLayout&) const = default;
};

/// Posterior Beta shapes after observing (y1, y2).
struct UpdatedShapes {
  double A1, B1, A2, B2;

  static UpdatedShapes from(int y1, int y2, const TrialLayout& layout, const PriorSpec& arm1,
                            const PriorSpec& arm2) {
    return {y1 + arm1.a, layout.n1 - y1 + arm1.b, y2 + arm2.a, layout.n2 - y2 + arm2.b};
  }
  PriorSpec arm1() const { return {A1, B1}; }
  PriorSpec arm2() const { return {A2, B2}; }
};

/// Values over the (n1+1) x (n2+1) outcome lattice, row index y1.
class LatticeMatrix {
public:
  LatticeMatrix() = default;
  explicit LatticeMatrix(TrialLayout layout, double fill = 0.0)
      : layout_(layout), data_(layout.lattice_size(), fill) {}

  double& operator()(int y1, int y2) { return data_[index(y1, y2)]; }
  double operator()(int y1, int y2) const { return data_[index(y1, y2)]; }
  const TrialLayout& layout() const { return layout_; }
  int rows() const { return layout_.n1 + 1; }
  int cols() const { return layout_.n2 + 1; }
  const std::vector<double>& data() const { return data_; }
  double* row(int y1) { return data_.data() + index(y1, 0); }
  const double* row(int y1) const { return data_.data() + index(y1, 0); }

private:
  std::size_t index(int y1, int y2) const { return std::size_t(y1) * cols() + std::size_t(y2); }
  TrialLayout layout_{};
  std::vector<double> data_;
};

/// Which prior-predictive pmf. Plus/Minus/Leq use arm priors truncated to
/// p2 > p1, p2 < p1 and p2 <= p1.
enum class Branch { PointNull, Independent, Plus, Minus, Leq };

inline void check_counts(int y1, int y2, const TrialLayout& layout) {
  layout.validate();
  if (y1 < 0 || y1 > layout.n1 || y2 < 0 || y2 > layout.n2)
    throw DomainError("counts outside 0..n");
}

namespace detail {

// Everything that does not depend on (y1, y2), computed once per layout.
class PredictiveKernel {
public:
  // For PointNull `first` is the common-p prior and `second` is unused.
  PredictiveKernel(Branch branch, const TrialLayout& layout, const PriorSpec& first,
                   const PriorSpec& second, const QuadratureSettings& qs, SumMethod method)
      : branch_(branch), layout_(layout), p1_(first), p2_(second), qs_(qs), method_(method) {
    layout.validate();
    first.validate();
    if (branch != Branch::PointNull) second.validate();
    const int n1 = layout.n1, n2 = layout.n2;
    lc1_.resize(n1 + 1);
    lc2_.resize(n2 + 1);
    for (int y = 0; y <= n1; ++y) lc1_[y] = log_binom_coeff(n1, y);
    for (int y = 0; y <= n2; ++y) lc2_[y] = log_binom_coeff(n2, y);

    if (branch == Branch::PointNull) {
      const int n = n1 + n2;
      const double base = log_beta(first.a, first.b);
      null_.resize(n + 1);
      for (int s = 0; s <= n; ++s) null_[s] = log_beta(first.a + s, first.b + n - s) - base;
      return;
    }
    // ln B(A_i, B_i) = lgamma(y + a) + lgamma(n - y + b) - lgamma(n + a + b)
    lb1_.resize(n1 + 1);
    lb2_.resize(n2 + 1);
    const double g1 = detail::lgamma(n1 + first.a + first.b);
    const double g2 = detail::lgamma(n2 + second.a + second.b);
    for (int y = 0; y <= n1; ++y)
      lb1_[y] = detail::lgamma(y + first.a) + detail::lgamma(n1 - y + first.b) - g1;
    for (int y = 0; y <= n2; ++y)
      lb2_[y] = detail::lgamma(y + second.a) + detail::lgamma(n2 - y + second.b) - g2;
    norm_ = log_beta(first.a, first.b) + log_beta(second.a, second.b);
    switch (branch) {
      case Branch::Plus:
        norm_ += detail::log_trunc(TruncKind::Plus, first, second, qs, method);
        break;
      case Branch::Minus:
        norm_ += detail::log_trunc(TruncKind::Minus, first, second, qs, method);
        break;
      case Branch::Leq:
        norm_ += std::log(trunc_const_leq(first, second, qs, method));
        break;
      default:
        break;
    }
  }

  double operator()(int y1, int y2) const {
    double v = lc1_[y1] + lc2_[y2];
    if (branch_ == Branch::PointNull) return v + null_[y1 + y2];
    v += lb1_[y1] + lb2_[y2] - norm_;
    if (branch_ == Branch::Independent) return v;
    auto post = UpdatedShapes::from(y1, y2, layout_, p1_, p2_);
    if (branch_ == Branch::Plus) return v + log_prob_greater(post.arm1(), post.arm2(), qs_, method_);
    return v + log_prob_greater(post.arm2(), post.arm1(), qs_, method_);
  }

private:
  Branch branch_;
  TrialLayout layout_;
  PriorSpec p1_, p2_;
  QuadratureSettings qs_;
  SumMethod method_;
  std::vector<double> lc1_, lc2_, lb1_, lb2_, null_;
  double norm_ = 0.0;
};

}  // namespace detail

/// Log prior-predictive pmf over the whole lattice. Rows are filled
/// independently, so the result is identical for any thread count.
inline LatticeMatrix log_predictive_matrix(Branch branch, const TrialLayout& layout,
                                           const PriorSpec& first, const PriorSpec& second = {},
                                           const QuadratureSettings& qs = {},
                                           SumMethod method = SumMethod::Automatic,
                                           unsigned threads = 1) {
  detail::PredictiveKernel kernel(branch, layout, first, second, qs, method);
  LatticeMatrix m(layout);
  parallel_for(std::size_t(layout.n1 + 1), threads, [&](std::size_t y1) {
    double* row = m.row(int(y1));
    for (int y2 = 0; y2 <= layout.n2; ++y2) row[y2] = kernel(int(y1), y2);
  });
  return m;
}

inline double log_pred_point_null(int y1, int y2, const TrialLayout& layout,
                                  const PriorSpec& null_prior) {
  check_counts(y1, y2, layout);
  return detail::PredictiveKernel(Branch::PointNull, layout, null_prior, {}, {},
                                  SumMethod::Automatic)(y1, y2);
}

inline double log_pred_indep(int y1, int y2, const TrialLayout& layout, const PriorSpec& arm1,
                             const PriorSpec& arm2) {
  check_counts(y1, y2, layout);
  return detail::PredictiveKernel(Branch::Independent, layout, arm1, arm2, {},
                                  SumMethod::Automatic)(y1, y2);
}

inline double log_pred_truncated(Branch region, int y1, int y2, const TrialLayout& layout,
                                 const PriorSpec& arm1, const PriorSpec& arm2,
                                 const QuadratureSettings& qs = {},
                                 SumMethod method = SumMethod::Automatic) {
  if (region != Branch::Plus && region != Branch::Minus && region != Branch::Leq)
    throw DomainError("log_pred_truncated: region must be Plus, Minus or Leq");
  check_counts(y1, y2, layout);
  return detail::PredictiveKernel(region, layout, arm1, arm2, qs, method)(y1, y2);
}

inline double pred_point_null(int y1, int y2, const TrialLayout& layout, const PriorSpec& null_prior) {
  return std::exp(log_pred_point_null(y1, y2, layout, null_prior));
}

inline double pred_indep(int y1, int y2, const TrialLayout& layout, const PriorSpec& arm1,
                         const PriorSpec& arm2) {
  return std::exp(log_pred_indep(y1, y2, layout, arm1, arm2));
}

inline double pred_plus(int y1, int y2, const TrialLayout& layout, const PriorSpec& arm1,
                        const PriorSpec& arm2, const QuadratureSettings& qs = {},
                        SumMethod method = SumMethod::Automatic) {
  return std::exp(log_pred_truncated(Branch::Plus, y1, y2, layout, arm1, arm2, qs, method));
}

inline double pred_minus(int y1, int y2, const TrialLayout& layout, const PriorSpec& arm1,
                         const PriorSpec& arm2, const QuadratureSettings& qs = {},
                         SumMethod method = SumMethod::Automatic) {
  return std::exp(log_pred_truncated(Branch::Minus, y1, y2, layout, arm1, arm2, qs, method));
}

inline double pred_leq(int y1, int y2, const TrialLayout& layout, const PriorSpec& arm1,
                       const PriorSpec& arm2, const QuadratureSettings& qs = {},
                       SumMethod method = SumMethod::Automatic) {
  return std::exp(log_pred_truncated(Branch::Leq, y1, y2, layout, arm1, arm2, qs, method));
}

/// ln J = ln of  int p^(A1-1) (1-p)^(B1-1) I_p(A2,B2) dp  = ln B(A1,B1) P(p2 < p1 | data).
inline double log_j_integral(const UpdatedShapes& s, const QuadratureSettings& qs = {},
                             SumMethod method = SumMethod::Automatic) {
  return log_beta(s.A1, s.B1) + log_prob_greater(s.arm2(), s.arm1(), qs, method);
}

/// ln I = ln B(A2,B2) [B(A1,B1) - J], evaluated without the subtraction.
inline double log_i_integral(const UpdatedShapes& s, const QuadratureSettings& qs = {},
                             SumMethod method = SumMethod::Automatic) {
  return log_beta(s.A1, s.B1) + log_beta(s.A2, s.B2) +
         log_prob_greater(s.arm1(), s.arm2(), qs, method);
}

}  // namespace bfbin
