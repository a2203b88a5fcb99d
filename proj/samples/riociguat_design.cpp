// Calibrates a balanced two-arm trial for H0: p1 = p2 against H+: p2 > p1
// with flat priors, evidence threshold k = 1/3, and prints the curve near
// the power crossing.

#include <cstdio>

#include <bfbin/bfbin.hpp>

int main() {
  using namespace bfbin;
  HypothesisSpec analysis;
  analysis.test = TestKind::PlusVsPoint;
  HypothesisSpec design = analysis;
  design.role = PriorRole::Design;

  CalibrationTargets targets;
  targets.thresholds = {1.0 / 3.0, 3.0};
  targets.freq_power_point = GridPoint{0.4, 0.6};

  SearchRange range;
  range.n_min = 10;
  range.n_max = 340;
  range.lookahead = 0;

  auto result = calibrate({analysis, design}, targets, range);
  auto show = [](const char* what, const std::optional<int>& n) {
    if (n) std::printf("%-14s %d\n", what, *n);
    else std::printf("%-14s not reached\n", what);
  };
  show("n_power", result.n_power);
  show("n_alpha", result.n_alpha);
  show("n_pce", result.n_pce);
  show("n_freq_power", result.n_freq_power);

  for (const auto& row : result.curves)
    if (row.n_total >= 305 && row.n_total <= 312)
      std::printf("n=%d (%d,%d) power %.4f\n", row.n_total, row.layout.n1, row.layout.n2,
                  row.oc.bayes_power);
}
