// bfbin: Bayes factors and sample-size calibration for two-arm binomial trials.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include <bfbin/bfbin.hpp>
#include <bfbin/report.hpp>

using namespace bfbin;
using report::json;

namespace {

constexpr int kOk = 0, kNumeric = 1, kUsage = 2;

double parse_number(const std::string& s, const char* flag) {
  auto whole = [&](const std::string& t) {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  };
  try {
    auto slash = s.find('/');
    if (slash == std::string::npos) return whole(s);
    double num = whole(s.substr(0, slash)), den = whole(s.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument(s);
    return num / den;
  } catch (const std::exception&) {
    throw ConfigError(std::string("cannot parse ") + flag + " value '" + s + "'");
  }
}

TestKind parse_test(const std::string& s) {
  static const std::map<std::string, TestKind> names = {{"two-sided", TestKind::TwoSided},
                                                        {"plus0", TestKind::PlusVsPoint},
                                                        {"minus0", TestKind::MinusVsPoint},
                                                        {"plusminus", TestKind::PlusVsMinus}};
  return names.at(s);
}

// One side's prior flags: --a1a ... or --a1d ...
struct PriorFlags {
  double a1 = 1, b1 = 1, a2 = 1, b2 = 1, a0 = 1, b0 = 1;
  double a1n = 1, b1n = 1, a2n = 1, b2n = 1;
  std::vector<CLI::Option*> point_null, null_side;

  void add(CLI::App* app, const std::string& s, const std::string& what) {
    app->add_option("--a1" + s, a1, what + " prior arm 1, first shape")->capture_default_str();
    app->add_option("--b1" + s, b1, what + " prior arm 1, second shape")->capture_default_str();
    app->add_option("--a2" + s, a2, what + " prior arm 2, first shape")->capture_default_str();
    app->add_option("--b2" + s, b2, what + " prior arm 2, second shape")->capture_default_str();
    point_null.push_back(
        app->add_option("--a0" + s, a0, what + " prior on the common p under a point null")
            ->capture_default_str());
    point_null.push_back(app->add_option("--b0" + s, b0, "")->capture_default_str());
    null_side.push_back(app->add_option("--a1" + s + "-null", a1n, what + " null-side prior arm 1 (plusminus)")
                            ->capture_default_str());
    null_side.push_back(app->add_option("--b1" + s + "-null", b1n, "")->capture_default_str());
    null_side.push_back(app->add_option("--a2" + s + "-null", a2n, what + " null-side prior arm 2 (plusminus)")
                            ->capture_default_str());
    null_side.push_back(app->add_option("--b2" + s + "-null", b2n, "")->capture_default_str());
  }

  HypothesisSpec build(TestKind test, PriorRole role) const {
    auto given = [](const std::vector<CLI::Option*>& v) {
      for (auto* o : v)
        if (o->count()) return true;
      return false;
    };
    if (test != TestKind::PlusVsMinus && given(null_side))
      throw ConfigError("null-side prior flags only apply to --test plusminus");
    if (test == TestKind::PlusVsMinus && given(point_null))
      throw ConfigError("--a0/--b0 priors do not apply to --test plusminus");
    if (test == TestKind::TwoSided && role == PriorRole::Analysis && given(point_null))
      throw ConfigError(
          "--a0a/--b0a do not apply to the two-sided test; its null prior is implied by the arm "
          "priors");
    HypothesisSpec h;
    h.test = test;
    h.role = role;
    h.arm1_prior = {a1, b1};
    h.arm2_prior = {a2, b2};
    h.null_prior = {a0, b0};
    if (test == TestKind::PlusVsMinus) {
      h.arm1_prior_null_side = PriorSpec{a1n, b1n};
      h.arm2_prior_null_side = PriorSpec{a2n, b2n};
    }
    return h;
  }
};

struct Common {
  std::string test = "two-sided";
  std::string output = "table";
  std::string out_file;
  unsigned threads = 0;
  QuadratureSettings qs;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--test", c.test, "two-sided | plus0 | minus0 | plusminus")
      ->check(CLI::IsMember({"two-sided", "plus0", "minus0", "plusminus"}))
      ->capture_default_str();
  app->add_option("--output", c.output, "json | csv | svg | table")
      ->check(CLI::IsMember({"json", "csv", "svg", "table"}))
      ->capture_default_str();
  app->add_option("--out-file", c.out_file, "write output here instead of stdout");
  app->add_option("--quad-abs-tol", c.qs.abs_tol, "quadrature absolute tolerance")->capture_default_str();
  app->add_option("--quad-rel-tol", c.qs.rel_tol, "quadrature relative tolerance")->capture_default_str();
  app->add_option("--quad-max-subdivisions", c.qs.max_subdivisions, "quadrature subdivision budget")
      ->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads, 0 = all cores (BFBIN_THREADS overrides)")
      ->capture_default_str();
}

unsigned effective_threads(unsigned flag) {
  if (const char* env = std::getenv("BFBIN_THREADS")) {
    try {
      long v = std::stol(env);
      if (v < 0) throw std::invalid_argument(env);
      return unsigned(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("BFBIN_THREADS must be a nonnegative integer, got '") + env + "'");
    }
  }
  return flag;
}

void emit(const Common& c, const std::string& text) {
  if (c.out_file.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out_file, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + c.out_file);
  f << text;
}

json meta(std::chrono::steady_clock::time_point start) {
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
  return json{{"version", bfbin::version}, {"runtime_ms", std::round(ms.count() * 1000) / 1000}};
}

json threshold_json(double k, const std::string& k_text, double kf, const std::string& kf_text) {
  return json{{"k", k}, {"k_input", k_text}, {"k_f", kf}, {"k_f_input", kf_text}};
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Bayes factors and sample-size calibration for two-arm binomial trials"};
  app.require_subcommand(1);

  // bf
  auto* bf = app.add_subcommand("bf", "Bayes factor for observed counts");
  Common bf_c;
  PriorFlags bf_a;
  int n1 = 0, y1 = 0, n2 = 0, y2 = 0;
  add_common(bf, bf_c);
  bf->add_option("--n1", n1, "control arm size")->required();
  bf->add_option("--y1", y1, "control arm successes")->required();
  bf->add_option("--n2", n2, "treatment arm size")->required();
  bf->add_option("--y2", y2, "treatment arm successes")->required();
  bf_a.add(bf, "a", "analysis");

  // oc
  auto* oc = app.add_subcommand("oc", "Operating characteristics at fixed arm sizes");
  Common oc_c;
  PriorFlags oc_a, oc_d;
  int oc_n1 = 0, oc_n2 = 0;
  std::string oc_k = "1/3", oc_kf = "3";
  bool oc_ft1e = false;
  double oc_grid = 0.005;
  std::optional<double> oc_p1, oc_p2;
  add_common(oc, oc_c);
  oc->add_option("--n1", oc_n1, "control arm size")->required();
  oc->add_option("--n2", oc_n2, "treatment arm size")->required();
  oc->add_option("--k", oc_k, "evidence threshold against H0 (decimal or a/b)")->capture_default_str();
  oc->add_option("--kf", oc_kf, "compelling-evidence threshold for H0")->capture_default_str();
  oc->add_flag("--freq-t1e", oc_ft1e, "compute the frequentist type-I error grid maximum");
  oc->add_option("--grid-step", oc_grid, "grid spacing for --freq-t1e")->capture_default_str();
  oc->add_option("--p1", oc_p1, "control rate for frequentist power");
  oc->add_option("--p2", oc_p2, "treatment rate for frequentist power");
  oc_a.add(oc, "a", "analysis");
  oc_d.add(oc, "d", "design");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Smallest total sample size per criterion");
  Common cal_c;
  PriorFlags cal_a, cal_d;
  std::string cal_k = "1/3", cal_kf = "3";
  CalibrationTargets targets;
  SearchRange range;
  std::optional<double> cal_p1, cal_p2;
  add_common(cal, cal_c);
  cal->add_option("--k", cal_k, "evidence threshold against H0 (decimal or a/b)")->capture_default_str();
  cal->add_option("--kf", cal_kf, "compelling-evidence threshold for H0")->capture_default_str();
  cal->add_option("--power", targets.power_target, "target power")->capture_default_str();
  cal->add_option("--alpha", targets.alpha_target, "type-I error bound")->capture_default_str();
  cal->add_option("--pce", targets.pce_target, "target probability of compelling evidence")
      ->capture_default_str();
  cal->add_option("--nmin", range.n_min, "smallest total n")->capture_default_str();
  cal->add_option("--nmax", range.n_max, "largest total n")->capture_default_str();
  cal->add_option("--step", range.n_step, "step between candidate totals")->capture_default_str();
  cal->add_option("--alloc1", range.alloc1, "control allocation fraction")->capture_default_str();
  cal->add_option("--alloc2", range.alloc2, "treatment allocation fraction")->capture_default_str();
  cal->add_option("--lookahead", range.lookahead,
                  "criterion must also hold at this many following candidates")
      ->capture_default_str();
  cal->add_option("--p1", cal_p1, "control rate for frequentist power");
  cal->add_option("--p2", cal_p2, "treatment rate for frequentist power");
  cal->add_flag("--freq-t1e", targets.compute_freq_t1e, "frequentist type-I error along the curve");
  cal->add_option("--grid-step", targets.grid_step, "grid spacing for --freq-t1e")->capture_default_str();
  cal_a.add(cal, "a", "analysis");
  cal_d.add(cal, "d", "design");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (bf->parsed()) {
      if (bf_c.output == "svg") throw ConfigError("--output svg is only available for calibrate");
      (void)effective_threads(bf_c.threads);  // single evaluation, but reject bad settings consistently
      TrialLayout layout{n1, n2};
      if (n1 < 1 || n2 < 1 || y1 < 0 || y1 > n1 || y2 < 0 || y2 > n2)
        throw ConfigError("need n1, n2 >= 1 and 0 <= y <= n");
      auto test = parse_test(bf_c.test);
      auto spec = bf_a.build(test, PriorRole::Analysis);
      spec.validate();
      const auto& qs = bf_c.qs;
      qs.validate();
      BayesFactor b = bayes_factor(y1, y2, layout, spec, qs);
      double alt_over_null = std::exp(-b.log_null_over_alt());
      json config{{"command", "bf"}, {"test", bf_c.test}, {"n1", n1}, {"y1", y1}, {"n2", n2},
                  {"y2", y2}, {"analysis", report::to_json(spec)}, {"quadrature", report::to_json(qs)}};
      json result{{"orientation", to_string(b.orientation)}, {"value", b.value()},
                  {"log_value", b.log_value}, {"bf01", std::exp(b.log_null_over_alt())},
                  {"label", jeffreys_label(alt_over_null)}};
      if (bf_c.output == "json") {
        emit(bf_c, json{{"config", config}, {"result", result}, {"meta", meta(start)}}.dump(2) + "\n");
      } else if (bf_c.output == "csv") {
        std::string s = "test,n1,y1,n2,y2,orientation,value,log_value,label\r\n";
        s += bf_c.test + "," + std::to_string(n1) + "," + std::to_string(y1) + "," +
             std::to_string(n2) + "," + std::to_string(y2) + "," +
             report::csv_field(to_string(b.orientation)) + "," + report::fmt10(b.value()) + "," +
             report::fmt10(b.log_value) + "," + report::csv_field(result["label"].get<std::string>()) +
             "\r\n";
        emit(bf_c, s);
      } else {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "test         %s\nlayout       n1=%d y1=%d  n2=%d y2=%d\n%-12s %.6g\n"
                      "log          %.6g\nlabel        %s\n",
                      bf_c.test.c_str(), n1, y1, n2, y2, to_string(b.orientation), b.value(),
                      b.log_value, result["label"].get<std::string>().c_str());
        emit(bf_c, buf);
      }
      return kOk;
    }

    if (oc->parsed()) {
      if (oc_c.output == "svg") throw ConfigError("--output svg is only available for calibrate");
      if (oc_p1.has_value() != oc_p2.has_value()) throw ConfigError("--p1 and --p2 go together");
      TrialLayout layout{oc_n1, oc_n2};
      if (oc_n1 < 1 || oc_n2 < 1) throw ConfigError("arm sizes must be at least 1");
      auto test = parse_test(oc_c.test);
      auto analysis = oc_a.build(test, PriorRole::Analysis);
      auto design = oc_d.build(test, PriorRole::Design);
      analysis.validate();
      design.validate();
      const auto& qs = oc_c.qs;
      qs.validate();
      Thresholds th{parse_number(oc_k, "--k"), parse_number(oc_kf, "--kf")};
      th.validate();
      OCOptions opt{oc_ft1e, oc_grid, std::nullopt};
      if (oc_ft1e && !(oc_grid > 0.0 && oc_grid <= 0.1)) throw ConfigError("grid step must lie in (0, 0.1]");
      if (oc_p1) opt.freq_power_point = GridPoint{*oc_p1, *oc_p2};
      unsigned threads = effective_threads(oc_c.threads);
      auto r = evaluate_oc(layout, analysis, design, th, opt, qs, threads);
      json config{{"command", "oc"}, {"test", oc_c.test}, {"n1", oc_n1}, {"n2", oc_n2},
                  {"thresholds", threshold_json(th.k, oc_k, th.k_f, oc_kf)},
                  {"analysis", report::to_json(analysis)}, {"design", report::to_json(design)},
                  {"freq_t1e", oc_ft1e}, {"grid_step", oc_grid},
                  {"freq_power_point", oc_p1 ? json{{"p1", *oc_p1}, {"p2", *oc_p2}} : json(nullptr)},
                  {"quadrature", report::to_json(qs)}, {"threads", threads}};
      json result = report::oc_result(layout, r);
      if (oc_c.output == "json") {
        emit(oc_c, json{{"config", config}, {"result", result}, {"meta", meta(start)}}.dump(2) + "\n");
      } else if (oc_c.output == "csv") {
        emit(oc_c, report::curves_csv(json::array({result})));
      } else {
        std::string s = report::curves_table(json::array({result}));
        s += "rejection set size " + std::to_string(r.rejection_set_size) + "\n";
        if (r.freq_t1e_argmax)
          s += "freq t1e maximised at p1=" + report::fmt10(r.freq_t1e_argmax->p1) +
               " p2=" + report::fmt10(r.freq_t1e_argmax->p2) + "\n";
        emit(oc_c, s);
      }
      return kOk;
    }

    // calibrate
    if (cal_p1.has_value() != cal_p2.has_value()) throw ConfigError("--p1 and --p2 go together");
    if (cal_c.output == "svg" && cal_c.out_file.empty())
      throw ConfigError("--output svg needs --out-file (the curve CSV is written next to it)");
    auto test = parse_test(cal_c.test);
    DesignSpecs specs{cal_a.build(test, PriorRole::Analysis), cal_d.build(test, PriorRole::Design)};
    targets.thresholds = {parse_number(cal_k, "--k"), parse_number(cal_kf, "--kf")};
    if (cal_p1) targets.freq_power_point = GridPoint{*cal_p1, *cal_p2};
    validate_specs(specs);
    const auto& qs = cal_c.qs;
    qs.validate();
    targets.validate();
    range.validate();
    unsigned threads = effective_threads(cal_c.threads);
    auto d = calibrate(specs, targets, range, qs, threads);

    json config{{"command", "calibrate"},
                {"test", cal_c.test},
                {"thresholds", threshold_json(targets.thresholds.k, cal_k, targets.thresholds.k_f, cal_kf)},
                {"targets", {{"power", targets.power_target}, {"alpha", targets.alpha_target},
                             {"pce", targets.pce_target}}},
                {"range", {{"n_min", range.n_min}, {"n_max", range.n_max}, {"n_step", range.n_step},
                           {"alloc1", range.alloc1}, {"alloc2", range.alloc2},
                           {"lookahead", range.lookahead}}},
                {"analysis", report::to_json(specs.analysis)},
                {"design", report::to_json(specs.design)},
                {"freq_power_point", cal_p1 ? json{{"p1", *cal_p1}, {"p2", *cal_p2}} : json(nullptr)},
                {"freq_t1e", targets.compute_freq_t1e},
                {"grid_step", targets.grid_step},
                {"quadrature", report::to_json(qs)},
                {"threads", threads}};
    json result = report::design_result(d);
    if (cal_c.output == "json") {
      emit(cal_c, json{{"config", config}, {"result", result}, {"meta", meta(start)}}.dump(2) + "\n");
    } else if (cal_c.output == "csv") {
      emit(cal_c, report::curves_csv(result["curves"]));
    } else if (cal_c.output == "svg") {
      emit(cal_c, report::design_svg(d));
      std::string csv_path = cal_c.out_file;
      auto dot = csv_path.rfind('.');
      auto sep = csv_path.rfind('/');
      if (dot != std::string::npos && (sep == std::string::npos || dot > sep)) csv_path.resize(dot);
      csv_path += ".csv";
      std::ofstream f(csv_path, std::ios::binary);
      if (!f) throw ConfigError("cannot open " + csv_path);
      f << report::curves_csv(result["curves"]);
    } else {
      auto show = [](const json& v) { return v.is_null() ? std::string("not reached") : v.dump(); };
      std::string s = report::curves_table(result["curves"]);
      s += "\nn_power       " + show(result["n_power"]) + "\nn_alpha       " + show(result["n_alpha"]) +
           "\nn_pce         " + show(result["n_pce"]) + "\nn_freq_power  " +
           (targets.freq_power_point ? show(result["n_freq_power"]) : std::string("not requested")) + "\n";
      if (d.freq_t1e_max)
        s += "max freq t1e  " + report::fmt10(d.freq_t1e_max->value) + " at n=" +
             std::to_string(d.freq_t1e_max->n_total) + " (p1=" + report::fmt10(d.freq_t1e_max->argmax.p1) +
             ", p2=" + report::fmt10(d.freq_t1e_max->argmax.p2) + ")\n";
      emit(cal_c, s);
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "bfbin: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "bfbin: " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "bfbin: numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "bfbin: numeric failure: " << e.what() << "\n";
    return kNumeric;
  }
}
