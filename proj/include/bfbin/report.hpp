#pragma once

// Rendering of results for the command-line tool: JSON, CSV, SVG, text.

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bayes_factor.hpp"
#include "design.hpp"

namespace bfbin::report {

using json = nlohmann::ordered_json;

inline const std::vector<std::string>& curve_columns() {
  static const std::vector<std::string> cols = {"n_total", "n1", "n2", "bayes_power",
                                                "bayes_t1e", "pce_null", "freq_t1e", "freq_power"};
  return cols;
}

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
inline json opt(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const PriorSpec& p) { return json{{"a", p.a}, {"b", p.b}}; }

inline json to_json(const HypothesisSpec& h) {
  json j;
  j["test"] = to_string(h.test);
  j["role"] = to_string(h.role);
  j["arm1"] = to_json(h.arm1_prior);
  j["arm2"] = to_json(h.arm2_prior);
  if (h.test == TestKind::TwoSided && h.role == PriorRole::Analysis)
    j["null"] = to_json(h.implied_two_sided_null());  // derived, not user-set
  else if (!h.composite())
    j["null"] = to_json(h.null_prior);
  else
    j["null"] = nullptr;
  j["arm1_null_side"] = h.arm1_prior_null_side ? to_json(*h.arm1_prior_null_side) : json(nullptr);
  j["arm2_null_side"] = h.arm2_prior_null_side ? to_json(*h.arm2_prior_null_side) : json(nullptr);
  return j;
}

inline json to_json(const QuadratureSettings& q) {
  return json{{"abs_tol", q.abs_tol}, {"rel_tol", q.rel_tol},
              {"max_subdivisions", q.max_subdivisions}};
}

inline json curve_row(const CurveRow& r) {
  json j;
  j["n_total"] = r.n_total;
  j["n1"] = r.layout.n1;
  j["n2"] = r.layout.n2;
  j["bayes_power"] = r.oc.bayes_power;
  j["bayes_t1e"] = r.oc.bayes_t1e;
  j["pce_null"] = r.oc.pce_null;
  j["freq_t1e"] = opt(r.oc.freq_t1e_sup);
  j["freq_power"] = opt(r.oc.freq_power);
  return j;
}

inline json design_result(const DesignResult& d) {
  json j;
  j["n_power"] = opt(d.n_power);
  j["n_alpha"] = opt(d.n_alpha);
  j["n_pce"] = opt(d.n_pce);
  j["n_freq_power"] = opt(d.n_freq_power);
  if (d.freq_t1e_max) {
    const auto& m = *d.freq_t1e_max;
    j["freq_t1e_max"] = json{{"value", m.value}, {"n_total", m.n_total}, {"n1", m.layout.n1},
                             {"n2", m.layout.n2}, {"p1", m.argmax.p1}, {"p2", m.argmax.p2}};
  } else {
    j["freq_t1e_max"] = nullptr;
  }
  j["curves"] = json::array();
  for (const auto& r : d.curves) j["curves"].push_back(curve_row(r));
  return j;
}

inline json oc_result(const TrialLayout& layout, const OCResult& oc) {
  json j = curve_row({layout.n1 + layout.n2, layout, oc});
  j["rejection_set_size"] = oc.rejection_set_size;
  if (oc.freq_t1e_argmax)
    j["freq_t1e_argmax"] = json{{"p1", oc.freq_t1e_argmax->p1}, {"p2", oc.freq_t1e_argmax->p2}};
  else
    j["freq_t1e_argmax"] = nullptr;
  return j;
}

inline std::string fmt10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_value(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt10(v.get<double>());
  if (v.is_string()) return csv_field(v.get<std::string>());
  return csv_field(v.dump());
}

/// Header plus one line per row, columns in curve_columns() order.
inline std::string curves_csv(const json& rows) {
  std::ostringstream os;
  const auto& cols = curve_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << csv_field(cols[i]);
  os << "\r\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << csv_value(r[cols[i]]);
    os << "\r\n";
  }
  return os.str();
}

inline std::string curves_table(const json& rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%7s %5s %5s %11s %11s %11s %11s %11s\n", "n_total", "n1", "n2",
                "bayes_pow", "bayes_t1e", "pce_null", "freq_t1e", "freq_pow");
  os << buf;
  auto cell = [](const json& v) {
    char b[32];
    if (v.is_null()) return std::string("-");
    std::snprintf(b, sizeof b, "%.6f", v.get<double>());
    return std::string(b);
  };
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%7d %5d %5d %11s %11s %11s %11s %11s\n",
                  r["n_total"].get<int>(), r["n1"].get<int>(), r["n2"].get<int>(),
                  cell(r["bayes_power"]).c_str(), cell(r["bayes_t1e"]).c_str(),
                  cell(r["pce_null"]).c_str(), cell(r["freq_t1e"]).c_str(),
                  cell(r["freq_power"]).c_str());
    os << buf;
  }
  return os.str();
}

// ---- SVG ----------------------------------------------------------------

namespace svg_detail {

struct Series {
  std::string label, colour;
  std::vector<std::pair<double, double>> pts;
  bool dashed = false;
};

struct Panel {
  std::string title, xlabel, ylabel;
  double x0, x1, y0, y1;
  std::vector<Series> series;
  std::vector<std::pair<double, std::string>> hlines;  // target lines
};

inline std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

inline void draw(std::ostringstream& os, const Panel& p, double top) {
  const double left = 70, width = 760, height = 220;
  auto X = [&](double x) { return left + (x - p.x0) / (p.x1 - p.x0) * width; };
  auto Y = [&](double y) { return top + height - (y - p.y0) / (p.y1 - p.y0) * height; };
  char b[512];
  std::snprintf(b, sizeof b,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
                "stroke=\"#333\"/>\n",
                left, top, width, height);
  os << b;
  os << "<text x=\"" << left << "\" y=\"" << top - 8 << "\" font-size=\"14\">" << esc(p.title)
     << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = p.x0 + (p.x1 - p.x0) * i / 5.0, yv = p.y0 + (p.y1 - p.y0) * i / 5.0;
    std::snprintf(b, sizeof b,
                  "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"middle\">%g</text>\n"
                  "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n",
                  X(xv), top + height + 14, std::round(xv * 100) / 100, left - 4, Y(yv) + 3, yv);
    os << b;
  }
  os << "<text x=\"" << left + width / 2 << "\" y=\"" << top + height + 30
     << "\" font-size=\"11\" text-anchor=\"middle\">" << esc(p.xlabel) << "</text>\n";
  os << "<text x=\"18\" y=\"" << top + height / 2 << "\" font-size=\"11\" transform=\"rotate(-90 18 "
     << top + height / 2 << ")\" text-anchor=\"middle\">" << esc(p.ylabel) << "</text>\n";
  for (const auto& [y, label] : p.hlines) {
    std::snprintf(b, sizeof b,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#999\" "
                  "stroke-dasharray=\"2,3\"/>\n<text x=\"%g\" y=\"%g\" font-size=\"9\" "
                  "fill=\"#666\">%s</text>\n",
                  left, Y(y), left + width, Y(y), left + width - 60, Y(y) - 3, esc(label).c_str());
    os << b;
  }
  double ly = top + 14;
  for (const auto& s : p.series) {
    if (s.pts.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"6,3\"" : "") << " points=\"";
    for (auto [x, y] : s.pts) {
      double yy = std::clamp(y, p.y0, p.y1);
      std::snprintf(b, sizeof b, "%.2f,%.2f ", X(x), Y(yy));
      os << b;
    }
    os << "\"/>\n";
    std::snprintf(b, sizeof b,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\"%s/>"
                  "<text x=\"%g\" y=\"%g\" font-size=\"10\">%s</text>\n",
                  left + 10, ly, left + 30, ly, s.colour.c_str(),
                  s.dashed ? " stroke-dasharray=\"6,3\"" : "", left + 34, ly + 3,
                  esc(s.label).c_str());
    os << b;
    ly += 13;
  }
}

inline Series density(const PriorSpec& p, const std::string& label, const std::string& colour,
                      bool dashed, double& ymax) {
  Series s{label, colour, {}, dashed};
  const double lb = log_beta(p.a, p.b);
  for (int i = 1; i < 400; ++i) {
    double x = i / 400.0;
    double y = std::exp((p.a - 1) * std::log(x) + (p.b - 1) * std::log1p(-x) - lb);
    s.pts.emplace_back(x, y);
    ymax = std::max(ymax, std::min(y, 10.0));
  }
  return s;
}

}  // namespace svg_detail

/// Three stacked panels: priors; power and type-I error against n; PCE against n.
inline std::string design_svg(const DesignResult& d) {
  using namespace svg_detail;
  const auto& t = d.targets;
  double nmin = d.range.n_min, nmax = std::max<double>(d.range.n_max, d.range.n_min + 1);

  Panel priors{"Priors (arm densities before any truncation)", "success probability", "density",
               0, 1, 0, 1, {}, {}};
  double ymax = 1.0;
  priors.series.push_back(density(d.specs.design.arm1_prior, "design arm 1", "#1f77b4", false, ymax));
  priors.series.push_back(density(d.specs.design.arm2_prior, "design arm 2", "#d62728", false, ymax));
  priors.series.push_back(density(d.specs.analysis.arm1_prior, "analysis arm 1", "#1f77b4", true, ymax));
  priors.series.push_back(density(d.specs.analysis.arm2_prior, "analysis arm 2", "#d62728", true, ymax));
  if (d.specs.design.composite()) {
    priors.series.push_back(density(*d.specs.design.arm1_prior_null_side, "design arm 1 (null side)",
                                    "#2ca02c", false, ymax));
    priors.series.push_back(density(*d.specs.design.arm2_prior_null_side, "design arm 2 (null side)",
                                    "#9467bd", false, ymax));
  }
  priors.y1 = std::ceil(ymax * 1.1);

  Panel oc{"Power and type-I error", "total sample size n", "probability", nmin, nmax, 0, 1, {}, {}};
  Series pw{"Bayesian power", "#1f77b4", {}, false}, te{"Bayesian type-I error", "#d62728", {}, false};
  Series fp{"frequentist power", "#1f77b4", {}, true}, ft{"frequentist type-I error", "#d62728", {}, true};
  Series pc{"P(BF01 > k_f | H0)", "#2ca02c", {}, false};
  for (const auto& r : d.curves) {
    pw.pts.emplace_back(r.n_total, r.oc.bayes_power);
    te.pts.emplace_back(r.n_total, r.oc.bayes_t1e);
    pc.pts.emplace_back(r.n_total, r.oc.pce_null);
    if (r.oc.freq_power) fp.pts.emplace_back(r.n_total, *r.oc.freq_power);
    if (r.oc.freq_t1e_sup) ft.pts.emplace_back(r.n_total, *r.oc.freq_t1e_sup);
  }
  oc.series = {pw, te, fp, ft};
  oc.hlines = {{t.power_target, "power target"}, {t.alpha_target, "alpha"}};

  Panel pce{"Probability of compelling evidence for H0", "total sample size n", "probability",
            nmin, nmax, 0, 1, {pc}, {{t.pce_target, "target"}}};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"880\" "
        "font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  draw(os, priors, 30);
  draw(os, oc, 320);
  draw(os, pce, 610);
  os << "</svg>\n";
  return os.str();
}

}  // namespace bfbin::report
