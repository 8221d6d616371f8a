#include "cek/report/figures.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cek/report/csv.h"
#include "cek/text.h"

namespace cek::report {
namespace {

using nlohmann::json;

json Point(double x, double y) { return json::array({JsonNumber(x), JsonNumber(y)}); }

json Base(const std::string& name, const std::string& kind, const std::string& title,
          Phase phase, const std::string& x_label, const std::string& y_label) {
  json f;
  f["name"] = name;
  f["kind"] = kind;
  f["title"] = title;
  f["phase"] = ToString(phase);
  f["x_label"] = x_label;
  f["y_label"] = y_label;
  f["x_range"] = json::array({0.0, 1.0});
  f["y_range"] = json::array({0.0, 1.0});
  f["series"] = json::array();
  f["references"] = json::array();
  return f;
}

json Diagonal() {
  return {{"name", "x = y"}, {"style", "dashed"}, {"points", json::array({Point(0, 0), Point(1, 1)})}};
}

std::string SummaryLabel(const std::string& name, const eval::PooledCurve& c, const char* what) {
  if (!c.summary_mean) return name;
  char buf[96];
  std::snprintf(buf, sizeof(buf), " (%s %.3f \xC2\xB1 %.3f)", what, *c.summary_mean, c.summary_std);
  return name + buf;
}

json PooledSeries(const std::string& name, const eval::PooledCurve& c, const char* what) {
  json s;
  s["name"] = SummaryLabel(name, c, what);
  s["style"] = "line";
  s["points"] = json::array();
  s["band"] = json::array();
  for (std::size_t j = 0; j < c.grid.size(); ++j) {
    s["points"].push_back(Point(c.grid[j], c.mean[j]));
    s["band"].push_back(json::array({JsonNumber(c.grid[j]), JsonNumber(c.mean[j] - c.std[j]),
                                     JsonNumber(c.mean[j] + c.std[j])}));
  }
  s["summary_mean"] = c.summary_mean ? JsonNumber(*c.summary_mean) : json();
  s["summary_std"] = JsonNumber(c.summary_std);
  s["fold_summaries"] = json::array();
  for (const eval::Curve& f : c.folds) {
    s["fold_summaries"].push_back(f.summary ? JsonNumber(*f.summary) : json(f.missing_reason));
  }
  return s;
}

std::string Suffixed(const std::string& base, Phase phase) {
  return base + "_" + ToString(phase);
}

json BalanceFigure(const eval::PhaseDiagnostics& d) {
  const eval::BalanceTable& t = d.balance;
  json f = Base(Suffixed("balance", d.phase), "balance", "Covariate balance", d.phase,
                "absolute SMD", "covariate");
  const std::size_t m = t.covariates.size();
  double xmax = t.threshold;
  json covs = json::array();
  json un = {{"name", "unweighted"}, {"style", "points"}, {"points", json::array()}};
  json w = {{"name", "weighted"}, {"style", "points"}, {"points", json::array()}};
  json ticks = json::array();
  for (std::size_t r = 0; r < m; ++r) {
    const eval::CovariateBalance& c = t.covariates[r];
    covs.push_back({{"name", c.name},
                    {"smd_unweighted", JsonNumber(c.mean_unweighted)},
                    {"smd_weighted", JsonNumber(c.mean_weighted)},
                    {"flagged", c.flagged}});
    // Top row holds the largest unweighted SMD.
    const double y = static_cast<double>(m - r);
    if (std::isfinite(c.mean_unweighted)) {
      un["points"].push_back(Point(c.mean_unweighted, y));
      xmax = std::max(xmax, c.mean_unweighted);
    }
    if (std::isfinite(c.mean_weighted)) {
      w["points"].push_back(Point(c.mean_weighted, y));
      xmax = std::max(xmax, c.mean_weighted);
    }
    ticks.push_back(json::array({static_cast<double>(m - r), c.name}));
  }
  f["covariates"] = covs;
  f["threshold"] = t.threshold;
  f["flagged"] = t.Flagged();
  f["series"] = json::array({un, w});
  f["y_ticks"] = ticks;
  f["x_range"] = json::array({0.0, xmax * 1.05});
  f["y_range"] = json::array({0.0, static_cast<double>(m + 1)});
  f["references"].push_back({{"name", "threshold"},
                             {"style", "dotted"},
                             {"points", json::array({Point(t.threshold, 0.0),
                                                     Point(t.threshold, static_cast<double>(m + 1))})}});
  return f;
}

json RocPanel(const eval::PhaseDiagnostics& d) {
  json f = Base(Suffixed("roc_panel", d.phase), "roc_panel", "Propensity ROC", d.phase,
                "false positive rate", "true positive rate");
  f["series"].push_back(PooledSeries("propensity", d.propensity_roc, "AUC"));
  f["series"].push_back(PooledSeries("expected", d.expected_roc, "AUC"));
  f["series"].push_back(PooledSeries("weighted", d.weighted_roc, "AUC"));
  f["references"].push_back(Diagonal());
  f["references"].back()["name"] = "chance";
  return f;
}

json PrFigure(const eval::PhaseDiagnostics& d) {
  json f = Base(Suffixed("propensity_pr", d.phase), "pr", "Propensity precision-recall",
                d.phase, "recall", "precision");
  f["series"].push_back(PooledSeries("propensity", d.propensity_pr, "AP"));
  return f;
}

json CalibrationSeries(const std::string& name, const eval::CalibrationCurve& c) {
  json s = {{"name", name}, {"style", "points"}, {"points", json::array()},
            {"x_errors", json::array()}, {"n", json::array()}};
  for (const eval::CalibrationPoint& p : c.points) {
    s["points"].push_back(Point(p.r_mean, p.p_observed));
    s["x_errors"].push_back(json::array({JsonNumber(p.ci_low), JsonNumber(p.ci_high)}));
    s["n"].push_back(p.n);
  }
  s["skipped_bins"] = c.skipped_bins;
  return s;
}

json CalibrationFigure(const std::string& name, const std::string& title,
                       const std::vector<const eval::CalibrationCurve*>& curves,
                       const std::vector<std::string>& labels, Phase phase) {
  json f = Base(name, "calibration", title, phase, "predicted probability", "observed frequency");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    f["series"].push_back(CalibrationSeries(labels[i], *curves[i]));
  }
  f["strategy"] = curves.empty() ? "quantile" : eval::ToString(curves[0]->strategy);
  f["references"].push_back(Diagonal());
  return f;
}

json DistributionFigure(const std::string& name, const std::string& title,
                        const std::string& x_label, const eval::DistributionSeries& s,
                        Phase phase) {
  const bool cdf = s.mode == eval::DistributionMode::kCdf;
  json f = Base(name, "distribution", title, phase, x_label, cdf ? "cumulative fraction" : "density");
  f["mode"] = eval::ToString(s.mode);
  f["edges"] = json::array();
  for (double e : s.edges) f["edges"].push_back(JsonNumber(e));
  const double width = s.edges.size() > 1 ? s.edges[1] - s.edges[0] : 1.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t a = 0; a < s.values.size(); ++a) {
    json series = {{"name", "arm " + std::to_string(a)},
                   {"style", cdf ? "line" : "bars"},
                   {"width", JsonNumber(width)},
                   {"points", json::array()},
                   {"counts", s.counts[a]}};
    for (std::size_t k = 0; k < s.values[a].size(); ++k) {
      const double x = cdf ? s.edges[k + 1] : (s.edges[k] + s.edges[k + 1]) / 2.0;
      series["points"].push_back(Point(x, s.values[a][k]));
      lo = std::min(lo, s.values[a][k]);
      hi = std::max(hi, s.values[a][k]);
    }
    f["series"].push_back(series);
  }
  f["x_range"] = json::array({JsonNumber(s.edges.front()), JsonNumber(s.edges.back())});
  f["y_range"] = json::array({JsonNumber(lo * 1.05), JsonNumber(hi > 0 ? hi * 1.05 : 1.0)});
  f["min_count"] = s.min_count;
  f["suspect_bins"] = json::array();
  for (std::size_t i = 0; i < s.suspect_bins.size(); ++i) {
    f["suspect_bins"].push_back({{"bin", s.suspect_bins[i]}, {"arm", s.suspect_arm[i]}});
  }
  return f;
}

json WeightDistribution(const eval::PhaseDiagnostics& d) {
  std::vector<double> w;
  std::vector<int> a;
  double hi = 0.0;
  for (const eval::FoldView& v : d.folds) {
    w.insert(w.end(), v.weights.weights.begin(), v.weights.weights.end());
    a.insert(a.end(), v.treatment.begin(), v.treatment.end());
  }
  for (double x : w) hi = std::max(hi, x);
  eval::DistributionOptions opt;
  opt.mode = eval::DistributionMode::kHistogram;
  opt.hi = hi > 0.0 ? hi : 1.0;
  const eval::DistributionSeries s = eval::PropensityDistribution(w, a, opt);
  json f = DistributionFigure(Suffixed("weight_distribution", d.phase), "Sample weights", "weight",
                              s, d.phase);
  f["kind"] = "weight_distribution";
  f["weight_kind"] = d.folds.empty() ? "ipw" : causal::ToString(d.folds[0].weights.kind);
  std::size_t clipped = 0;
  std::size_t truncated = 0;
  for (const eval::FoldView& v : d.folds) {
    clipped += v.weights.clipped;
    truncated += v.weights.truncated;
  }
  f["clipped"] = clipped;
  f["truncated"] = truncated;
  return f;
}

json CounterfactualFigure(const eval::PhaseDiagnostics& d) {
  const eval::IgnorabilityReport& r = d.outcome->ignorability;
  json f = Base(Suffixed("counterfactual_scatter", d.phase), "counterfactual_scatter",
                "Predicted outcome under each arm", d.phase, "prediction under arm 0",
                "prediction under arm 1");
  for (int a = 0; a < 2; ++a) {
    json s = {{"name", "arm " + std::to_string(a)}, {"style", "points"}, {"points", json::array()}};
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      if (r.arm[i] == a) s["points"].push_back(Point(r.x[i], r.y[i]));
    }
    f["series"].push_back(s);
  }
  const double lo = std::min(r.x_lo, r.y_lo);
  const double hi = std::max(r.x_hi, r.y_hi);
  f["x_range"] = json::array({JsonNumber(lo), JsonNumber(hi > lo ? hi : lo + 1.0)});
  f["y_range"] = f["x_range"];
  f["references"].push_back(
      {{"name", "x = y"}, {"style", "dashed"}, {"points", json::array({Point(lo, lo), Point(hi, hi)})}});
  f["grid"] = r.grid;
  f["min_cell"] = r.min_cell;
  f["grid_x"] = json::array({JsonNumber(r.x_lo), JsonNumber(r.x_hi)});
  f["grid_y"] = json::array({JsonNumber(r.y_lo), JsonNumber(r.y_hi)});
  f["populated_cells"] = r.populated;
  f["flagged_cells"] = json::array();
  for (const eval::IgnorabilityCell& c : r.cells) {
    if (c.flagged) {
      f["flagged_cells"].push_back(
          {{"ix", c.ix}, {"iy", c.iy}, {"count0", c.count0}, {"count1", c.count1}});
    }
  }
  f["violation_score"] = JsonNumber(r.violation_score);
  if (!r.warning.empty()) f["warning"] = r.warning;
  return f;
}

json AccuracyFigure(const eval::PhaseDiagnostics& d) {
  const eval::AccuracyScatterResult& r = *d.outcome->accuracy;
  json f = Base(Suffixed("accuracy_scatter", d.phase), "accuracy_scatter",
                r.residual_mode ? "Residuals" : "Predicted vs observed", d.phase, "predicted",
                r.residual_mode ? "predicted - observed" : "observed");
  double lo = 0.0, hi = 0.0, ylo = 0.0, yhi = 0.0;
  bool first = true;
  for (int a = 0; a < 2; ++a) {
    json s = {{"name", "arm " + std::to_string(a)}, {"style", "points"}, {"points", json::array()}};
    for (std::size_t i = 0; i < r.predicted.size(); ++i) {
      if (r.arm[i] != a) continue;
      s["points"].push_back(Point(r.predicted[i], r.value[i]));
      if (first) {
        lo = hi = r.predicted[i];
        ylo = yhi = r.value[i];
        first = false;
      }
      lo = std::min(lo, r.predicted[i]);
      hi = std::max(hi, r.predicted[i]);
      ylo = std::min(ylo, r.value[i]);
      yhi = std::max(yhi, r.value[i]);
    }
    s["r2"] = r.r2[a] ? JsonNumber(*r.r2[a]) : json();
    s["r2_fold_std"] = JsonNumber(r.r2_fold_std[a]);
    f["series"].push_back(s);
  }
  if (!r.residual_mode) {
    lo = ylo = std::min(lo, ylo);
    hi = yhi = std::max(hi, yhi);
    f["references"].push_back({{"name", "x = y"}, {"style", "dashed"},
                               {"points", json::array({Point(lo, lo), Point(hi, hi)})}});
  } else {
    f["references"].push_back({{"name", "zero"}, {"style", "dashed"},
                               {"points", json::array({Point(lo, 0.0), Point(hi, 0.0)})}});
  }
  f["x_range"] = json::array({JsonNumber(lo), JsonNumber(hi > lo ? hi : lo + 1.0)});
  f["y_range"] = json::array({JsonNumber(ylo), JsonNumber(yhi > ylo ? yhi : ylo + 1.0)});
  return f;
}

void PhaseFigures(const eval::PhaseDiagnostics& d, std::vector<Figure>& out) {
  auto add = [&](json f) {
    const std::string name = f["name"].get<std::string>();
    out.push_back({name, std::move(f)});
  };
  add(BalanceFigure(d));
  add(RocPanel(d));
  std::vector<const eval::CalibrationCurve*> curves;
  std::vector<std::string> labels;
  for (std::size_t f = 0; f < d.calibration.size(); ++f) {
    curves.push_back(&d.calibration[f]);
    labels.push_back("fold " + std::to_string(f));
  }
  add(CalibrationFigure(Suffixed("propensity_calibration", d.phase), "Propensity calibration",
                        curves, labels, d.phase));
  add(DistributionFigure(Suffixed("propensity_distribution", d.phase), "Propensity distribution",
                         "propensity score", d.distribution, d.phase));
  add(WeightDistribution(d));
  add(PrFigure(d));
  if (!d.outcome) return;
  add(CounterfactualFigure(d));
  if (d.outcome->roc) {
    json f = Base(Suffixed("outcome_roc", d.phase), "roc_panel", "Outcome ROC (factual)",
                  d.phase, "false positive rate", "true positive rate");
    f["series"].push_back(PooledSeries("outcome", *d.outcome->roc, "AUC"));
    f["references"].push_back(Diagonal());
    f["references"].back()["name"] = "chance";
    add(std::move(f));
  }
  if (d.outcome->calibration) {
    add(CalibrationFigure(Suffixed("outcome_calibration", d.phase), "Outcome calibration",
                          {&*d.outcome->calibration}, {"factual"}, d.phase));
  }
  if (d.outcome->accuracy) add(AccuracyFigure(d));
}

}  // namespace

json JsonNumber(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::vector<Figure> BuildFigures(const eval::DiagnosticBundle& bundle) {
  std::vector<Figure> out;
  PhaseFigures(bundle.train, out);
  PhaseFigures(bundle.validation, out);
  for (Figure& f : out) {
    if (!bundle.subset.empty()) f.data["subset"] = bundle.subset;
  }
  return out;
}

std::vector<std::string> WriteFigures(const std::vector<Figure>& figures, const std::string& dir) {
  std::vector<std::string> paths;
  for (const Figure& f : figures) {
    const std::string base = dir + "/" + f.name;
    WriteTextFile(base + ".json", f.data.dump(1) + "\n");
    WriteTextFile(base + ".svg", RenderSvg(f.data));
    paths.push_back(base + ".json");
    paths.push_back(base + ".svg");
  }
  return paths;
}

}  // namespace cek::report
