#include "cek/eval/scatter.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "cek/error.h"
#include "cek/log.h"

namespace cek::eval {
namespace {

constexpr const char* kModule = "evaluation";

int Cell(double v, double lo, double hi, int g) {
  if (!(hi > lo)) return 0;
  const int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * g));
  return std::clamp(k, 0, g - 1);
}

double PopulationStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

IgnorabilityReport CounterfactualScatter(std::span<const double> y0, std::span<const double> y1,
                                         std::span<const int> arm,
                                         const IgnorabilityOptions& options) {
  if (y0.size() != y1.size() || y0.size() != arm.size()) {
    throw ParameterError(kModule, "counterfactual scatter inputs differ in length");
  }
  if (options.grid < 1) throw ParameterError(kModule, "grid must be >= 1");
  bool has0 = false;
  bool has1 = false;
  for (int a : arm) {
    has0 |= a == 0;
    has1 |= a == 1;
  }
  if (!has0 || !has1) {
    throw ParameterError(kModule, "counterfactual scatter needs samples from both arms");
  }
  IgnorabilityReport rep;
  rep.x.assign(y0.begin(), y0.end());
  rep.y.assign(y1.begin(), y1.end());
  rep.arm.assign(arm.begin(), arm.end());
  rep.grid = options.grid;
  rep.min_cell = options.min_cell;
  const auto [xmin, xmax] = std::minmax_element(rep.x.begin(), rep.x.end());
  const auto [ymin, ymax] = std::minmax_element(rep.y.begin(), rep.y.end());
  rep.x_lo = *xmin;
  rep.x_hi = *xmax;
  rep.y_lo = *ymin;
  rep.y_hi = *ymax;

  const int g = options.grid;
  std::vector<std::size_t> c0(static_cast<std::size_t>(g * g), 0);
  std::vector<std::size_t> c1(c0.size(), 0);
  for (std::size_t i = 0; i < rep.x.size(); ++i) {
    const int ix = Cell(rep.x[i], rep.x_lo, rep.x_hi, g);
    const int iy = Cell(rep.y[i], rep.y_lo, rep.y_hi, g);
    auto& counts = rep.arm[i] == 1 ? c1 : c0;
    ++counts[static_cast<std::size_t>(iy * g + ix)];
  }
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iy * g + ix);
      if (c0[k] + c1[k] < options.min_cell || c0[k] + c1[k] == 0) continue;
      IgnorabilityCell cell{ix, iy, c0[k], c1[k], c0[k] == 0 || c1[k] == 0};
      ++rep.populated;
      if (cell.flagged) ++rep.flagged;
      rep.cells.push_back(cell);
    }
  }
  if (rep.populated == 0) {
    rep.warning = "no grid cell reaches min_cell points; violation score is 0 (low evidence)";
    LogWarning(kModule, rep.warning);
  } else {
    rep.violation_score = static_cast<double>(rep.flagged) / static_cast<double>(rep.populated);
  }
  return rep;
}

IgnorabilityReport CounterfactualScatter(const causal::PotentialOutcomePredictions& po,
                                         const IgnorabilityOptions& options) {
  return CounterfactualScatter(po.Column(0), po.Column(1), po.factual_arm, options);
}

std::optional<double> RSquared(std::span<const double> observed,
                               std::span<const double> predicted) {
  const std::size_t n = observed.size();
  if (n < 2 || predicted.size() != n) return std::nullopt;
  double mean = 0.0;
  for (double v : observed) mean += v;
  mean /= static_cast<double>(n);
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
    ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
  }
  if (ss_tot == 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

AccuracyScatterResult AccuracyScatter(const causal::PotentialOutcomePredictions& po,
                                      std::span<const double> outcome, bool residual_mode) {
  AccuracyScatterResult res;
  res.residual_mode = residual_mode;
  res.predicted = po.Factual();
  res.arm = po.factual_arm;
  res.observed.resize(po.size());
  res.value.resize(po.size());
  for (std::size_t r = 0; r < po.size(); ++r) {
    if (po.rows[r] >= outcome.size()) throw ParameterError(kModule, "outcome shorter than cohort");
    res.observed[r] = outcome[po.rows[r]];
    res.value[r] = residual_mode ? res.predicted[r] - res.observed[r] : res.observed[r];
  }
  for (int a = 0; a < 2; ++a) {
    std::vector<double> obs;
    std::vector<double> pred;
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_fold;
    for (std::size_t r = 0; r < po.size(); ++r) {
      if (res.arm[r] != a) continue;
      obs.push_back(res.observed[r]);
      pred.push_back(res.predicted[r]);
      auto& [fo, fp] = by_fold[po.fold.empty() ? 0 : po.fold[r]];
      fo.push_back(res.observed[r]);
      fp.push_back(res.predicted[r]);
    }
    res.r2.push_back(RSquared(obs, pred));
    std::vector<double> per_fold;
    for (const auto& [f, pair] : by_fold) {
      if (auto r2 = RSquared(pair.first, pair.second)) per_fold.push_back(*r2);
    }
    res.r2_fold_std.push_back(PopulationStd(per_fold));
  }
  return res;
}

}  // namespace cek::eval
