#include "cek/eval/balance.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cek/error.h"

namespace cek::eval {
namespace {

constexpr const char* kModule = "evaluation";

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments WeightedMoments(std::span<const double> x, std::span<const double> w) {
  if (x.empty()) throw ParameterError(kModule, "SMD group is empty");
  if (!w.empty() && w.size() != x.size()) {
    throw ParameterError(kModule, "SMD weights and values differ in length");
  }
  double sw = 0.0;
  double sx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (!(wi >= 0.0) || !std::isfinite(wi)) {
      throw ParameterError(kModule, "SMD weights must be finite and non-negative");
    }
    sw += wi;
    sx += wi * x[i];
  }
  if (sw <= 0.0) throw ParameterError(kModule, "SMD weights sum to zero");
  Moments m;
  m.mean = sx / sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    ss += wi * (x[i] - m.mean) * (x[i] - m.mean);
  }
  m.var = ss / (sw > 1.0 ? sw - 1.0 : sw);
  return m;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double Smd(std::span<const double> x_t, std::span<const double> x_c,
           std::span<const double> w_t, std::span<const double> w_c) {
  const Moments t = WeightedMoments(x_t, w_t);
  const Moments c = WeightedMoments(x_c, w_c);
  const double diff = std::abs(t.mean - c.mean);
  const double pooled = std::sqrt((t.var + c.var) / 2.0);
  if (pooled == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / pooled;
}

std::vector<std::string> BalanceTable::Flagged() const {
  std::vector<std::string> out;
  for (const CovariateBalance& c : covariates) {
    if (c.flagged) out.push_back(c.name);
  }
  return out;
}

const CovariateBalance* BalanceTable::Find(const std::string& name) const {
  for (const CovariateBalance& c : covariates) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

BalanceTable BalanceReport(const CohortFrame& frame, std::span<const FoldSample> folds,
                           Phase phase, double threshold) {
  BalanceTable table;
  table.phase = phase;
  table.threshold = threshold;
  table.num_folds = static_cast<int>(folds.size());
  const std::size_t d = frame.dims();
  table.covariates.resize(d);
  for (std::size_t j = 0; j < d; ++j) table.covariates[j].name = frame.covariate_names[j];

  std::vector<double> xt, xc, wt, wc;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const FoldSample& fold = folds[f];
    if (fold.weights.size() != fold.rows.size()) {
      throw ParameterError(kModule, "fold weights and rows differ in length");
    }
    for (std::size_t j = 0; j < d; ++j) {
      xt.clear();
      xc.clear();
      wt.clear();
      wc.clear();
      for (std::size_t r = 0; r < fold.rows.size(); ++r) {
        const std::size_t i = fold.rows[r];
        const double v = frame.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (frame.treatment[i] == 1) {
          xt.push_back(v);
          wt.push_back(fold.weights[r]);
        } else {
          xc.push_back(v);
          wc.push_back(fold.weights[r]);
        }
      }
      if (xt.empty() || xc.empty()) {
        throw PositivityError(kModule, "fold " + std::to_string(f) +
                                           ": balance needs both arms present");
      }
      CovariateBalance& c = table.covariates[j];
      c.unweighted.push_back(Smd(xt, xc));
      c.weighted.push_back(Smd(xt, xc, wt, wc));
    }
  }
  for (CovariateBalance& c : table.covariates) {
    c.mean_unweighted = Mean(c.unweighted);
    c.mean_weighted = Mean(c.weighted);
    c.flagged = c.mean_weighted > threshold;
  }
  std::stable_sort(table.covariates.begin(), table.covariates.end(),
                   [](const CovariateBalance& a, const CovariateBalance& b) {
                     return a.mean_unweighted > b.mean_unweighted;
                   });
  return table;
}

}  // namespace cek::eval
