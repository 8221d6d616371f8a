#include "cek/eval/metrics.h"

#include <algorithm>
#include <cmath>

#include "cek/error.h"
#include "cek/eval/curves.h"

namespace cek::eval {
namespace {

constexpr const char* kModule = "evaluation";

enum Metric {
  kAccuracy,
  kPrecision,
  kRecall,
  kF1,
  kRocAuc,
  kHingeLoss,
  kMcc,
  kZeroOneLoss,
  kBrier,
  kTn,
  kFp,
  kFn,
  kTp,
  kExplainedVariance,
  kMae,
  kMse,
  kMsle,
  kMedianAe,
  kR2,
  kNumMetrics,
};

void AddNote(std::string* notes, const char* metric, const char* reason) {
  if (notes == nullptr) return;
  if (!notes->empty()) *notes += ';';
  *notes += metric;
  *notes += '=';
  *notes += reason;
}

double Median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

const std::vector<std::string>& MetricNames() {
  static const std::vector<std::string> kNames = {
      "accuracy", "precision", "recall",  "f1",       "roc_auc",
      "hinge_loss", "mcc",     "zero_one_loss", "brier", "tn",
      "fp",       "fn",        "tp",      "explained_variance", "mae",
      "mse",      "msle",      "median_ae", "r2"};
  return kNames;
}

std::optional<double> MetricsRecord::Get(const std::string& metric) const {
  const auto& names = MetricNames();
  const auto it = std::find(names.begin(), names.end(), metric);
  if (it == names.end()) throw ParameterError(kModule, "unknown metric \"" + metric + "\"");
  const auto k = static_cast<std::size_t>(it - names.begin());
  return k < values.size() ? values[k] : std::nullopt;
}

std::vector<std::optional<double>> ComputeMetrics(std::span<const double> predictions,
                                                  std::span<const double> truth,
                                                  bool binary_truth, std::string* notes) {
  if (predictions.size() != truth.size()) {
    throw ParameterError(kModule, "metric inputs differ in length");
  }
  std::vector<std::optional<double>> v(kNumMetrics);
  const std::size_t n = truth.size();
  if (n == 0) {
    AddNote(notes, "all", "empty_stratum");
    return v;
  }
  const double nn = static_cast<double>(n);

  if (binary_truth) {
    double tp = 0, tn = 0, fp = 0, fn = 0, brier = 0, hinge = 0;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool y = truth[i] > 0.5;
      const bool yhat = predictions[i] >= kDecisionThreshold;
      labels[i] = y ? 1 : 0;
      if (y && yhat) ++tp;
      if (y && !yhat) ++fn;
      if (!y && yhat) ++fp;
      if (!y && !yhat) ++tn;
      brier += (predictions[i] - truth[i]) * (predictions[i] - truth[i]);
      const double margin = 2.0 * predictions[i] - 1.0;
      hinge += std::max(0.0, 1.0 - (y ? 1.0 : -1.0) * margin);
    }
    v[kAccuracy] = (tp + tn) / nn;
    v[kZeroOneLoss] = (fp + fn) / nn;
    v[kBrier] = brier / nn;
    v[kHingeLoss] = hinge / nn;
    v[kTn] = tn;
    v[kFp] = fp;
    v[kFn] = fn;
    v[kTp] = tp;
    if (tp + fp > 0) {
      v[kPrecision] = tp / (tp + fp);
    } else {
      AddNote(notes, "precision", "no_predicted_positives");
    }
    if (tp + fn > 0) {
      v[kRecall] = tp / (tp + fn);
    } else {
      AddNote(notes, "recall", "no_positives");
    }
    if (v[kPrecision] && v[kRecall]) {
      const double s = *v[kPrecision] + *v[kRecall];
      v[kF1] = s > 0 ? 2.0 * *v[kPrecision] * *v[kRecall] / s : 0.0;
    } else {
      AddNote(notes, "f1", "undefined_precision_or_recall");
    }
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom > 0) {
      v[kMcc] = (tp * tn - fp * fn) / std::sqrt(denom);
    } else {
      AddNote(notes, "mcc", "degenerate_confusion_matrix");
    }
    const Curve roc = RocCurve(predictions, labels);
    if (roc.summary) {
      v[kRocAuc] = roc.summary;
    } else {
      AddNote(notes, "roc_auc", "single_class");
    }
  } else {
    AddNote(notes, "classification", "continuous_outcome");
  }

  double mean_y = 0.0;
  double mean_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_y += truth[i];
    mean_res += truth[i] - predictions[i];
  }
  mean_y /= nn;
  mean_res /= nn;
  double ss_tot = 0, ss_res = 0, var_res = 0, mae = 0, msle = 0;
  bool log_ok = true;
  std::vector<double> abs_err(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = truth[i] - predictions[i];
    ss_tot += (truth[i] - mean_y) * (truth[i] - mean_y);
    ss_res += e * e;
    var_res += (e - mean_res) * (e - mean_res);
    abs_err[i] = std::abs(e);
    mae += abs_err[i];
    if (truth[i] < 0.0 || predictions[i] < 0.0) {
      log_ok = false;
    } else {
      const double d = std::log1p(truth[i]) - std::log1p(predictions[i]);
      msle += d * d;
    }
  }
  v[kMae] = mae / nn;
  v[kMse] = ss_res / nn;
  v[kMedianAe] = Median(abs_err);
  if (log_ok) {
    v[kMsle] = msle / nn;
  } else {
    AddNote(notes, "msle", "negative_values");
  }
  if (ss_tot > 0) {
    v[kR2] = 1.0 - ss_res / ss_tot;
    v[kExplainedVariance] = 1.0 - var_res / ss_tot;
  } else {
    AddNote(notes, "r2", "constant_truth");
    AddNote(notes, "explained_variance", "constant_truth");
  }
  return v;
}

std::vector<MetricsRecord> MetricsTable(std::span<const double> predictions,
                                        std::span<const double> truth,
                                        std::span<const int> treatment, bool binary_truth,
                                        const std::string& tx, const std::string& o, Phase phase,
                                        int fold, std::span<const std::string> stratum_names) {
  if (treatment.size() != truth.size()) {
    throw ParameterError(kModule, "metric inputs differ in length");
  }
  std::vector<MetricsRecord> out;
  auto emit = [&](const std::string& stratum, std::span<const double> p,
                  std::span<const double> t) {
    MetricsRecord rec;
    rec.tx = tx;
    rec.o = o;
    rec.phase = phase;
    rec.fold = fold;
    rec.stratum = stratum;
    rec.values = ComputeMetrics(p, t, binary_truth, &rec.notes);
    out.push_back(std::move(rec));
  };
  for (std::size_t a = 0; a < stratum_names.size(); ++a) {
    std::vector<double> p;
    std::vector<double> t;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (treatment[i] == static_cast<int>(a)) {
        p.push_back(predictions[i]);
        t.push_back(truth[i]);
      }
    }
    emit(stratum_names[a], p, t);
  }
  emit("overall", predictions, truth);
  return out;
}

}  // namespace cek::eval
