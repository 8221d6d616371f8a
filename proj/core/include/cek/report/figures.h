#ifndef CEK_REPORT_FIGURES_H_
#define CEK_REPORT_FIGURES_H_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cek/eval/bundle.h"

namespace cek::report {

// Plot data for one figure. Every figure object carries
//   name, kind, title, phase, x_label, y_label, x_range, y_range,
//   series: [{name, style: line|points|bars, points: [[x, y]...],
//             band?: [[x, lo, hi]...], x_errors?: [[lo, hi]...], width?}],
//   references: [{name, style: dotted|dashed, points: [[x, y]...]}]
// plus kind-specific tables (balance covariates, suspect bins, ...).
struct Figure {
  std::string name;
  nlohmann::json data;
};

// Figures for both phases of a bundle: balance (Love plot), ROC panel,
// propensity calibration, propensity distribution, weight distribution, PR,
// and for outcome models the counterfactual scatter plus ROC/calibration
// (binary) or accuracy scatter (continuous).
std::vector<Figure> BuildFigures(const eval::DiagnosticBundle& bundle);

// Deterministic SVG rendering of a figure object.
std::string RenderSvg(const nlohmann::json& figure);

// Writes <dir>/<name>.json and <dir>/<name>.svg per figure; returns the paths.
std::vector<std::string> WriteFigures(const std::vector<Figure>& figures, const std::string& dir);

// Non-finite values become the strings "inf", "-inf" or "nan".
nlohmann::json JsonNumber(double v);

}  // namespace cek::report

#endif  // CEK_REPORT_FIGURES_H_
