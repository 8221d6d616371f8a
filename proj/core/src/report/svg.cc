#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "cek/report/figures.h"

namespace cek::report {
namespace {

using nlohmann::json;

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Strings ("inf", "nan") count as missing.
bool Value(const json& j, double* out) {
  if (!j.is_number()) return false;
  *out = j.get<double>();
  return std::isfinite(*out);
}

struct Frame {
  double x0, x1, y0, y1;

  double Px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double Py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void Range(const json& r, double* lo, double* hi) {
  *lo = 0.0;
  *hi = 1.0;
  if (r.is_array() && r.size() == 2) {
    Value(r[0], lo);
    Value(r[1], hi);
  }
  if (!(*hi > *lo)) *hi = *lo + 1.0;
}

void Axes(const json& fig, const Frame& f, std::string& svg) {
  svg += "<rect x=\"" + Num(kLeft) + "\" y=\"" + Num(kTop) + "\" width=\"" +
         Num(kWidth - kLeft - kRight) + "\" height=\"" + Num(kHeight - kTop - kBottom) +
         "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double x = f.x0 + (f.x1 - f.x0) * t / 4.0;
    svg += "<text x=\"" + Num(f.Px(x)) + "\" y=\"" + Num(kHeight - kBottom + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + Num(x) + "</text>\n";
  }
  if (fig.contains("y_ticks")) {
    for (const json& t : fig["y_ticks"]) {
      double y = 0.0;
      if (!Value(t[0], &y)) continue;
      svg += "<text x=\"" + Num(kLeft - 4) + "\" y=\"" + Num(f.Py(y) + 4) +
             "\" font-size=\"9\" text-anchor=\"end\">" + Escape(t[1].get<std::string>()) +
             "</text>\n";
    }
  } else {
    for (int t = 0; t <= 4; ++t) {
      const double y = f.y0 + (f.y1 - f.y0) * t / 4.0;
      svg += "<text x=\"" + Num(kLeft - 4) + "\" y=\"" + Num(f.Py(y) + 4) +
             "\" font-size=\"11\" text-anchor=\"end\">" + Num(y) + "</text>\n";
    }
  }
  svg += "<text x=\"" + Num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + Num(kHeight - 12) +
         "\" font-size=\"12\" text-anchor=\"middle\">" +
         Escape(fig.value("x_label", std::string())) + "</text>\n";
  svg += "<text x=\"14\" y=\"" + Num((kTop + kHeight - kBottom) / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         Num((kTop + kHeight - kBottom) / 2) + ")\">" +
         Escape(fig.value("y_label", std::string())) + "</text>\n";
  svg += "<text x=\"" + Num(kWidth / 2) + "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" +
         Escape(fig.value("title", std::string())) + "</text>\n";
}

std::string Polyline(const json& points, const Frame& f) {
  std::string pts;
  for (const json& p : points) {
    double x = 0.0, y = 0.0;
    if (!Value(p[0], &x) || !Value(p[1], &y)) continue;
    if (!pts.empty()) pts += ' ';
    pts += Num(f.Px(x)) + "," + Num(f.Py(y));
  }
  return pts;
}

void Series(const json& s, const char* color, const Frame& f, std::string& svg) {
  const std::string style = s.value("style", std::string("line"));
  if (s.contains("band")) {
    std::string upper;
    std::string lower;
    for (const json& b : s["band"]) {
      double x = 0.0, lo = 0.0, hi = 0.0;
      if (!Value(b[0], &x) || !Value(b[1], &lo) || !Value(b[2], &hi)) continue;
      upper += Num(f.Px(x)) + "," + Num(f.Py(std::min(hi, f.y1))) + " ";
      lower = Num(f.Px(x)) + "," + Num(f.Py(std::max(lo, f.y0))) + " " + lower;
    }
    if (!upper.empty()) {
      svg += "<polygon points=\"" + upper + lower + "\" fill=\"" + color +
             "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
  }
  if (style == "line") {
    svg += "<polyline points=\"" + Polyline(s["points"], f) + "\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"1.5\"/>\n";
  } else if (style == "bars") {
    double width = 0.05;
    Value(s.value("width", json(0.05)), &width);
    for (const json& p : s["points"]) {
      double x = 0.0, y = 0.0;
      if (!Value(p[0], &x) || !Value(p[1], &y) || y == 0.0) continue;
      const double top = f.Py(std::max(y, 0.0));
      const double bottom = f.Py(std::min(y, 0.0));
      svg += "<rect x=\"" + Num(f.Px(x - width / 2)) + "\" y=\"" + Num(top) + "\" width=\"" +
             Num(f.Px(x + width / 2) - f.Px(x - width / 2)) + "\" height=\"" +
             Num(bottom - top) + "\" fill=\"" + color + "\" fill-opacity=\"0.5\"/>\n";
    }
  } else {
    const json& pts = s["points"];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double x = 0.0, y = 0.0;
      if (!Value(pts[i][0], &x) || !Value(pts[i][1], &y)) continue;
      if (s.contains("x_errors")) {
        double lo = 0.0, hi = 0.0;
        if (Value(s["x_errors"][i][0], &lo) && Value(s["x_errors"][i][1], &hi)) {
          svg += "<line x1=\"" + Num(f.Px(lo)) + "\" y1=\"" + Num(f.Py(y)) + "\" x2=\"" +
                 Num(f.Px(hi)) + "\" y2=\"" + Num(f.Py(y)) + "\" stroke=\"" + color + "\"/>\n";
        }
      }
      svg += "<circle cx=\"" + Num(f.Px(x)) + "\" cy=\"" + Num(f.Py(y)) + "\" r=\"2\" fill=\"" +
             color + "\"/>\n";
    }
  }
}

}  // namespace

std::string RenderSvg(const json& fig) {
  Frame f{};
  Range(fig.value("x_range", json()), &f.x0, &f.x1);
  Range(fig.value("y_range", json()), &f.y0, &f.y1);
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
      "viewBox=\"0 0 640 480\" font-family=\"sans-serif\">\n"
      "<rect width=\"640\" height=\"480\" fill=\"#fff\"/>\n";
  Axes(fig, f, svg);
  if (fig.contains("references")) {
    for (const json& r : fig["references"]) {
      const bool dotted = r.value("style", std::string()) == "dotted";
      svg += "<polyline points=\"" + Polyline(r["points"], f) +
             "\" fill=\"none\" stroke=\"#555\" stroke-dasharray=\"" + (dotted ? "2,3" : "6,4") +
             "\"/>\n";
    }
  }
  std::size_t k = 0;
  std::string legend;
  if (fig.contains("series")) {
    for (const json& s : fig["series"]) {
      const char* color = kPalette[k % std::size(kPalette)];
      Series(s, color, f, svg);
      const double y = kTop + 14.0 + 14.0 * static_cast<double>(k);
      legend += "<rect x=\"" + Num(kWidth - kRight - 190) + "\" y=\"" + Num(y - 8) +
                "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
      legend += "<text x=\"" + Num(kWidth - kRight - 176) + "\" y=\"" + Num(y + 1) +
                "\" font-size=\"11\">" + Escape(s.value("name", std::string())) + "</text>\n";
      ++k;
    }
  }
  svg += legend;
  svg += "</svg>\n";
  return svg;
}

}  // namespace cek::report
