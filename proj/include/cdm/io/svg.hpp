#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cdm::svg {

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> p = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                             "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  return p;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Series {
  std::string name;
  std::vector<double> x, y;
  std::vector<double> lo, hi;  // optional band
};

// Fixed-size canvas with a linear plotting area.
class Canvas {
 public:
  Canvas(double width, double height, std::string title)
      : w_(width), h_(height), title_(std::move(title)) {}

  void set_range(double x0, double x1, double y0, double y1) {
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    x0_ = x0, x1_ = x1, y0_ = y0, y1_ = y1;
  }
  double px(double x) const { return left_ + (x - x0_) / (x1_ - x0_) * (w_ - left_ - right_); }
  double py(double y) const { return h_ - bottom_ + -(y - y0_) / (y1_ - y0_) * (h_ - top_ - bottom_); }

  void axes(const std::string& xlabel, const std::string& ylabel, int ticks = 5) {
    body_ << "<rect x='" << num(left_) << "' y='" << num(top_) << "' width='" << num(w_ - left_ - right_)
          << "' height='" << num(h_ - top_ - bottom_) << "' fill='none' stroke='#333'/>\n";
    for (int i = 0; i <= ticks; ++i) {
      const double xv = x0_ + (x1_ - x0_) * i / ticks, yv = y0_ + (y1_ - y0_) * i / ticks;
      text(px(xv), h_ - bottom_ + 16, tick(xv), "middle", 11);
      text(left_ - 6, py(yv) + 4, tick(yv), "end", 11);
    }
    text((left_ + w_ - right_) / 2, h_ - 8, xlabel, "middle", 12);
    body_ << "<text transform='translate(14," << num((top_ + h_ - bottom_) / 2)
          << ") rotate(-90)' text-anchor='middle' font-size='12'>" << escape(ylabel) << "</text>\n";
  }

  void hline(double y, const std::string& color = "#999", bool dashed = true) {
    line(x0_, y, x1_, y, color, dashed);
  }
  void vline(double x, const std::string& color = "#999", bool dashed = true) {
    line(x, y0_, x, y1_, color, dashed);
  }
  void line(double xa, double ya, double xb, double yb, const std::string& color, bool dashed) {
    body_ << "<line x1='" << num(px(xa)) << "' y1='" << num(py(ya)) << "' x2='" << num(px(xb))
          << "' y2='" << num(py(yb)) << "' stroke='" << color << "'"
          << (dashed ? " stroke-dasharray='4 3'" : "") << "/>\n";
  }

  void series(const Series& s, const std::string& color, bool markers = true) {
    if (!s.lo.empty() && s.lo.size() == s.x.size()) {
      body_ << "<polygon fill='" << color << "' fill-opacity='0.15' stroke='none' points='";
      for (std::size_t i = 0; i < s.x.size(); ++i) body_ << num(px(s.x[i])) << ',' << num(py(s.hi[i])) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;) body_ << num(px(s.x[i])) << ',' << num(py(s.lo[i])) << ' ';
      body_ << "'/>\n";
    }
    body_ << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) body_ << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    body_ << "'/>\n";
    if (markers)
      for (std::size_t i = 0; i < s.x.size(); ++i) circle(s.x[i], s.y[i], 2.5, color);
  }

  void circle(double x, double y, double r, const std::string& color, double opacity = 1.0) {
    body_ << "<circle cx='" << num(px(x)) << "' cy='" << num(py(y)) << "' r='" << num(r) << "' fill='"
          << color << "' fill-opacity='" << num(opacity) << "'/>\n";
  }

  void rect(double x, double y, double width, double height, const std::string& color) {
    const double a = px(x), b = py(y + height);
    body_ << "<rect x='" << num(a) << "' y='" << num(b) << "' width='" << num(px(x + width) - a)
          << "' height='" << num(py(y) - b) << "' fill='" << color << "'/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor = "start", int size = 11) {
    body_ << "<text x='" << num(x) << "' y='" << num(y) << "' text-anchor='" << anchor << "' font-size='"
          << size << "'>" << escape(s) << "</text>\n";
  }

  void legend(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double y = top_ + 14 + 14 * static_cast<double>(i);
      const std::string& c = palette()[i % palette().size()];
      body_ << "<rect x='" << num(w_ - right_ + 8) << "' y='" << num(y - 8) << "' width='10' height='10' fill='"
            << c << "'/>\n";
      text(w_ - right_ + 22, y + 1, names[i]);
    }
  }

  void set_right_margin(double r) { right_ = r; }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(w_) << "' height='" << num(h_)
        << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << num(w_ / 2) << "' y='18' text-anchor='middle' font-size='14'>" << escape(title_)
        << "</text>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double w_, h_;
  std::string title_;
  double left_ = 60, right_ = 20, top_ = 30, bottom_ = 40;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  std::ostringstream body_;
};

inline void data_range(const std::vector<Series>& ss, double& x0, double& x1, double& y0, double& y1) {
  x0 = y0 = std::numeric_limits<double>::infinity();
  x1 = y1 = -std::numeric_limits<double>::infinity();
  for (const auto& s : ss) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    for (double v : s.lo) y0 = std::min(y0, v);
    for (double v : s.hi) y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const double pad = (y1 - y0) * 0.05 + 1e-9;
  y0 -= pad;
  y1 += pad;
}

inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& ss, std::optional<double> reference = std::nullopt) {
  Canvas c(640, 400, title);
  c.set_right_margin(130);
  double x0, x1, y0, y1;
  data_range(ss, x0, x1, y0, y1);
  if (reference) y0 = std::min(y0, *reference), y1 = std::max(y1, *reference);
  c.set_range(x0, x1, y0, y1);
  c.axes(xlabel, ylabel);
  if (reference) c.hline(*reference);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    c.series(ss[i], palette()[i % palette().size()]);
    names.push_back(ss[i].name);
  }
  c.legend(names);
  return c.str();
}

// Rows x columns of values in [0, 1], white to dark blue.
inline std::string heatmap(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<std::string>& row_labels,
                           const std::vector<std::vector<double>>& values) {
  std::size_t cols = 0;
  for (const auto& r : values) cols = std::max(cols, r.size());
  Canvas c(640, 80 + 22.0 * static_cast<double>(values.size()) + 40, title);
  c.set_range(0, static_cast<double>(std::max<std::size_t>(cols, 1)), 0,
              static_cast<double>(std::max<std::size_t>(values.size(), 1)));
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values[i].size(); ++j) {
      const double v = std::clamp(values[i][j], 0.0, 1.0);
      const int shade = static_cast<int>(255 - 200 * v);
      char col[16];
      std::snprintf(col, sizeof col, "#%02x%02xff", shade, shade);
      c.rect(static_cast<double>(j), static_cast<double>(values.size() - 1 - i), 1.0, 1.0, col);
    }
    c.text(56, c.py(static_cast<double>(values.size() - i) - 0.5) + 4, row_labels[i], "end");
  }
  c.text(320, c.py(0) + 16, xlabel, "middle", 12);
  c.text(10, 40, ylabel, "start", 12);
  return c.str();
}

struct Bar {
  std::string label;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;  // error bar; equal to value for none
};

inline std::string bar_chart(const std::string& title, const std::string& ylabel, const std::vector<Bar>& bars) {
  Canvas c(std::max(320.0, 60.0 * static_cast<double>(bars.size()) + 100), 400, title);
  double top = 0.0;
  for (const auto& b : bars) top = std::max({top, b.value, b.hi});
  c.set_range(0, static_cast<double>(std::max<std::size_t>(bars.size(), 1)), 0, top * 1.1 + 1e-9);
  c.axes("", ylabel, 4);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x = static_cast<double>(i);
    c.rect(x + 0.15, 0, 0.7, bars[i].value, palette()[i % palette().size()]);
    if (bars[i].hi > bars[i].lo) c.line(x + 0.5, bars[i].lo, x + 0.5, bars[i].hi, "#000", false);
    c.text(c.px(x + 0.5), c.py(0) + 30, bars[i].label, "middle", 9);
  }
  return c.str();
}

// Framing scatter: original vs altered mean with the 0.5 quadrant lines.
inline std::string quadrant_scatter(const std::string& title, const std::vector<double>& original,
                                    const std::vector<double>& altered) {
  Canvas c(480, 480, title);
  c.set_range(0, 1, 0, 1);
  c.axes("mean response, original", "mean response, altered");
  c.hline(0.5);
  c.vline(0.5);
  for (std::size_t i = 0; i < original.size(); ++i) c.circle(original[i], altered[i], 3, palette()[0], 0.6);
  c.text(c.px(0.25), c.py(0.95), "Q1", "middle", 12);
  c.text(c.px(0.75), c.py(0.95), "Q2", "middle", 12);
  c.text(c.px(0.75), c.py(0.05), "Q3", "middle", 12);
  c.text(c.px(0.25), c.py(0.05), "Q4", "middle", 12);
  return c.str();
}

}  // namespace cdm::svg
