#include "cssgld/harness/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cssgld/errors.hpp"

namespace cssgld::harness {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("csv: missing column '" + std::string(name) + "'");
}

std::vector<double> Table::numbers(std::string_view name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& cell = row.at(c);
    if (cell == "nan") {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (cell == "inf" || cell == "-inf") {
      out.push_back(cell[0] == '-' ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity());
    } else {
      try {
        out.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("csv: column '" + std::string(name) + "' has non-numeric cell '" + cell + "'");
      }
    }
  }
  return out;
}

std::vector<std::string> Table::strings(std::string_view name) const {
  const std::size_t c = column_index(name);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(c));
  return out;
}

Table parse_csv(std::string_view text) {
  Table t;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) {
        throw ParseError("csv: row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                         " cells, header has " + std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fixed(double x, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double t(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    const double a = log ? std::log10(v) : v;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  Axis axis;
  axis.log = log;
  if (!std::isfinite(lo)) {
    axis.lo = 0.0;
    axis.hi = 1.0;
    return axis;
  }
  if (log) {
    axis.lo = std::floor(lo);
    axis.hi = std::ceil(hi);
    if (axis.hi <= axis.lo) axis.hi = axis.lo + 1.0;
  } else {
    const double span = hi - lo;
    const double pad = span > 0.0 ? 0.05 * span : (lo != 0.0 ? 0.1 * std::abs(lo) : 1.0);
    axis.lo = lo - pad;
    axis.hi = hi + pad;
  }
  return axis;
}

std::vector<double> ticks(const Axis& axis) {
  std::vector<double> out;
  if (axis.log) {
    const int lo = static_cast<int>(axis.lo);
    const int hi = static_cast<int>(axis.hi);
    const int step = std::max(1, (hi - lo) / 8);
    for (int e = lo; e <= hi; e += step) out.push_back(std::pow(10.0, e));
    return out;
  }
  const double span = axis.hi - axis.lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(axis.lo / step) * step; v <= axis.hi + 1e-12 * span; v += step) {
    out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  }
  return out;
}

void header(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\""
      << fixed(kHeight, 0) << "\" viewBox=\"0 0 " << fixed(kWidth, 0) << " " << fixed(kHeight, 0)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
}

}  // namespace

std::string render_plot(const PlotSpec& spec) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const Series& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        xs.push_back(s.x[i]);
        ys.push_back(s.y[i]);
      }
    }
  }
  if (spec.diagonal) {
    std::vector<double> both = xs;
    both.insert(both.end(), ys.begin(), ys.end());
    xs = both;
    ys = both;
  }
  const Axis ax = make_axis(xs, spec.log_x);
  const Axis ay = make_axis(ys, spec.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.t(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.t(v)) * ph; };

  std::ostringstream svg;
  header(svg, spec.title);
  svg << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(pw) << "\" height=\""
      << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ticks(ax)) {
    const double x = px(v);
    svg << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(x) << "\" y2=\""
        << fixed(kTop + ph) << "\" stroke=\"#ddd\" stroke-dasharray=\"3,3\"/>\n";
    svg << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(kTop + ph + 15) << "\" text-anchor=\"middle\">"
        << tick_label(v) << "</text>\n";
  }
  for (double v : ticks(ay)) {
    const double y = py(v);
    svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(kLeft + pw) << "\" y2=\""
        << fixed(y) << "\" stroke=\"#ddd\" stroke-dasharray=\"3,3\"/>\n";
    svg << "<text x=\"" << fixed(kLeft - 5) << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">"
        << tick_label(v) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(kHeight - 12)
      << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  svg << "<text transform=\"translate(16," << fixed(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(spec.y_label) << "</text>\n";

  if (spec.diagonal) {
    const double lo = std::max(ax.log ? std::pow(10.0, ax.lo) : ax.lo, ay.log ? std::pow(10.0, ay.lo) : ay.lo);
    const double hi = std::min(ax.log ? std::pow(10.0, ax.hi) : ax.hi, ay.log ? std::pow(10.0, ay.hi) : ay.hi);
    if (lo < hi) {
      svg << "<line x1=\"" << fixed(px(lo)) << "\" y1=\"" << fixed(py(lo)) << "\" x2=\"" << fixed(px(hi))
          << "\" y2=\"" << fixed(py(hi)) << "\" stroke=\"#888\" stroke-dasharray=\"6,4\"/>\n";
    }
  }

  double legend_y = kTop + 10;
  for (const Series& s : spec.series) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (ax.usable(s.x[i]) && ay.usable(s.y[i])) pts.emplace_back(px(s.x[i]), py(s.y[i]));
    }
    if (s.line && pts.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
      if (s.dashed) svg << " stroke-dasharray=\"5,3\"";
      svg << " points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        svg << (i ? " " : "") << fixed(pts[i].first) << "," << fixed(pts[i].second);
      }
      svg << "\"/>\n";
    }
    if (s.markers) {
      for (const auto& [x, y] : pts) {
        if (s.marker == "square") {
          svg << "<rect x=\"" << fixed(x - 3) << "\" y=\"" << fixed(y - 3) << "\" width=\"6\" height=\"6\" fill=\""
              << s.color << "\"/>\n";
        } else {
          svg << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(y) << "\" r=\"2.5\" fill=\"" << s.color
              << "\"/>\n";
        }
      }
    }
    if (s.label.empty()) continue;
    const double lx = kLeft + pw + 12;
    svg << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(legend_y) << "\" x2=\"" << fixed(lx + 18)
        << "\" y2=\"" << fixed(legend_y) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (s.dashed) svg << " stroke-dasharray=\"5,3\"";
    svg << "/>\n";
    svg << "<text x=\"" << fixed(lx + 24) << "\" y=\"" << fixed(legend_y + 4) << "\">" << escape(s.label)
        << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_heatmap(const std::string& title, const std::vector<double>& values, int nx, int ny, double x0,
                           double x1, double y0, double y1) {
  if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw InvalidArgument("render_heatmap: value count does not match grid");
  }
  double top = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) top = std::max(top, v);
  }
  const double side = std::min(kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  const double cw = side / nx;
  const double ch = side / ny;
  std::ostringstream svg;
  header(svg, title);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double v = values[static_cast<std::size_t>(i) * ny + j];
      const double t = top > 0.0 && std::isfinite(v) ? v / top : 0.0;
      const int shade = 255 - static_cast<int>(std::lround(255.0 * t));
      svg << "<rect x=\"" << fixed(kLeft + i * cw) << "\" y=\"" << fixed(kTop + (ny - 1 - j) * ch) << "\" width=\""
          << fixed(cw + 0.05) << "\" height=\"" << fixed(ch + 0.05) << "\" fill=\"rgb(" << shade << "," << shade << ","
          << shade << ")\"/>\n";
    }
  }
  svg << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(side) << "\" height=\""
      << fixed(side) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop + side + 15) << "\">" << tick_label(x0)
      << "</text>\n";
  svg << "<text x=\"" << fixed(kLeft + side) << "\" y=\"" << fixed(kTop + side + 15) << "\" text-anchor=\"end\">"
      << tick_label(x1) << "</text>\n";
  svg << "<text x=\"" << fixed(kLeft - 5) << "\" y=\"" << fixed(kTop + side) << "\" text-anchor=\"end\">"
      << tick_label(y0) << "</text>\n";
  svg << "<text x=\"" << fixed(kLeft - 5) << "\" y=\"" << fixed(kTop + 8) << "\" text-anchor=\"end\">"
      << tick_label(y1) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cssgld::harness
