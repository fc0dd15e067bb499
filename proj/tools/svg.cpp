#include "svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace graze::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

// y is negated on output so the picture keeps the mathematical orientation.
std::string pt(Vec2 p) { return num(p.x) + "," + num(-p.y); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

}  // namespace

SvgScene::SvgScene(const BilliardTable& table, std::optional<std::size_t> highlight)
    : table_(table), highlight_(highlight) {
  for (const Vec2& c : table.centers()) {
    extent_.push_back(c + Vec2{1.2, 1.2});
    extent_.push_back(c - Vec2{1.2, 1.2});
  }
}

void SvgScene::orbit(const PeriodicOrbit& orbit, const std::string& color) {
  std::string pts;
  for (int k = 0; k <= orbit.period(); ++k) pts += pt(orbit.point(table_, k)) + " ";
  items_.push_back("<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"0.03\"/>");
}

void SvgScene::path(const std::vector<Vec2>& points, const std::string& color) {
  if (points.empty()) return;
  std::string pts;
  for (const Vec2& p : points) {
    pts += pt(p) + " ";
    extent_.push_back(p);
  }
  items_.push_back("<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"0.04\"/>");
}

void SvgScene::marker(Vec2 p, const std::string& label, const std::string& color) {
  extent_.push_back(p);
  items_.push_back("<circle cx=\"" + num(p.x) + "\" cy=\"" + num(-p.y) + "\" r=\"0.06\" fill=\"" + color + "\"/>");
  if (!label.empty())
    items_.push_back("<text x=\"" + num(p.x + 0.1) + "\" y=\"" + num(-p.y - 0.1) + "\" font-size=\"0.3\" fill=\"" +
                     color + "\">" + escape(label) + "</text>");
}

void SvgScene::ghost_disk(Vec2 c, const std::string& color) {
  items_.push_back("<circle cx=\"" + num(c.x) + "\" cy=\"" + num(-c.y) + "\" r=\"1\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"0.02\" stroke-dasharray=\"0.08 0.06\"/>");
}

std::string SvgScene::str() const {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const Vec2& p : extent_) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double w = x1 - x0, h = y1 - y0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(x0) << ' ' << num(-y1) << ' ' << num(w) << ' '
     << num(h) << "\" width=\"" << num(80 * w) << "\" height=\"" << num(80 * h) << "\">\n";
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(-y1) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const Vec2 c = table_.center(i);
    const bool hl = highlight_ && *highlight_ == i;
    os << "<circle cx=\"" << num(c.x) << "\" cy=\"" << num(-c.y) << "\" r=\"1\" fill=\"" << (hl ? "#f3d9a4" : "#dddddd")
       << "\" stroke=\"#333333\" stroke-width=\"0.02\"/>\n";
    const std::string label = i < table_.labels().size() ? table_.labels()[i] : std::to_string(i);
    os << "<text x=\"" << num(c.x) << "\" y=\"" << num(-c.y + 0.1) << "\" font-size=\"0.35\" text-anchor=\"middle\">"
       << escape(label) << "</text>\n";
  }
  for (const auto& s : items_) os << s << '\n';
  os << "</svg>\n";
  return os.str();
}

}  // namespace graze::cli
