#include "topocf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "topocf/error.hpp"

namespace topocf {

namespace {

struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  int size = 0, margin = 0;

  double sx(double x) const { return margin + (x - x0) / (x1 - x0) * (size - 2 * margin); }
  // SVG y grows downwards.
  double sy(double y) const { return size - margin - (y - y0) / (y1 - y0) * (size - 2 * margin); }
};

Frame fit(const std::vector<Point2>& pts, const PlotStyle& s) {
  Frame f;
  f.size = s.size;
  f.margin = s.margin;
  if (pts.empty()) return f;
  f.x0 = f.y0 = std::numeric_limits<double>::infinity();
  f.x1 = f.y1 = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    f.x0 = std::min(f.x0, p[0]);
    f.x1 = std::max(f.x1, p[0]);
    f.y0 = std::min(f.y0, p[1]);
    f.y1 = std::max(f.y1, p[1]);
  }
  // Degenerate extents become a unit box around the value.
  if (!(f.x1 > f.x0)) f.x0 -= 0.5, f.x1 += 0.5;
  if (!(f.y1 > f.y0)) f.y0 -= 0.5, f.y1 += 0.5;
  return f;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string px(double v) { return fmt("%.2f", v); }

std::string ratio_colour(double r) {
  r = std::clamp(r, 0.0, 1.0);
  const int red = static_cast<int>(std::lround(40 + 200 * r));
  const int blue = static_cast<int>(std::lround(240 - 200 * r));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, 70, blue);
  return buf;
}

std::string header(int size) {
  const auto s = std::to_string(size);
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + s + "\" height=\"" + s +
         "\" viewBox=\"0 0 " + s + " " + s + "\">\n<rect width=\"" + s + "\" height=\"" + s +
         "\" fill=\"white\"/>\n";
}

}  // namespace

std::string graph_svg(const TopologyGraph& g, const PlotStyle& style) {
  std::vector<Point2> centres;
  std::size_t biggest = 1;
  for (const auto& n : g.nodes) {
    centres.push_back(n.centroid2d);
    biggest = std::max(biggest, n.member_ids.size());
  }
  const Frame f = fit(centres, style);
  std::string out = header(style.size);
  out += "<g class=\"edges\" stroke=\"#888888\" stroke-width=\"1.5\">\n";
  for (const auto& e : g.edges) {
    if (e.a < 0 || e.b < 0 || e.a >= static_cast<int>(g.nodes.size()) ||
        e.b >= static_cast<int>(g.nodes.size()))
      throw Error(ErrorKind::contract, "edge refers to a missing node");
    const auto& a = g.nodes[e.a].centroid2d;
    const auto& b = g.nodes[e.b].centroid2d;
    out += "<line x1=\"" + px(f.sx(a[0])) + "\" y1=\"" + px(f.sy(a[1])) + "\" x2=\"" + px(f.sx(b[0])) +
           "\" y2=\"" + px(f.sy(b[1])) + "\"/>\n";
  }
  out += "</g>\n<g class=\"nodes\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">\n";
  for (const auto& n : g.nodes) {
    const double share = std::sqrt(static_cast<double>(n.member_ids.size()) / static_cast<double>(biggest));
    const double r = style.min_radius + (style.max_radius - style.min_radius) * share;
    const auto cx = px(f.sx(n.centroid2d[0]));
    const auto cy = px(f.sy(n.centroid2d[1]));
    out += "<circle class=\"node\" data-id=\"" + std::to_string(n.id) + "\" cx=\"" + cx + "\" cy=\"" + cy +
           "\" r=\"" + px(r) + "\" fill=\"" + ratio_colour(n.abnormal_ratio) +
           "\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
    out += "<text x=\"" + cx + "\" y=\"" + px(f.sy(n.centroid2d[1]) + 3.0) + "\" fill=\"white\">" +
           fmt("%.2f", n.abnormal_ratio) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string embedding_svg(const Dataset& d, const Embedding2D& emb, const PlotStyle& style) {
  if (emb.size() != d.records.size())
    throw Error(ErrorKind::contract, "embedding and dataset sizes differ");
  const Frame f = fit(emb, style);
  std::string out = header(style.size);
  out += "<g class=\"points\" stroke=\"none\">\n";
  for (std::size_t i = 0; i < emb.size(); ++i) {
    const bool abnormal = d.records[i].label == ClassLabel::abnormal;
    out += std::string("<circle class=\"") + (abnormal ? "abnormal" : "normal") + "\" cx=\"" +
           px(f.sx(emb[i][0])) + "\" cy=\"" + px(f.sy(emb[i][1])) + "\" r=\"3.5\" fill=\"" +
           (abnormal ? "#d43d2a" : "#2a62d4") + "\"><title>" + d.records[i].id + "</title></circle>\n";
  }
  out += "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n"
         "<circle cx=\"20\" cy=\"18\" r=\"4\" fill=\"#2a62d4\"/><text x=\"30\" y=\"22\">normal</text>\n"
         "<circle cx=\"100\" cy=\"18\" r=\"4\" fill=\"#d43d2a\"/><text x=\"110\" y=\"22\">abnormal</text>\n"
         "</g>\n</svg>\n";
  return out;
}

}  // namespace topocf
