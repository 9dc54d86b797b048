#include "mlexp/svg.hpp"

#include <array>
#include <fstream>

#include "mlexp/error.hpp"
#include "mlexp/format.hpp"

namespace mlexp::svg {
namespace {

std::string num(double v) {
  // Two decimals keep the files small and stable.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

Canvas::Canvas(double x_min, double x_max, double y_min, double y_max, int width, int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width), height_(height) {
  if (!(x_max_ > x_min_)) {
    x_min_ -= 0.5;
    x_max_ += 0.5;
  }
  if (!(y_max_ > y_min_)) {
    y_min_ -= 0.5;
    y_max_ += 0.5;
  }
}

double Canvas::px(double x) const { return margin_ + (x - x_min_) / (x_max_ - x_min_) * (width_ - 2 * margin_); }
double Canvas::py(double y) const {
  return height_ - margin_ - (y - y_min_) / (y_max_ - y_min_) * (height_ - 2 * margin_);
}

void Canvas::axes(const std::string& x_label, const std::string& y_label) {
  const double left = margin_, bottom = height_ - margin_;
  body_ += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(width_ - margin_) + "\" y2=\"" +
           num(bottom) + "\" stroke=\"black\"/>\n";
  body_ += "<line x1=\"" + num(left) + "\" y1=\"" + num(margin_) + "\" x2=\"" + num(left) + "\" y2=\"" + num(bottom) +
           "\" stroke=\"black\"/>\n";
  body_ += "<text x=\"" + num(width_ / 2.0) + "\" y=\"" + num(height_ - 12.0) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  body_ += "<text x=\"14\" y=\"" + num(height_ / 2.0) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           num(height_ / 2.0) + ")\">" + escape(y_label) + "</text>\n";
  body_ += "<text x=\"" + num(left) + "\" y=\"" + num(bottom + 14) + "\" font-size=\"10\">" + format_number(x_min_) +
           "</text>\n";
  body_ += "<text x=\"" + num(width_ - margin_) + "\" y=\"" + num(bottom + 14) +
           "\" font-size=\"10\" text-anchor=\"end\">" + format_number(x_max_) + "</text>\n";
  body_ += "<text x=\"" + num(left - 4) + "\" y=\"" + num(bottom) + "\" font-size=\"10\" text-anchor=\"end\">" +
           format_number(y_min_) + "</text>\n";
  body_ += "<text x=\"" + num(left - 4) + "\" y=\"" + num(margin_ + 10.0) + "\" font-size=\"10\" text-anchor=\"end\">" +
           format_number(y_max_) + "</text>\n";
}

void Canvas::point(double x, double y, const std::string& color, double radius) {
  body_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"" + num(radius) + "\" fill=\"" + color +
           "\"/>\n";
}

void Canvas::line(double x0, double y0, double x1, double y1, const std::string& color, double width) {
  body_ += "<line x1=\"" + num(px(x0)) + "\" y1=\"" + num(py(y0)) + "\" x2=\"" + num(px(x1)) + "\" y2=\"" +
           num(py(y1)) + "\" stroke=\"" + color + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void Canvas::polyline(const std::vector<std::pair<double, double>>& points, const std::string& color) {
  body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    body_ += (i ? " " : "") + num(px(points[i].first)) + "," + num(py(points[i].second));
  }
  body_ += "\"/>\n";
}

void Canvas::rect(double x0, double y0, double x1, double y1, const std::string& stroke) {
  const double left = std::min(px(x0), px(x1)), top = std::min(py(y0), py(y1));
  const double w = std::abs(px(x1) - px(x0)), h = std::abs(py(y1) - py(y0));
  body_ += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"none\" stroke=\"" + stroke + "\"/>\n";
}

void Canvas::text(double x, double y, const std::string& content, int size) {
  body_ += "<text x=\"" + num(px(x)) + "\" y=\"" + num(py(y)) + "\" font-size=\"" + std::to_string(size) +
           "\" text-anchor=\"middle\">" + escape(content) + "</text>\n";
}

void Canvas::title(const std::string& content) {
  body_ += "<text x=\"" + num(width_ / 2.0) + "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" +
           escape(content) + "</text>\n";
}

std::string Canvas::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(width_) + "\" height=\"" + std::to_string(height_) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

void Canvas::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExecutionError("cannot write '" + path + "'");
  out << str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

const std::string& palette(std::size_t index) {
  static const std::array<std::string, 6> colors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return colors[index % colors.size()];
}

}  // namespace mlexp::svg
