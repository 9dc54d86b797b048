#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mlexp::svg {

/// Minimal SVG 1.1 canvas in data coordinates. Axes, points, boxes, polylines
/// and labels are all the reports need.
class Canvas {
 public:
  Canvas(double x_min, double x_max, double y_min, double y_max, int width = 480, int height = 360);

  void axes(const std::string& x_label, const std::string& y_label);
  void point(double x, double y, const std::string& color, double radius = 3.0);
  void line(double x0, double y0, double x1, double y1, const std::string& color, double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& points, const std::string& color);
  void rect(double x0, double y0, double x1, double y1, const std::string& stroke);
  void text(double x, double y, const std::string& content, int size = 11);
  void title(const std::string& content);

  std::string str() const;
  void save(const std::string& path) const;

 private:
  double px(double x) const;
  double py(double y) const;

  double x_min_, x_max_, y_min_, y_max_;
  int width_, height_;
  int margin_ = 48;
  std::string body_;
};

std::string escape(const std::string& text);
const std::string& palette(std::size_t index);

}  // namespace mlexp::svg
