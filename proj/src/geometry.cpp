#include "relgraph/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace relgraph {

bool Box::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double center_distance(const Box& a, const Box& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double shape_similarity(const Box& a, const Box& b) noexcept {
  const double common = std::min(a.w, b.w) * std::min(a.h, b.h);
  return common / (a.area() + b.area() - common);
}

double distance_weight(double distance, double lambda) noexcept {
  return std::exp(-lambda * distance);
}

}  // namespace relgraph
