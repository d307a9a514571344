#pragma once

namespace relgraph {

/// Axis-aligned region. (x, y) is the box center; w and h are full extents in pixels.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  /// True when w, h are positive and every field is finite.
  [[nodiscard]] bool valid() const noexcept;

  [[nodiscard]] double area() const noexcept { return w * h; }
  [[nodiscard]] double left() const noexcept { return x - 0.5 * w; }
  [[nodiscard]] double right() const noexcept { return x + 0.5 * w; }
  [[nodiscard]] double top() const noexcept { return y - 0.5 * h; }
  [[nodiscard]] double bottom() const noexcept { return y + 0.5 * h; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection over union of the corner-form rectangles.
[[nodiscard]] double iou(const Box& a, const Box& b) noexcept;

/// Euclidean distance between box centers.
[[nodiscard]] double center_distance(const Box& a, const Box& b) noexcept;

/// Location-free shape overlap: min(w)·min(h) / (area_a + area_b − min(w)·min(h)).
/// Lies in (0, 1] and reaches 1 only for identical extents.
[[nodiscard]] double shape_similarity(const Box& a, const Box& b) noexcept;

/// exp(−lambda · distance).
[[nodiscard]] double distance_weight(double distance, double lambda) noexcept;

inline constexpr double kDefaultLambda = 5e-4;

}  // namespace relgraph
