#pragma once

namespace trackforge {

// Axis-aligned box in pixel space: (left, top, width, height), the same
// layout as the MOT text formats.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  // Measured from the edges so that identical boxes produce a bit-exact
  // intersection/union ratio of 1.
  double area() const { return w * h; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws Error(InvalidGeometry) unless every coordinate is finite and
// both dimensions are strictly positive.
void validate(const BoundingBox& box);

// Intersection over union, in [0, 1].
double iou(const BoundingBox& a, const BoundingBox& b);

// Grows the box symmetrically by `scale` times its size on every side,
// keeping the center fixed: width becomes w * (1 + 2 * scale).
BoundingBox expand(const BoundingBox& box, double scale);

// IoU of both boxes after expand(). Non-decreasing in `scale`.
double eiou(const BoundingBox& a, const BoundingBox& b, double scale);

}  // namespace trackforge
