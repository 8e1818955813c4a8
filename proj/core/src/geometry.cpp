#include "trackforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trackforge/error.hpp"

namespace trackforge {

namespace {

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

}  // namespace

void validate(const BoundingBox& box) {
  if (!std::isfinite(box.x) || !std::isfinite(box.y) || !std::isfinite(box.w) ||
      !std::isfinite(box.h)) {
    throw Error(ErrorKind::InvalidGeometry, "box has a non-finite coordinate");
  }
  if (box.w <= 0.0 || box.h <= 0.0) {
    throw Error(ErrorKind::InvalidGeometry,
                "box dimensions must be positive (w=" + std::to_string(box.w) +
                    ", h=" + std::to_string(box.h) + ")");
  }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  validate(a);
  validate(b);
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoundingBox expand(const BoundingBox& box, double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorKind::InvalidParameter,
                "expansion scale must be a finite non-negative number");
  }
  return BoundingBox{box.x - scale * box.w, box.y - scale * box.h,
                     box.w * (1.0 + 2.0 * scale), box.h * (1.0 + 2.0 * scale)};
}

double eiou(const BoundingBox& a, const BoundingBox& b, double scale) {
  validate(a);
  validate(b);
  if (scale == 0.0) return iou(a, b);
  return iou(expand(a, scale), expand(b, scale));
}

}  // namespace trackforge
