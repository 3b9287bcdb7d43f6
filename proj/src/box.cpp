#include "sspose/box.hpp"

#include <algorithm>
#include <cmath>

namespace sspose {

double iou(const BoxGeom& a, const BoxGeom& b) {
    const double ix = std::min(a.xmax(), b.xmax()) - std::max(a.xmin(), b.xmin());
    const double iy = std::min(a.ymax(), b.ymax()) - std::max(a.ymin(), b.ymin());
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

std::array<double, 4> encode_offsets(const BoxGeom& gt, const BoxGeom& d) {
    if (!gt.valid() || !d.valid())
        throw std::invalid_argument("encode_offsets: boxes must have positive width/height");
    return {(gt.cx - d.cx) / d.w, (gt.cy - d.cy) / d.h, std::log(gt.w / d.w),
            std::log(gt.h / d.h)};
}

BoxGeom decode_offsets(const std::array<double, 4>& t, const BoxGeom& d) {
    BoxGeom g{d.cx + t[0] * d.w, d.cy + t[1] * d.h, d.w * std::exp(t[2]), d.h * std::exp(t[3])};
    const double xmin = std::clamp(g.xmin(), 0.0, 1.0);
    const double ymin = std::clamp(g.ymin(), 0.0, 1.0);
    const double xmax = std::clamp(g.xmax(), 0.0, 1.0);
    const double ymax = std::clamp(g.ymax(), 0.0, 1.0);
    return BoxGeom::from_corners(xmin, ymin, xmax, ymax);
}

}  // namespace sspose
