#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace sspose {

// Axis-aligned box in normalized [0,1] image coordinates, center form.
struct BoxGeom {
    double cx = 0, cy = 0, w = 0, h = 0;

    static BoxGeom from_corners(double xmin, double ymin, double xmax, double ymax) {
        return {(xmin + xmax) * 0.5, (ymin + ymax) * 0.5, xmax - xmin, ymax - ymin};
    }
    double xmin() const { return cx - w * 0.5; }
    double ymin() const { return cy - h * 0.5; }
    double xmax() const { return cx + w * 0.5; }
    double ymax() const { return cy + h * 0.5; }
    double area() const { return w * h; }
    bool valid() const { return w > 0 && h > 0; }
};

double iou(const BoxGeom& a, const BoxGeom& b);

// SSD-convention offset targets: ((g-d)/d_wh for centers, ln ratio for sizes).
std::array<double, 4> encode_offsets(const BoxGeom& gt, const BoxGeom& d);

// Exact inverse of encode_offsets, then corner-clamped to [0,1].
BoxGeom decode_offsets(const std::array<double, 4>& t, const BoxGeom& d);

}  // namespace sspose
