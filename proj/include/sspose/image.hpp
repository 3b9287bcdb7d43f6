#pragma once

#include <string>
#include <vector>

#include "sspose/box.hpp"

namespace sspose {

// Grayscale raster, values in [0,1], row-major.
struct Image {
    int width = 0, height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), pixels(std::size_t(w) * h, fill) {}
    double& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
    double at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
};

// Binary 16-bit PGM (P5, maxval 65535); lossless enough for [0,1] data.
void write_pgm(const Image& img, const std::string& path);
Image read_pgm(const std::string& path);

// Bilinear resample of the normalized rect [xmin,xmax]x[ymin,ymax] of src
// into an out_w x out_h raster.
Image crop_and_resize(const Image& src, const BoxGeom& rect, int out_w, int out_h);

}  // namespace sspose
