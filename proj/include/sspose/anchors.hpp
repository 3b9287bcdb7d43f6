#pragma once

#include <vector>

#include "sspose/box.hpp"

namespace sspose {

struct LayerSpec {
    int grid_h = 0, grid_w = 0;
    double scale = 0;
    std::vector<double> aspect_ratios;
};

struct BoxProvenance {
    int layer = 0, row = 0, col = 0, aspect = 0;
};

// Default boxes in fixed layer-major / row / col / aspect order. Boxes are
// not clipped to the image; decoded detections are.
struct DefaultBoxSet {
    std::vector<BoxGeom> boxes;
    std::vector<BoxProvenance> provenance;
    std::vector<LayerSpec> layer_specs;

    std::size_t size() const { return boxes.size(); }
};

DefaultBoxSet generate_default_boxes(const std::vector<LayerSpec>& layer_specs);

// Linear scale schedule from s_min to s_max across n layers (SSD convention).
std::vector<double> linear_scales(double s_min, double s_max, int n_layers);

}  // namespace sspose
