#include "sspose/anchors.hpp"

#include <cmath>
#include <stdexcept>

namespace sspose {

DefaultBoxSet generate_default_boxes(const std::vector<LayerSpec>& layer_specs) {
    if (layer_specs.empty()) throw std::invalid_argument("generate_default_boxes: no layers");
    DefaultBoxSet set;
    set.layer_specs = layer_specs;
    for (std::size_t li = 0; li < layer_specs.size(); ++li) {
        const LayerSpec& ls = layer_specs[li];
        if (ls.grid_h < 1 || ls.grid_w < 1)
            throw std::invalid_argument("generate_default_boxes: grid sizes must be >= 1");
        if (ls.scale <= 0 || ls.scale > 1)
            throw std::invalid_argument("generate_default_boxes: scale must be in (0,1]");
        if (ls.aspect_ratios.empty())
            throw std::invalid_argument("generate_default_boxes: empty aspect ratio list");
        for (int row = 0; row < ls.grid_h; ++row)
            for (int col = 0; col < ls.grid_w; ++col)
                for (std::size_t ai = 0; ai < ls.aspect_ratios.size(); ++ai) {
                    const double ar = ls.aspect_ratios[ai];
                    if (ar <= 0)
                        throw std::invalid_argument(
                            "generate_default_boxes: aspect ratios must be positive");
                    const double root = std::sqrt(ar);
                    set.boxes.push_back({(col + 0.5) / ls.grid_w, (row + 0.5) / ls.grid_h,
                                         ls.scale * root, ls.scale / root});
                    set.provenance.push_back({static_cast<int>(li), row, col,
                                              static_cast<int>(ai)});
                }
    }
    return set;
}

std::vector<double> linear_scales(double s_min, double s_max, int n_layers) {
    std::vector<double> scales(n_layers);
    for (int i = 0; i < n_layers; ++i)
        scales[i] = n_layers == 1 ? s_min : s_min + (s_max - s_min) * i / (n_layers - 1);
    return scales;
}

}  // namespace sspose
