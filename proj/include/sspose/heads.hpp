#pragma once

#include <cstddef>
#include <vector>

#include "sspose/anchors.hpp"
#include "sspose/tensor.hpp"

namespace sspose {

enum class PoseSharing { Share, Separate };

struct HeadConfig {
    int n_classes = 3;    // foreground classes; background is logit 0
    int n_pose_bins = 8;
    PoseSharing pose_sharing = PoseSharing::Share;

    int cls_channels() const { return n_classes + 1; }
    int pose_channels() const {
        return pose_sharing == PoseSharing::Share ? n_pose_bins : n_classes * n_pose_bins;
    }
    int per_box_channels() const { return cls_channels() + 4 + pose_channels(); }
};

// Strided view of one box's logits inside a CHW head map: element j lives
// at data[base + j*stride].
struct SlotView {
    Tensor* t = nullptr;
    std::size_t base = 0, stride = 0;

    double get(int j) const { return t->data[base + j * stride]; }
    void add_grad(int j, double g) const { t->grad[base + j * stride] += g; }
};

// Per-layer head maps plus the indexing needed to address box rows in
// DefaultBoxSet order.
struct PredictionView {
    struct Layer {
        Tensor* cls = nullptr;
        Tensor* loc = nullptr;
        Tensor* pose = nullptr;
        int grid_h = 0, grid_w = 0, n_aspects = 0;
    };
    std::vector<Layer> layers;
    const DefaultBoxSet* defaults = nullptr;
    HeadConfig head;

    std::size_t n_boxes() const { return defaults->size(); }
    SlotView cls_slot(std::size_t box) const;
    SlotView loc_slot(std::size_t box) const;
    SlotView pose_slot(std::size_t box) const;

  private:
    SlotView slot(std::size_t box, int per_box, Tensor* Layer::*map) const;
};

}  // namespace sspose
