#pragma once

#include <vector>

#include "sspose/heads.hpp"

namespace sspose {

struct Detection {
    int class_id = 0;
    double score = 0;  // class posterior
    BoxGeom box;       // decoded, clamped
    int pose_bin = 0;
    double pose_conf = 0;
};

struct DetectParams {
    double score_thresh = 0.05;
    double nms_iou = 0.45;
    int top_k = 200;
};

// Per-class score thresholding + offset decoding + greedy NMS + pose
// argmax; keeps top_k overall by score.
std::vector<Detection> detect(const PredictionView& preds, const DetectParams& params);

// Greedy NMS over one class: descending score, ties to the lower index;
// returns surviving indices in kept order.
std::vector<int> nms(const std::vector<BoxGeom>& boxes, const std::vector<double>& scores,
                     double iou_thresh);

// Map a fine pose bin to the coarse bin containing its center angle.
int merge_bins(int fine_bin, int n_fine, int n_coarse);

}  // namespace sspose
