#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sspose/anchors.hpp"

namespace sspose {

struct GroundTruthObject {
    int class_id = 0;  // 1..N_c; 0 is background in head outputs
    BoxGeom box;
    double azimuth_deg = 0;  // normalized into [0,360)
};

double normalize_azimuth(double deg);

// Centered bins: bin 0 spans [-360/2n, +360/2n).
int pose_bin(double azimuth_deg, int n_bins);
double bin_center_deg(int bin, int n_bins);

struct BoxMatch {
    int gt_index = -1;  // -1: background
    double iou_value = 0;
    bool forced = false;  // best-default-per-gt rescue, may carry IoU <= 0.5
};

struct MatchAssignment {
    std::vector<BoxMatch> per_box;
    int n_matched = 0;

    bool is_positive(std::size_t i) const { return per_box[i].gt_index >= 0; }
};

// IoU>0.5 matching plus (optionally) force-assigning each gt's single best
// default box. Ties break toward the lower gt / lower box index.
MatchAssignment match(const DefaultBoxSet& defaults, const std::vector<GroundTruthObject>& gts,
                      bool force_best_match = true);

// Top floor(ratio*N) background boxes by classification loss, descending;
// ties toward the lower box index.
std::vector<int> hard_negative_mining(const std::vector<double>& per_box_cls_loss,
                                      const MatchAssignment& assignment, double neg_pos_ratio);

}  // namespace sspose
