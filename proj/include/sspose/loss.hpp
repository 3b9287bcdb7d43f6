#pragma once

#include "sspose/heads.hpp"
#include "sspose/matching.hpp"

namespace sspose {

struct LossBreakdown {
    double l_cls = 0, l_loc = 0, l_pose = 0;
    int n_matched = 0;
    double alpha1 = 1.0, alpha2 = 1.5;
    double l_total = 0;
    bool skip_step = false;  // N == 0: nothing to learn from this sample
};

// Per-box background classification loss, used to rank negatives for mining.
std::vector<double> background_cls_losses(const PredictionView& preds);

// Joint detection loss: cls xent over positives + mined negatives, smooth
// L1 on encoded offsets and pose xent over positives, all divided by N.
// Registers one backward node that scatters analytic gradients into the
// head maps. Returns the breakdown; `total` (when non-null) receives the
// scalar tape tensor for backward().
LossBreakdown total_loss(Tape& tape, const PredictionView& preds, const MatchAssignment& assignment,
                         const std::vector<GroundTruthObject>& gts,
                         const std::vector<int>& mined_negatives, double alpha1, double alpha2,
                         Tensor** total = nullptr);

}  // namespace sspose
