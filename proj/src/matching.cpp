#include "sspose/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sspose {

double normalize_azimuth(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0) a += 360.0;
    return a;
}

int pose_bin(double azimuth_deg, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("pose_bin: n_bins must be >= 1");
    const double a = normalize_azimuth(azimuth_deg);
    const double width = 360.0 / n_bins;
    return static_cast<int>(std::llround(a / width)) % n_bins;
}

double bin_center_deg(int bin, int n_bins) {
    if (bin < 0 || bin >= n_bins) throw std::invalid_argument("bin_center_deg: bin out of range");
    return bin * 360.0 / n_bins;
}

MatchAssignment match(const DefaultBoxSet& defaults, const std::vector<GroundTruthObject>& gts,
                      bool force_best_match) {
    if (defaults.size() == 0) throw std::invalid_argument("match: empty default box set");
    MatchAssignment out;
    out.per_box.assign(defaults.size(), {});
    if (gts.empty()) return out;

    std::vector<std::vector<double>> iou_mat(defaults.size(), std::vector<double>(gts.size()));
    for (std::size_t b = 0; b < defaults.size(); ++b)
        for (std::size_t g = 0; g < gts.size(); ++g)
            iou_mat[b][g] = iou(defaults.boxes[b], gts[g].box);

    for (std::size_t b = 0; b < defaults.size(); ++b) {
        int best_g = 0;
        for (std::size_t g = 1; g < gts.size(); ++g)
            if (iou_mat[b][g] > iou_mat[b][best_g]) best_g = static_cast<int>(g);
        if (iou_mat[b][best_g] > 0.5) out.per_box[b] = {best_g, iou_mat[b][best_g], false};
    }

    if (force_best_match) {
        // Greedy per-gt claiming over distinct boxes so contested best boxes
        // cannot leave an overlapping gt without a positive.
        std::vector<bool> claimed(defaults.size(), false);
        for (std::size_t g = 0; g < gts.size(); ++g) {
            int best_b = -1;
            double best = 0.0;
            for (std::size_t b = 0; b < defaults.size(); ++b)
                if (!claimed[b] && iou_mat[b][g] > best) {
                    best = iou_mat[b][g];
                    best_b = static_cast<int>(b);
                }
            if (best_b >= 0) {  // zero-overlap gts own no default box
                out.per_box[best_b] = {static_cast<int>(g), best, best <= 0.5};
                claimed[best_b] = true;
            }
        }
    }

    for (const auto& m : out.per_box)
        if (m.gt_index >= 0) ++out.n_matched;
    return out;
}

std::vector<int> hard_negative_mining(const std::vector<double>& per_box_cls_loss,
                                      const MatchAssignment& assignment, double neg_pos_ratio) {
    if (per_box_cls_loss.size() != assignment.per_box.size())
        throw std::invalid_argument("hard_negative_mining: loss vector size mismatch");
    if (assignment.n_matched == 0) return {};
    const std::size_t quota =
        static_cast<std::size_t>(std::floor(neg_pos_ratio * assignment.n_matched));

    std::vector<int> negatives;
    for (std::size_t b = 0; b < assignment.per_box.size(); ++b)
        if (!assignment.is_positive(b)) negatives.push_back(static_cast<int>(b));
    std::stable_sort(negatives.begin(), negatives.end(), [&](int a, int b) {
        return per_box_cls_loss[a] > per_box_cls_loss[b];
    });
    if (negatives.size() > quota) negatives.resize(quota);
    return negatives;
}

}  // namespace sspose
