#include "sspose/inference.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "sspose/matching.hpp"
#include "sspose/ops.hpp"

namespace sspose {

std::vector<int> nms(const std::vector<BoxGeom>& boxes, const std::vector<double>& scores,
                     double iou_thresh) {
    std::vector<int> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<int> kept;
    std::vector<bool> suppressed(boxes.size(), false);
    for (int i : order) {
        if (suppressed[i]) continue;
        kept.push_back(i);
        for (int j : order)
            if (!suppressed[j] && j != i && iou(boxes[i], boxes[j]) > iou_thresh)
                suppressed[j] = true;
    }
    return kept;
}

int merge_bins(int fine_bin, int n_fine, int n_coarse) {
    if (n_coarse < 1 || n_fine < n_coarse)
        throw std::invalid_argument("merge_bins: need n_fine >= n_coarse >= 1");
    if (fine_bin < 0 || fine_bin >= n_fine)
        throw std::invalid_argument("merge_bins: fine bin " + std::to_string(fine_bin) +
                                    " out of range [0," + std::to_string(n_fine) + ")");
    return pose_bin(bin_center_deg(fine_bin, n_fine), n_coarse);
}

std::vector<Detection> detect(const PredictionView& preds, const DetectParams& params) {
    const HeadConfig& head = preds.head;
    const int ncls = head.cls_channels();
    const std::size_t nb = preds.n_boxes();

    // class posteriors + decoded boxes, once per box
    std::vector<std::vector<double>> posteriors(nb);
    std::vector<BoxGeom> decoded(nb);
    std::vector<std::vector<double>> pose_probs(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        std::vector<double> logits(ncls);
        const SlotView cls = preds.cls_slot(b);
        for (int j = 0; j < ncls; ++j) logits[j] = cls.get(j);
        posteriors[b].resize(ncls);
        ops::softmax_inplace(logits.data(), posteriors[b].data(), ncls);

        const SlotView loc = preds.loc_slot(b);
        decoded[b] = decode_offsets({loc.get(0), loc.get(1), loc.get(2), loc.get(3)},
                                    preds.defaults->boxes[b]);

        const SlotView pose = preds.pose_slot(b);
        pose_probs[b].resize(head.pose_channels());
        std::vector<double> plog(head.pose_channels());
        for (int j = 0; j < head.pose_channels(); ++j) plog[j] = pose.get(j);
        if (head.pose_sharing == PoseSharing::Share) {
            ops::softmax_inplace(plog.data(), pose_probs[b].data(), head.n_pose_bins);
        } else {
            for (int c = 0; c < head.n_classes; ++c)
                ops::softmax_inplace(plog.data() + c * head.n_pose_bins,
                                     pose_probs[b].data() + c * head.n_pose_bins, head.n_pose_bins);
        }
    }

    std::vector<Detection> all;
    for (int c = 1; c <= head.n_classes; ++c) {
        std::vector<BoxGeom> boxes;
        std::vector<double> scores;
        std::vector<std::size_t> box_ids;
        for (std::size_t b = 0; b < nb; ++b) {
            if (posteriors[b][c] <= params.score_thresh) continue;
            if (!decoded[b].valid()) continue;  // clamped away entirely
            boxes.push_back(decoded[b]);
            scores.push_back(posteriors[b][c]);
            box_ids.push_back(b);
        }
        for (int i : nms(boxes, scores, params.nms_iou)) {
            const std::size_t b = box_ids[i];
            const int off = head.pose_sharing == PoseSharing::Share ? 0 : (c - 1) * head.n_pose_bins;
            int best = 0;
            for (int j = 1; j < head.n_pose_bins; ++j)
                if (pose_probs[b][off + j] > pose_probs[b][off + best]) best = j;
            all.push_back({c, scores[i], boxes[i], best, pose_probs[b][off + best]});
        }
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    if (static_cast<int>(all.size()) > params.top_k) all.resize(params.top_k);
    return all;
}

}  // namespace sspose
