#include "sspose/loss.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "sspose/ops.hpp"

namespace sspose {

namespace {

std::vector<double> gather(const SlotView& s, int n) {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) v[j] = s.get(j);
    return v;
}

// pose-logit slice for a box matched to class cid (1-based)
std::pair<int, int> pose_slice(const HeadConfig& head, int cid) {
    if (head.pose_sharing == PoseSharing::Share) return {0, head.n_pose_bins};
    return {(cid - 1) * head.n_pose_bins, head.n_pose_bins};
}

void scatter_xent_grad(const SlotView& s, int offset, int n, int target, double scale) {
    std::vector<double> logits(n), p(n);
    for (int j = 0; j < n; ++j) logits[j] = s.get(offset + j);
    ops::softmax_inplace(logits.data(), p.data(), n);
    for (int j = 0; j < n; ++j) s.add_grad(offset + j, scale * (p[j] - (j == target ? 1.0 : 0.0)));
}

}  // namespace

std::vector<double> background_cls_losses(const PredictionView& preds) {
    const int nc = preds.head.cls_channels();
    std::vector<double> out(preds.n_boxes());
    for (std::size_t b = 0; b < preds.n_boxes(); ++b) {
        auto logits = gather(preds.cls_slot(b), nc);
        out[b] = ops::softmax_xent_value(logits.data(), nc, 0);
    }
    return out;
}

LossBreakdown total_loss(Tape& tape, const PredictionView& preds, const MatchAssignment& assignment,
                         const std::vector<GroundTruthObject>& gts,
                         const std::vector<int>& mined_negatives, double alpha1, double alpha2,
                         Tensor** total) {
    if (assignment.per_box.size() != preds.n_boxes())
        throw std::invalid_argument("total_loss: assignment size does not match prediction rows");

    LossBreakdown br;
    br.alpha1 = alpha1;
    br.alpha2 = alpha2;
    br.n_matched = assignment.n_matched;
    if (br.n_matched == 0) {
        br.skip_step = true;
        if (total) {
            *total = tape.make({1});
            tape.record([]() {});
        }
        return br;
    }

    const int nc = preds.head.cls_channels();
    const HeadConfig head = preds.head;
    for (std::size_t b = 0; b < preds.n_boxes(); ++b) {
        const BoxMatch& m = assignment.per_box[b];
        if (m.gt_index < 0) continue;
        const GroundTruthObject& gt = gts.at(m.gt_index);
        if (gt.class_id < 1 || gt.class_id > head.n_classes)
            throw std::invalid_argument("total_loss: gt class_id " + std::to_string(gt.class_id) +
                                        " outside 1.." + std::to_string(head.n_classes));

        auto cls_logits = gather(preds.cls_slot(b), nc);
        br.l_cls += ops::softmax_xent_value(cls_logits.data(), nc, gt.class_id);

        const auto t = encode_offsets(gt.box, preds.defaults->boxes[b]);
        const SlotView loc = preds.loc_slot(b);
        for (int j = 0; j < 4; ++j) {
            const double d = loc.get(j) - t[j];
            br.l_loc += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
        }

        const auto [off, n_pose] = pose_slice(head, gt.class_id);
        auto pose_logits = gather(preds.pose_slot(b), head.pose_channels());
        br.l_pose += ops::softmax_xent_value(pose_logits.data() + off, n_pose,
                                             pose_bin(gt.azimuth_deg, head.n_pose_bins));
    }
    for (int b : mined_negatives) {
        if (assignment.is_positive(b))
            throw std::invalid_argument("total_loss: mined negative is a positive box");
        auto cls_logits = gather(preds.cls_slot(b), nc);
        br.l_cls += ops::softmax_xent_value(cls_logits.data(), nc, 0);
    }
    br.l_total = (br.l_cls + alpha1 * br.l_loc + alpha2 * br.l_pose) / br.n_matched;

    Tensor* root = tape.make({1});
    root->data[0] = br.l_total;
    auto asn = std::make_shared<MatchAssignment>(assignment);
    auto gts_copy = std::make_shared<std::vector<GroundTruthObject>>(gts);
    auto negs = std::make_shared<std::vector<int>>(mined_negatives);
    auto view = std::make_shared<PredictionView>(preds);
    const double n = br.n_matched;
    tape.record([=]() {
        if (root->grad.empty()) return;
        const double g = root->grad[0] / n;
        for (const auto& l : view->layers) {
            l.cls->ensure_grad();
            l.loc->ensure_grad();
            l.pose->ensure_grad();
        }
        for (std::size_t b = 0; b < view->n_boxes(); ++b) {
            const BoxMatch& m = asn->per_box[b];
            if (m.gt_index < 0) continue;
            const GroundTruthObject& gt = (*gts_copy)[m.gt_index];
            scatter_xent_grad(view->cls_slot(b), 0, nc, gt.class_id, g);

            const auto t = encode_offsets(gt.box, view->defaults->boxes[b]);
            const SlotView loc = view->loc_slot(b);
            for (int j = 0; j < 4; ++j) {
                const double d = loc.get(j) - t[j];
                loc.add_grad(j, g * alpha1 * (std::abs(d) < 1.0 ? d : (d > 0 ? 1.0 : -1.0)));
            }

            const auto [off, n_pose] = pose_slice(head, gt.class_id);
            scatter_xent_grad(view->pose_slot(b), off, n_pose,
                              pose_bin(gt.azimuth_deg, head.n_pose_bins), g * alpha2);
        }
        for (int b : *negs) scatter_xent_grad(view->cls_slot(b), 0, nc, 0, g);
    });
    if (total) *total = root;
    return br;
}

}  // namespace sspose
