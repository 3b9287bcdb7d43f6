#include "sspose/eval.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sspose/errors.hpp"

namespace sspose {

namespace {

// All-points interpolation: area under the precision envelope.
double pr_area(const std::vector<PrPoint>& pr) {
    double area = 0, prev_r = 0;
    std::vector<double> envelope(pr.size());
    double best = 0;
    for (std::size_t i = pr.size(); i-- > 0;) {
        best = std::max(best, pr[i].precision);
        envelope[i] = best;
    }
    for (std::size_t i = 0; i < pr.size(); ++i) {
        area += (pr[i].recall - prev_r) * envelope[i];
        prev_r = pr[i].recall;
    }
    return area;
}

std::vector<PrPoint> pr_curve(const std::vector<char>& tp_flags, int n_gt) {
    std::vector<PrPoint> pr;
    pr.reserve(tp_flags.size());
    int tp = 0, fp = 0;
    for (char f : tp_flags) {
        f ? ++tp : ++fp;
        pr.push_back({n_gt > 0 ? double(tp) / n_gt : 0.0, double(tp) / (tp + fp)});
    }
    return pr;
}

struct RankedDet {
    std::string image;
    double score;
    BoxGeom box;
    int pose_bin;
};

}  // namespace

EvalReport evaluate(const DetectionsByImage& detections, const GroundTruthByImage& ground_truth,
                    const std::vector<int>& n_bins_list, int det_n_bins) {
    for (const auto& [img, dets] : detections)
        if (!ground_truth.count(img))
            throw DataError("detections reference image absent from ground truth: " + img);

    std::set<int> classes;
    for (const auto& [img, gts] : ground_truth)
        for (const auto& gt : gts) classes.insert(gt.class_id);

    EvalReport report;
    report.n_bins_list = n_bins_list;
    for (int c : classes) {
        std::vector<RankedDet> dets;
        for (const auto& [img, ds] : detections)
            for (const auto& d : ds)
                if (d.class_id == c) dets.push_back({img, d.score, d.box, d.pose_bin});
        std::stable_sort(dets.begin(), dets.end(),
                         [](const RankedDet& a, const RankedDet& b) { return a.score > b.score; });

        int n_gt = 0;
        std::map<std::string, std::vector<char>> claimed;
        for (const auto& [img, gts] : ground_truth) {
            int count = 0;
            for (const auto& gt : gts)
                if (gt.class_id == c) ++count;
            n_gt += count;
            claimed[img].assign(gts.size(), 0);
        }

        std::vector<char> tp_ap(dets.size(), 0);
        std::vector<int> matched_gt(dets.size(), -1);  // index into that image's gt list
        for (std::size_t i = 0; i < dets.size(); ++i) {
            const auto& gts = ground_truth.at(dets[i].image);
            auto& cl = claimed[dets[i].image];
            int best_g = -1;
            double best_iou = 0.5;  // strict: IoU must exceed 0.5
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (gts[g].class_id != c || cl[g]) continue;
                const double v = iou(dets[i].box, gts[g].box);
                if (v > best_iou) {
                    best_iou = v;
                    best_g = static_cast<int>(g);
                }
            }
            if (best_g >= 0) {
                cl[best_g] = 1;
                tp_ap[i] = 1;
                matched_gt[i] = best_g;
            }
        }

        ClassMetrics cm;
        cm.pr_ap = pr_curve(tp_ap, n_gt);
        cm.ap = pr_area(cm.pr_ap);
        for (int nb : n_bins_list) {
            std::vector<char> tp_avp(dets.size(), 0);
            for (std::size_t i = 0; i < dets.size(); ++i) {
                if (!tp_ap[i]) continue;
                const int det_bin =
                    nb == det_n_bins ? dets[i].pose_bin : merge_bins(dets[i].pose_bin, det_n_bins, nb);
                const auto& gt = ground_truth.at(dets[i].image)[matched_gt[i]];
                // Ground truth is binned consistently with the detections: through
                // the detector's fine binning, then merged. A fine-correct pose can
                // therefore never become wrong at a coarser granularity.
                const int gt_bin = nb == det_n_bins
                                       ? pose_bin(gt.azimuth_deg, nb)
                                       : merge_bins(pose_bin(gt.azimuth_deg, det_n_bins),
                                                    det_n_bins, nb);
                tp_avp[i] = det_bin == gt_bin;
            }
            cm.pr_avp[nb] = pr_curve(tp_avp, n_gt);
            cm.avp[nb] = pr_area(cm.pr_avp[nb]);
        }
        report.per_class[c] = std::move(cm);
    }

    if (!report.per_class.empty()) {
        for (const auto& [c, cm] : report.per_class) {
            report.map += cm.ap;
            for (const auto& [nb, v] : cm.avp) report.mavp[nb] += v;
        }
        report.map /= report.per_class.size();
        for (auto& [nb, v] : report.mavp) v /= report.per_class.size();
    }
    return report;
}

EvalReport evaluate_merged(const DetectionsByImage& detections,
                           const GroundTruthByImage& ground_truth, int n_fine, int n_coarse) {
    if (n_fine < n_coarse) throw ConfigError("evaluate_merged: n_fine must be >= n_coarse");
    return evaluate(detections, ground_truth, {n_coarse}, n_fine);
}

std::string format_report(const EvalReport& report, const std::vector<std::string>& class_names) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "class              AP";
    for (int nb : report.n_bins_list) os << "   AVP" << nb;
    os << "\n";
    for (const auto& [c, cm] : report.per_class) {
        std::string name = (c - 1) < static_cast<int>(class_names.size())
                               ? class_names[c - 1]
                               : "class" + std::to_string(c);
        name.resize(14, ' ');
        os << name << " " << cm.ap;
        for (int nb : report.n_bins_list) os << " " << cm.avp.at(nb);
        os << "\n";
    }
    os << "mean           " << report.map;
    for (int nb : report.n_bins_list) os << " " << report.mavp.at(nb);
    os << "\n";
    return os.str();
}

std::string report_key_values(const EvalReport& report) {
    std::ostringstream os;
    os.precision(10);
    os << "mAP=" << report.map << "\n";
    for (int nb : report.n_bins_list) os << "mAVP" << nb << "=" << report.mavp.at(nb) << "\n";
    for (const auto& [c, cm] : report.per_class) {
        os << "AP_class" << c << "=" << cm.ap << "\n";
        for (int nb : report.n_bins_list)
            os << "AVP" << nb << "_class" << c << "=" << cm.avp.at(nb) << "\n";
    }
    return os.str();
}

}  // namespace sspose
