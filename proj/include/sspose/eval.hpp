#pragma once

#include <map>
#include <string>
#include <vector>

#include "sspose/inference.hpp"
#include "sspose/matching.hpp"

namespace sspose {

struct PrPoint {
    double recall = 0, precision = 0;
};

struct ClassMetrics {
    double ap = 0;
    std::map<int, double> avp;  // n_bins -> AVP
    std::vector<PrPoint> pr_ap;
    std::map<int, std::vector<PrPoint>> pr_avp;
};

struct EvalReport {
    std::map<int, ClassMetrics> per_class;
    double map = 0;
    std::map<int, double> mavp;  // n_bins -> mean AVP
    std::vector<int> n_bins_list;
};

using DetectionsByImage = std::map<std::string, std::vector<Detection>>;
using GroundTruthByImage = std::map<std::string, std::vector<GroundTruthObject>>;

// Pascal-style greedy evaluation with all-points PR interpolation.
// Detections carry pose bins at det_n_bins; AVP at a coarser binning
// merges through bin centers. Every image id present in `detections`
// must exist in `ground_truth`.
EvalReport evaluate(const DetectionsByImage& detections, const GroundTruthByImage& ground_truth,
                    const std::vector<int>& n_bins_list, int det_n_bins);

// Table-4 protocol: evaluate a fine-binned model at a coarse binning.
EvalReport evaluate_merged(const DetectionsByImage& detections,
                           const GroundTruthByImage& ground_truth, int n_fine, int n_coarse);

std::string format_report(const EvalReport& report, const std::vector<std::string>& class_names);
std::string report_key_values(const EvalReport& report);

}  // namespace sspose
