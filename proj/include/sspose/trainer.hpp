#pragma once

#include <functional>
#include <optional>
#include <string>

#include "sspose/checkpoint.hpp"
#include "sspose/config.hpp"
#include "sspose/eval.hpp"

namespace sspose {

struct Dataset {
    std::vector<std::string> names;
    std::vector<Image> images;
    std::vector<std::vector<GroundTruthObject>> gts;

    std::size_t size() const { return names.size(); }
};

Dataset load_dataset(const std::string& dir);

struct TrainResult {
    std::unique_ptr<DetectorNet> net;
    int final_step = 0;
};

// Deterministic training loop. Batch membership and augmentation draws at
// step t depend only on (cfg.seed, t), so a resumed run replays the exact
// uninterrupted sequence. log_line receives one key=value record per
// log_interval steps; checkpoint_sink (when set) is called at configured
// intervals and at the end.
TrainResult train_model(const RunConfig& cfg, const Dataset& data,
                        const std::function<void(const std::string&)>& log_line,
                        const std::function<void(const Checkpoint&)>& checkpoint_sink = {},
                        const Checkpoint* resume_from = nullptr);

// One forward pass + detection per image.
DetectionsByImage run_inference(const DetectorNet& net, const Dataset& data,
                                const DetectParams& params);

GroundTruthByImage dataset_gts(const Dataset& data);

// Line format: image_id class_id score xmin ymin xmax ymax pose_bin pose_conf
void write_detections(const DetectionsByImage& dets, const std::string& path);
DetectionsByImage read_detections(const std::string& path);

std::string format_loss_record(int step, const LossBreakdown& br);

}  // namespace sspose
