#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sspose/datagen.hpp"
#include "sspose/heads.hpp"
#include "sspose/network.hpp"

namespace sspose {

// Every training/inference knob in one place. Parsed from `key = value`
// lines; unknown keys are rejected. CLI flags override file values.
struct RunConfig {
    // loss / matching
    double alpha1 = 1.0, alpha2 = 1.5;
    double neg_pos_ratio = 3.0;
    bool force_best_match = true;

    // optimizer
    double lr = 1e-3, momentum = 0.9, weight_decay = 5e-4, decay_factor = 0.1;
    int batch_size = 4;
    int steps = 5000;

    // model
    int n_classes = 3;
    int n_bins = 8;
    std::string pose_sharing = "share";  // share | separate
    int input_res = 64;
    std::vector<int> channels = {12, 24, 32, 48, 64};
    double s_min = 0.2, s_max = 0.9;
    std::vector<double> aspect_ratios = {1.0, 2.0, 0.5};

    // inference
    double score_thresh = 0.05;
    double nms_iou = 0.45;
    int top_k = 200;

    // data / augmentation
    bool patch_sampling = true;
    int min_objects = 1, max_objects = 4;
    double min_scale = 0.25, max_scale = 0.5;
    double noise_level = 0.25;

    std::uint64_t seed = 1;
    int log_interval = 10;
    int checkpoint_interval = 0;  // 0: only at end

    void apply_line(const std::string& key, const std::string& value);
    static RunConfig from_file(const std::string& path);

    NetworkSpec network_spec() const;
    HeadConfig head_config() const;
    SceneSpec scene_spec() const;
    SgdConfig sgd_config() const;
    TrainOptions train_options() const;

    std::string serialize() const;
};

}  // namespace sspose
