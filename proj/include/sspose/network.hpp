#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sspose/heads.hpp"
#include "sspose/image.hpp"
#include "sspose/loss.hpp"
#include "sspose/tensor.hpp"

namespace sspose {

// Backbone plan: conv3x3+relu at each entry of `channels`, with 2x2
// max-pool between entries. The last two stages feed the prediction heads,
// so their grids are input_res/8 and input_res/16.
struct NetworkSpec {
    int input_res = 64;
    std::vector<int> channels = {12, 24, 32, 48, 64};
    double s_min = 0.2, s_max = 0.9;
    std::vector<double> aspect_ratios = {1.0, 2.0, 0.5};

    std::vector<LayerSpec> layer_specs() const;
    void validate() const;
};

class DetectorNet {
  public:
    DetectorNet(NetworkSpec spec, HeadConfig head, std::uint64_t seed);

    PredictionView forward(Tape& tape, const Image& image) const;

    const NetworkSpec& spec() const { return spec_; }
    const HeadConfig& head() const { return head_; }
    const DefaultBoxSet& defaults() const { return defaults_; }

    std::vector<std::pair<std::string, Tensor*>> parameters();
    std::vector<std::pair<std::string, const Tensor*>> parameters() const;
    Tensor* param(const std::string& name);
    void zero_grads();

  private:
    Tensor* add_param(const std::string& name, std::vector<int> shape);
    void init_params(std::uint64_t seed);

    NetworkSpec spec_;
    HeadConfig head_;
    DefaultBoxSet defaults_;
    std::vector<std::pair<std::string, std::unique_ptr<Tensor>>> params_;
};

struct SgdConfig {
    double lr = 1e-3;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    int total_steps = 0;       // for the single 10x decay at 75%; 0 disables
    double decay_factor = 0.1;
};

class SgdOptimizer {
  public:
    explicit SgdOptimizer(SgdConfig cfg) : cfg_(cfg) {}

    double effective_lr(int step) const;
    void apply(DetectorNet& net, int step, double grad_scale);

    std::map<std::string, std::vector<double>>& velocity() { return velocity_; }
    const SgdConfig& config() const { return cfg_; }

  private:
    SgdConfig cfg_;
    std::map<std::string, std::vector<double>> velocity_;
};

struct TrainSample {
    Image image;
    std::vector<GroundTruthObject> gts;
};

struct TrainOptions {
    double alpha1 = 1.0, alpha2 = 1.5;
    double neg_pos_ratio = 3.0;
    bool force_best_match = true;
};

// One SGD step over a batch: per-sample tapes accumulate parameter
// gradients, then a single serialized update. Returns the batch-averaged
// breakdown; skip_step set (and no update made) when no sample matched.
LossBreakdown train_step(DetectorNet& net, const std::vector<TrainSample>& batch,
                         SgdOptimizer& opt, int step, const TrainOptions& topt);

}  // namespace sspose
