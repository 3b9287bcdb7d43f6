#include "sspose/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sspose/errors.hpp"
#include "sspose/ops.hpp"

namespace sspose {

void NetworkSpec::validate() const {
    if (channels.size() < 3)
        throw ConfigError("network needs at least 3 backbone stages, got " +
                          std::to_string(channels.size()));
    const int divisor = 1 << (static_cast<int>(channels.size()) - 1);
    if (input_res <= 0 || input_res % divisor != 0)
        throw ConfigError("input_res " + std::to_string(input_res) + " must be a multiple of " +
                          std::to_string(divisor));
    if (s_min <= 0 || s_max > 1 || s_min > s_max) throw ConfigError("bad anchor scale range");
    if (aspect_ratios.empty()) throw ConfigError("empty aspect ratio list");
}

std::vector<LayerSpec> NetworkSpec::layer_specs() const {
    const int n = static_cast<int>(channels.size());
    const int g0 = input_res >> (n - 2);  // after n-2 pools
    const int g1 = g0 / 2;
    const auto scales = linear_scales(s_min, s_max, 2);
    return {{g0, g0, scales[0], aspect_ratios}, {g1, g1, scales[1], aspect_ratios}};
}

DetectorNet::DetectorNet(NetworkSpec spec, HeadConfig head, std::uint64_t seed)
    : spec_(std::move(spec)), head_(head) {
    spec_.validate();
    if (head_.n_classes < 1 || head_.n_pose_bins < 2) throw ConfigError("bad head config");
    defaults_ = generate_default_boxes(spec_.layer_specs());

    const auto& ch = spec_.channels;
    int prev = 1;  // grayscale input
    for (std::size_t i = 0; i < ch.size(); ++i) {
        const std::string tag = "bb" + std::to_string(i);
        add_param(tag + "_w", {ch[i], prev, 3, 3});
        add_param(tag + "_b", {ch[i]});
        prev = ch[i];
    }
    const int a = static_cast<int>(spec_.aspect_ratios.size());
    const int feat[2] = {ch[ch.size() - 2], ch[ch.size() - 1]};
    for (int l = 0; l < 2; ++l) {
        const std::string tag = "head" + std::to_string(l);
        add_param(tag + "_cls_w", {a * head_.cls_channels(), feat[l], 3, 3});
        add_param(tag + "_cls_b", {a * head_.cls_channels()});
        add_param(tag + "_loc_w", {a * 4, feat[l], 3, 3});
        add_param(tag + "_loc_b", {a * 4});
        add_param(tag + "_pose_w", {a * head_.pose_channels(), feat[l], 3, 3});
        add_param(tag + "_pose_b", {a * head_.pose_channels()});
    }
    init_params(seed);
}

Tensor* DetectorNet::add_param(const std::string& name, std::vector<int> shape) {
    params_.emplace_back(name, std::make_unique<Tensor>(std::move(shape)));
    params_.back().second->name = name;
    return params_.back().second.get();
}

void DetectorNet::init_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& [name, t] : params_) {
        if (t->shape.size() == 4) {
            const double fan_in = double(t->shape[1]) * t->shape[2] * t->shape[3];
            std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
            for (auto& v : t->data) v = dist(rng);
        } else {
            for (auto& v : t->data) v = 0.0;
        }
    }
}

std::vector<std::pair<std::string, Tensor*>> DetectorNet::parameters() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (auto& [name, t] : params_) out.emplace_back(name, t.get());
    return out;
}

std::vector<std::pair<std::string, const Tensor*>> DetectorNet::parameters() const {
    std::vector<std::pair<std::string, const Tensor*>> out;
    for (const auto& [name, t] : params_) out.emplace_back(name, t.get());
    return out;
}

Tensor* DetectorNet::param(const std::string& name) {
    for (auto& [n, t] : params_)
        if (n == name) return t.get();
    throw std::invalid_argument("no such parameter: " + name);
}

void DetectorNet::zero_grads() {
    for (auto& [name, t] : params_) t->zero_grad();
}

PredictionView DetectorNet::forward(Tape& tape, const Image& image) const {
    if (image.width != spec_.input_res || image.height != spec_.input_res)
        throw DataError("image " + std::to_string(image.width) + "x" +
                        std::to_string(image.height) + " does not match network resolution " +
                        std::to_string(spec_.input_res));
    Tensor* x = tape.make({1, spec_.input_res, spec_.input_res}, image.pixels);
    x->requires_grad = false;

    auto* self = const_cast<DetectorNet*>(this);
    const std::size_t n = spec_.channels.size();
    std::vector<Tensor*> feats;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) x = ops::max_pool2(tape, x);
        const std::string tag = "bb" + std::to_string(i);
        x = ops::relu(tape, ops::conv2d(tape, x, self->param(tag + "_w"),
                                        self->param(tag + "_b"), 1, 1));
        if (i >= n - 2) feats.push_back(x);
    }

    PredictionView view;
    view.defaults = &defaults_;
    view.head = head_;
    const auto lspecs = spec_.layer_specs();
    for (int l = 0; l < 2; ++l) {
        const std::string tag = "head" + std::to_string(l);
        PredictionView::Layer layer;
        layer.cls = ops::conv2d(tape, feats[l], self->param(tag + "_cls_w"),
                                self->param(tag + "_cls_b"), 1, 1);
        layer.loc = ops::conv2d(tape, feats[l], self->param(tag + "_loc_w"),
                                self->param(tag + "_loc_b"), 1, 1);
        layer.pose = ops::conv2d(tape, feats[l], self->param(tag + "_pose_w"),
                                 self->param(tag + "_pose_b"), 1, 1);
        layer.grid_h = lspecs[l].grid_h;
        layer.grid_w = lspecs[l].grid_w;
        layer.n_aspects = static_cast<int>(lspecs[l].aspect_ratios.size());
        view.layers.push_back(layer);
    }
    return view;
}

double SgdOptimizer::effective_lr(int step) const {
    if (cfg_.total_steps > 0 && step >= (3 * cfg_.total_steps) / 4)
        return cfg_.lr * cfg_.decay_factor;
    return cfg_.lr;
}

void SgdOptimizer::apply(DetectorNet& net, int step, double grad_scale) {
    const double lr = effective_lr(step);
    for (auto& [name, t] : net.parameters()) {
        if (t->grad.empty()) t->ensure_grad();
        auto& v = velocity_[name];
        if (v.size() != t->data.size()) v.assign(t->data.size(), 0.0);
        for (std::size_t i = 0; i < t->data.size(); ++i) {
            const double g = t->grad[i] * grad_scale + cfg_.weight_decay * t->data[i];
            v[i] = cfg_.momentum * v[i] - lr * g;
            t->data[i] += v[i];
        }
    }
}

LossBreakdown train_step(DetectorNet& net, const std::vector<TrainSample>& batch,
                         SgdOptimizer& opt, int step, const TrainOptions& topt) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    net.zero_grads();

    LossBreakdown agg;
    agg.alpha1 = topt.alpha1;
    agg.alpha2 = topt.alpha2;
    int contributing = 0;
    for (const auto& sample : batch) {
        Tape tape;
        PredictionView preds = net.forward(tape, sample.image);
        const MatchAssignment asn = match(net.defaults(), sample.gts, topt.force_best_match);
        if (asn.n_matched == 0) continue;
        const auto bg_losses = background_cls_losses(preds);
        const auto negs = hard_negative_mining(bg_losses, asn, topt.neg_pos_ratio);
        Tensor* total = nullptr;
        const LossBreakdown br =
            total_loss(tape, preds, asn, sample.gts, negs, topt.alpha1, topt.alpha2, &total);
        if (!std::isfinite(br.l_total)) {
            const char* term = !std::isfinite(br.l_cls)   ? "l_cls"
                               : !std::isfinite(br.l_loc) ? "l_loc"
                               : !std::isfinite(br.l_pose) ? "l_pose"
                                                           : "l_total";
            throw NumericError(std::string("non-finite loss term ") + term + " at step " +
                               std::to_string(step));
        }
        tape.backward(total);
        agg.l_cls += br.l_cls;
        agg.l_loc += br.l_loc;
        agg.l_pose += br.l_pose;
        agg.l_total += br.l_total;
        agg.n_matched += br.n_matched;
        ++contributing;
    }
    if (contributing == 0) {
        agg.skip_step = true;
        return agg;
    }
    agg.l_cls /= contributing;
    agg.l_loc /= contributing;
    agg.l_pose /= contributing;
    agg.l_total /= contributing;
    opt.apply(net, step, 1.0 / contributing);
    return agg;
}

}  // namespace sspose
