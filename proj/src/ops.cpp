#include "sspose/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sspose/kernels.hpp"

namespace sspose::ops {

Tensor* conv2d(Tape& tape, Tensor* input, Tensor* weights, Tensor* bias, int stride, int padding) {
    if (input->shape.size() != 3)
        throw std::invalid_argument("conv2d expects CHW input, got " + input->shape_str());
    if (weights->shape.size() != 4 || weights->shape[2] != weights->shape[3])
        throw std::invalid_argument("conv2d expects [Cout,Cin,k,k] weights, got " +
                                    weights->shape_str());
    const int c_in = input->shape[0], h = input->shape[1], w = input->shape[2];
    const int c_out = weights->shape[0], k = weights->shape[2];
    if (k != 1 && k != 3)
        throw std::invalid_argument("conv2d kernel size must be 1 or 3, got " + std::to_string(k));
    if (weights->shape[1] != c_in)
        throw std::invalid_argument("conv2d channel mismatch: input " + input->shape_str() +
                                    " vs weights " + weights->shape_str());
    if (bias->shape != std::vector<int>{c_out})
        throw std::invalid_argument("conv2d bias shape " + bias->shape_str() + " must be [" +
                                    std::to_string(c_out) + "]");
    if (stride < 1 || padding < 0) throw std::invalid_argument("conv2d: bad stride/padding");
    if ((h + 2 * padding - k) % stride != 0 || (w + 2 * padding - k) % stride != 0)
        throw std::invalid_argument("conv2d: non-integer output size for input " +
                                    input->shape_str() + " k=" + std::to_string(k));
    const int oh = (h + 2 * padding - k) / stride + 1;
    const int ow = (w + 2 * padding - k) / stride + 1;
    if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: empty output");

    Tensor* out = tape.make({c_out, oh, ow});
    kernels::ConvDims d{c_in, h, w, c_out, k, stride, padding, oh, ow};
    kernels::conv2d_forward(input->data.data(), weights->data.data(), bias->data.data(),
                            out->data.data(), d);
    tape.record([=]() {
        if (out->grad.empty()) return;
        input->ensure_grad();
        weights->ensure_grad();
        bias->ensure_grad();
        kernels::conv2d_backward(input->data.data(), weights->data.data(), out->grad.data(),
                                 input->requires_grad ? input->grad.data() : nullptr,
                                 weights->grad.data(), bias->grad.data(), d);
    });
    return out;
}

Tensor* max_pool2(Tape& tape, Tensor* input) {
    if (input->shape.size() != 3)
        throw std::invalid_argument("max_pool2 expects CHW input, got " + input->shape_str());
    const int c = input->shape[0], h = input->shape[1], w = input->shape[2];
    if (h % 2 || w % 2)
        throw std::invalid_argument("max_pool2 needs even H,W, got " + input->shape_str());
    Tensor* out = tape.make({c, h / 2, w / 2});
    auto argmax = std::make_shared<std::vector<int>>(out->numel());
    kernels::maxpool2_forward(input->data.data(), out->data.data(), argmax->data(), c, h, w);
    tape.record([=]() {
        if (out->grad.empty()) return;
        input->ensure_grad();
        kernels::maxpool2_backward(out->grad.data(), argmax->data(), input->grad.data(), c, h / 2,
                                   w / 2);
    });
    return out;
}

Tensor* relu(Tape& tape, Tensor* input) {
    Tensor* out = tape.make(input->shape);
    kernels::relu_forward(input->data.data(), out->data.data(), input->numel());
    tape.record([=]() {
        if (out->grad.empty()) return;
        input->ensure_grad();
        kernels::relu_backward(input->data.data(), out->grad.data(), input->grad.data(),
                               input->numel());
    });
    return out;
}

void softmax_inplace(const double* logits, double* probs, int n) {
    double m = logits[0];
    for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        probs[i] = std::exp(logits[i] - m);
        z += probs[i];
    }
    for (int i = 0; i < n; ++i) probs[i] /= z;
}

double softmax_xent_value(const double* logits, int n, int target) {
    double m = logits[0];
    for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
    double z = 0.0;
    for (int i = 0; i < n; ++i) z += std::exp(logits[i] - m);
    return std::log(z) - (logits[target] - m);
}

Tensor* softmax_xent(Tape& tape, Tensor* logits, int target) {
    const int n = static_cast<int>(logits->numel());
    if (n < 2) throw std::invalid_argument("softmax_xent needs >= 2 logits");
    if (target < 0 || target >= n)
        throw std::invalid_argument("softmax_xent target " + std::to_string(target) +
                                    " out of range [0," + std::to_string(n) + ")");
    Tensor* out = tape.make({1});
    out->data[0] = softmax_xent_value(logits->data.data(), n, target);
    tape.record([=]() {
        if (out->grad.empty()) return;
        logits->ensure_grad();
        std::vector<double> p(n);
        softmax_inplace(logits->data.data(), p.data(), n);
        const double g = out->grad[0];
        for (int i = 0; i < n; ++i) logits->grad[i] += g * (p[i] - (i == target ? 1.0 : 0.0));
    });
    return out;
}

Tensor* smooth_l1(Tape& tape, Tensor* pred, const std::vector<double>& target) {
    if (pred->numel() != target.size())
        throw std::invalid_argument("smooth_l1 shape mismatch: pred " + pred->shape_str() +
                                    " vs target length " + std::to_string(target.size()));
    Tensor* out = tape.make({1});
    double acc = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = pred->data[i] - target[i];
        acc += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
    }
    out->data[0] = acc;
    auto tgt = std::make_shared<std::vector<double>>(target);
    tape.record([=]() {
        if (out->grad.empty()) return;
        pred->ensure_grad();
        const double g = out->grad[0];
        for (std::size_t i = 0; i < tgt->size(); ++i) {
            const double d = pred->data[i] - (*tgt)[i];
            pred->grad[i] += g * (std::abs(d) < 1.0 ? d : (d > 0 ? 1.0 : -1.0));
        }
    });
    return out;
}

Tensor* weighted_sum(Tape& tape, const std::vector<Tensor*>& scalars,
                     const std::vector<double>& coeff) {
    if (scalars.size() != coeff.size())
        throw std::invalid_argument("weighted_sum: size mismatch");
    Tensor* out = tape.make({1});
    double acc = 0.0;
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        if (!scalars[i]->is_scalar()) throw std::invalid_argument("weighted_sum: non-scalar term");
        acc += coeff[i] * scalars[i]->data[0];
    }
    out->data[0] = acc;
    auto terms = std::make_shared<std::vector<Tensor*>>(scalars);
    auto cs = std::make_shared<std::vector<double>>(coeff);
    tape.record([=]() {
        if (out->grad.empty()) return;
        for (std::size_t i = 0; i < terms->size(); ++i) {
            (*terms)[i]->ensure_grad();
            (*terms)[i]->grad[0] += out->grad[0] * (*cs)[i];
        }
    });
    return out;
}

}  // namespace sspose::ops
