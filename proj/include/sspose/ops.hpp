#pragma once

#include "sspose/tensor.hpp"

namespace sspose::ops {

// Tape-recorded layer ops. All take CHW tensors; conv is cross-correlation
// (no kernel flip). Shape errors throw std::invalid_argument with both
// shapes named.

Tensor* conv2d(Tape& tape, Tensor* input, Tensor* weights, Tensor* bias, int stride, int padding);
Tensor* max_pool2(Tape& tape, Tensor* input);
Tensor* relu(Tape& tape, Tensor* input);

// -log softmax(logits)[target] over a flat logits tensor; max-subtracted.
Tensor* softmax_xent(Tape& tape, Tensor* logits, int target);

// Elementwise smooth L1 against constant targets, summed.
Tensor* smooth_l1(Tape& tape, Tensor* pred, const std::vector<double>& target);

// out = sum_i coeff[i] * scalars[i]
Tensor* weighted_sum(Tape& tape, const std::vector<Tensor*>& scalars,
                     const std::vector<double>& coeff);

// Non-tape helpers shared with the loss assembly.
void softmax_inplace(const double* logits, double* probs, int n);
double softmax_xent_value(const double* logits, int n, int target);

}  // namespace sspose::ops
