#pragma once

#include <cstddef>

namespace sspose::kernels {

// Raw CHW convolution/pooling kernels. Each comes in a serial reference
// form and an OpenMP form; the two must produce bit-identical results
// (same summation order per output element). Dispatch helpers pick the
// OpenMP path unless forced serial.

struct ConvDims {
    int c_in, h, w;
    int c_out, k;
    int stride, pad;
    int oh, ow;
};

void conv2d_forward_serial(const double* x, const double* wgt, const double* bias, double* y,
                           const ConvDims& d);
void conv2d_forward_omp(const double* x, const double* wgt, const double* bias, double* y,
                        const ConvDims& d);

// dy is the gradient at the output; accumulates into dx, dw, db (callers
// zero or reuse as needed). dx may be null when the input needs no grad.
void conv2d_backward_serial(const double* x, const double* wgt, const double* dy, double* dx,
                            double* dw, double* db, const ConvDims& d);
void conv2d_backward_omp(const double* x, const double* wgt, const double* dy, double* dx,
                         double* dw, double* db, const ConvDims& d);

// 2x2 max pooling, stride 2. argmax records the flat input index chosen per
// output element (first occurrence in row-major window order on ties).
void maxpool2_forward_serial(const double* x, double* y, int* argmax, int c, int h, int w);
void maxpool2_forward_omp(const double* x, double* y, int* argmax, int c, int h, int w);
void maxpool2_backward(const double* dy, const int* argmax, double* dx, int c, int oh, int ow);

void relu_forward(const double* x, double* y, std::size_t n);
void relu_backward(const double* x, const double* dy, double* dx, std::size_t n);

// Process-wide switch used by tests and the benchmark to pin a path.
void set_force_serial(bool force);
bool force_serial();

inline void conv2d_forward(const double* x, const double* wgt, const double* bias, double* y,
                           const ConvDims& d) {
    if (force_serial())
        conv2d_forward_serial(x, wgt, bias, y, d);
    else
        conv2d_forward_omp(x, wgt, bias, y, d);
}
inline void conv2d_backward(const double* x, const double* wgt, const double* dy, double* dx,
                            double* dw, double* db, const ConvDims& d) {
    if (force_serial())
        conv2d_backward_serial(x, wgt, dy, dx, dw, db, d);
    else
        conv2d_backward_omp(x, wgt, dy, dx, dw, db, d);
}
inline void maxpool2_forward(const double* x, double* y, int* argmax, int c, int h, int w) {
    if (force_serial())
        maxpool2_forward_serial(x, y, argmax, c, h, w);
    else
        maxpool2_forward_omp(x, y, argmax, c, h, w);
}

}  // namespace sspose::kernels
