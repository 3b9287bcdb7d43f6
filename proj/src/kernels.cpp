#include "sspose/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>

namespace sspose::kernels {

namespace {
std::atomic<bool> g_force_serial{false};

inline double conv_out_at(const double* x, const double* wgt, const double* bias,
                          const ConvDims& d, int co, int oy, int ox) {
    double acc = bias ? bias[co] : 0.0;
    const int iy0 = oy * d.stride - d.pad;
    const int ix0 = ox * d.stride - d.pad;
    for (int ci = 0; ci < d.c_in; ++ci) {
        const double* xc = x + static_cast<std::size_t>(ci) * d.h * d.w;
        const double* wc = wgt + (static_cast<std::size_t>(co) * d.c_in + ci) * d.k * d.k;
        for (int ky = 0; ky < d.k; ++ky) {
            const int iy = iy0 + ky;
            if (iy < 0 || iy >= d.h) continue;
            for (int kx = 0; kx < d.k; ++kx) {
                const int ix = ix0 + kx;
                if (ix < 0 || ix >= d.w) continue;
                acc += xc[iy * d.w + ix] * wc[ky * d.k + kx];
            }
        }
    }
    return acc;
}
}  // namespace

void set_force_serial(bool force) { g_force_serial.store(force); }
bool force_serial() { return g_force_serial.load(); }

void conv2d_forward_serial(const double* x, const double* wgt, const double* bias, double* y,
                           const ConvDims& d) {
    for (int co = 0; co < d.c_out; ++co)
        for (int oy = 0; oy < d.oh; ++oy)
            for (int ox = 0; ox < d.ow; ++ox)
                y[(static_cast<std::size_t>(co) * d.oh + oy) * d.ow + ox] =
                    conv_out_at(x, wgt, bias, d, co, oy, ox);
}

void conv2d_forward_omp(const double* x, const double* wgt, const double* bias, double* y,
                        const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (int co = 0; co < d.c_out; ++co)
        for (int oy = 0; oy < d.oh; ++oy)
            for (int ox = 0; ox < d.ow; ++ox)
                y[(static_cast<std::size_t>(co) * d.oh + oy) * d.ow + ox] =
                    conv_out_at(x, wgt, bias, d, co, oy, ox);
}

namespace {

// Input gradient in gather form: each input element sums the output
// gradients it contributed to. Race-free across (ci, iy) pairs.
inline void conv_dx_row(const double* wgt, const double* dy, double* dx, const ConvDims& d,
                        int ci, int iy) {
    double* dxr = dx + (static_cast<std::size_t>(ci) * d.h + iy) * d.w;
    for (int ix = 0; ix < d.w; ++ix) {
        double acc = 0.0;
        for (int co = 0; co < d.c_out; ++co) {
            const double* wc = wgt + (static_cast<std::size_t>(co) * d.c_in + ci) * d.k * d.k;
            const double* dyc = dy + static_cast<std::size_t>(co) * d.oh * d.ow;
            for (int ky = 0; ky < d.k; ++ky) {
                const int num_y = iy + d.pad - ky;
                if (num_y < 0 || num_y % d.stride) continue;
                const int oy = num_y / d.stride;
                if (oy >= d.oh) continue;
                for (int kx = 0; kx < d.k; ++kx) {
                    const int num_x = ix + d.pad - kx;
                    if (num_x < 0 || num_x % d.stride) continue;
                    const int ox = num_x / d.stride;
                    if (ox >= d.ow) continue;
                    acc += wc[ky * d.k + kx] * dyc[oy * d.ow + ox];
                }
            }
        }
        dxr[ix] += acc;
    }
}

inline void conv_dw_pair(const double* x, const double* dy, double* dw, const ConvDims& d,
                         int co, int ci) {
    const double* xc = x + static_cast<std::size_t>(ci) * d.h * d.w;
    const double* dyc = dy + static_cast<std::size_t>(co) * d.oh * d.ow;
    double* wgrad = dw + (static_cast<std::size_t>(co) * d.c_in + ci) * d.k * d.k;
    for (int ky = 0; ky < d.k; ++ky)
        for (int kx = 0; kx < d.k; ++kx) {
            double acc = 0.0;
            for (int oy = 0; oy < d.oh; ++oy) {
                const int iy = oy * d.stride - d.pad + ky;
                if (iy < 0 || iy >= d.h) continue;
                for (int ox = 0; ox < d.ow; ++ox) {
                    const int ix = ox * d.stride - d.pad + kx;
                    if (ix < 0 || ix >= d.w) continue;
                    acc += xc[iy * d.w + ix] * dyc[oy * d.ow + ox];
                }
            }
            wgrad[ky * d.k + kx] += acc;
        }
}

inline void conv_db(const double* dy, double* db, const ConvDims& d, int co) {
    const double* dyc = dy + static_cast<std::size_t>(co) * d.oh * d.ow;
    double acc = 0.0;
    for (int i = 0; i < d.oh * d.ow; ++i) acc += dyc[i];
    db[co] += acc;
}

}  // namespace

void conv2d_backward_serial(const double* x, const double* wgt, const double* dy, double* dx,
                            double* dw, double* db, const ConvDims& d) {
    if (dx)
        for (int ci = 0; ci < d.c_in; ++ci)
            for (int iy = 0; iy < d.h; ++iy) conv_dx_row(wgt, dy, dx, d, ci, iy);
    for (int co = 0; co < d.c_out; ++co) {
        for (int ci = 0; ci < d.c_in; ++ci) conv_dw_pair(x, dy, dw, d, co, ci);
        conv_db(dy, db, d, co);
    }
}

void conv2d_backward_omp(const double* x, const double* wgt, const double* dy, double* dx,
                         double* dw, double* db, const ConvDims& d) {
    if (dx) {
        const int rows = d.c_in * d.h;
#pragma omp parallel for schedule(static)
        for (int r = 0; r < rows; ++r) conv_dx_row(wgt, dy, dx, d, r / d.h, r % d.h);
    }
#pragma omp parallel for schedule(static)
    for (int co = 0; co < d.c_out; ++co) {
        for (int ci = 0; ci < d.c_in; ++ci) conv_dw_pair(x, dy, dw, d, co, ci);
        conv_db(dy, db, d, co);
    }
}

namespace {
inline void pool_channel(const double* x, double* y, int* argmax, int c_idx, int h, int w) {
    const int oh = h / 2, ow = w / 2;
    const double* xc = x + static_cast<std::size_t>(c_idx) * h * w;
    double* yc = y + static_cast<std::size_t>(c_idx) * oh * ow;
    int* ac = argmax + static_cast<std::size_t>(c_idx) * oh * ow;
    const std::size_t base = static_cast<std::size_t>(c_idx) * h * w;
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            int best = (2 * oy) * w + 2 * ox;
            double bv = xc[best];
            const int cand[3] = {(2 * oy) * w + 2 * ox + 1, (2 * oy + 1) * w + 2 * ox,
                                 (2 * oy + 1) * w + 2 * ox + 1};
            for (int idx : cand)
                if (xc[idx] > bv) {  // strict: ties keep the earliest index
                    bv = xc[idx];
                    best = idx;
                }
            yc[oy * ow + ox] = bv;
            ac[oy * ow + ox] = static_cast<int>(base) + best;
        }
}
}  // namespace

void maxpool2_forward_serial(const double* x, double* y, int* argmax, int c, int h, int w) {
    for (int ci = 0; ci < c; ++ci) pool_channel(x, y, argmax, ci, h, w);
}

void maxpool2_forward_omp(const double* x, double* y, int* argmax, int c, int h, int w) {
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < c; ++ci) pool_channel(x, y, argmax, ci, h, w);
}

void maxpool2_backward(const double* dy, const int* argmax, double* dx, int c, int oh, int ow) {
    const std::size_t n = static_cast<std::size_t>(c) * oh * ow;
    for (std::size_t i = 0; i < n; ++i) dx[argmax[i]] += dy[i];
}

void relu_forward(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] > 0.0) dx[i] += dy[i];
}

}  // namespace sspose::kernels
