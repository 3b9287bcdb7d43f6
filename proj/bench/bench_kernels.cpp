// Serial vs OpenMP conv kernel comparison on detector-sized workloads.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "sspose/kernels.hpp"

using namespace sspose::kernels;
using Clock = std::chrono::steady_clock;

namespace {

struct Case {
    const char* name;
    ConvDims d;
};

double run_forward(const Case& c, bool omp, int iters) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    const ConvDims& d = c.d;
    std::vector<double> x(std::size_t(d.c_in) * d.h * d.w), w(std::size_t(d.c_out) * d.c_in * d.k * d.k),
        b(d.c_out), y(std::size_t(d.c_out) * d.oh * d.ow);
    for (auto& v : x) v = dist(rng);
    for (auto& v : w) v = dist(rng);
    const auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i)
        omp ? conv2d_forward_omp(x.data(), w.data(), b.data(), y.data(), d)
            : conv2d_forward_serial(x.data(), w.data(), b.data(), y.data(), d);
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / iters;
}

double run_backward(const Case& c, bool omp, int iters) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    const ConvDims& d = c.d;
    std::vector<double> x(std::size_t(d.c_in) * d.h * d.w), w(std::size_t(d.c_out) * d.c_in * d.k * d.k),
        dy(std::size_t(d.c_out) * d.oh * d.ow);
    std::vector<double> dx(x.size()), dw(w.size()), db(d.c_out);
    for (auto& v : x) v = dist(rng);
    for (auto& v : w) v = dist(rng);
    for (auto& v : dy) v = dist(rng);
    const auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i)
        omp ? conv2d_backward_omp(x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data(), d)
            : conv2d_backward_serial(x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data(), d);
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / iters;
}

ConvDims dims(int ci, int h, int co, int k, int pad) {
    return {ci, h, h, co, k, 1, pad, h + 2 * pad - k + 1, h + 2 * pad - k + 1};
}

}  // namespace

int main() {
    const Case cases[] = {
        {"bb1 12->24 @32", dims(12, 32, 24, 3, 1)},
        {"bb2 24->32 @16", dims(24, 16, 32, 3, 1)},
        {"bb3 32->48 @8", dims(32, 8, 48, 3, 1)},
        {"head 48->48 @8", dims(48, 8, 48, 3, 1)},
    };
    std::printf("%-18s %12s %12s %8s\n", "case", "serial(ms)", "omp(ms)", "speedup");
    for (const Case& c : cases) {
        const int iters = 50;
        const double fs = run_forward(c, false, iters), fo = run_forward(c, true, iters);
        std::printf("%-18s %12.4f %12.4f %7.2fx  (forward)\n", c.name, fs, fo, fs / fo);
        const double bs = run_backward(c, false, iters), bo = run_backward(c, true, iters);
        std::printf("%-18s %12.4f %12.4f %7.2fx  (backward)\n", c.name, bs, bo, bs / bo);
    }
    return 0;
}
