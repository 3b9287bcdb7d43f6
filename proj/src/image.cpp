#include "sspose/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "sspose/errors.hpp"

namespace sspose {

void write_pgm(const Image& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for write: " + path);
    f << "P5\n" << img.width << " " << img.height << "\n65535\n";
    for (double v : img.pixels) {
        const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
        const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                        static_cast<unsigned char>(q & 0xff)};
        f.write(reinterpret_cast<const char*>(bytes), 2);
    }
    if (!f) throw DataError("write failed: " + path);
}

Image read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open: " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    f >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || h <= 0 || maxval != 65535)
        throw DataError("unsupported PGM (want P5/65535): " + path);
    f.get();  // single whitespace after header
    Image img(w, h);
    for (auto& v : img.pixels) {
        unsigned char b[2];
        f.read(reinterpret_cast<char*>(b), 2);
        v = ((b[0] << 8) | b[1]) / 65535.0;
    }
    if (!f) throw DataError("truncated PGM: " + path);
    return img;
}

Image crop_and_resize(const Image& src, const BoxGeom& rect, int out_w, int out_h) {
    Image out(out_w, out_h);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            const double u = rect.xmin() + (x + 0.5) / out_w * rect.w;
            const double v = rect.ymin() + (y + 0.5) / out_h * rect.h;
            const double fx = u * src.width - 0.5, fy = v * src.height - 0.5;
            const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
            const double ax = fx - x0, ay = fy - y0;
            auto sample = [&](int sx, int sy) {
                sx = std::clamp(sx, 0, src.width - 1);
                sy = std::clamp(sy, 0, src.height - 1);
                return src.at(sx, sy);
            };
            out.at(x, y) = (1 - ax) * (1 - ay) * sample(x0, y0) + ax * (1 - ay) * sample(x0 + 1, y0) +
                           (1 - ax) * ay * sample(x0, y0 + 1) + ax * ay * sample(x0 + 1, y0 + 1);
        }
    return out;
}

}  // namespace sspose
