#include "sspose/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sspose/errors.hpp"

namespace sspose {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct Pt {
    double x, y;
};

// Canonical sprites at azimuth 0, roughly unit diameter, none with any
// rotational symmetry.
std::vector<Pt> sprite_polygon(int class_id) {
    switch (class_id) {
        case 1:  // arrow pointing +x
            return {{-0.5, -0.13}, {0.05, -0.13}, {0.05, -0.32}, {0.5, 0.0},
                    {0.05, 0.32},  {0.05, 0.13},  {-0.5, 0.13}};
        case 2:  // scalene wedge
            return {{0.5, 0.0}, {-0.42, 0.36}, {-0.26, -0.18}};
        case 3:  // L glyph
            return {{-0.32, -0.5}, {-0.02, -0.5}, {-0.02, 0.2},
                    {0.42, 0.2},   {0.42, 0.5},   {-0.32, 0.5}};
        default:
            throw DataError("unknown sprite class " + std::to_string(class_id));
    }
}

bool point_in_polygon(const std::vector<Pt>& poly, double x, double y) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > y) != (poly[j].y > y) &&
            x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
            inside = !inside;
    }
    return inside;
}

}  // namespace

const std::vector<std::string>& sprite_class_names() {
    static const std::vector<std::string> names = {"arrow", "wedge", "lglyph"};
    return names;
}

std::vector<double> rasterize_sprite(int class_id, double azimuth_deg, double scale_px, double cx_px,
                                     double cy_px, int res) {
    const double th = azimuth_deg * kPi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    std::vector<Pt> poly;
    double xmin = 1e30, xmax = -1e30, ymin = 1e30, ymax = -1e30;
    for (const Pt& p : sprite_polygon(class_id)) {
        const Pt q{cx_px + scale_px * (p.x * c - p.y * s), cy_px + scale_px * (p.x * s + p.y * c)};
        poly.push_back(q);
        xmin = std::min(xmin, q.x);
        xmax = std::max(xmax, q.x);
        ymin = std::min(ymin, q.y);
        ymax = std::max(ymax, q.y);
    }
    std::vector<double> cov(std::size_t(res) * res, 0.0);
    const int px0 = std::max(0, int(std::floor(xmin)) - 1);
    const int px1 = std::min(res - 1, int(std::ceil(xmax)) + 1);
    const int py0 = std::max(0, int(std::floor(ymin)) - 1);
    const int py1 = std::min(res - 1, int(std::ceil(ymax)) + 1);
    constexpr int ss = 4;  // 4x4 supersampling
    for (int py = py0; py <= py1; ++py)
        for (int px = px0; px <= px1; ++px) {
            int hits = 0;
            for (int sy = 0; sy < ss; ++sy)
                for (int sx = 0; sx < ss; ++sx)
                    if (point_in_polygon(poly, px + (sx + 0.5) / ss, py + (sy + 0.5) / ss)) ++hits;
            cov[std::size_t(py) * res + px] = double(hits) / (ss * ss);
        }
    return cov;
}

namespace {

// Tight normalized box around nonzero coverage; invalid box if empty.
BoxGeom coverage_box(const std::vector<double>& cov, int res) {
    int xmin = res, xmax = -1, ymin = res, ymax = -1;
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x)
            if (cov[std::size_t(y) * res + x] > 0.0) {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
    if (xmax < 0) return {};
    return BoxGeom::from_corners(double(xmin) / res, double(ymin) / res, double(xmax + 1) / res,
                                 double(ymax + 1) / res);
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, std::uint64_t image_index) {
    std::mt19937_64 rng(splitmix64(spec.seed) ^ splitmix64(image_index + 0x51ED270B7A14C5ULL));
    const int res = spec.resolution;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Scene scene;
    scene.image = Image(res, res);
    for (auto& v : scene.image.pixels) v = unit(rng) * spec.noise_level;

    const int target =
        std::uniform_int_distribution<int>(spec.min_objects, spec.max_objects)(rng);
    for (int i = 0; i < target; ++i) {
        bool placed = false;
        for (int trial = 0; trial < 100 && !placed; ++trial) {
            const int cls = std::uniform_int_distribution<int>(1, kNumSpriteClasses)(rng);
            const double azimuth = unit(rng) * 360.0;
            const double scale =
                (spec.min_scale + unit(rng) * (spec.max_scale - spec.min_scale)) * res;
            const double margin = 0.55 * scale;
            const double cx = margin + unit(rng) * (res - 2 * margin);
            const double cy = margin + unit(rng) * (res - 2 * margin);

            auto cov = rasterize_sprite(cls, azimuth, scale, cx, cy, res);
            const BoxGeom box = coverage_box(cov, res);
            if (!box.valid()) continue;
            bool overlaps = false;
            for (const auto& prev : scene.objects)
                if (iou(box, prev.gt.box) > 0.3) {
                    overlaps = true;
                    break;
                }
            if (overlaps) continue;

            for (int p = 0; p < res * res; ++p)
                scene.image.pixels[p] = scene.image.pixels[p] * (1.0 - cov[p]) + 1.0 * cov[p];
            scene.objects.push_back({{cls, box, normalize_azimuth(azimuth)}, std::move(cov)});
            placed = true;
        }
        // unplaceable object is dropped
    }
    return scene;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write manifest: " + path);
    f.precision(10);
    for (const auto& e : entries)
        for (const auto& o : e.objects)
            f << e.filename << " " << o.class_id << " " << o.box.xmin() << " " << o.box.ymin()
              << " " << o.box.xmax() << " " << o.box.ymax() << " " << o.azimuth_deg << "\n";
    if (!f) throw DataError("manifest write failed: " + path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open manifest: " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string fname;
        int cls;
        double xmin, ymin, xmax, ymax, azimuth;
        if (!(is >> fname >> cls >> xmin >> ymin >> xmax >> ymax >> azimuth))
            throw DataError("malformed manifest line " + std::to_string(lineno) + " in " + path);
        if (xmin >= xmax || ymin >= ymax)
            throw DataError("degenerate box at manifest line " + std::to_string(lineno));
        if (entries.empty() || entries.back().filename != fname)
            entries.push_back({fname, {}});
        entries.back().objects.push_back(
            {cls, BoxGeom::from_corners(xmin, ymin, xmax, ymax), normalize_azimuth(azimuth)});
    }
    return entries;
}

std::vector<ManifestEntry> generate_dataset(const SceneSpec& spec, int count,
                                            const std::string& out_dir) {
    if (count < 1) throw ConfigError("dataset count must be >= 1");
    std::filesystem::create_directories(out_dir);
    std::vector<ManifestEntry> entries;
    for (int i = 0; i < count; ++i) {
        Scene scene = generate_scene(spec, i);
        char name[32];
        std::snprintf(name, sizeof(name), "img_%06d.pgm", i);
        write_pgm(scene.image, out_dir + "/" + name);
        entries.push_back({name, scene.gts()});
    }
    write_manifest(entries, out_dir + "/manifest.txt");
    return entries;
}

}  // namespace sspose
