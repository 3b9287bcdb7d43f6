#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sspose/image.hpp"
#include "sspose/matching.hpp"

namespace sspose {

// Three rotationally-unambiguous sprite classes (1-based ids):
//   1 arrow, 2 wedge, 3 L-glyph.
inline constexpr int kNumSpriteClasses = 3;
const std::vector<std::string>& sprite_class_names();

struct SceneSpec {
    int resolution = 64;
    int min_objects = 1, max_objects = 4;
    double min_scale = 0.25, max_scale = 0.5;  // sprite diameter, fraction of canvas
    double noise_level = 0.25;                 // background uniform [0, noise_level]
    std::uint64_t seed = 1;
};

struct SceneObject {
    GroundTruthObject gt;
    std::vector<double> coverage;  // this sprite's own alpha mask, full canvas
};

struct Scene {
    Image image;
    std::vector<SceneObject> objects;

    std::vector<GroundTruthObject> gts() const {
        std::vector<GroundTruthObject> out;
        for (const auto& o : objects) out.push_back(o.gt);
        return out;
    }
};

// Deterministic: image i depends only on (spec.seed, i), so generation
// order or parallelism never changes output.
Scene generate_scene(const SceneSpec& spec, std::uint64_t image_index);

// Sprite polygon for a class at a given azimuth/scale/center, rasterized
// with 4x4 supersampling; returned as an alpha mask on a res x res canvas.
std::vector<double> rasterize_sprite(int class_id, double azimuth_deg, double scale_px, double cx_px,
                                     double cy_px, int res);

struct ManifestEntry {
    std::string filename;
    std::vector<GroundTruthObject> objects;
};

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// Renders `count` scenes into out_dir as PGMs plus manifest.txt.
std::vector<ManifestEntry> generate_dataset(const SceneSpec& spec, int count,
                                            const std::string& out_dir);

}  // namespace sspose
