#pragma once

#include <random>

#include "sspose/image.hpp"
#include "sspose/matching.hpp"

namespace sspose {

struct PatchSample {
    Image image;
    std::vector<GroundTruthObject> gts;
    BoxGeom crop;         // in source-image normalized coords
    bool whole_image = false;
};

// Pose-aware patch sampler: uniformly picks whole image or a random crop
// required to reach IoU >= 0.7 / 0.9 with some gt. A crop keeps the gts
// whose centers fall inside it, clipped and renormalized; azimuths are
// untouched. 50 failed crop trials fall back to the whole image.
PatchSample sample_patch(const Image& image, const std::vector<GroundTruthObject>& gts,
                         std::mt19937_64& rng, int out_w, int out_h);

// Coordinate remap used by the sampler, exposed for direct testing.
std::vector<GroundTruthObject> remap_gts_to_crop(const std::vector<GroundTruthObject>& gts,
                                                 const BoxGeom& crop);

}  // namespace sspose
