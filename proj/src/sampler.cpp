#include "sspose/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sspose {

std::vector<GroundTruthObject> remap_gts_to_crop(const std::vector<GroundTruthObject>& gts,
                                                 const BoxGeom& crop) {
    std::vector<GroundTruthObject> out;
    for (const auto& gt : gts) {
        if (gt.box.cx < crop.xmin() || gt.box.cx >= crop.xmax() || gt.box.cy < crop.ymin() ||
            gt.box.cy >= crop.ymax())
            continue;
        const double xmin = std::max(gt.box.xmin(), crop.xmin());
        const double ymin = std::max(gt.box.ymin(), crop.ymin());
        const double xmax = std::min(gt.box.xmax(), crop.xmax());
        const double ymax = std::min(gt.box.ymax(), crop.ymax());
        GroundTruthObject mapped = gt;
        mapped.box = BoxGeom::from_corners((xmin - crop.xmin()) / crop.w,
                                           (ymin - crop.ymin()) / crop.h,
                                           (xmax - crop.xmin()) / crop.w,
                                           (ymax - crop.ymin()) / crop.h);
        out.push_back(mapped);
    }
    return out;
}

PatchSample sample_patch(const Image& image, const std::vector<GroundTruthObject>& gts,
                         std::mt19937_64& rng, int out_w, int out_h) {
    if (gts.empty()) throw std::invalid_argument("sample_patch: needs at least one gt");
    const int branch = std::uniform_int_distribution<int>(0, 2)(rng);
    const double min_iou = branch == 1 ? 0.7 : 0.9;

    if (branch != 0) {
        std::uniform_real_distribution<double> side(0.3, 1.0), aspect(0.5, 2.0), unit(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const double s = side(rng), a = std::sqrt(aspect(rng));
            const double w = std::min(1.0, s * a), h = std::min(1.0, s / a);
            const double x0 = unit(rng) * (1.0 - w), y0 = unit(rng) * (1.0 - h);
            const BoxGeom crop = BoxGeom::from_corners(x0, y0, x0 + w, y0 + h);
            bool ok = false;
            for (const auto& gt : gts)
                if (iou(gt.box, crop) >= min_iou) {
                    ok = true;
                    break;
                }
            if (!ok) continue;
            auto remapped = remap_gts_to_crop(gts, crop);
            if (remapped.empty()) continue;
            return {crop_and_resize(image, crop, out_w, out_h), std::move(remapped), crop, false};
        }
    }
    PatchSample whole;
    whole.crop = BoxGeom::from_corners(0, 0, 1, 1);
    whole.image = (image.width == out_w && image.height == out_h)
                      ? image
                      : crop_and_resize(image, whole.crop, out_w, out_h);
    whole.gts = gts;
    whole.whole_image = true;
    return whole;
}

}  // namespace sspose
