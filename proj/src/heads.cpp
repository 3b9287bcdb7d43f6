#include "sspose/heads.hpp"

#include <stdexcept>

namespace sspose {

SlotView PredictionView::slot(std::size_t box, int per_box, Tensor* Layer::*map) const {
    const BoxProvenance& p = defaults->provenance.at(box);
    const Layer& l = layers.at(p.layer);
    const std::size_t cell = static_cast<std::size_t>(l.grid_h) * l.grid_w;
    return {l.*map, static_cast<std::size_t>(p.aspect) * per_box * cell +
                        static_cast<std::size_t>(p.row) * l.grid_w + p.col,
            cell};
}

SlotView PredictionView::cls_slot(std::size_t box) const {
    return slot(box, head.cls_channels(), &Layer::cls);
}
SlotView PredictionView::loc_slot(std::size_t box) const { return slot(box, 4, &Layer::loc); }
SlotView PredictionView::pose_slot(std::size_t box) const {
    return slot(box, head.pose_channels(), &Layer::pose);
}

}  // namespace sspose
