#pragma once

#include "seapose/scene.hpp"

namespace seapose {

struct SegmentationParams {
    int min_mask_hits = 0;  // <= 0 means the default: ceil(half the masked views)
};

/// Labels each point object iff it projects in front of the camera, inside
/// the image, and onto a true mask pixel in at least min_mask_hits views;
/// every other point becomes floor. Pixel lookup rounds to the nearest pixel
/// center. Throws NoMaskedViews when no view carries a mask.
LabeledPointCloud segment_cloud(const LabeledPointCloud& cloud,
                                const std::vector<CameraView>& views,
                                const SegmentationParams& params = {});

}  // namespace seapose
