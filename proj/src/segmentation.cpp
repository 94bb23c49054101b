#include "seapose/segmentation.hpp"

#include <cmath>

namespace seapose {

LabeledPointCloud segment_cloud(const LabeledPointCloud& cloud,
                                const std::vector<CameraView>& views,
                                const SegmentationParams& params) {
    if (cloud.points.empty()) {
        throw Error(ErrorCode::EmptyCloud, "cannot segment an empty cloud");
    }

    struct MaskedView {
        RigidTransform world_to_cam;
        CameraIntrinsics intrinsics;
        const BinaryMask* mask;
    };
    std::vector<MaskedView> masked;
    for (const auto& view : views) {
        if (!view.mask) continue;
        masked.push_back({view.world_pose.inverse(), view.intrinsics, &*view.mask});
    }
    if (masked.empty()) {
        throw Error(ErrorCode::NoMaskedViews, "no view carries a mask");
    }

    int min_hits = params.min_mask_hits;
    if (min_hits <= 0) {
        min_hits = static_cast<int>(std::ceil(0.5 * static_cast<double>(masked.size())));
        if (min_hits < 1) min_hits = 1;
    }

    LabeledPointCloud out;
    out.points = cloud.points;
    out.labels.resize(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        int hits = 0;
        for (const auto& mv : masked) {
            Vec3 p_cam = mv.world_to_cam.apply(cloud.points[i]);
            if (p_cam.z() <= 0.0) continue;
            double u = mv.intrinsics.focal * p_cam.x() / p_cam.z() + mv.intrinsics.principal_point.x();
            double v = mv.intrinsics.focal * p_cam.y() / p_cam.z() + mv.intrinsics.principal_point.y();
            int px = static_cast<int>(std::lround(u));
            int py = static_cast<int>(std::lround(v));
            if (px < 0 || px >= mv.mask->width || py < 0 || py >= mv.mask->height) continue;
            if (mv.mask->at(px, py)) ++hits;
        }
        out.labels[i] = hits >= min_hits ? PointLabel::Object : PointLabel::Floor;
    }
    return out;
}

}  // namespace seapose
