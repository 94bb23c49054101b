#pragma once

#include <utility>
#include <vector>

#include "seapose/scene.hpp"
#include "seapose/seafloor.hpp"

namespace seapose {

/// Per-pixel distance from the camera center to the visible surface
/// (Euclidean, not z-depth); 0 marks empty pixels, and the set of nonzero
/// pixels doubles as the visibility mask.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> depth;

    double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
    bool covered(int x, int y) const { return at(x, y) > 0.0; }
};

/// Z-buffered rasterization of the posed model (object-in-camera pose) with
/// pixel-center sampling. Triangles touching z <= 0 are skipped rather than
/// clipped; an object fully behind the camera renders an empty map.
DepthMap render_distance_map(const ReferenceModel& model, const RigidTransform& pose,
                             const CameraIntrinsics& K);

/// Visible surface discrepancy: fraction of the union of visibility masks
/// where the two renders disagree beyond tau. Empty union gives 0.
double vsd(const DepthMap& est, const DepthMap& gt, double tau);

/// Maximum symmetry-aware surface distance: min over symmetries of the max
/// vertex displacement between the two posed models, in meters.
double mssd(const RigidTransform& est, const RigidTransform& gt, const ReferenceModel& model);

/// Maximum symmetry-aware projection distance, in pixels. Throws
/// NonPositiveDepth if any vertex lands at or behind the camera plane.
double mspd(const RigidTransform& est, const RigidTransform& gt, const ReferenceModel& model,
            const CameraIntrinsics& K);

struct PoseErrors {
    std::vector<double> vsd;  // one entry per tau in the diameter-relative grid
    double mssd = 0.0;
    double mspd = 0.0;
};

struct RecallReport {
    double ar_vsd = 0.0;
    double ar_mssd = 0.0;
    double ar_mspd = 0.0;
    double mean_depth_error = 0.0;        // filled by burial_error_stats callers
    double mean_depth_ratio_error = 0.0;
};

/// The tau grid VSD errors are evaluated at: 5%..50% of the model diameter.
std::vector<double> vsd_tau_grid(double model_diameter);

/// One pose-error record plus the normalizers its thresholds depend on, so
/// batches may mix object models and camera resolutions.
struct InstanceErrors {
    PoseErrors errors;
    double model_diameter = 0.0;
    double image_width = 0.0;
};

RecallReport average_recall_mixed(const std::vector<InstanceErrors>& instances);

/// Average recall over the standard threshold grids: VSD over tau x theta
/// (10 x 10), MSSD over 5%..50% of the diameter, MSPD over 5r..50r pixels
/// with r = image_width / 640.
RecallReport average_recall(const std::vector<PoseErrors>& errors, double model_diameter,
                            double image_width);

/// Mean absolute depth error and mean absolute depth-ratio error over
/// (predicted, labeled) pairs.
std::pair<double, double> burial_error_stats(
    const std::vector<std::pair<BurialResult, BurialResult>>& pairs);

}  // namespace seapose
