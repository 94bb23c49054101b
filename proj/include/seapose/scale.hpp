#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seapose/scene.hpp"

namespace seapose {

/// One (camera translation, unscaled world-frame object translation) sample.
struct ScaleSample {
    Vec3 t_cam;
    Vec3 t_obj;
};

struct ScaleSolution {
    double s = 1.0;                                        // meters per reconstruction unit
    std::vector<std::pair<std::string, int>> inlier_ids;   // (camera id, hypothesis index)
    double objective = 0.0;                                // variance trace at s over inliers
    std::size_t total_pairs = 0;

    double inlier_fraction() const {
        return total_pairs == 0 ? 0.0
                                : static_cast<double>(inlier_ids.size()) / static_cast<double>(total_pairs);
    }
};

/// World position the object would take if the reconstruction were scaled by
/// s: t_obj + t_cam * (s - 1), with t_obj the translation of
/// world_pose composed with hypothesis j.
Vec3 implied_object_position(const CameraView& view, int hypothesis, double s);

/// Least-squares scale minimizing the variance trace of the implied object
/// positions. Throws DegenerateCameras when all camera translations agree.
double solve_scale_closed_form(const std::vector<ScaleSample>& samples);

/// Variance trace of the implied positions at scale s (the quantity the
/// closed form minimizes).
double scale_objective(const std::vector<ScaleSample>& samples, double s);

/// RANSAC over camera-hypothesis pairs: minimal samples of two pairs from
/// distinct cameras propose a scale, pairs whose implied position lies within
/// inlier_dist of the sample centroid vote for it, and the winner is refit on
/// its inliers. Deterministic per seed.
ScaleSolution solve_scale_ransac(const std::vector<CameraView>& views, double inlier_dist,
                                 int iterations, std::uint64_t seed);

/// Scales camera translations and cloud points by s (rotations and
/// hypotheses untouched) and sets the metric flag.
SceneInput apply_scale(const SceneInput& scene, double s);

}  // namespace seapose
