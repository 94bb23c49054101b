#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "seapose/scene.hpp"
#include "seapose/seafloor.hpp"

namespace seapose {

struct SynthConfig {
    std::uint64_t seed = 0;
    int n_cameras = 6;
    double arc_degrees = 200.0;     // camera trajectory coverage
    double camera_distance = 3.0;   // meters, nominal stand-off
    double true_scale = 2.0;        // meters per stored reconstruction unit
    double burial_fraction = 0.3;   // [0, 1) of oriented height below the plane
    double hyp_rot_noise = 0.0;     // radians, hypothesis rotation sigma
    double hyp_trans_noise = 0.0;   // meters, hypothesis translation sigma
    double outlier_fraction = 0.0;  // [0, 1) of hypotheses replaced by random poses
    double cloud_noise = 0.0;       // meters, per-axis Gaussian on cloud points
    double cloud_density = 2500.0;  // points per square meter
    double floor_tilt = 0.0;        // radians between plane normal and world z
    bool upright = false;           // keep the model +z up instead of a random orientation
    bool unlabeled_cloud = false;   // write label 0 everywhere to force mask segmentation
};

struct GroundTruth {
    RigidTransform object_pose;  // metric world frame
    Plane plane;                 // metric world frame, normal up
    double scale = 1.0;          // the factor the pipeline must recover
    BurialResult burial;
    std::map<std::string, RigidTransform> true_hypotheses;  // camera id -> object in camera
    double lat = 0.0;
    double lon = 0.0;
};

/// Generates a fully ground-truthed scene: posed object, tilted seafloor,
/// cameras on an arc, surface-sampled clouds with the buried part removed,
/// silhouette masks, noisy pose hypotheses, and the whole reconstruction
/// stored at 1/true_scale. Deterministic per seed.
std::pair<SceneInput, GroundTruth> generate_scene(const ReferenceModel& model,
                                                  const SynthConfig& cfg);

void save_ground_truth(const GroundTruth& gt, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

/// Writes scene files plus gt.json into dir.
void save_synth_scene(const SceneInput& scene, const GroundTruth& gt, const std::string& dir);

}  // namespace seapose
