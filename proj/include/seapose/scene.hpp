#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seapose/geometry.hpp"

namespace seapose {

enum class PointLabel : int {
    Unlabeled = 0,
    Object = 1,
    Floor = 2,
};

struct LabeledPointCloud {
    std::vector<Vec3> points;
    std::vector<PointLabel> labels;  // always same length as points

    std::size_t size() const { return points.size(); }
    bool has_object_labels() const;
    std::vector<Vec3> points_with_label(PointLabel label) const;
};

struct SymmetryAxis {
    Vec3 dir{0.0, 0.0, 1.0};
    int k = 2;  // discretization count, >= 2
};

/// Rotations that leave the object's shape indistinguishable: a list of
/// discrete rotation-only transforms plus continuous axes discretized to k
/// steps each.
struct SymmetrySet {
    std::vector<RigidTransform> discrete;
    std::vector<SymmetryAxis> axes;

    bool empty() const { return discrete.empty() && axes.empty(); }
};

struct ReferenceModel {
    std::string name;
    std::vector<Vec3> vertices;                 // meters
    std::vector<std::array<int, 3>> triangles;  // indices into vertices
    SymmetrySet symmetries;
    double diameter = 0.0;  // max pairwise vertex distance, set on load
};

/// Row-major boolean image; nonzero = object pixel.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    bool at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { values[static_cast<std::size_t>(y) * width + x] = v ? 255 : 0; }
};

struct CameraView {
    std::string id;
    CameraIntrinsics intrinsics;
    RigidTransform world_pose;                // camera-to-world, reconstruction units
    std::vector<RigidTransform> hypotheses;   // object-in-camera-frame, metric
    std::string mask_path;                    // empty when the view has no mask
    std::optional<BinaryMask> mask;
};

struct SceneInput {
    bool metric = false;  // true once translations/cloud are in meters
    std::vector<CameraView> cameras;
    LabeledPointCloud cloud;
    ReferenceModel model;
};

/// Brute-force max pairwise vertex distance.
double mesh_diameter(const std::vector<Vec3>& vertices);

double mesh_surface_area(const ReferenceModel& model);

/// Checks triangle index ranges, non-empty triangle list, etc. Throws
/// ValidationError.
void validate_model(const ReferenceModel& model);

/// Area-weighted uniform surface sampling, deterministic per seed. Throws
/// ValidationError for a degenerate (zero total area) mesh.
std::vector<Vec3> sample_surface(const ReferenceModel& model, int n, std::uint64_t seed);

/// Discrete members plus rotations by 2*pi*m/k about each axis. Identity is
/// always first, so index order breaks ties toward "no correction".
std::vector<RigidTransform> expand_symmetries(const SymmetrySet& s);

}  // namespace seapose
