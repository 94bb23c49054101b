#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seapose/scene.hpp"

namespace seapose {

/// Plane {p : normal . p = offset} with unit normal. The positive side is
/// "up"; orient_toward picks the sign so a reference point (typically the
/// mean camera position) lies above.
struct Plane {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
    Plane flipped() const { return {-normal, -offset}; }
};

Plane orient_toward(const Plane& plane, const Vec3& above);

/// RANSAC plane fit: 3-point minimal samples, point-plane inlier distance,
/// total-least-squares refinement over the winning inlier set. Deterministic
/// per seed. With no up_hint the sign is fixed by a lexicographic gauge on
/// the normal.
Plane fit_plane_ransac(const std::vector<Vec3>& floor_points, double inlier_dist, int iterations,
                       std::uint64_t seed, const std::optional<Vec3>& up_hint = std::nullopt);

/// World -> floor transform: the plane maps to z=0 with the normal along +z.
/// The in-plane gauge aligns the projection of the world x-axis with floor x
/// (falling back to world y when x is parallel to the normal).
RigidTransform floor_frame(const Plane& plane);

struct BurialResult {
    double depth = 0.0;            // meters below the plane, >= 0
    double oriented_height = 0.0;  // z extent of the posed model in the floor frame
    double depth_ratio = 0.0;      // depth / oriented_height, clamped to [0, 1]
    double z_bot = 0.0;            // lowest vertex z in the floor frame
    RigidTransform floor_to_world;
};

/// Poses the model, re-gauges to the floor frame, and reads burial depth off
/// the lowest vertex. Vertex minima are exact for a triangle mesh: z is
/// linear over each face, so face interiors never undercut their corners.
BurialResult burial_depth(const ReferenceModel& model, const RigidTransform& object_pose,
                          const Plane& plane);

}  // namespace seapose
