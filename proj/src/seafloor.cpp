#include "seapose/seafloor.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "seapose/util.hpp"

namespace seapose {

Plane orient_toward(const Plane& plane, const Vec3& above) {
    return plane.signed_distance(above) < 0.0 ? plane.flipped() : plane;
}

namespace {

Plane gauge_sign(const Plane& plane) {
    const Vec3& n = plane.normal;
    double lead = n.z();
    if (lead == 0.0) lead = n.y();
    if (lead == 0.0) lead = n.x();
    return lead < 0.0 ? plane.flipped() : plane;
}

bool points_collinear(const std::vector<Vec3>& pts) {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    const auto& ev = solver.eigenvalues();  // ascending
    return ev(1) <= 1e-12 * std::max(ev(2), 1e-300);
}

Plane tls_fit(const std::vector<Vec3>& pts) {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    Vec3 normal = solver.eigenvectors().col(0);  // smallest eigenvalue
    normal.normalize();
    return {normal, normal.dot(mean)};
}

}  // namespace

Plane fit_plane_ransac(const std::vector<Vec3>& floor_points, double inlier_dist, int iterations,
                       std::uint64_t seed, const std::optional<Vec3>& up_hint) {
    if (floor_points.size() < 3) {
        throw Error(ErrorCode::DegenerateGeometry, "plane fit needs at least 3 points");
    }
    if (inlier_dist <= 0.0) {
        throw Error(ErrorCode::ValidationError, "inlier distance must be positive");
    }

    const Rng base(seed);
    const int n = static_cast<int>(floor_points.size());
    std::vector<int> best_inliers;
    double best_residual = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < iterations; ++iter) {
        Rng rng = base.split(static_cast<std::uint64_t>(iter));
        int a = rng.uniform_int(n);
        int b = rng.uniform_int(n);
        int c = rng.uniform_int(n);
        if (a == b || a == c || b == c) continue;
        Vec3 e1 = floor_points[b] - floor_points[a];
        Vec3 e2 = floor_points[c] - floor_points[a];
        Vec3 cross = e1.cross(e2);
        if (cross.norm() <= 1e-12 * std::max(1.0, e1.norm() * e2.norm())) continue;
        Vec3 normal = cross.normalized();
        double offset = normal.dot(floor_points[a]);

        std::vector<int> inliers;
        double residual = 0.0;
        for (int k = 0; k < n; ++k) {
            double d = std::abs(normal.dot(floor_points[k]) - offset);
            if (d <= inlier_dist) {
                inliers.push_back(k);
                residual += d * d;
            }
        }
        if (inliers.size() > best_inliers.size() ||
            (inliers.size() == best_inliers.size() && residual < best_residual)) {
            best_inliers = std::move(inliers);
            best_residual = residual;
        }
    }

    if (best_inliers.size() < 3) {
        if (points_collinear(floor_points)) {
            throw Error(ErrorCode::DegenerateGeometry, "floor points are collinear");
        }
        throw Error(ErrorCode::NoConsensus, "no plane hypothesis gathered enough inliers");
    }

    std::vector<Vec3> inlier_points;
    inlier_points.reserve(best_inliers.size());
    for (int k : best_inliers) inlier_points.push_back(floor_points[k]);
    Plane plane = tls_fit(inlier_points);
    return up_hint ? orient_toward(plane, *up_hint) : gauge_sign(plane);
}

RigidTransform floor_frame(const Plane& plane) {
    const Vec3 z_axis = plane.normal.normalized();
    Vec3 x_ref = Vec3::UnitX();
    if (std::abs(x_ref.dot(z_axis)) > 1.0 - 1e-9) x_ref = Vec3::UnitY();
    Vec3 x_axis = (x_ref - x_ref.dot(z_axis) * z_axis).normalized();
    Vec3 y_axis = z_axis.cross(x_axis);

    Mat3 floor_to_world;
    floor_to_world.col(0) = x_axis;
    floor_to_world.col(1) = y_axis;
    floor_to_world.col(2) = z_axis;

    Mat3 world_to_floor = floor_to_world.transpose();
    Vec3 plane_origin = plane.offset * z_axis;  // closest plane point to the world origin
    return RigidTransform(Quat(world_to_floor), world_to_floor * (-plane_origin));
}

BurialResult burial_depth(const ReferenceModel& model, const RigidTransform& object_pose,
                          const Plane& plane) {
    RigidTransform to_floor = compose(floor_frame(plane), object_pose);
    double z_min = std::numeric_limits<double>::infinity();
    double z_max = -std::numeric_limits<double>::infinity();
    for (const auto& v : model.vertices) {
        double z = to_floor.apply(v).z();
        z_min = std::min(z_min, z);
        z_max = std::max(z_max, z);
    }
    BurialResult out;
    out.z_bot = z_min;
    out.depth = std::max(0.0, -z_min);
    out.oriented_height = z_max - z_min;
    out.depth_ratio =
        out.oriented_height > 0.0 ? std::min(1.0, out.depth / out.oriented_height) : 0.0;
    out.floor_to_world = floor_frame(plane).inverse();
    return out;
}

}  // namespace seapose
