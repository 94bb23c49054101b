#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "seapose/geometry.hpp"
#include "seapose/metrics.hpp"
#include "seapose/scene.hpp"
#include "seapose/util.hpp"

namespace seapose::testing {

inline RigidTransform random_transform(Rng& rng, double max_translation = 5.0) {
    return RigidTransform(rng.uniform_quaternion(),
                          Vec3(rng.uniform(-max_translation, max_translation),
                               rng.uniform(-max_translation, max_translation),
                               rng.uniform(-max_translation, max_translation)));
}

inline double translation_distance(const RigidTransform& a, const RigidTransform& b) {
    return (a.translation - b.translation).norm();
}

inline double rotation_distance(const RigidTransform& a, const RigidTransform& b) {
    return rotation_angle_between(a.rotation, b.rotation);
}

/// Fresh scratch directory under the build tree for file-format tests.
inline std::string scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "seapose_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

constexpr double kDeg = M_PI / 180.0;

// Brute-force reference renderer: cast a ray through every pixel center and
// intersect it with every triangle (Moller-Trumbore), keep the closest hit.
inline DepthMap raytrace_distance_map(const ReferenceModel& model, const RigidTransform& pose,
                                      const CameraIntrinsics& K) {
    DepthMap dm;
    dm.width = K.width;
    dm.height = K.height;
    dm.depth.assign(static_cast<std::size_t>(K.width) * K.height, 0.0);

    std::vector<Vec3> cam(model.vertices.size());
    for (std::size_t i = 0; i < model.vertices.size(); ++i) cam[i] = pose.apply(model.vertices[i]);

    for (int py = 0; py < K.height; ++py) {
        for (int px = 0; px < K.width; ++px) {
            Vec3 dir((px - K.principal_point.x()) / K.focal,
                     (py - K.principal_point.y()) / K.focal, 1.0);
            double dir_norm = dir.norm();
            double best = std::numeric_limits<double>::max();
            for (const auto& tri : model.triangles) {
                const Vec3 &a = cam[tri[0]], &b = cam[tri[1]], &c = cam[tri[2]];
                if (a.z() <= 1e-9 || b.z() <= 1e-9 || c.z() <= 1e-9) continue;
                Vec3 e1 = b - a, e2 = c - a;
                Vec3 pvec = dir.cross(e2);
                double det = e1.dot(pvec);
                if (std::abs(det) < 1e-14) continue;
                Vec3 tvec = -a;  // ray origin is the camera center
                double u = tvec.dot(pvec) / det;
                if (u < -1e-9 || u > 1.0 + 1e-9) continue;
                Vec3 qvec = tvec.cross(e1);
                double v = dir.dot(qvec) / det;
                if (v < -1e-9 || u + v > 1.0 + 1e-9) continue;
                double t = e2.dot(qvec) / det;
                if (t <= 0.0) continue;
                best = std::min(best, t * dir_norm);
            }
            if (best < std::numeric_limits<double>::max()) {
                dm.depth[static_cast<std::size_t>(py) * K.width + px] = best;
            }
        }
    }
    return dm;
}

// independent MSSD/MSPD oracle on 4x4 matrices, plain double loop
inline std::pair<double, double> mssd_mspd_oracle(const RigidTransform& est,
                                                  const RigidTransform& gt,
                                                  const ReferenceModel& model,
                                                  const CameraIntrinsics& K) {
    double best_3d = std::numeric_limits<double>::max();
    double best_2d = std::numeric_limits<double>::max();
    Mat4 est_m = est.matrix();
    for (const auto& sym : expand_symmetries(model.symmetries)) {
        Mat4 gts = gt.matrix() * sym.matrix();
        double worst_3d = 0.0, worst_2d = 0.0;
        for (const auto& v : model.vertices) {
            Eigen::Vector4d vh(v.x(), v.y(), v.z(), 1.0);
            Eigen::Vector4d pe = est_m * vh;
            Eigen::Vector4d pg = gts * vh;
            worst_3d = std::max(worst_3d, (pe.head<3>() - pg.head<3>()).norm());
            Vec2 ue(K.focal * pe.x() / pe.z() + K.principal_point.x(),
                    K.focal * pe.y() / pe.z() + K.principal_point.y());
            Vec2 ug(K.focal * pg.x() / pg.z() + K.principal_point.x(),
                    K.focal * pg.y() / pg.z() + K.principal_point.y());
            worst_2d = std::max(worst_2d, (ue - ug).norm());
        }
        best_3d = std::min(best_3d, worst_3d);
        best_2d = std::min(best_2d, worst_2d);
    }
    return {best_3d, best_2d};
}

// centered=false: triangles already inside the camera frustum (for raster
// tests at identity pose); centered=true: compact soup around the origin
// meant to be posed explicitly.
inline ReferenceModel random_triangle_soup(Rng& rng, int n_triangles, bool centered = false) {
    ReferenceModel m;
    m.name = "soup";
    for (int t = 0; t < n_triangles; ++t) {
        Vec3 center = centered ? Vec3(rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25),
                                      rng.uniform(-0.25, 0.25))
                               : Vec3(rng.uniform(-0.6, 0.6), rng.uniform(-0.45, 0.45),
                                      rng.uniform(1.5, 3.0));
        double spread = centered ? 0.25 : 0.4;
        for (int v = 0; v < 3; ++v) {
            m.vertices.push_back(center + Vec3(rng.uniform(-spread, spread),
                                               rng.uniform(-spread, spread),
                                               rng.uniform(-spread, spread)));
        }
        m.triangles.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    }
    m.diameter = mesh_diameter(m.vertices);
    return m;
}

inline CameraIntrinsics small_camera() {
    CameraIntrinsics k;
    k.focal = 120.0;
    k.principal_point = Vec2(64.0, 48.0);
    k.width = 128;
    k.height = 96;
    return k;
}

}  // namespace seapose::testing
