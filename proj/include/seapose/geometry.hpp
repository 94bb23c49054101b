#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "seapose/errors.hpp"

namespace seapose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// Rigid-body pose in SE(3): rotation applied first, then translation.
/// Stored as unit quaternion (w,x,y,z) plus translation; the quaternion is
/// renormalized by every constructor and composition.
struct RigidTransform {
    Quat rotation{1.0, 0.0, 0.0, 0.0};
    Vec3 translation{0.0, 0.0, 0.0};

    RigidTransform() = default;

    // renormalize only on real drift so composing with identity is bit-exact
    RigidTransform(const Quat& q, const Vec3& t) : rotation(q), translation(t) {
        if (std::abs(rotation.squaredNorm() - 1.0) > 1e-12) rotation.normalize();
    }

    static RigidTransform identity() { return RigidTransform(); }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform inverse() const {
        Quat qi = rotation.conjugate();
        return RigidTransform(qi, qi * (-translation));
    }

    Mat4 matrix() const {
        Mat4 m = Mat4::Identity();
        m.block<3, 3>(0, 0) = rotation.toRotationMatrix();
        m.block<3, 1>(0, 3) = translation;
        return m;
    }
};

/// a then-applied-after b: result maps p to a(b(p)), i.e. the matrix product
/// T_a * T_b.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return RigidTransform(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
}

/// Pinhole camera with square pixels and zero skew. Pixel centers sit on
/// integer coordinates; the camera looks down +z.
struct CameraIntrinsics {
    double focal = 1.0;
    Vec2 principal_point{0.0, 0.0};
    int width = 1;
    int height = 1;
};

/// Projects a camera-frame point to pixel coordinates. Throws
/// NonPositiveDepth for points at or behind the camera plane; callers must
/// filter those themselves.
inline Vec2 project(const CameraIntrinsics& K, const Vec3& p_cam) {
    if (p_cam.z() <= 0.0) {
        throw Error(ErrorCode::NonPositiveDepth,
                    "cannot project point with z=" + std::to_string(p_cam.z()));
    }
    return Vec2(K.focal * p_cam.x() / p_cam.z() + K.principal_point.x(),
                K.focal * p_cam.y() / p_cam.z() + K.principal_point.y());
}

/// Geodesic angle between two rotations in [0, pi]. Sign-invariant: q and -q
/// are the same rotation.
inline double rotation_angle_between(const Quat& a, const Quat& b) {
    Quat d = a.conjugate() * b;
    return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

inline Quat quat_from_axis_angle(const Vec3& axis, double angle) {
    return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

/// Sign-normalizes so w >= 0; if w == 0, the first nonzero of (x,y,z) is
/// made positive. Keeps serialized quaternions canonical.
inline Quat canonical_sign(const Quat& q) {
    double lead = q.w();
    if (lead == 0.0) lead = q.x();
    if (lead == 0.0) lead = q.y();
    if (lead == 0.0) lead = q.z();
    if (lead < 0.0) return Quat(-q.w(), -q.x(), -q.y(), -q.z());
    return q;
}

}  // namespace seapose
