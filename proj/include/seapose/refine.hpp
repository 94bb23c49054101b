#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seapose/scene.hpp"

namespace seapose {

struct IcpParams {
    int max_iterations = 50;
    double rel_change_tol = 1e-6;
    double outlier_std_mult = 2.0;  // correspondences beyond mean + t*std are dropped
};

struct IcpResult {
    RigidTransform pose;
    double final_mse = 0.0;
    int iterations = 0;
    std::vector<double> mse_history;  // post-filter MSE after each iteration
};

/// Point-to-point ICP aligning the posed model samples with the object
/// cloud, starting from init. Each iteration registers every cloud point to
/// its exact nearest model sample (cloud -> model, so the buried model
/// surface attracts no correspondences), drops cloud points farther than
/// mean + t*std of the registration distances, and solves the rigid
/// least-squares update. Terminates on max_iterations or relative MSE change
/// below rel_change_tol.
IcpResult icp_refine(const std::vector<Vec3>& model_samples, const RigidTransform& init,
                     const std::vector<Vec3>& object_cloud, const IcpParams& params = {});

/// Rigid least squares: the pose minimizing sum ||T(source[k]) - target[k]||^2
/// (Kabsch/SVD). Sizes must match and be >= 3 for a well-posed rotation.
RigidTransform rigid_least_squares(const std::vector<Vec3>& source,
                                   const std::vector<Vec3>& target);

/// Replaces q by q composed with the symmetry member that brings it closest
/// to the reference; ties break toward the lowest member index (identity
/// first).
Quat symmetry_align(const Quat& reference, const Quat& q, const SymmetrySet& symmetries);

/// Markley mean: principal eigenvector of the weighted outer-product matrix,
/// sign-normalized. Throws DegenerateAverage when the top two eigenvalues
/// coincide (ambiguous mean).
Quat average_quaternions(const std::vector<Quat>& qs, const std::vector<double>& weights = {});

struct RefinedPose {
    std::string camera_id;
    int hypothesis = 0;
    RigidTransform pose;  // object in world, meters
};

enum class FuseReference {
    FirstPose,  // the first refined pose anchors symmetry alignment
    Medoid,     // symmetry-aware rotation medoid anchors instead
};

struct FusedPose {
    RigidTransform pose;
    std::vector<std::pair<std::string, int>> inlier_ids;
    std::map<std::string, RigidTransform> per_view_pose;  // camera id -> object in that camera
};

/// Symmetry-corrected robust fusion: every rotation is aligned to the
/// reference, each pose proposes itself as a consensus candidate, and the
/// largest set within rot_inlier / trans_inlier of a candidate wins. The
/// fused rotation is the quaternion average of the inliers; the translation
/// is their arithmetic mean. Throws NoConsensus when >= 2 poses exist but no
/// candidate gathers two inliers.
FusedPose fuse_poses(const std::vector<RefinedPose>& refined, const SymmetrySet& symmetries,
                     double rot_inlier, double trans_inlier, std::uint64_t seed,
                     FuseReference reference = FuseReference::FirstPose);

}  // namespace seapose
