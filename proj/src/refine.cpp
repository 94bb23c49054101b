#include "seapose/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "seapose/kdtree.hpp"

namespace seapose {

RigidTransform rigid_least_squares(const std::vector<Vec3>& source,
                                   const std::vector<Vec3>& target) {
    if (source.size() != target.size() || source.empty()) {
        throw Error(ErrorCode::ValidationError, "rigid fit needs matching non-empty point sets");
    }
    Vec3 mean_src = Vec3::Zero();
    Vec3 mean_tgt = Vec3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        mean_src += source[i];
        mean_tgt += target[i];
    }
    mean_src /= static_cast<double>(source.size());
    mean_tgt /= static_cast<double>(source.size());

    Mat3 cross = Mat3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        cross += (source[i] - mean_src) * (target[i] - mean_tgt).transpose();
    }
    Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 v = svd.matrixV();
    Mat3 d = Mat3::Identity();
    if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    Mat3 rot = v * d * u.transpose();
    return RigidTransform(Quat(rot), mean_tgt - rot * mean_src);
}

IcpResult icp_refine(const std::vector<Vec3>& model_samples, const RigidTransform& init,
                     const std::vector<Vec3>& object_cloud, const IcpParams& params) {
    if (object_cloud.empty()) throw Error(ErrorCode::EmptyCloud, "object cloud is empty");
    if (model_samples.empty()) throw Error(ErrorCode::EmptyCloud, "model sample set is empty");
    if (params.max_iterations < 1 || params.rel_change_tol <= 0.0 || params.outlier_std_mult <= 0.0) {
        throw Error(ErrorCode::ValidationError, "bad ICP parameters");
    }

    // correspondences run cloud -> posed model: every cloud point registers
    // to its nearest model sample, so the buried (unobserved) model surface
    // attracts nothing and the trim sheds cloud outliers. Distances are
    // rigid-invariant, which lets the tree over the model samples stay fixed
    // while the cloud is pulled into the model frame each iteration.
    KdTree3 tree(model_samples);
    IcpResult result;
    result.pose = init;

    const std::size_t n = object_cloud.size();
    std::vector<int> nn(n);
    std::vector<double> dist(n);
    std::vector<Vec3> kept_src;
    std::vector<Vec3> kept_tgt;
    double prev_mse = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        RigidTransform world_to_model = result.pose.inverse();
        double mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            auto [idx, d_sq] = tree.nearest(world_to_model.apply(object_cloud[k]));
            nn[k] = idx;
            dist[k] = std::sqrt(d_sq);
            mean += dist[k];
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double d : dist) var += (d - mean) * (d - mean);
        double stddev = std::sqrt(var / static_cast<double>(n));
        double threshold = mean + params.outlier_std_mult * stddev;

        kept_src.clear();
        kept_tgt.clear();
        for (std::size_t k = 0; k < n; ++k) {
            if (dist[k] > threshold) continue;
            kept_src.push_back(tree.point(nn[k]));
            kept_tgt.push_back(object_cloud[k]);
        }
        if (kept_src.empty()) {
            throw Error(ErrorCode::AllPointsRejected, "outlier filter removed every correspondence");
        }

        RigidTransform previous_pose = result.pose;
        result.pose = rigid_least_squares(kept_src, kept_tgt);

        double mse = 0.0;
        for (std::size_t k = 0; k < kept_src.size(); ++k) {
            mse += (result.pose.apply(kept_src[k]) - kept_tgt[k]).squaredNorm();
        }
        mse /= static_cast<double>(kept_src.size());

        // trim-set churn can bounce the error at convergence scale; treat any
        // increase as converged and keep the previous pose
        if (std::isfinite(prev_mse) && mse > prev_mse) {
            result.pose = previous_pose;
            break;
        }
        ++result.iterations;
        result.mse_history.push_back(mse);
        result.final_mse = mse;

        if (mse < 1e-30) break;
        if (std::isfinite(prev_mse) && prev_mse - mse < params.rel_change_tol * prev_mse) {
            break;
        }
        prev_mse = mse;
    }
    return result;
}

Quat symmetry_align(const Quat& reference, const Quat& q, const SymmetrySet& symmetries) {
    auto members = expand_symmetries(symmetries);
    Quat best = q;
    double best_angle = std::numeric_limits<double>::infinity();
    for (const auto& member : members) {
        Quat candidate = q * member.rotation;
        double angle = rotation_angle_between(reference, candidate);
        if (angle < best_angle) {
            best_angle = angle;
            best = candidate;
        }
    }
    return best;
}

Quat average_quaternions(const std::vector<Quat>& qs, const std::vector<double>& weights) {
    if (qs.empty()) throw Error(ErrorCode::ValidationError, "no quaternions to average");
    if (!weights.empty() && weights.size() != qs.size()) {
        throw Error(ErrorCode::ValidationError, "weight count does not match quaternion count");
    }
    Mat4 outer = Mat4::Zero();
    for (std::size_t i = 0; i < qs.size(); ++i) {
        double w = weights.empty() ? 1.0 : weights[i];
        Eigen::Vector4d v(qs[i].w(), qs[i].x(), qs[i].y(), qs[i].z());
        outer += w * v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat4> solver(outer);
    const auto& evals = solver.eigenvalues();  // ascending
    if (evals(3) - evals(2) < 1e-9) {
        throw Error(ErrorCode::DegenerateAverage, "top eigenvalues coincide; mean is ambiguous");
    }
    Eigen::Vector4d principal = solver.eigenvectors().col(3);
    return canonical_sign(Quat(principal(0), principal(1), principal(2), principal(3)).normalized());
}

FusedPose fuse_poses(const std::vector<RefinedPose>& refined, const SymmetrySet& symmetries,
                     double rot_inlier, double trans_inlier, std::uint64_t /*seed*/,
                     FuseReference reference) {
    if (refined.empty()) throw Error(ErrorCode::ValidationError, "no poses to fuse");

    FusedPose out;
    if (refined.size() == 1) {
        out.pose = refined[0].pose;
        out.inlier_ids.emplace_back(refined[0].camera_id, refined[0].hypothesis);
        return out;
    }

    auto members = expand_symmetries(symmetries);
    auto symmetric_angle = [&](const Quat& a, const Quat& b) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& member : members) {
            best = std::min(best, rotation_angle_between(a, b * member.rotation));
        }
        return best;
    };

    std::size_t ref_index = 0;
    if (reference == FuseReference::Medoid) {
        double best_total = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < refined.size(); ++i) {
            double total = 0.0;
            for (std::size_t k = 0; k < refined.size(); ++k) {
                total += symmetric_angle(refined[i].pose.rotation, refined[k].pose.rotation);
            }
            if (total < best_total) {
                best_total = total;
                ref_index = i;
            }
        }
    }

    const Quat ref_rotation = refined[ref_index].pose.rotation;
    std::vector<Quat> aligned(refined.size());
    for (std::size_t k = 0; k < refined.size(); ++k) {
        aligned[k] = symmetry_align(ref_rotation, refined[k].pose.rotation, symmetries);
    }

    // every pose proposes itself; the largest consensus set wins, ties broken
    // by residual and then by smallest (camera, hypothesis) so the result is
    // independent of input order
    std::vector<std::size_t> best_inliers;
    double best_rot_residual = std::numeric_limits<double>::infinity();
    double best_trans_residual = std::numeric_limits<double>::infinity();
    std::pair<std::string, int> best_key;
    for (std::size_t c = 0; c < refined.size(); ++c) {
        std::vector<std::size_t> inliers;
        double rot_residual = 0.0;
        double trans_residual = 0.0;
        for (std::size_t k = 0; k < refined.size(); ++k) {
            double da = rotation_angle_between(aligned[k], aligned[c]);
            double dt = (refined[k].pose.translation - refined[c].pose.translation).norm();
            if (da <= rot_inlier && dt <= trans_inlier) {
                inliers.push_back(k);
                rot_residual += da;
                trans_residual += dt;
            }
        }
        std::pair<std::string, int> key{refined[c].camera_id, refined[c].hypothesis};
        bool better = false;
        if (inliers.size() != best_inliers.size()) {
            better = inliers.size() > best_inliers.size();
        } else if (rot_residual != best_rot_residual) {
            better = rot_residual < best_rot_residual;
        } else if (trans_residual != best_trans_residual) {
            better = trans_residual < best_trans_residual;
        } else {
            better = key < best_key;
        }
        if (better) {
            best_inliers = std::move(inliers);
            best_rot_residual = rot_residual;
            best_trans_residual = trans_residual;
            best_key = key;
        }
    }

    if (best_inliers.size() < 2) {
        throw Error(ErrorCode::NoConsensus, "no pose gathered two fusion inliers");
    }

    std::vector<Quat> inlier_rotations;
    Vec3 mean_translation = Vec3::Zero();
    for (std::size_t k : best_inliers) {
        inlier_rotations.push_back(aligned[k]);
        mean_translation += refined[k].pose.translation;
        out.inlier_ids.emplace_back(refined[k].camera_id, refined[k].hypothesis);
    }
    mean_translation /= static_cast<double>(best_inliers.size());
    std::sort(out.inlier_ids.begin(), out.inlier_ids.end());

    out.pose = RigidTransform(average_quaternions(inlier_rotations), mean_translation);
    return out;
}

}  // namespace seapose
