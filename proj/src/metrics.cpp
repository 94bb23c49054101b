#include "seapose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seapose {

DepthMap render_distance_map(const ReferenceModel& model, const RigidTransform& pose,
                             const CameraIntrinsics& K) {
    DepthMap dm;
    dm.width = K.width;
    dm.height = K.height;
    dm.depth.assign(static_cast<std::size_t>(K.width) * K.height, 0.0);

    const double f = K.focal;
    const double cx = K.principal_point.x();
    const double cy = K.principal_point.y();

    std::vector<Vec3> cam(model.vertices.size());
    for (std::size_t i = 0; i < model.vertices.size(); ++i) {
        cam[i] = pose.apply(model.vertices[i]);
    }

    for (const auto& tri : model.triangles) {
        const Vec3& v0 = cam[tri[0]];
        const Vec3& v1 = cam[tri[1]];
        const Vec3& v2 = cam[tri[2]];
        if (v0.z() <= 1e-9 || v1.z() <= 1e-9 || v2.z() <= 1e-9) continue;

        const Vec2 p0(f * v0.x() / v0.z() + cx, f * v0.y() / v0.z() + cy);
        const Vec2 p1(f * v1.x() / v1.z() + cx, f * v1.y() / v1.z() + cy);
        const Vec2 p2(f * v2.x() / v2.z() + cx, f * v2.y() / v2.z() + cy);

        double denom = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
        if (std::abs(denom) < 1e-12) continue;  // edge-on in projection

        int x_lo = std::max(0, static_cast<int>(std::ceil(std::min({p0.x(), p1.x(), p2.x()}))));
        int x_hi = std::min(K.width - 1,
                            static_cast<int>(std::floor(std::max({p0.x(), p1.x(), p2.x()}))));
        int y_lo = std::max(0, static_cast<int>(std::ceil(std::min({p0.y(), p1.y(), p2.y()}))));
        int y_hi = std::min(K.height - 1,
                            static_cast<int>(std::floor(std::max({p0.y(), p1.y(), p2.y()}))));

        for (int py = y_lo; py <= y_hi; ++py) {
            for (int px = x_lo; px <= x_hi; ++px) {
                double w1 = ((px - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (py - p0.y())) /
                            denom;
                double w2 = ((p1.x() - p0.x()) * (py - p0.y()) - (px - p0.x()) * (p1.y() - p0.y())) /
                            denom;
                double w0 = 1.0 - w1 - w2;
                if (w0 < -1e-12 || w1 < -1e-12 || w2 < -1e-12) continue;
                double inv_z = w0 / v0.z() + w1 / v1.z() + w2 / v2.z();
                if (inv_z <= 0.0) continue;
                double z = 1.0 / inv_z;
                double rx = (px - cx) / f;
                double ry = (py - cy) / f;
                double distance = z * std::sqrt(rx * rx + ry * ry + 1.0);
                std::size_t idx = static_cast<std::size_t>(py) * K.width + px;
                if (dm.depth[idx] == 0.0 || distance < dm.depth[idx]) dm.depth[idx] = distance;
            }
        }
    }
    return dm;
}

double vsd(const DepthMap& est, const DepthMap& gt, double tau) {
    if (est.width != gt.width || est.height != gt.height) {
        throw Error(ErrorCode::DimensionMismatch, "depth map sizes differ");
    }
    if (tau <= 0.0) throw Error(ErrorCode::ValidationError, "tau must be positive");

    std::size_t union_count = 0;
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < est.depth.size(); ++i) {
        bool in_est = est.depth[i] > 0.0;
        bool in_gt = gt.depth[i] > 0.0;
        if (!in_est && !in_gt) continue;
        ++union_count;
        if (!(in_est && in_gt && std::abs(est.depth[i] - gt.depth[i]) < tau)) ++mismatched;
    }
    if (union_count == 0) return 0.0;
    return static_cast<double>(mismatched) / static_cast<double>(union_count);
}

double mssd(const RigidTransform& est, const RigidTransform& gt, const ReferenceModel& model) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sym : expand_symmetries(model.symmetries)) {
        RigidTransform gt_sym = compose(gt, sym);
        double worst = 0.0;
        for (const auto& v : model.vertices) {
            worst = std::max(worst, (est.apply(v) - gt_sym.apply(v)).squaredNorm());
            if (worst >= best * best) break;  // cannot beat the current symmetry
        }
        best = std::min(best, std::sqrt(worst));
    }
    return best;
}

double mspd(const RigidTransform& est, const RigidTransform& gt, const ReferenceModel& model,
            const CameraIntrinsics& K) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sym : expand_symmetries(model.symmetries)) {
        RigidTransform gt_sym = compose(gt, sym);
        double worst = 0.0;
        for (const auto& v : model.vertices) {
            Vec2 pe = project(K, est.apply(v));
            Vec2 pg = project(K, gt_sym.apply(v));
            worst = std::max(worst, (pe - pg).squaredNorm());
        }
        best = std::min(best, std::sqrt(worst));
    }
    return best;
}

std::vector<double> vsd_tau_grid(double model_diameter) {
    std::vector<double> taus(10);
    for (int k = 0; k < 10; ++k) taus[k] = (k + 1) * 0.05 * model_diameter;
    return taus;
}

RecallReport average_recall_mixed(const std::vector<InstanceErrors>& instances) {
    if (instances.empty()) {
        throw Error(ErrorCode::ValidationError, "no pose errors to aggregate");
    }
    for (const auto& inst : instances) {
        if (inst.errors.vsd.size() != 10) {
            throw Error(ErrorCode::ValidationError, "vsd error list must match the 10-tau grid");
        }
    }
    const double n = static_cast<double>(instances.size());
    RecallReport report;

    // VSD: 10 tau (already baked into the per-instance lists) x 10 theta
    double vsd_sum = 0.0;
    for (int ti = 0; ti < 10; ++ti) {
        for (int li = 0; li < 10; ++li) {
            double theta = (li + 1) * 0.05;
            int correct = 0;
            for (const auto& inst : instances) {
                if (inst.errors.vsd[ti] < theta) ++correct;
            }
            vsd_sum += correct / n;
        }
    }
    report.ar_vsd = vsd_sum / 100.0;

    double mssd_sum = 0.0;
    double mspd_sum = 0.0;
    for (int li = 0; li < 10; ++li) {
        int mssd_correct = 0;
        int mspd_correct = 0;
        for (const auto& inst : instances) {
            double mssd_theta = (li + 1) * 0.05 * inst.model_diameter;
            double mspd_theta = (li + 1) * 5.0 * (inst.image_width / 640.0);
            if (inst.errors.mssd < mssd_theta) ++mssd_correct;
            if (inst.errors.mspd < mspd_theta) ++mspd_correct;
        }
        mssd_sum += mssd_correct / n;
        mspd_sum += mspd_correct / n;
    }
    report.ar_mssd = mssd_sum / 10.0;
    report.ar_mspd = mspd_sum / 10.0;
    return report;
}

RecallReport average_recall(const std::vector<PoseErrors>& errors, double model_diameter,
                            double image_width) {
    std::vector<InstanceErrors> instances;
    instances.reserve(errors.size());
    for (const auto& e : errors) instances.push_back({e, model_diameter, image_width});
    return average_recall_mixed(instances);
}

std::pair<double, double> burial_error_stats(
    const std::vector<std::pair<BurialResult, BurialResult>>& pairs) {
    if (pairs.empty()) {
        throw Error(ErrorCode::ValidationError, "no burial pairs to aggregate");
    }
    double depth_sum = 0.0;
    double ratio_sum = 0.0;
    for (const auto& [pred, labeled] : pairs) {
        depth_sum += std::abs(pred.depth - labeled.depth);
        ratio_sum += std::abs(pred.depth_ratio - labeled.depth_ratio);
    }
    const double n = static_cast<double>(pairs.size());
    return {depth_sum / n, ratio_sum / n};
}

}  // namespace seapose
