#include "seapose/scale.hpp"

#include <cmath>
#include <limits>

#include "seapose/util.hpp"

namespace seapose {

Vec3 implied_object_position(const CameraView& view, int hypothesis, double s) {
    Vec3 t_obj = compose(view.world_pose, view.hypotheses.at(hypothesis)).translation;
    return t_obj + view.world_pose.translation * (s - 1.0);
}

double solve_scale_closed_form(const std::vector<ScaleSample>& samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::ValidationError, "scale fit needs at least 2 samples");
    }
    Vec3 mean_cam = Vec3::Zero();
    Vec3 mean_obj = Vec3::Zero();
    for (const auto& s : samples) {
        mean_cam += s.t_cam;
        mean_obj += s.t_obj;
    }
    mean_cam /= static_cast<double>(samples.size());
    mean_obj /= static_cast<double>(samples.size());

    double numerator = 0.0;
    double denominator = 0.0;
    for (const auto& s : samples) {
        Vec3 dc = s.t_cam - mean_cam;
        numerator += dc.dot(s.t_obj - mean_obj);
        denominator += dc.squaredNorm();
    }
    if (denominator < 1e-18) {
        throw Error(ErrorCode::DegenerateCameras,
                    "camera translations are identical; scale is unobservable");
    }
    return 1.0 - numerator / denominator;
}

double scale_objective(const std::vector<ScaleSample>& samples, double s) {
    if (samples.empty()) return 0.0;
    Vec3 mean = Vec3::Zero();
    std::vector<Vec3> implied;
    implied.reserve(samples.size());
    for (const auto& sample : samples) {
        implied.push_back(sample.t_obj + sample.t_cam * (s - 1.0));
        mean += implied.back();
    }
    mean /= static_cast<double>(implied.size());
    double trace = 0.0;
    for (const auto& p : implied) trace += (p - mean).squaredNorm();
    return trace / static_cast<double>(implied.size());
}

namespace {

struct Pair {
    ScaleSample sample;
    int camera_index;
    std::string camera_id;
    int hypothesis;
};

std::vector<Pair> collect_pairs(const std::vector<CameraView>& views) {
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const auto& view = views[i];
        for (std::size_t j = 0; j < view.hypotheses.size(); ++j) {
            Vec3 t_obj = compose(view.world_pose, view.hypotheses[j]).translation;
            pairs.push_back({{view.world_pose.translation, t_obj}, static_cast<int>(i), view.id,
                             static_cast<int>(j)});
        }
    }
    return pairs;
}

}  // namespace

ScaleSolution solve_scale_ransac(const std::vector<CameraView>& views, double inlier_dist,
                                 int iterations, std::uint64_t seed) {
    if (inlier_dist <= 0.0) {
        throw Error(ErrorCode::ValidationError, "inlier distance must be positive");
    }
    std::vector<Pair> pairs = collect_pairs(views);

    bool distinct = false;
    for (std::size_t a = 1; a < pairs.size() && !distinct; ++a) {
        distinct = (pairs[a].sample.t_cam - pairs[0].sample.t_cam).norm() > 1e-12;
    }
    if (pairs.size() < 2 || !distinct) {
        throw Error(ErrorCode::DegenerateCameras,
                    "need at least two cameras with distinct positions");
    }

    const Rng base(seed);
    std::vector<int> best_inliers;
    double best_objective = std::numeric_limits<double>::infinity();
    double best_s = 0.0;

    for (int iter = 0; iter < iterations; ++iter) {
        Rng rng = base.split(static_cast<std::uint64_t>(iter));
        int a = rng.uniform_int(static_cast<int>(pairs.size()));
        int b = rng.uniform_int(static_cast<int>(pairs.size()));
        if (pairs[a].camera_index == pairs[b].camera_index) continue;
        if ((pairs[a].sample.t_cam - pairs[b].sample.t_cam).norm() < 1e-12) continue;

        double s;
        try {
            s = solve_scale_closed_form({pairs[a].sample, pairs[b].sample});
        } catch (const Error&) {
            continue;
        }
        if (!(s > 0.0) || !std::isfinite(s)) continue;

        Vec3 centroid = 0.5 * (pairs[a].sample.t_obj + pairs[a].sample.t_cam * (s - 1.0) +
                               pairs[b].sample.t_obj + pairs[b].sample.t_cam * (s - 1.0));
        std::vector<int> inliers;
        std::vector<ScaleSample> inlier_samples;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            Vec3 implied = pairs[k].sample.t_obj + pairs[k].sample.t_cam * (s - 1.0);
            if ((implied - centroid).norm() <= inlier_dist) {
                inliers.push_back(static_cast<int>(k));
                inlier_samples.push_back(pairs[k].sample);
            }
        }
        if (inliers.size() < 2) continue;
        double objective = scale_objective(inlier_samples, s);
        if (inliers.size() > best_inliers.size() ||
            (inliers.size() == best_inliers.size() && objective < best_objective)) {
            best_inliers = std::move(inliers);
            best_objective = objective;
            best_s = s;
        }
    }

    if (best_inliers.size() < 2) {
        throw Error(ErrorCode::NoConsensus, "no scale hypothesis gathered two inliers");
    }

    std::vector<ScaleSample> inlier_samples;
    inlier_samples.reserve(best_inliers.size());
    for (int k : best_inliers) inlier_samples.push_back(pairs[k].sample);
    double s_final = best_s;
    try {
        double refit = solve_scale_closed_form(inlier_samples);
        if (refit > 0.0 && std::isfinite(refit)) s_final = refit;
    } catch (const Error&) {
        // all inliers from coincident cameras; keep the candidate scale
    }

    ScaleSolution out;
    out.s = s_final;
    out.objective = scale_objective(inlier_samples, s_final);
    out.total_pairs = pairs.size();
    for (int k : best_inliers) out.inlier_ids.emplace_back(pairs[k].camera_id, pairs[k].hypothesis);
    return out;
}

SceneInput apply_scale(const SceneInput& scene, double s) {
    if (!(s > 0.0)) {
        throw Error(ErrorCode::ValidationError, "scale must be positive");
    }
    SceneInput out = scene;
    for (auto& cam : out.cameras) cam.world_pose.translation *= s;
    for (auto& p : out.cloud.points) p *= s;
    out.metric = true;
    return out;
}

}  // namespace seapose
