#include <doctest.h>

#include <cmath>

#include "seapose/scale.hpp"
#include "seapose/util.hpp"
#include "test_support.hpp"

using namespace seapose;
using namespace seapose::testing;

namespace {

struct ScaleScene {
    std::vector<CameraView> views;
    double true_scale = 1.0;
    Vec3 object_position;  // metric world frame
    RigidTransform object_pose;
};

// Cameras around a fixed object; hypotheses are exact relative poses with
// optional noise, stored world poses are divided by true_scale.
ScaleScene make_scale_scene(std::uint64_t seed, int n_cams, int hyps_per_cam, double true_scale,
                            double rot_noise = 0.0, double trans_noise = 0.0,
                            double outlier_fraction = 0.0) {
    Rng rng(seed);
    ScaleScene scene;
    scene.true_scale = true_scale;
    scene.object_pose =
        RigidTransform(rng.uniform_quaternion(),
                       Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    scene.object_position = scene.object_pose.translation;

    for (int i = 0; i < n_cams; ++i) {
        CameraView cam;
        cam.id = "cam" + std::to_string(i);
        Vec3 eye = scene.object_position +
                   rng.unit_vector() * rng.uniform(1.5, 4.0);
        RigidTransform cam_metric(rng.uniform_quaternion(), eye);
        cam.world_pose =
            RigidTransform(cam_metric.rotation, cam_metric.translation / true_scale);
        RigidTransform relative = compose(cam_metric.inverse(), scene.object_pose);
        for (int j = 0; j < hyps_per_cam; ++j) {
            Quat q = relative.rotation;
            Vec3 t = relative.translation;
            if (rot_noise > 0.0) {
                q = q * quat_from_axis_angle(rng.unit_vector(), rng.normal(0, rot_noise));
            }
            if (trans_noise > 0.0) {
                t += Vec3(rng.normal(0, trans_noise), rng.normal(0, trans_noise),
                          rng.normal(0, trans_noise));
            }
            if (rng.uniform() < outlier_fraction) {
                q = rng.uniform_quaternion();
                t = rng.unit_vector() * rng.uniform(0.5, 10.0);
            }
            cam.hypotheses.emplace_back(q, t);
        }
        scene.views.push_back(std::move(cam));
    }
    return scene;
}

std::vector<ScaleSample> collect_samples(const std::vector<CameraView>& views) {
    std::vector<ScaleSample> samples;
    for (const auto& view : views) {
        for (const auto& hyp : view.hypotheses) {
            samples.push_back(
                {view.world_pose.translation, compose(view.world_pose, hyp).translation});
        }
    }
    return samples;
}

// 1e4-point grid search over the variance-trace objective
std::pair<double, double> grid_search_scale(const std::vector<ScaleSample>& samples, double lo,
                                            double hi, int n) {
    double best_s = lo;
    double best_obj = std::numeric_limits<double>::max();
    for (int i = 0; i < n; ++i) {
        double s = lo + (hi - lo) * i / (n - 1);
        double obj = scale_objective(samples, s);
        if (obj < best_obj) {
            best_obj = obj;
            best_s = s;
        }
    }
    return {best_s, best_obj};
}

}  // namespace

TEST_SUITE("scale") {

TEST_CASE("implied position: s=1 reduces to the unscaled world pose") {
    ScaleScene scene = make_scale_scene(3, 4, 2, 2.0);
    const auto& view = scene.views[1];
    Vec3 expected = compose(view.world_pose, view.hypotheses[0]).translation;
    CHECK((implied_object_position(view, 0, 1.0) - expected).norm() == 0.0);
}

TEST_CASE("implied position: camera at the origin is scale-independent") {
    CameraView view;
    view.id = "origin";
    view.world_pose = RigidTransform(Quat::Identity(), Vec3::Zero());
    view.hypotheses.emplace_back(Quat::Identity(), Vec3(0.3, -0.2, 1.5));
    Vec3 a = implied_object_position(view, 0, 0.1);
    Vec3 b = implied_object_position(view, 0, 42.0);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("implied positions of a two-camera scene coincide at the true scale") {
    ScaleScene scene = make_scale_scene(5, 2, 3, 2.0);
    std::vector<Vec3> implied;
    for (const auto& view : scene.views) {
        for (std::size_t j = 0; j < view.hypotheses.size(); ++j) {
            implied.push_back(implied_object_position(view, static_cast<int>(j), 2.0));
        }
    }
    for (const auto& p : implied) {
        CHECK((p - scene.object_position).norm() < 1e-9);
    }
}

TEST_CASE("closed form: identical object translations give s = 1") {
    Rng rng(7);
    std::vector<ScaleSample> samples;
    Vec3 t_obj(0.4, 0.5, -0.1);
    for (int i = 0; i < 6; ++i) {
        samples.push_back({Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)), t_obj});
    }
    CHECK(solve_scale_closed_form(samples) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form: coincident cameras are degenerate") {
    std::vector<ScaleSample> samples;
    samples.push_back({Vec3(1, 2, 3), Vec3(0, 0, 0)});
    samples.push_back({Vec3(1, 2, 3), Vec3(0.5, 0, 0)});
    try {
        solve_scale_closed_form(samples);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateCameras);
    }
}

TEST_CASE("closed form matches a grid search of the objective") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ScaleScene scene = make_scale_scene(100 + seed, 5, 3, 0.3 + 0.4 * seed,
                                            2.0 * kDeg, 0.02);
        auto samples = collect_samples(scene.views);
        double s_closed = solve_scale_closed_form(samples);
        auto [s_grid, obj_grid] = grid_search_scale(samples, 0.01, 100.0, 10000);
        double cell = (100.0 - 0.01) / 9999.0;
        CHECK(std::abs(s_closed - s_grid) <= cell);
        CHECK(scale_objective(samples, s_closed) <= obj_grid + 1e-12);
    }
}

TEST_CASE("closed form solution is a stationary point") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ScaleScene scene = make_scale_scene(500 + seed, 4, 3, 0.2 + 0.05 * seed, 3.0 * kDeg, 0.05);
        auto samples = collect_samples(scene.views);
        double s_star = solve_scale_closed_form(samples);
        double eps = 1e-4 * std::abs(s_star);
        double at = scale_objective(samples, s_star);
        CHECK(scale_objective(samples, s_star + eps) >= at);
        CHECK(scale_objective(samples, s_star - eps) >= at);
    }
}

TEST_CASE("equivariance: pre-scaling the reconstruction by lambda divides s") {
    ScaleScene scene = make_scale_scene(11, 5, 3, 2.0, 1.0 * kDeg, 0.01);
    auto samples = collect_samples(scene.views);
    double s_star = solve_scale_closed_form(samples);

    double lambda = 3.7;
    std::vector<CameraView> rescaled = scene.views;
    for (auto& view : rescaled) view.world_pose.translation *= lambda;
    double s_rescaled = solve_scale_closed_form(collect_samples(rescaled));
    CHECK(s_rescaled == doctest::Approx(s_star / lambda).epsilon(1e-9));
}

TEST_CASE("translating the whole scene leaves s unchanged") {
    ScaleScene scene = make_scale_scene(13, 5, 3, 1.4, 1.0 * kDeg, 0.01);
    double s_star = solve_scale_closed_form(collect_samples(scene.views));

    Vec3 shift(5.0, -3.0, 2.0);
    std::vector<CameraView> shifted = scene.views;
    for (auto& view : shifted) {
        view.world_pose.translation += shift;
        // hypotheses are camera-relative and do not move
    }
    double s_shifted = solve_scale_closed_form(collect_samples(shifted));
    CHECK(s_shifted == doctest::Approx(s_star).epsilon(1e-9));
}

TEST_CASE("ransac: noiseless scene recovers the exact scale with all pairs inlying") {
    ScaleScene scene = make_scale_scene(17, 6, 5, 2.0);
    ScaleSolution sol = solve_scale_ransac(scene.views, 0.15, 500, 42);
    CHECK(std::abs(sol.s - 2.0) < 1e-9);
    CHECK(sol.inlier_ids.size() == 30);
    CHECK(sol.objective < 1e-18);
}

TEST_CASE("ransac: 40% outliers still lands within 1%") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ScaleScene scene = make_scale_scene(1000 + seed, 8, 5, 2.0, 0.0, 0.0, 0.4);
        ScaleSolution sol = solve_scale_ransac(scene.views, 0.15, 500, seed);
        CHECK(std::abs(sol.s - 2.0) / 2.0 < 0.01);
        // outliers excluded: implied positions of inliers cluster at the object
        for (const auto& [cam_id, hyp] : sol.inlier_ids) {
            for (const auto& view : scene.views) {
                if (view.id != cam_id) continue;
                Vec3 p = implied_object_position(view, hyp, sol.s);
                CHECK((p - scene.object_position).norm() < 0.15);
            }
        }
    }
}

TEST_CASE("ransac: pure noise yields no consensus or a flagged solution") {
    ScaleScene scene = make_scale_scene(23, 6, 5, 2.0, 0.0, 0.0, 1.0 - 1e-12);
    bool rejected = false;
    try {
        ScaleSolution sol = solve_scale_ransac(scene.views, 0.15, 500, 7);
        rejected = sol.inlier_fraction() < 0.25;  // pipeline flags this as suspect
    } catch (const Error& e) {
        rejected = e.code() == ErrorCode::NoConsensus;
    }
    CHECK(rejected);
}

TEST_CASE("ransac: coincident cameras are degenerate") {
    ScaleScene scene = make_scale_scene(29, 3, 2, 1.0);
    for (auto& view : scene.views) view.world_pose.translation = Vec3(1, 1, 1);
    try {
        solve_scale_ransac(scene.views, 0.15, 100, 0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateCameras);
    }
}

TEST_CASE("apply_scale basics") {
    ScaleScene scene = make_scale_scene(31, 3, 2, 2.0);
    SceneInput input;
    input.metric = false;
    input.cameras = scene.views;
    input.cloud.points = {Vec3(1, 1, 1), Vec3(-0.5, 0.25, 2)};
    input.cloud.labels = {PointLabel::Object, PointLabel::Floor};

    SceneInput same = apply_scale(input, 1.0);
    CHECK((same.cloud.points[0] - input.cloud.points[0]).norm() == 0.0);
    CHECK(same.metric);

    SceneInput doubled = apply_scale(input, 2.0);
    CHECK((doubled.cloud.points[0] - Vec3(2, 2, 2)).norm() == 0.0);
    CHECK((doubled.cameras[0].world_pose.translation -
           2.0 * input.cameras[0].world_pose.translation)
              .norm() == 0.0);
    // rotations and hypotheses untouched
    CHECK(rotation_angle_between(doubled.cameras[0].world_pose.rotation,
                                 input.cameras[0].world_pose.rotation) == 0.0);
    CHECK((doubled.cameras[0].hypotheses[0].translation -
           input.cameras[0].hypotheses[0].translation)
              .norm() == 0.0);

    CHECK_THROWS_AS(apply_scale(input, -1.0), Error);
}

TEST_CASE("objective is self-consistent after apply_scale") {
    ScaleScene scene = make_scale_scene(37, 6, 5, 2.0, 1.0 * kDeg, 0.02);
    SceneInput input;
    input.cameras = scene.views;
    input.cloud.points = {Vec3(0, 0, 0)};
    input.cloud.labels = {PointLabel::Floor};

    ScaleSolution sol = solve_scale_ransac(scene.views, 0.15, 500, 3);
    SceneInput scaled = apply_scale(input, sol.s);

    // variance trace of the inliers' world positions in the scaled scene
    std::vector<Vec3> positions;
    for (const auto& [cam_id, hyp] : sol.inlier_ids) {
        for (const auto& view : scaled.cameras) {
            if (view.id != cam_id) continue;
            positions.push_back(compose(view.world_pose, view.hypotheses[hyp]).translation);
        }
    }
    Vec3 mean = Vec3::Zero();
    for (const auto& p : positions) mean += p;
    mean /= static_cast<double>(positions.size());
    double trace = 0.0;
    for (const auto& p : positions) trace += (p - mean).squaredNorm();
    trace /= static_cast<double>(positions.size());
    CHECK(trace == doctest::Approx(sol.objective).epsilon(1e-9));
}

}  // TEST_SUITE
