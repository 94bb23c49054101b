#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "seapose/io.hpp"
#include "seapose/mesh_primitives.hpp"
#include "seapose/synth.hpp"
#include "seapose/util.hpp"
#include "test_support.hpp"

using namespace seapose;
using namespace seapose::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed twice gives byte-identical scene files") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig cfg;
    cfg.seed = 77;
    cfg.n_cameras = 3;
    cfg.cloud_density = 600.0;
    cfg.hyp_rot_noise = 1.0 * kDeg;
    cfg.hyp_trans_noise = 0.01;
    cfg.outlier_fraction = 0.2;
    cfg.cloud_noise = 0.003;
    cfg.floor_tilt = 0.06;

    auto dir_a = scratch_dir("synth_det_a");
    auto dir_b = scratch_dir("synth_det_b");
    {
        auto [scene, gt] = generate_scene(drum, cfg);
        save_synth_scene(scene, gt, dir_a);
    }
    {
        auto [scene, gt] = generate_scene(drum, cfg);
        save_synth_scene(scene, gt, dir_b);
    }
    for (const char* name : {"scene.json", "cloud.ply", "model.obj", "gt.json",
                             "masks/cam00.pgm", "masks/cam01.pgm", "masks/cam02.pgm"}) {
        CHECK(slurp(fs::path(dir_a) / name) == slurp(fs::path(dir_b) / name));
    }
}

TEST_CASE("ground truth burial is self-consistent with burial_depth") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.burial_fraction = 0.35;
        cfg.floor_tilt = 0.1;
        cfg.cloud_density = 400.0;
        auto [scene, gt] = generate_scene(drum, cfg);

        BurialResult recomputed = burial_depth(drum, gt.object_pose, gt.plane);
        CHECK(gt.burial.depth == recomputed.depth);
        CHECK(gt.burial.z_bot == recomputed.z_bot);
        CHECK(gt.burial.oriented_height == recomputed.oriented_height);
        // depth equals the requested fraction of the oriented height
        CHECK(gt.burial.depth ==
              doctest::Approx(0.35 * gt.burial.oriented_height).epsilon(1e-9));
    }
}

TEST_CASE("stored reconstruction times true_scale reproduces the metric scene") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig cfg;
    cfg.seed = 9;
    cfg.true_scale = 2.5;
    cfg.cloud_density = 400.0;
    auto [scene, gt] = generate_scene(drum, cfg);

    CHECK_FALSE(scene.metric);
    // noiseless hypotheses: implied world object positions at the true scale
    // coincide with the ground-truth object position
    for (const auto& cam : scene.cameras) {
        for (const auto& hyp : cam.hypotheses) {
            Vec3 implied = compose(cam.world_pose, hyp).translation +
                           cam.world_pose.translation * (cfg.true_scale - 1.0);
            CHECK((implied - gt.object_pose.translation).norm() < 1e-9);
        }
    }
    // floor-labeled cloud points sit on the ground-truth plane once rescaled
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        if (scene.cloud.labels[i] != PointLabel::Floor) continue;
        Vec3 metric = scene.cloud.points[i] * cfg.true_scale;
        CHECK(std::abs(gt.plane.signed_distance(metric)) < 1e-9);
    }
}

TEST_CASE("every object point projects into the mask of every camera that sees it") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig cfg;
    cfg.seed = 21;
    cfg.n_cameras = 4;
    cfg.cloud_density = 500.0;
    auto [scene, gt] = generate_scene(drum, cfg);

    std::size_t checked = 0;
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        if (scene.cloud.labels[i] != PointLabel::Object) continue;
        for (const auto& cam : scene.cameras) {
            Vec3 p_cam = cam.world_pose.inverse().apply(scene.cloud.points[i]);
            if (p_cam.z() <= 0.0) continue;
            double u = cam.intrinsics.focal * p_cam.x() / p_cam.z() +
                       cam.intrinsics.principal_point.x();
            double v = cam.intrinsics.focal * p_cam.y() / p_cam.z() +
                       cam.intrinsics.principal_point.y();
            int px = static_cast<int>(std::lround(u));
            int py = static_cast<int>(std::lround(v));
            if (px < 1 || px >= cam.intrinsics.width - 1 || py < 1 ||
                py >= cam.intrinsics.height - 1) {
                continue;
            }
            bool hit = false;  // allow one pixel of rasterization slack
            for (int dy = -1; dy <= 1 && !hit; ++dy) {
                for (int dx = -1; dx <= 1 && !hit; ++dx) {
                    hit = cam.mask->at(px + dx, py + dy);
                }
            }
            CHECK(hit);
            ++checked;
        }
    }
    CHECK(checked > 100);  // the assertion above must have real coverage
}

TEST_CASE("deep burial leaves under 15% of a thin upright tube visible") {
    ReferenceModel tube = make_cylinder(0.183 / 2.0, 0.9906, 32, "tube");
    SynthConfig cfg;
    cfg.seed = 33;
    cfg.burial_fraction = 0.9;
    cfg.upright = true;
    cfg.cloud_density = 3000.0;
    auto [scene, gt] = generate_scene(tube, cfg);

    // surface-integration oracle: Monte Carlo fraction of surface above plane
    auto samples = sample_surface(tube, 100000, 99);
    std::size_t above = 0;
    RigidTransform to_floor = compose(floor_frame(gt.plane), gt.object_pose);
    for (const auto& s : samples) {
        if (to_floor.apply(s).z() > 0.0) ++above;
    }
    double oracle_fraction = static_cast<double>(above) / static_cast<double>(samples.size());
    CHECK(oracle_fraction < 0.15);

    double total_expected = cfg.cloud_density * mesh_surface_area(tube);
    double cloud_fraction =
        static_cast<double>(scene.cloud.points_with_label(PointLabel::Object).size()) /
        total_expected;
    CHECK(cloud_fraction < 0.15);
    CHECK(std::abs(cloud_fraction - oracle_fraction) < 0.02);
}

TEST_CASE("infeasible configs are rejected") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 16);
    SynthConfig cfg;
    cfg.burial_fraction = 1.5;
    CHECK_THROWS_AS(generate_scene(drum, cfg), Error);
    cfg.burial_fraction = 0.3;
    cfg.n_cameras = 1;
    CHECK_THROWS_AS(generate_scene(drum, cfg), Error);
    cfg.n_cameras = 4;
    cfg.outlier_fraction = 1.0;
    CHECK_THROWS_AS(generate_scene(drum, cfg), Error);
}

TEST_CASE("generated scenes pass the loader round trip") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig cfg;
    cfg.seed = 55;
    cfg.n_cameras = 3;
    cfg.cloud_density = 400.0;
    cfg.unlabeled_cloud = true;
    auto [scene, gt] = generate_scene(drum, cfg);

    auto dir = scratch_dir("synth_roundtrip");
    save_synth_scene(scene, gt, dir);
    SceneInput loaded = load_scene(dir + "/scene.json");
    CHECK(loaded.cameras.size() == scene.cameras.size());
    CHECK(loaded.cloud.size() == scene.cloud.size());
    CHECK_FALSE(loaded.cloud.has_object_labels());
    REQUIRE(loaded.cameras[0].mask.has_value());

    GroundTruth loaded_gt = load_ground_truth(dir + "/gt.json");
    CHECK(loaded_gt.scale == gt.scale);
    CHECK(translation_distance(loaded_gt.object_pose, gt.object_pose) < 1e-12);
    CHECK(loaded_gt.true_hypotheses.size() == gt.true_hypotheses.size());
}

}  // TEST_SUITE
