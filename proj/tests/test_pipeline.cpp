#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "seapose/io.hpp"
#include "seapose/mesh_primitives.hpp"
#include "seapose/pipeline.hpp"
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

SynthConfig fast_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_cameras = 5;
    cfg.cloud_density = 1200.0;
    cfg.floor_tilt = 0.05;
    return cfg;
}

PipelineConfig fast_pipeline(std::uint64_t seed) {
    PipelineConfig config;
    config.seed = seed;
    config.model_samples = 4000;
    config.threads = 2;
    return config;
}

// symmetry-aware rotation error between an estimate and the truth
double pose_rotation_error(const RigidTransform& est, const RigidTransform& gt,
                           const SymmetrySet& symmetries) {
    Quat aligned = symmetry_align(gt.rotation, est.rotation, symmetries);
    return rotation_angle_between(aligned, gt.rotation);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("noiseless scene is a fixed point of the whole pipeline") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 48);
    SynthConfig cfg = fast_config(101);
    cfg.true_scale = 2.0;
    auto [scene, gt] = generate_scene(drum, cfg);

    SceneEstimate est = run_pipeline(scene, fast_pipeline(101));
    REQUIRE(est.ok());
    CHECK(std::abs(est.scale->s - 2.0) / 2.0 < 1e-6);
    CHECK(translation_distance(est.fused->pose, gt.object_pose) < 1e-3);
    SymmetrySet fine_axis;
    fine_axis.axes.push_back({Vec3::UnitZ(), 4096});
    CHECK(pose_rotation_error(est.fused->pose, gt.object_pose, fine_axis) < 0.1 * kDeg);
    CHECK(std::abs(est.burial->depth - gt.burial.depth) < 1e-3);
}

TEST_CASE("degenerate cameras fail at the scale stage with exit code 20") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig cfg = fast_config(7);
    cfg.cloud_density = 400.0;
    auto [scene, gt] = generate_scene(drum, cfg);
    for (auto& cam : scene.cameras) cam.world_pose.translation = Vec3(1, 2, 3);

    auto dir = scratch_dir("pipeline_degenerate");
    save_scene(scene, dir);

    std::string report_path = dir + "/estimate.json";
    int code = run_command(dir + "/scene.json", "", fast_pipeline(7), report_path);
    CHECK(code == 20);

    auto report = nlohmann::ordered_json::parse(slurp(report_path));
    CHECK(report.at("failed_stage").get<std::string>() == "scale");
    CHECK(report.at("error").at("code").get<std::string>() == "DegenerateCameras");
}

TEST_CASE("missing scene file exits with the parse code") {
    auto dir = scratch_dir("pipeline_missing");
    int code = run_command(dir + "/nope.json", "", fast_pipeline(0), dir + "/out.json");
    CHECK(code == 10);
}

TEST_CASE("reports are byte-identical across reruns and thread counts") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig cfg = fast_config(31);
    cfg.cloud_density = 700.0;
    cfg.hyp_rot_noise = 1.0 * kDeg;
    cfg.hyp_trans_noise = 0.01;
    cfg.outlier_fraction = 0.2;
    cfg.cloud_noise = 0.002;
    auto [scene, gt] = generate_scene(drum, cfg);
    auto dir = scratch_dir("pipeline_determinism");
    save_scene(scene, dir);

    PipelineConfig one = fast_pipeline(31);
    one.threads = 1;
    PipelineConfig four = fast_pipeline(31);
    four.threads = 4;

    REQUIRE(run_command(dir + "/scene.json", "", one, dir + "/a.json") == 0);
    REQUIRE(run_command(dir + "/scene.json", "", four, dir + "/b.json") == 0);
    REQUIRE(run_command(dir + "/scene.json", "", one, dir + "/c.json") == 0);
    std::string a = slurp(dir + "/a.json");
    CHECK(a == slurp(dir + "/b.json"));
    CHECK(a == slurp(dir + "/c.json"));
    CHECK(!a.empty());

    // provenance block carries every determinism-relevant flag
    auto report = nlohmann::ordered_json::parse(a);
    const auto& jc = report.at("config");
    for (const char* key :
         {"scale_inlier_m", "plane_inlier_m", "rot_inlier_rad", "trans_inlier_m", "icp_std_mult",
          "icp_max_iterations", "icp_rel_change_tol", "ransac_iterations", "model_samples",
          "min_mask_hits", "seed", "fuse_reference"}) {
        CHECK(jc.contains(key));
    }
}

TEST_CASE("invalid camera intrinsics exit with the validation code") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 16);
    SynthConfig cfg = fast_config(91);
    cfg.cloud_density = 300.0;
    cfg.n_cameras = 3;
    auto [scene, gt] = generate_scene(drum, cfg);
    scene.cameras[0].intrinsics.focal = -5.0;
    auto dir = scratch_dir("pipeline_bad_focal");
    save_scene(scene, dir);
    int code = run_command(dir + "/scene.json", "", fast_pipeline(91), dir + "/out.json");
    CHECK(code == 11);
}

TEST_CASE("segmentation path engages when the cloud is unlabeled") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig cfg = fast_config(41);
    cfg.unlabeled_cloud = true;
    cfg.n_cameras = 6;
    cfg.arc_degrees = 300.0;
    auto [scene, gt] = generate_scene(drum, cfg);

    SceneEstimate est = run_pipeline(scene, fast_pipeline(41));
    REQUIRE(est.ok());
    CHECK(est.diagnostics.at("cloud_object_points") > 100);
    CHECK(std::abs(est.burial->depth - gt.burial.depth) < 0.02);
}

TEST_CASE("evaluate: perfect estimates score unit recall and zero depth error") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    auto gts_dir = scratch_dir("eval_gts");
    auto est_dir = scratch_dir("eval_estimates");

    for (int i = 0; i < 3; ++i) {
        SynthConfig cfg = fast_config(200 + i);
        cfg.cloud_density = 300.0;
        cfg.n_cameras = 3;
        auto [scene, gt] = generate_scene(drum, cfg);
        std::string id = "scene" + std::to_string(i);
        save_synth_scene(scene, gt, (fs::path(gts_dir) / id).string());

        // estimate assembled directly from the ground truth
        nlohmann::ordered_json j;
        j["schema_version"] = 1;
        j["failed_stage"] = nullptr;
        nlohmann::ordered_json per_view = nlohmann::ordered_json::object();
        for (const auto& [cam, pose] : gt.true_hypotheses) {
            per_view[cam] = nlohmann::ordered_json{
                {"q_wxyz",
                 {pose.rotation.w(), pose.rotation.x(), pose.rotation.y(), pose.rotation.z()}},
                {"t", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
        }
        j["fused"] = nlohmann::ordered_json{{"per_view", per_view}};
        j["burial"] = nlohmann::ordered_json{{"depth_m", gt.burial.depth},
                                             {"depth_ratio", gt.burial.depth_ratio}};
        std::ofstream out(fs::path(est_dir) / (id + ".json"));
        out << j.dump(2) << '\n';
    }

    EvalResult result = evaluate(est_dir, gts_dir, 2);
    CHECK(result.n_objects == 3);
    CHECK(result.report.ar_vsd == 1.0);
    CHECK(result.report.ar_mssd == 1.0);
    CHECK(result.report.ar_mspd == 1.0);
    CHECK(result.report.mean_depth_error == 0.0);
    CHECK(result.csv.find("scene0") != std::string::npos);
}

TEST_CASE("evaluate: id mismatch is a typed error") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 16);
    auto gts_dir = scratch_dir("eval_mismatch_gts");
    auto est_dir = scratch_dir("eval_mismatch_est");
    SynthConfig cfg = fast_config(300);
    cfg.cloud_density = 300.0;
    cfg.n_cameras = 3;
    auto [scene, gt] = generate_scene(drum, cfg);
    save_synth_scene(scene, gt, (fs::path(gts_dir) / "only_gt").string());
    try {
        evaluate(est_dir, gts_dir, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IdMismatch);
    }
}

TEST_CASE("sedimentation rate inversion") {
    CHECK(infer_sedimentation_rate(0.0, 1947, 2023) == 0.0);
    CHECK(std::abs(infer_sedimentation_rate(0.0828, 1947, 2023) - 0.109) < 0.001);
    try {
        infer_sedimentation_rate(0.5, 2023, 2023);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidYears);
    }
}

TEST_CASE("sweep: empty values yield an empty table, one value yields one row") {
    ReferenceModel drum = make_cylinder(0.381, 1.0668, 32);
    SynthConfig base = fast_config(400);
    base.cloud_density = 600.0;
    PipelineConfig pconfig = fast_pipeline(400);
    pconfig.model_samples = 2000;

    auto rows = sweep(drum, base, "burial_fraction", {}, 3, pconfig);
    CHECK(rows.empty());

    rows = sweep(drum, base, "burial_fraction", {0.2}, 2, pconfig);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n_failed == 0);
    CHECK(rows[0].mean_depth_error < 0.05);

    CHECK_THROWS_AS(sweep(drum, base, "not_a_field", {0.1}, 1, pconfig), Error);

    std::string csv = sweep_csv(rows);
    CHECK(csv.find("value,n_seeds,n_failed") == 0);
}

}  // TEST_SUITE
