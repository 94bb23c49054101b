#include "seapose/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>

#include <json.hpp>

#include "seapose/io.hpp"
#include "seapose/segmentation.hpp"
#include "seapose/util.hpp"

namespace fs = std::filesystem;

namespace seapose {

namespace {

using ordered_json = nlohmann::ordered_json;

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        auto elapsed = std::chrono::steady_clock::now() - start_;
        sink_[name_] = std::chrono::duration<double>(elapsed).count();
    }

private:
    std::map<std::string, double>& sink_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

ordered_json pose_json(const RigidTransform& T) {
    const Quat& q = T.rotation;
    const Vec3& t = T.translation;
    return ordered_json{{"q_wxyz", {q.w(), q.x(), q.y(), q.z()}},
                        {"t", {t.x(), t.y(), t.z()}}};
}

RigidTransform pose_from_json(const ordered_json& j) {
    const auto& q = j.at("q_wxyz");
    const auto& t = j.at("t");
    return RigidTransform(
        Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()),
        Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
}

}  // namespace

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::Load: return "load";
        case Stage::Segment: return "segment";
        case Stage::Scale: return "scale";
        case Stage::Icp: return "icp";
        case Stage::Fuse: return "fuse";
        case Stage::Plane: return "plane";
        case Stage::Done: return "done";
    }
    return "unknown";
}

int stage_exit_code(Stage stage) {
    switch (stage) {
        case Stage::Load: return 10;
        case Stage::Segment: return 11;
        case Stage::Scale: return 20;
        case Stage::Icp: return 21;
        case Stage::Fuse: return 22;
        case Stage::Plane: return 23;
        case Stage::Done: return 0;
    }
    return 1;
}

SceneEstimate run_pipeline(const SceneInput& scene, const PipelineConfig& config) {
    SceneEstimate est;
    Stage stage = Stage::Load;
    try {
        for (const auto& cam : scene.cameras) {
            if (cam.hypotheses.empty()) {
                throw Error(ErrorCode::ValidationError,
                            "camera " + cam.id + " carries no pose hypotheses");
            }
        }
        if (scene.cameras.size() < 2) {
            throw Error(ErrorCode::ValidationError, "pipeline needs at least 2 cameras");
        }

        // segment: only when the cloud does not already carry object labels
        stage = Stage::Segment;
        LabeledPointCloud cloud = scene.cloud;
        {
            StageTimer timer(est.timings_s, "segment");
            if (!cloud.has_object_labels()) {
                SegmentationParams params;
                params.min_mask_hits = config.min_mask_hits;
                cloud = segment_cloud(cloud, scene.cameras, params);
            }
        }
        est.diagnostics["cloud_object_points"] =
            static_cast<double>(cloud.points_with_label(PointLabel::Object).size());
        est.diagnostics["cloud_floor_points"] =
            static_cast<double>(cloud.points_with_label(PointLabel::Floor).size());

        stage = Stage::Scale;
        SceneInput scaled;
        {
            StageTimer timer(est.timings_s, "scale");
            ScaleSolution scale = solve_scale_ransac(scene.cameras, config.scale_inlier_m,
                                                     config.ransac_iterations, config.seed);
            scaled = apply_scale(scene, scale.s);
            est.scale = std::move(scale);
        }
        est.diagnostics["scale_inliers"] = static_cast<double>(est.scale->inlier_ids.size());
        est.diagnostics["scale_total_pairs"] = static_cast<double>(est.scale->total_pairs);
        est.diagnostics["scale_inlier_fraction"] = est.scale->inlier_fraction();
        est.diagnostics["scale_suspect"] = est.scale->inlier_fraction() < 0.25 ? 1.0 : 0.0;

        LabeledPointCloud scaled_cloud = cloud;
        for (auto& p : scaled_cloud.points) p *= est.scale->s;

        stage = Stage::Icp;
        std::vector<RefinedPose> refined;
        {
            StageTimer timer(est.timings_s, "icp");
            std::vector<Vec3> object_points = scaled_cloud.points_with_label(PointLabel::Object);
            if (object_points.empty()) {
                throw Error(ErrorCode::EmptyCloud, "no object-labeled points to register against");
            }
            std::vector<Vec3> samples =
                sample_surface(scene.model, config.model_samples, config.seed ^ 0x5eed5a3eull);

            IcpParams icp_params;
            icp_params.max_iterations = config.icp_max_iterations;
            icp_params.rel_change_tol = config.icp_rel_change_tol;
            icp_params.outlier_std_mult = config.icp_std_mult;

            struct Job {
                std::string camera_id;
                int hypothesis;
                RigidTransform init;
            };
            std::vector<Job> jobs;
            for (const auto& cam : scaled.cameras) {
                for (std::size_t j = 0; j < cam.hypotheses.size(); ++j) {
                    jobs.push_back({cam.id, static_cast<int>(j),
                                    compose(cam.world_pose, cam.hypotheses[j])});
                }
            }
            std::vector<std::optional<RigidTransform>> outcomes(jobs.size());
            std::optional<Error> first_error;
            std::mutex error_mutex;
            parallel_for(jobs.size(), config.threads, [&](std::size_t k) {
                try {
                    outcomes[k] =
                        icp_refine(samples, jobs[k].init, object_points, icp_params).pose;
                } catch (const Error& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = e;
                }
            });
            for (std::size_t k = 0; k < jobs.size(); ++k) {
                if (outcomes[k]) {
                    refined.push_back({jobs[k].camera_id, jobs[k].hypothesis, *outcomes[k]});
                }
            }
            if (refined.empty()) {
                throw first_error.value_or(
                    Error(ErrorCode::AllPointsRejected, "every ICP run failed"));
            }
        }
        est.diagnostics["icp_refined"] = static_cast<double>(refined.size());

        stage = Stage::Fuse;
        {
            StageTimer timer(est.timings_s, "fuse");
            FusedPose fused =
                fuse_poses(refined, scene.model.symmetries, config.rot_inlier_rad,
                           config.trans_inlier_m, config.seed, config.fuse_reference);
            for (const auto& cam : scaled.cameras) {
                fused.per_view_pose[cam.id] = compose(cam.world_pose.inverse(), fused.pose);
            }
            est.fused = std::move(fused);
        }
        est.diagnostics["fuse_inliers"] = static_cast<double>(est.fused->inlier_ids.size());

        stage = Stage::Plane;
        {
            StageTimer timer(est.timings_s, "plane");
            std::vector<Vec3> floor_points = scaled_cloud.points_with_label(PointLabel::Floor);
            Vec3 mean_cam = Vec3::Zero();
            for (const auto& cam : scaled.cameras) mean_cam += cam.world_pose.translation;
            mean_cam /= static_cast<double>(scaled.cameras.size());
            est.plane = fit_plane_ransac(floor_points, config.plane_inlier_m,
                                         config.ransac_iterations, config.seed, mean_cam);
            int plane_inliers = 0;
            for (const auto& p : floor_points) {
                if (std::abs(est.plane->signed_distance(p)) <= config.plane_inlier_m) {
                    ++plane_inliers;
                }
            }
            est.diagnostics["plane_inliers"] = static_cast<double>(plane_inliers);
            est.diagnostics["plane_points"] = static_cast<double>(floor_points.size());
        }

        est.burial = burial_depth(scene.model, est.fused->pose, *est.plane);
        stage = Stage::Done;
    } catch (const Error& e) {
        est.failure = StageError{stage, e.code(), e.what()};
    }
    return est;
}

std::string estimate_report_json(const SceneEstimate& est, const PipelineConfig& config) {
    ordered_json j;
    j["schema_version"] = 1;

    ordered_json jc;
    jc["scale_inlier_m"] = config.scale_inlier_m;
    jc["plane_inlier_m"] = config.plane_inlier_m;
    jc["rot_inlier_rad"] = config.rot_inlier_rad;
    jc["trans_inlier_m"] = config.trans_inlier_m;
    jc["icp_std_mult"] = config.icp_std_mult;
    jc["icp_max_iterations"] = config.icp_max_iterations;
    jc["icp_rel_change_tol"] = config.icp_rel_change_tol;
    jc["ransac_iterations"] = config.ransac_iterations;
    jc["model_samples"] = config.model_samples;
    jc["min_mask_hits"] = config.min_mask_hits;
    jc["seed"] = config.seed;
    jc["fuse_reference"] =
        config.fuse_reference == FuseReference::FirstPose ? "first" : "medoid";
    j["config"] = std::move(jc);

    j["failed_stage"] = est.failure ? ordered_json(stage_name(est.failure->stage)) : ordered_json();
    if (est.failure) {
        j["error"] = ordered_json{{"code", error_code_name(est.failure->code)},
                                  {"message", est.failure->message}};
    }

    if (est.scale) {
        ordered_json js;
        js["s"] = est.scale->s;
        js["objective"] = est.scale->objective;
        js["inlier_count"] = est.scale->inlier_ids.size();
        js["total_pairs"] = est.scale->total_pairs;
        js["inliers"] = ordered_json::array();
        for (const auto& [cam, hyp] : est.scale->inlier_ids) {
            js["inliers"].push_back(ordered_json::array({cam, hyp}));
        }
        j["scale"] = std::move(js);
    }
    if (est.fused) {
        ordered_json jf;
        jf["pose"] = pose_json(est.fused->pose);
        jf["inlier_count"] = est.fused->inlier_ids.size();
        jf["inliers"] = ordered_json::array();
        for (const auto& [cam, hyp] : est.fused->inlier_ids) {
            jf["inliers"].push_back(ordered_json::array({cam, hyp}));
        }
        jf["per_view"] = ordered_json::object();
        for (const auto& [cam, pose] : est.fused->per_view_pose) {
            jf["per_view"][cam] = pose_json(pose);
        }
        j["fused"] = std::move(jf);
    }
    if (est.plane) {
        j["plane"] = ordered_json{
            {"normal", {est.plane->normal.x(), est.plane->normal.y(), est.plane->normal.z()}},
            {"offset", est.plane->offset}};
    }
    if (est.burial) {
        j["burial"] = ordered_json{{"depth_m", est.burial->depth},
                                   {"oriented_height_m", est.burial->oriented_height},
                                   {"depth_ratio", est.burial->depth_ratio},
                                   {"z_bot_m", est.burial->z_bot}};
    }
    j["diagnostics"] = ordered_json::object();
    for (const auto& [key, value] : est.diagnostics) j["diagnostics"][key] = value;
    return j.dump(2) + "\n";
}

int run_command(const std::string& scene_path, const std::string& model_path,
                const PipelineConfig& config, const std::string& out_path) {
    SceneInput scene;
    try {
        scene = load_scene(scene_path);
        if (!model_path.empty()) {
            SymmetrySet symmetries = scene.model.symmetries;  // scene file owns the symmetries
            scene.model = load_mesh(model_path);
            scene.model.symmetries = symmetries;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "load failed: %s\n", e.what());
        SceneEstimate est;
        est.failure = StageError{Stage::Load, e.code(), e.what()};
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            out << estimate_report_json(est, config);
        }
        return e.code() == ErrorCode::ValidationError ? 11 : 10;
    }

    SceneEstimate est = run_pipeline(scene, config);
    if (!out_path.empty()) {
        fs::path p(out_path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(out_path);
        out << estimate_report_json(est, config);
    }
    for (const auto& [name, seconds] : est.timings_s) {
        std::fprintf(stderr, "stage %-8s %8.3f s\n", name.c_str(), seconds);
    }
    if (est.failure) {
        std::fprintf(stderr, "pipeline failed at stage %s: %s\n",
                     stage_name(est.failure->stage), est.failure->message.c_str());
        if (est.failure->stage == Stage::Load &&
            est.failure->code == ErrorCode::ValidationError) {
            return 11;
        }
        return stage_exit_code(est.failure->stage);
    }
    return 0;
}

namespace {

struct EvalInstanceRow {
    std::string id;
    double lat = 0.0;
    double lon = 0.0;
    double gt_depth = 0.0;
    double gt_ratio = 0.0;
    bool failed = true;
    double pred_depth = 0.0;
    double pred_ratio = 0.0;
    std::vector<InstanceErrors> instances;
};

EvalInstanceRow evaluate_object(const std::string& id, const fs::path& report_path,
                                const fs::path& scene_dir) {
    EvalInstanceRow row;
    row.id = id;

    GroundTruth gt = load_ground_truth((scene_dir / "gt.json").string());
    row.lat = gt.lat;
    row.lon = gt.lon;
    row.gt_depth = gt.burial.depth;
    row.gt_ratio = gt.burial.depth_ratio;

    SceneInput scene = load_scene((scene_dir / "scene.json").string());

    std::ifstream in(report_path);
    if (!in) throw Error(ErrorCode::MissingFile, report_path.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, report_path.string() + ": " + e.what());
    }

    std::map<std::string, RigidTransform> per_view;
    try {
        if (!j.at("failed_stage").is_null()) {
            row.failed = true;
        } else {
            for (const auto& [cam, jp] : j.at("fused").at("per_view").items()) {
                per_view[cam] = pose_from_json(jp);
            }
            const auto& jb = j.at("burial");
            row.pred_depth = jb.at("depth_m").get<double>();
            row.pred_ratio = jb.at("depth_ratio").get<double>();
            row.failed = false;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, report_path.string() + ": " + e.what());
    }

    const auto taus = vsd_tau_grid(scene.model.diameter);
    for (const auto& cam : scene.cameras) {
        auto gt_it = gt.true_hypotheses.find(cam.id);
        if (gt_it == gt.true_hypotheses.end()) continue;

        InstanceErrors inst;
        inst.model_diameter = scene.model.diameter;
        inst.image_width = cam.intrinsics.width;

        auto est_it = per_view.find(cam.id);
        if (row.failed || est_it == per_view.end()) {
            inst.errors.vsd.assign(taus.size(), 1.0);  // everything misaligned
            inst.errors.mssd = std::numeric_limits<double>::infinity();
            inst.errors.mspd = std::numeric_limits<double>::infinity();
        } else {
            const RigidTransform& est_pose = est_it->second;
            const RigidTransform& gt_pose = gt_it->second;
            DepthMap est_map = render_distance_map(scene.model, est_pose, cam.intrinsics);
            DepthMap gt_map = render_distance_map(scene.model, gt_pose, cam.intrinsics);
            for (double tau : taus) inst.errors.vsd.push_back(vsd(est_map, gt_map, tau));
            inst.errors.mssd = mssd(est_pose, gt_pose, scene.model);
            try {
                inst.errors.mspd = mspd(est_pose, gt_pose, scene.model, cam.intrinsics);
            } catch (const Error&) {
                inst.errors.mspd = std::numeric_limits<double>::infinity();
            }
        }
        row.instances.push_back(std::move(inst));
    }
    return row;
}

}  // namespace

EvalResult evaluate(const std::string& estimates_dir, const std::string& gts_dir, int threads) {
    if (!fs::is_directory(estimates_dir)) {
        throw Error(ErrorCode::MissingFile, estimates_dir + " is not a directory");
    }
    if (!fs::is_directory(gts_dir)) {
        throw Error(ErrorCode::MissingFile, gts_dir + " is not a directory");
    }

    std::set<std::string> estimate_ids;
    for (const auto& entry : fs::directory_iterator(estimates_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            estimate_ids.insert(entry.path().stem().string());
        }
    }
    std::set<std::string> gt_ids;
    for (const auto& entry : fs::directory_iterator(gts_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "gt.json")) {
            gt_ids.insert(entry.path().filename().string());
        }
    }
    if (estimate_ids != gt_ids) {
        std::string detail;
        for (const auto& id : estimate_ids) {
            if (!gt_ids.count(id)) detail += " estimate-only:" + id;
        }
        for (const auto& id : gt_ids) {
            if (!estimate_ids.count(id)) detail += " gt-only:" + id;
        }
        throw Error(ErrorCode::IdMismatch, "estimate and ground-truth ids differ:" + detail);
    }
    if (estimate_ids.empty()) {
        throw Error(ErrorCode::ValidationError, "nothing to evaluate");
    }

    std::vector<std::string> ids(estimate_ids.begin(), estimate_ids.end());
    std::vector<EvalInstanceRow> rows(ids.size());
    std::vector<std::optional<Error>> errors(ids.size());
    parallel_for(ids.size(), threads, [&](std::size_t k) {
        try {
            rows[k] = evaluate_object(ids[k], fs::path(estimates_dir) / (ids[k] + ".json"),
                                      fs::path(gts_dir) / ids[k]);
        } catch (const Error& e) {
            errors[k] = e;
        }
    });
    for (const auto& e : errors) {
        if (e) throw *e;
    }

    EvalResult result;
    std::vector<InstanceErrors> all_instances;
    std::vector<std::pair<BurialResult, BurialResult>> burial_pairs;
    for (const auto& row : rows) {
        all_instances.insert(all_instances.end(), row.instances.begin(), row.instances.end());
        if (!row.failed) {
            BurialResult pred;
            pred.depth = row.pred_depth;
            pred.depth_ratio = row.pred_ratio;
            BurialResult labeled;
            labeled.depth = row.gt_depth;
            labeled.depth_ratio = row.gt_ratio;
            burial_pairs.emplace_back(pred, labeled);
        } else {
            ++result.n_failed;
        }
    }
    result.report = average_recall_mixed(all_instances);
    if (!burial_pairs.empty()) {
        auto [depth_err, ratio_err] = burial_error_stats(burial_pairs);
        result.report.mean_depth_error = depth_err;
        result.report.mean_depth_ratio_error = ratio_err;
    }
    result.n_objects = static_cast<int>(rows.size());
    result.n_instances = static_cast<int>(all_instances.size());

    char line[256];
    std::string csv = "id,lat,lon,gt_depth_m,pred_depth_m,error_m,ratio_error\n";
    for (const auto& row : rows) {
        if (row.failed) {
            std::snprintf(line, sizeof(line), "%s,%.9g,%.9g,%.9g,,,\n", row.id.c_str(), row.lat,
                          row.lon, row.gt_depth);
        } else {
            std::snprintf(line, sizeof(line), "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          row.id.c_str(), row.lat, row.lon, row.gt_depth, row.pred_depth,
                          std::abs(row.pred_depth - row.gt_depth),
                          std::abs(row.pred_ratio - row.gt_ratio));
        }
        csv += line;
    }
    result.csv = std::move(csv);

    ordered_json j;
    j["schema_version"] = 1;
    j["n_objects"] = result.n_objects;
    j["n_instances"] = result.n_instances;
    j["n_failed"] = result.n_failed;
    j["ar_vsd"] = result.report.ar_vsd;
    j["ar_mssd"] = result.report.ar_mssd;
    j["ar_mspd"] = result.report.ar_mspd;
    j["mean_depth_error_m"] = result.report.mean_depth_error;
    j["mean_depth_ratio_error"] = result.report.mean_depth_ratio_error;
    ordered_json per_object = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json jo;
        jo["id"] = row.id;
        jo["failed"] = row.failed;
        jo["gt_depth_m"] = row.gt_depth;
        if (!row.failed) {
            jo["pred_depth_m"] = row.pred_depth;
            jo["error_m"] = std::abs(row.pred_depth - row.gt_depth);
        }
        per_object.push_back(std::move(jo));
    }
    j["per_object"] = std::move(per_object);
    result.json = j.dump(2) + "\n";
    return result;
}

double infer_sedimentation_rate(double depth_m, int dump_year, int observation_year) {
    if (observation_year <= dump_year) {
        throw Error(ErrorCode::InvalidYears,
                    "observation year must come after the dump year");
    }
    if (depth_m < 0.0) {
        throw Error(ErrorCode::ValidationError, "burial depth cannot be negative");
    }
    return 100.0 * depth_m / static_cast<double>(observation_year - dump_year);
}

std::vector<SweepRow> sweep(const ReferenceModel& model, const SynthConfig& base,
                            const std::string& axis, const std::vector<double>& values,
                            int seeds_per_value, const PipelineConfig& config) {
    auto set_axis = [&](SynthConfig& cfg, double value) {
        if (axis == "n_cameras") cfg.n_cameras = static_cast<int>(std::lround(value));
        else if (axis == "arc_degrees") cfg.arc_degrees = value;
        else if (axis == "camera_distance") cfg.camera_distance = value;
        else if (axis == "true_scale") cfg.true_scale = value;
        else if (axis == "burial_fraction") cfg.burial_fraction = value;
        else if (axis == "hyp_rot_noise") cfg.hyp_rot_noise = value;
        else if (axis == "hyp_trans_noise") cfg.hyp_trans_noise = value;
        else if (axis == "outlier_fraction") cfg.outlier_fraction = value;
        else if (axis == "cloud_noise") cfg.cloud_noise = value;
        else if (axis == "cloud_density") cfg.cloud_density = value;
        else if (axis == "floor_tilt") cfg.floor_tilt = value;
        else throw Error(ErrorCode::ValidationError, "unknown sweep axis '" + axis + "'");
    };
    if (seeds_per_value < 1) {
        throw Error(ErrorCode::ValidationError, "seeds_per_value must be >= 1");
    }

    std::vector<SweepRow> rows;
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        SweepRow row;
        row.value = values[vi];
        row.n_seeds = seeds_per_value;
        std::vector<double> depth_errors;
        double ratio_sum = 0.0;
        for (int k = 0; k < seeds_per_value; ++k) {
            SynthConfig cfg = base;
            set_axis(cfg, values[vi]);
            cfg.seed = base.seed + 100000 * vi + static_cast<std::uint64_t>(k);
            PipelineConfig pconfig = config;
            pconfig.seed = cfg.seed;
            try {
                auto [scene, gt] = generate_scene(model, cfg);
                SceneEstimate est = run_pipeline(scene, pconfig);
                if (!est.ok() || !est.burial) {
                    ++row.n_failed;
                    continue;
                }
                depth_errors.push_back(std::abs(est.burial->depth - gt.burial.depth));
                ratio_sum += std::abs(est.burial->depth_ratio - gt.burial.depth_ratio);
            } catch (const Error&) {
                ++row.n_failed;
            }
        }
        if (!depth_errors.empty()) {
            double sum = 0.0;
            for (double e : depth_errors) sum += e;
            row.mean_depth_error = sum / static_cast<double>(depth_errors.size());
            row.mean_ratio_error = ratio_sum / static_cast<double>(depth_errors.size());
            std::sort(depth_errors.begin(), depth_errors.end());
            std::size_t n = depth_errors.size();
            row.median_depth_error = n % 2 == 1
                                         ? depth_errors[n / 2]
                                         : 0.5 * (depth_errors[n / 2 - 1] + depth_errors[n / 2]);
        }
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string csv = "value,n_seeds,n_failed,mean_depth_error_m,median_depth_error_m,mean_ratio_error\n";
    char line[160];
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%.9g,%d,%d,%.9g,%.9g,%.9g\n", row.value, row.n_seeds,
                      row.n_failed, row.mean_depth_error, row.median_depth_error,
                      row.mean_ratio_error);
        csv += line;
    }
    return csv;
}

}  // namespace seapose
