#include "seapose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "seapose/io.hpp"
#include "seapose/metrics.hpp"
#include "seapose/util.hpp"

namespace fs = std::filesystem;

namespace seapose {

namespace {

using ordered_json = nlohmann::ordered_json;

void validate_config(const SynthConfig& cfg) {
    if (cfg.n_cameras < 2) throw Error(ErrorCode::ValidationError, "need at least 2 cameras");
    if (cfg.arc_degrees <= 0.0 || cfg.arc_degrees > 360.0) {
        throw Error(ErrorCode::ValidationError, "arc_degrees must be in (0, 360]");
    }
    if (cfg.camera_distance <= 0.0) {
        throw Error(ErrorCode::ValidationError, "camera_distance must be positive");
    }
    if (cfg.true_scale <= 0.0) throw Error(ErrorCode::ValidationError, "true_scale must be positive");
    if (cfg.burial_fraction < 0.0 || cfg.burial_fraction >= 1.0) {
        throw Error(ErrorCode::ValidationError, "burial_fraction must be in [0, 1)");
    }
    if (cfg.outlier_fraction < 0.0 || cfg.outlier_fraction >= 1.0) {
        throw Error(ErrorCode::ValidationError, "outlier_fraction must be in [0, 1)");
    }
    if (cfg.hyp_rot_noise < 0.0 || cfg.hyp_trans_noise < 0.0 || cfg.cloud_noise < 0.0) {
        throw Error(ErrorCode::ValidationError, "noise levels must be non-negative");
    }
    if (cfg.cloud_density <= 0.0) {
        throw Error(ErrorCode::ValidationError, "cloud_density must be positive");
    }
    if (cfg.floor_tilt < 0.0 || cfg.floor_tilt > M_PI / 3.0) {
        throw Error(ErrorCode::ValidationError, "floor_tilt must be in [0, pi/3]");
    }
}

/// CV-convention look-at: camera z points from eye to target.
RigidTransform look_at(const Vec3& eye, const Vec3& target) {
    Vec3 z = (target - eye).normalized();
    Vec3 up = Vec3::UnitZ();
    if (std::abs(z.dot(up)) > 1.0 - 1e-9) up = Vec3::UnitX();
    Vec3 x = z.cross(up).normalized();
    Vec3 y = z.cross(x);
    Mat3 rot;
    rot.col(0) = x;
    rot.col(1) = y;
    rot.col(2) = z;
    return RigidTransform(Quat(rot), eye);
}

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

std::pair<SceneInput, GroundTruth> generate_scene(const ReferenceModel& model,
                                                  const SynthConfig& cfg) {
    validate_config(cfg);
    validate_model(model);

    Rng rng(cfg.seed);
    constexpr int kHypothesesPerCamera = 5;

    // object pose in the floor frame (plane is z=0 with +z up there)
    Quat object_rotation = cfg.upright ? quat_from_axis_angle(Vec3::UnitZ(), rng.uniform(0.0, 2.0 * M_PI))
                                       : rng.uniform_quaternion();
    double z_lo = std::numeric_limits<double>::infinity();
    double z_hi = -std::numeric_limits<double>::infinity();
    for (const auto& v : model.vertices) {
        double z = (object_rotation * v).z();
        z_lo = std::min(z_lo, z);
        z_hi = std::max(z_hi, z);
    }
    const double oriented_height = z_hi - z_lo;
    const double jitter = 0.1 * model.diameter;
    Vec3 object_translation(rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter),
                            -cfg.burial_fraction * oriented_height - z_lo);
    const RigidTransform object_in_floor(object_rotation, object_translation);

    Vec3 centroid = Vec3::Zero();
    for (const auto& v : model.vertices) centroid += object_in_floor.apply(v);
    centroid /= static_cast<double>(model.vertices.size());

    // cameras on an arc above the floor, looking at the object
    std::vector<RigidTransform> cams_in_floor;
    const double arc = cfg.arc_degrees * M_PI / 180.0;
    const double theta0 = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < cfg.n_cameras; ++i) {
        double frac = cfg.n_cameras == 1 ? 0.5 : static_cast<double>(i) / (cfg.n_cameras - 1);
        double theta = theta0 + arc * (frac - 0.5);
        double elevation = rng.uniform(25.0, 50.0) * M_PI / 180.0;
        double radius = cfg.camera_distance * rng.uniform(0.85, 1.15);
        Vec3 eye = centroid + radius * Vec3(std::cos(elevation) * std::cos(theta),
                                            std::cos(elevation) * std::sin(theta),
                                            std::sin(elevation));
        Vec3 target = centroid + Vec3(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02),
                                      rng.uniform(-0.02, 0.02));
        cams_in_floor.push_back(look_at(eye, target));
    }

    CameraIntrinsics intrinsics;
    intrinsics.focal = 600.0;
    intrinsics.principal_point = Vec2(320.0, 240.0);
    intrinsics.width = 640;
    intrinsics.height = 480;

    // cloud: exposed object surface plus a floor annulus around the footprint
    const double area = mesh_surface_area(model);
    const int n_object = std::max(100, static_cast<int>(std::lround(cfg.cloud_density * area)));
    auto surface = sample_surface(model, n_object, rng.next_u64());

    double footprint_sq = 0.0;
    for (const auto& v : model.vertices) {
        Vec3 p = object_in_floor.apply(v);
        double dx = p.x() - centroid.x();
        double dy = p.y() - centroid.y();
        footprint_sq = std::max(footprint_sq, dx * dx + dy * dy);
    }
    const double footprint_radius = std::sqrt(footprint_sq);
    const double floor_radius = 1.2 * model.diameter + 0.3 + footprint_radius;

    std::vector<Vec3> floor_points_metric;
    std::vector<Vec3> object_points_metric;
    for (const auto& s : surface) {
        Vec3 p = object_in_floor.apply(s);
        if (p.z() <= 0.0) continue;  // buried surface is unobservable
        object_points_metric.push_back(p);
    }
    const double floor_area = M_PI * floor_radius * floor_radius;
    const int n_floor = std::max(500, static_cast<int>(std::lround(cfg.cloud_density * floor_area / 4.0)));
    for (int i = 0; i < n_floor; ++i) {
        double r = floor_radius * std::sqrt(rng.uniform());
        double a = rng.uniform(0.0, 2.0 * M_PI);
        Vec3 p(centroid.x() + r * std::cos(a), centroid.y() + r * std::sin(a), 0.0);
        double dx = p.x() - centroid.x();
        double dy = p.y() - centroid.y();
        if (dx * dx + dy * dy < footprint_sq) continue;  // floor under the object is hidden
        floor_points_metric.push_back(p);
    }
    if (cfg.cloud_noise > 0.0) {
        for (auto& p : object_points_metric) {
            p += Vec3(rng.normal(0, cfg.cloud_noise), rng.normal(0, cfg.cloud_noise),
                      rng.normal(0, cfg.cloud_noise));
        }
        for (auto& p : floor_points_metric) {
            p += Vec3(rng.normal(0, cfg.cloud_noise), rng.normal(0, cfg.cloud_noise),
                      rng.normal(0, cfg.cloud_noise));
        }
    }

    // hypotheses: exact relative poses, perturbed, some replaced by outliers.
    // Monocular estimates are feature-count limited, so the configured noise
    // grows as 1/sqrt(visible surface fraction): a mostly buried object
    // yields proportionally worse hypotheses.
    const double exposed_fraction = std::max(
        0.01, static_cast<double>(object_points_metric.size()) / static_cast<double>(n_object));
    const double rot_sigma = cfg.hyp_rot_noise / std::sqrt(exposed_fraction);
    const double trans_sigma = cfg.hyp_trans_noise / std::sqrt(exposed_fraction);
    std::vector<std::vector<RigidTransform>> hypotheses(cams_in_floor.size());
    std::vector<RigidTransform> true_relative(cams_in_floor.size());
    for (std::size_t i = 0; i < cams_in_floor.size(); ++i) {
        true_relative[i] = compose(cams_in_floor[i].inverse(), object_in_floor);
        for (int j = 0; j < kHypothesesPerCamera; ++j) {
            Quat q = true_relative[i].rotation;
            Vec3 t = true_relative[i].translation;
            if (rot_sigma > 0.0) {
                q = q * quat_from_axis_angle(rng.unit_vector(), rng.normal(0.0, rot_sigma));
            }
            if (trans_sigma > 0.0) {
                t += Vec3(rng.normal(0, trans_sigma), rng.normal(0, trans_sigma),
                          rng.normal(0, trans_sigma));
            }
            hypotheses[i].emplace_back(q, t);
        }
    }
    const int total_hyps = static_cast<int>(cams_in_floor.size()) * kHypothesesPerCamera;
    const int n_outliers = static_cast<int>(std::lround(cfg.outlier_fraction * total_hyps));
    if (n_outliers > 0) {
        std::vector<int> order(total_hyps);
        for (int i = 0; i < total_hyps; ++i) order[i] = i;
        for (int i = total_hyps - 1; i > 0; --i) {
            std::swap(order[i], order[rng.uniform_int(i + 1)]);
        }
        const double scene_radius = 2.0 * (cfg.camera_distance + model.diameter);
        for (int k = 0; k < n_outliers; ++k) {
            int flat = order[k];
            int cam = flat / kHypothesesPerCamera;
            int hyp = flat % kHypothesesPerCamera;
            Vec3 t = rng.unit_vector() * scene_radius * std::cbrt(rng.uniform());
            hypotheses[cam][hyp] = RigidTransform(rng.uniform_quaternion(), t);
        }
    }

    // world gauge: tilt by floor_tilt, random yaw, random offset
    Quat yaw = quat_from_axis_angle(Vec3::UnitZ(), rng.uniform(0.0, 2.0 * M_PI));
    Vec3 tilt_axis = quat_from_axis_angle(Vec3::UnitZ(), rng.uniform(0.0, 2.0 * M_PI)) * Vec3::UnitX();
    Quat tilt = quat_from_axis_angle(tilt_axis, cfg.floor_tilt);
    Vec3 offset(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const RigidTransform gauge(tilt * yaw, offset);

    GroundTruth gt;
    gt.scale = cfg.true_scale;
    gt.object_pose = compose(gauge, object_in_floor);
    gt.plane.normal = gauge.rotation * Vec3::UnitZ();
    gt.plane.offset = gt.plane.normal.dot(gauge.translation);
    gt.burial = burial_depth(model, gt.object_pose, gt.plane);
    gt.lat = rng.uniform(-0.02, 0.02);
    gt.lon = rng.uniform(-0.02, 0.02);

    SceneInput scene;
    scene.metric = false;
    scene.model = model;

    const double inv_scale = 1.0 / cfg.true_scale;
    for (std::size_t i = 0; i < cams_in_floor.size(); ++i) {
        CameraView cam;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "cam%02d", static_cast<int>(i));
        cam.id = idbuf;
        cam.intrinsics = intrinsics;
        RigidTransform world = compose(gauge, cams_in_floor[i]);
        cam.world_pose = RigidTransform(world.rotation, world.translation * inv_scale);
        cam.hypotheses = hypotheses[i];
        gt.true_hypotheses[cam.id] = true_relative[i];

        RigidTransform object_in_cam = true_relative[i];
        DepthMap dm = render_distance_map(model, object_in_cam, intrinsics);
        BinaryMask mask;
        mask.width = dm.width;
        mask.height = dm.height;
        mask.values.resize(dm.depth.size());
        for (std::size_t k = 0; k < dm.depth.size(); ++k) {
            mask.values[k] = dm.depth[k] > 0.0 ? 255 : 0;
        }
        cam.mask = std::move(mask);
        scene.cameras.push_back(std::move(cam));
    }

    for (const auto& p : object_points_metric) {
        scene.cloud.points.push_back(gauge.apply(p) * inv_scale);
        scene.cloud.labels.push_back(cfg.unlabeled_cloud ? PointLabel::Unlabeled
                                                         : PointLabel::Object);
    }
    for (const auto& p : floor_points_metric) {
        scene.cloud.points.push_back(gauge.apply(p) * inv_scale);
        scene.cloud.labels.push_back(cfg.unlabeled_cloud ? PointLabel::Unlabeled
                                                         : PointLabel::Floor);
    }

    return {std::move(scene), std::move(gt)};
}

void save_ground_truth(const GroundTruth& gt, const std::string& path) {
    ordered_json j;
    j["scale"] = gt.scale;
    j["object_pose"] = pose_json(gt.object_pose);
    j["plane"] = ordered_json{
        {"normal", {gt.plane.normal.x(), gt.plane.normal.y(), gt.plane.normal.z()}},
        {"offset", gt.plane.offset}};
    j["burial"] = ordered_json{{"depth_m", gt.burial.depth},
                               {"oriented_height_m", gt.burial.oriented_height},
                               {"depth_ratio", gt.burial.depth_ratio},
                               {"z_bot_m", gt.burial.z_bot}};
    j["true_hypotheses"] = ordered_json::object();
    for (const auto& [id, pose] : gt.true_hypotheses) j["true_hypotheses"][id] = pose_json(pose);
    j["lat"] = gt.lat;
    j["lon"] = gt.lon;

    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot write " + path);
    out << j.dump(2) << '\n';
}

GroundTruth load_ground_truth(const std::string& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, path);
    std::ifstream in(path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
        GroundTruth gt;
        gt.scale = j.at("scale").get<double>();
        gt.object_pose = pose_from_json(j.at("object_pose"));
        const auto& jp = j.at("plane");
        gt.plane.normal = Vec3(jp.at("normal")[0].get<double>(), jp.at("normal")[1].get<double>(),
                               jp.at("normal")[2].get<double>());
        gt.plane.offset = jp.at("offset").get<double>();
        const auto& jb = j.at("burial");
        gt.burial.depth = jb.at("depth_m").get<double>();
        gt.burial.oriented_height = jb.at("oriented_height_m").get<double>();
        gt.burial.depth_ratio = jb.at("depth_ratio").get<double>();
        gt.burial.z_bot = jb.at("z_bot_m").get<double>();
        for (const auto& [id, jh] : j.at("true_hypotheses").items()) {
            gt.true_hypotheses[id] = pose_from_json(jh);
        }
        gt.lat = j.at("lat").get<double>();
        gt.lon = j.at("lon").get<double>();
        return gt;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

void save_synth_scene(const SceneInput& scene, const GroundTruth& gt, const std::string& dir) {
    save_scene(scene, dir);
    save_ground_truth(gt, (fs::path(dir) / "gt.json").string());
}

}  // namespace seapose
