#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "seapose/io.hpp"
#include "seapose/mesh_primitives.hpp"
#include "seapose/pipeline.hpp"

namespace fs = std::filesystem;
using namespace seapose;

namespace {

int error_exit_code(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::MissingFile:
            return 10;
        default:
            return 11;
    }
}

ReferenceModel resolve_model(const std::string& model_path, const std::string& builtin,
                             int symmetry_k) {
    ReferenceModel model;
    if (!model_path.empty()) {
        model = load_mesh(model_path);
        model.symmetries = cylindrical_symmetry(symmetry_k);
        return model;
    }
    if (builtin == "drum") {
        model = make_cylinder(0.762 / 2.0, 1.0668, 64, "drum");
    } else if (builtin == "tube") {
        model = make_cylinder(0.183 / 2.0, 0.9906, 32, "tube");
    } else if (builtin == "cube") {
        model = make_box(0.5, 0.5, 0.5, "cube");
        model.symmetries = SymmetrySet{};
    } else if (builtin == "sphere") {
        model = make_uv_sphere(0.3, 24, 16, "sphere");
    } else {
        throw Error(ErrorCode::ValidationError, "unknown builtin model '" + builtin + "'");
    }
    if (builtin == "drum" || builtin == "tube" || builtin == "sphere") {
        model.symmetries = cylindrical_symmetry(symmetry_k);
    }
    return model;
}

void add_pipeline_flags(CLI::App* cmd, PipelineConfig& config, bool with_seed = true) {
    cmd->add_option("--scale-inlier", config.scale_inlier_m, "Scale RANSAC inlier distance (m)")
        ->envname("SEAPOSE_SCALE_INLIER");
    cmd->add_option("--plane-inlier", config.plane_inlier_m, "Plane RANSAC inlier distance (m)")
        ->envname("SEAPOSE_PLANE_INLIER");
    cmd->add_option("--rot-inlier", config.rot_inlier_rad, "Rotation fusion inlier angle (rad)")
        ->envname("SEAPOSE_ROT_INLIER");
    cmd->add_option("--trans-inlier", config.trans_inlier_m,
                    "Translation fusion inlier distance (m)")
        ->envname("SEAPOSE_TRANS_INLIER");
    cmd->add_option("--icp-std-mult", config.icp_std_mult,
                    "ICP outlier cut in standard deviations")
        ->envname("SEAPOSE_ICP_STD_MULT");
    cmd->add_option("--icp-iterations", config.icp_max_iterations, "ICP iteration cap")
        ->envname("SEAPOSE_ICP_ITERATIONS");
    cmd->add_option("--iterations", config.ransac_iterations, "RANSAC iterations")
        ->envname("SEAPOSE_ITERATIONS");
    cmd->add_option("--model-samples", config.model_samples,
                    "Surface samples drawn from the reference model")
        ->envname("SEAPOSE_MODEL_SAMPLES");
    cmd->add_option("--min-mask-hits", config.min_mask_hits,
                    "Mask hits required to label a point object (0 = half the masked views)")
        ->envname("SEAPOSE_MIN_MASK_HITS");
    if (with_seed) cmd->add_option("--seed", config.seed, "Random seed")->envname("SEAPOSE_SEED");
    cmd->add_option("--threads", config.threads, "Worker threads (0 = hardware)")
        ->envname("SEAPOSE_THREADS");
    cmd->add_option_function<std::string>(
           "--fuse-reference",
           [&config](const std::string& v) {
               config.fuse_reference =
                   v == "medoid" ? FuseReference::Medoid : FuseReference::FirstPose;
           },
           "Reference rotation for symmetry alignment: first|medoid")
        ->check(CLI::IsMember({"first", "medoid"}))
        ->envname("SEAPOSE_FUSE_REFERENCE");
}

void add_synth_flags(CLI::App* cmd, SynthConfig& cfg) {
    cmd->add_option("--seed", cfg.seed, "Random seed")->envname("SEAPOSE_SEED");
    cmd->add_option("--cameras", cfg.n_cameras, "Number of cameras");
    cmd->add_option("--arc", cfg.arc_degrees, "Camera arc coverage (degrees)");
    cmd->add_option("--distance", cfg.camera_distance, "Nominal camera stand-off (m)");
    cmd->add_option("--true-scale", cfg.true_scale, "Meters per stored reconstruction unit");
    cmd->add_option("--burial", cfg.burial_fraction, "Burial fraction of oriented height");
    cmd->add_option("--rot-noise", cfg.hyp_rot_noise, "Hypothesis rotation noise (rad)");
    cmd->add_option("--trans-noise", cfg.hyp_trans_noise, "Hypothesis translation noise (m)");
    cmd->add_option("--outliers", cfg.outlier_fraction, "Fraction of hypotheses replaced");
    cmd->add_option("--cloud-noise", cfg.cloud_noise, "Cloud point noise (m)");
    cmd->add_option("--density", cfg.cloud_density, "Cloud density (points/m^2)");
    cmd->add_option("--tilt", cfg.floor_tilt, "Seafloor tilt (rad)");
    cmd->add_flag("--upright", cfg.upright, "Keep the model upright instead of a random pose");
    cmd->add_flag("--unlabeled", cfg.unlabeled_cloud,
                  "Strip cloud labels so the pipeline segments via masks");
}

void write_text(const std::string& path, const std::string& text) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seapose: multiview object pose aggregation and seafloor burial-depth estimation"};
    app.require_subcommand(1);

    // run
    std::string scene_path, model_path, out_path;
    PipelineConfig run_config;
    auto* run_cmd = app.add_subcommand("run", "Run the pose and burial pipeline on a scene");
    run_cmd->add_option("--scene", scene_path, "scene.json path")->required();
    run_cmd->add_option("--model", model_path, "Override the scene mesh with this OBJ");
    run_cmd->add_option("--out", out_path, "Report JSON path")->required();
    add_pipeline_flags(run_cmd, run_config);

    // synth
    std::string synth_model_path, synth_builtin = "drum", synth_out;
    int symmetry_k = 64;
    SynthConfig synth_config;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a ground-truthed synthetic scene");
    synth_cmd->add_option("--model", synth_model_path, "Reference mesh OBJ");
    synth_cmd->add_option("--builtin", synth_builtin, "Builtin model: drum|tube|cube|sphere");
    synth_cmd->add_option("--symmetry-k", symmetry_k, "Discretization of the symmetry axis");
    synth_cmd->add_option("--out", synth_out, "Output scene directory")->required();
    add_synth_flags(synth_cmd, synth_config);

    // eval
    std::string estimates_dir, gts_dir, eval_out;
    int eval_threads = 1;
    auto* eval_cmd = app.add_subcommand("eval", "Score run reports against ground truth scenes");
    eval_cmd->add_option("--estimates", estimates_dir, "Directory of <id>.json run reports")
        ->required();
    eval_cmd->add_option("--gts", gts_dir, "Directory of ground-truth scene directories")
        ->required();
    eval_cmd->add_option("--out", eval_out, "Output prefix for .json and .csv")->required();
    eval_cmd->add_option("--threads", eval_threads, "Worker threads")->envname("SEAPOSE_THREADS");

    // sweep
    std::string sweep_model_path, sweep_builtin = "drum", sweep_axis, sweep_out;
    std::vector<double> sweep_values;
    int sweep_seeds = 20;
    int sweep_symmetry_k = 64;
    SynthConfig sweep_base;
    PipelineConfig sweep_pconfig;
    auto* sweep_cmd = app.add_subcommand("sweep", "Vary one scene parameter and tabulate errors");
    sweep_cmd->add_option("--model", sweep_model_path, "Reference mesh OBJ");
    sweep_cmd->add_option("--builtin", sweep_builtin, "Builtin model: drum|tube|cube|sphere");
    sweep_cmd->add_option("--symmetry-k", sweep_symmetry_k, "Discretization of the symmetry axis");
    sweep_cmd->add_option("--axis", sweep_axis, "SynthConfig field to vary")->required();
    sweep_cmd->add_option("--values", sweep_values, "Values for the axis")->required();
    sweep_cmd->add_option("--runs", sweep_seeds, "Scenes per value");
    sweep_cmd->add_option("--out", sweep_out, "CSV output path")->required();
    add_synth_flags(sweep_cmd, sweep_base);
    add_pipeline_flags(sweep_cmd, sweep_pconfig, /*with_seed=*/false);  // --seed comes from synth

    // rate
    double rate_depth = 0.0;
    int dump_year = 0, observation_year = 0;
    auto* rate_cmd =
        app.add_subcommand("rate", "Sedimentation rate implied by a burial depth and two years");
    rate_cmd->add_option("--depth-m", rate_depth, "Burial depth (m)")->required();
    rate_cmd->add_option("--dump-year", dump_year, "Year the object reached the seafloor")
        ->required();
    rate_cmd->add_option("--observation-year", observation_year, "Year of the survey")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            if (run_config.threads <= 0) {
                run_config.threads = static_cast<int>(std::thread::hardware_concurrency());
            }
            return run_command(scene_path, model_path, run_config, out_path);
        }
        if (*synth_cmd) {
            ReferenceModel model = resolve_model(synth_model_path, synth_builtin, symmetry_k);
            auto [scene, gt] = generate_scene(model, synth_config);
            save_synth_scene(scene, gt, synth_out);
            std::printf("wrote %s\n", (fs::path(synth_out) / "scene.json").string().c_str());
            return 0;
        }
        if (*eval_cmd) {
            if (eval_threads <= 0) {
                eval_threads = static_cast<int>(std::thread::hardware_concurrency());
            }
            EvalResult result = evaluate(estimates_dir, gts_dir, eval_threads);
            write_text(eval_out + ".json", result.json);
            write_text(eval_out + ".csv", result.csv);
            std::printf("objects %d  instances %d  failed %d\n", result.n_objects,
                        result.n_instances, result.n_failed);
            std::printf("AR_VSD %.4f  AR_MSSD %.4f  AR_MSPD %.4f\n", result.report.ar_vsd,
                        result.report.ar_mssd, result.report.ar_mspd);
            std::printf("mean depth error %.4f m  mean ratio error %.4f\n",
                        result.report.mean_depth_error, result.report.mean_depth_ratio_error);
            return 0;
        }
        if (*sweep_cmd) {
            ReferenceModel model = resolve_model(sweep_model_path, sweep_builtin, sweep_symmetry_k);
            sweep_pconfig.seed = sweep_base.seed;
            auto rows = sweep(model, sweep_base, sweep_axis, sweep_values, sweep_seeds,
                              sweep_pconfig);
            write_text(sweep_out, sweep_csv(rows));
            std::printf("wrote %s\n", sweep_out.c_str());
            return 0;
        }
        if (*rate_cmd) {
            double rate = infer_sedimentation_rate(rate_depth, dump_year, observation_year);
            std::printf("%.6f cm/yr\n", rate);
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return error_exit_code(e);
    }
    return 0;
}
