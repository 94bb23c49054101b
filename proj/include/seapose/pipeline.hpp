#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seapose/metrics.hpp"
#include "seapose/refine.hpp"
#include "seapose/scale.hpp"
#include "seapose/scene.hpp"
#include "seapose/seafloor.hpp"
#include "seapose/synth.hpp"

namespace seapose {

struct PipelineConfig {
    double scale_inlier_m = 0.15;
    double plane_inlier_m = 0.05;
    double rot_inlier_rad = 0.2;
    double trans_inlier_m = 0.15;  // fusion translation gate, reuses the scale threshold
    double icp_std_mult = 2.0;
    int icp_max_iterations = 50;
    double icp_rel_change_tol = 1e-6;
    int ransac_iterations = 500;
    int model_samples = 16000;
    int min_mask_hits = 0;  // 0 = half the masked views
    std::uint64_t seed = 0;
    int threads = 1;
    FuseReference fuse_reference = FuseReference::FirstPose;
};

enum class Stage {
    Load,
    Segment,
    Scale,
    Icp,
    Fuse,
    Plane,
    Done,
};

const char* stage_name(Stage stage);
int stage_exit_code(Stage stage);  // 10 parse, 11 validation, 20 scale, 21 icp, 22 fuse, 23 plane

struct StageError {
    Stage stage = Stage::Load;
    ErrorCode code = ErrorCode::ValidationError;
    std::string message;
};

struct SceneEstimate {
    std::optional<ScaleSolution> scale;
    std::optional<FusedPose> fused;
    std::optional<Plane> plane;
    std::optional<BurialResult> burial;
    std::optional<StageError> failure;
    std::map<std::string, double> diagnostics;  // inlier counts and fractions per stage
    std::map<std::string, double> timings_s;    // wall time per stage; logged, never serialized

    bool ok() const { return !failure.has_value(); }
};

/// Runs segment (when needed) -> scale -> ICP per hypothesis -> fuse ->
/// plane fit -> burial on an in-memory scene. Failures stop the pipeline and
/// are recorded on the estimate rather than thrown.
SceneEstimate run_pipeline(const SceneInput& scene, const PipelineConfig& config);

/// Deterministic JSON report for an estimate (timings and thread count are
/// deliberately left out so reruns are byte-identical).
std::string estimate_report_json(const SceneEstimate& estimate, const PipelineConfig& config);

/// File-level run: load scene (optionally overriding the mesh), run the
/// pipeline, write the report. Returns the process exit code.
int run_command(const std::string& scene_path, const std::string& model_path,
                const PipelineConfig& config, const std::string& out_path);

struct EvalResult {
    RecallReport report;
    int n_objects = 0;
    int n_instances = 0;
    int n_failed = 0;
    std::string csv;   // id,lat,lon,gt_depth_m,pred_depth_m,error_m,ratio_error
    std::string json;  // full report document
};

/// Scores run reports in estimates_dir against ground-truth scene dirs in
/// gts_dir (matched by name). Pose errors are computed per camera from the
/// per-view poses; failed estimates count as misses.
EvalResult evaluate(const std::string& estimates_dir, const std::string& gts_dir,
                    int threads = 1);

/// Centimeters of sediment per year implied by a burial depth and the years
/// an object was dumped and observed.
double infer_sedimentation_rate(double depth_m, int dump_year, int observation_year);

struct SweepRow {
    double value = 0.0;
    int n_seeds = 0;
    int n_failed = 0;
    double mean_depth_error = 0.0;
    double median_depth_error = 0.0;
    double mean_ratio_error = 0.0;
};

/// Runs the full pipeline across generated scenes while varying one
/// SynthConfig field; failed runs mark the row instead of aborting the sweep.
std::vector<SweepRow> sweep(const ReferenceModel& model, const SynthConfig& base,
                            const std::string& axis, const std::vector<double>& values,
                            int seeds_per_value, const PipelineConfig& config);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace seapose
