#pragma once

#include <string>

#include "seapose/scene.hpp"

namespace seapose {

/// OBJ with vertices and triangular faces only. Computes the diameter on
/// load; symmetries are left empty (the scene file owns those).
ReferenceModel load_mesh(const std::string& path);
void save_mesh_obj(const ReferenceModel& model, const std::string& path);

/// ASCII PLY 1.0 with properties x, y, z and an optional integer label
/// (0 unlabeled, 1 object, 2 floor).
LabeledPointCloud load_cloud(const std::string& path);
void save_cloud_ply(const LabeledPointCloud& cloud, const std::string& path);

/// Binary PGM (P5), maxval <= 255; pixel > 0 means object.
BinaryMask load_mask(const std::string& path);
void save_mask_pgm(const BinaryMask& mask, const std::string& path);

/// Loads a scene.json and every file it references, fully validated.
/// Relative paths resolve against the scene file's directory.
SceneInput load_scene(const std::string& path);

/// Writes scene.json, model.obj, cloud.ply and masks/<camera id>.pgm into
/// `dir`. load_scene(save_scene(s)) reproduces s.
void save_scene(const SceneInput& scene, const std::string& dir);

}  // namespace seapose
