#pragma once

#include "seapose/scene.hpp"

namespace seapose {

/// Closed cylinder, axis +z, centered at the origin, ring of `segments`
/// vertices at each cap plus cap centers. segments must be >= 3.
ReferenceModel make_cylinder(double radius, double height, int segments,
                             const std::string& name = "cylinder");

/// Axis-aligned box centered at the origin.
ReferenceModel make_box(double sx, double sy, double sz, const std::string& name = "box");

/// UV sphere centered at the origin.
ReferenceModel make_uv_sphere(double radius, int slices, int stacks,
                              const std::string& name = "sphere");

/// Cylindrical symmetry about +z with k steps, the default for all the
/// bodies of revolution this project targets.
SymmetrySet cylindrical_symmetry(int k = 64);

}  // namespace seapose
