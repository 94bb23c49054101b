#include "seapose/scene.hpp"

#include <algorithm>
#include <cmath>

#include "seapose/util.hpp"

namespace seapose {

bool LabeledPointCloud::has_object_labels() const {
    return std::any_of(labels.begin(), labels.end(),
                       [](PointLabel l) { return l == PointLabel::Object; });
}

std::vector<Vec3> LabeledPointCloud::points_with_label(PointLabel label) const {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] == label) out.push_back(points[i]);
    }
    return out;
}

double mesh_diameter(const std::vector<Vec3>& vertices) {
    double best_sq = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        for (std::size_t j = i + 1; j < vertices.size(); ++j) {
            best_sq = std::max(best_sq, (vertices[i] - vertices[j]).squaredNorm());
        }
    }
    return std::sqrt(best_sq);
}

static double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

double mesh_surface_area(const ReferenceModel& model) {
    double area = 0.0;
    for (const auto& tri : model.triangles) {
        area += triangle_area(model.vertices[tri[0]], model.vertices[tri[1]],
                              model.vertices[tri[2]]);
    }
    return area;
}

void validate_model(const ReferenceModel& model) {
    if (model.vertices.empty()) {
        throw Error(ErrorCode::ValidationError, "mesh '" + model.name + "' has no vertices");
    }
    if (model.triangles.empty()) {
        throw Error(ErrorCode::ValidationError, "mesh '" + model.name + "' has no triangles");
    }
    const int n = static_cast<int>(model.vertices.size());
    for (const auto& tri : model.triangles) {
        for (int idx : tri) {
            if (idx < 0 || idx >= n) {
                throw Error(ErrorCode::ValidationError,
                            "mesh '" + model.name + "' triangle index " + std::to_string(idx) +
                                " out of range [0, " + std::to_string(n) + ")");
            }
        }
    }
    for (const auto& axis : model.symmetries.axes) {
        if (axis.k < 2) {
            throw Error(ErrorCode::ValidationError, "symmetry axis discretization k must be >= 2");
        }
        if (axis.dir.norm() < 1e-12) {
            throw Error(ErrorCode::ValidationError, "symmetry axis direction must be nonzero");
        }
    }
    for (const auto& t : model.symmetries.discrete) {
        if (t.translation.norm() > 1e-9) {
            throw Error(ErrorCode::ValidationError,
                        "discrete symmetry transforms must be rotation-only");
        }
    }
}

std::vector<Vec3> sample_surface(const ReferenceModel& model, int n, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::ValidationError, "sample count must be >= 1");
    validate_model(model);

    std::vector<double> cum_area(model.triangles.size());
    double total = 0.0;
    for (std::size_t i = 0; i < model.triangles.size(); ++i) {
        const auto& tri = model.triangles[i];
        total += triangle_area(model.vertices[tri[0]], model.vertices[tri[1]],
                               model.vertices[tri[2]]);
        cum_area[i] = total;
    }
    if (total <= 0.0) {
        throw Error(ErrorCode::ValidationError,
                    "mesh '" + model.name + "' has zero surface area");
    }

    Rng rng(seed);
    std::vector<Vec3> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform() * total;
        auto it = std::lower_bound(cum_area.begin(), cum_area.end(), u);
        std::size_t ti = static_cast<std::size_t>(it - cum_area.begin());
        if (ti >= model.triangles.size()) ti = model.triangles.size() - 1;
        const auto& tri = model.triangles[ti];
        double r1 = rng.uniform();
        double r2 = rng.uniform();
        if (r1 + r2 > 1.0) {  // reflect into the lower barycentric triangle
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        const Vec3& a = model.vertices[tri[0]];
        const Vec3& b = model.vertices[tri[1]];
        const Vec3& c = model.vertices[tri[2]];
        samples.push_back(a + r1 * (b - a) + r2 * (c - a));
    }
    return samples;
}

std::vector<RigidTransform> expand_symmetries(const SymmetrySet& s) {
    std::vector<RigidTransform> out;
    out.push_back(RigidTransform::identity());
    for (const auto& d : s.discrete) {
        if (rotation_angle_between(d.rotation, Quat::Identity()) < 1e-12) continue;
        out.emplace_back(d.rotation, Vec3::Zero());
    }
    for (const auto& axis : s.axes) {
        for (int m = 1; m < axis.k; ++m) {
            double angle = 2.0 * M_PI * m / axis.k;
            out.emplace_back(quat_from_axis_angle(axis.dir, angle), Vec3::Zero());
        }
    }
    return out;
}

}  // namespace seapose
