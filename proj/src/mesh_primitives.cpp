#include "seapose/mesh_primitives.hpp"

#include <cmath>

namespace seapose {

ReferenceModel make_cylinder(double radius, double height, int segments, const std::string& name) {
    ReferenceModel m;
    m.name = name;
    const double hz = height / 2.0;
    // ring vertices: bottom [0, k), top [k, 2k); centers at 2k (bottom), 2k+1 (top)
    for (int ring = 0; ring < 2; ++ring) {
        double z = ring == 0 ? -hz : hz;
        for (int i = 0; i < segments; ++i) {
            double a = 2.0 * M_PI * i / segments;
            m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
        }
    }
    int bottom_center = 2 * segments;
    int top_center = 2 * segments + 1;
    m.vertices.emplace_back(0.0, 0.0, -hz);
    m.vertices.emplace_back(0.0, 0.0, hz);

    for (int i = 0; i < segments; ++i) {
        int j = (i + 1) % segments;
        int b0 = i, b1 = j;
        int t0 = segments + i, t1 = segments + j;
        m.triangles.push_back({b0, b1, t1});
        m.triangles.push_back({b0, t1, t0});
        m.triangles.push_back({bottom_center, b1, b0});
        m.triangles.push_back({top_center, t0, t1});
    }
    m.symmetries = cylindrical_symmetry();
    m.diameter = mesh_diameter(m.vertices);
    return m;
}

ReferenceModel make_box(double sx, double sy, double sz, const std::string& name) {
    ReferenceModel m;
    m.name = name;
    const double x = sx / 2.0, y = sy / 2.0, z = sz / 2.0;
    m.vertices = {
        {-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
        {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z},
    };
    m.triangles = {
        {0, 2, 1}, {0, 3, 2},  // bottom
        {4, 5, 6}, {4, 6, 7},  // top
        {0, 1, 5}, {0, 5, 4},  // -y
        {2, 3, 7}, {2, 7, 6},  // +y
        {1, 2, 6}, {1, 6, 5},  // +x
        {3, 0, 4}, {3, 4, 7},  // -x
    };
    m.diameter = mesh_diameter(m.vertices);
    return m;
}

ReferenceModel make_uv_sphere(double radius, int slices, int stacks, const std::string& name) {
    ReferenceModel m;
    m.name = name;
    // poles + interior rings
    m.vertices.emplace_back(0.0, 0.0, radius);   // 0: north
    m.vertices.emplace_back(0.0, 0.0, -radius);  // 1: south
    for (int s = 1; s < stacks; ++s) {
        double phi = M_PI * s / stacks;  // from +z
        double z = radius * std::cos(phi);
        double r = radius * std::sin(phi);
        for (int i = 0; i < slices; ++i) {
            double a = 2.0 * M_PI * i / slices;
            m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), z);
        }
    }
    auto ring_vertex = [&](int ring, int i) { return 2 + ring * slices + (i % slices); };
    for (int i = 0; i < slices; ++i) {
        m.triangles.push_back({0, ring_vertex(0, i), ring_vertex(0, i + 1)});
        m.triangles.push_back({1, ring_vertex(stacks - 2, i + 1), ring_vertex(stacks - 2, i)});
    }
    for (int s = 0; s + 1 < stacks - 1; ++s) {
        for (int i = 0; i < slices; ++i) {
            int a = ring_vertex(s, i), b = ring_vertex(s, i + 1);
            int c = ring_vertex(s + 1, i), d = ring_vertex(s + 1, i + 1);
            m.triangles.push_back({a, b, d});
            m.triangles.push_back({a, d, c});
        }
    }
    m.diameter = mesh_diameter(m.vertices);
    return m;
}

SymmetrySet cylindrical_symmetry(int k) {
    SymmetrySet s;
    s.axes.push_back({Vec3(0.0, 0.0, 1.0), k});
    return s;
}

}  // namespace seapose
