#pragma once

#include "fusionnet/mesh_io.hpp"

// Procedural closed meshes used by the synthetic dataset, the camera rig and tests.
namespace fusionnet::shapes {

[[nodiscard]] TriangleMesh box(const Vec3& extent);

// Regular icosahedron on the unit sphere, 12 vertices and 20 faces in a fixed order.
[[nodiscard]] TriangleMesh icosahedron();

// Midpoint subdivision of the icosahedron, vertices projected onto the unit sphere.
[[nodiscard]] TriangleMesh icosphere(int subdivisions);

// Square base of side `base` on z = -height/2, apex at z = +height/2.
[[nodiscard]] TriangleMesh pyramid(double base, double height);

[[nodiscard]] TriangleMesh cylinder(int segments, double radius, double height);

[[nodiscard]] TriangleMesh torus(int major_segments, int minor_segments, double major_radius,
                                 double minor_radius);

// Two triangles spanning [-half, half]^2 in the plane z = offset.
[[nodiscard]] TriangleMesh square(double half, double offset);

}  // namespace fusionnet::shapes
