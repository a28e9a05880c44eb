#pragma once

#include <array>

#include "esfem/types.hpp"

namespace esfem {

// Constant gradients of the linear simplex shape functions, plus the element
// measure and centroid data both assembly paths need. For triangles grads[3]
// is zero and the gradient lives in the (r, z) components.
struct GradientCoefficients {
    std::array<Vec3, 4> grads{};
    double measure = 0.0;     // area (2D, in-plane) or volume (3D)
    Vec3 centroid;
    double centroid_radius = 0.0;  // (r1+r2+r3)/3, 2D only

    int vertex_count = 0;
};

// Triangle in the (r, z) plane given as (r, z, 0) points. Throws
// Error(InvalidMesh) on a degenerate (zero-area) triangle.
GradientCoefficients triangle_gradients(const Vec3& a, const Vec3& b,
                                        const Vec3& c);

// Throws Error(InvalidMesh) on a degenerate (zero-volume) tet.
GradientCoefficients tet_gradients(const Vec3& a, const Vec3& b, const Vec3& c,
                                   const Vec3& d);

// Gradients of element e of the mesh, in its stored node order.
GradientCoefficients element_gradients(const struct Mesh& mesh, int element);

}  // namespace esfem
