#include "esfem/shape.hpp"

#include <cmath>

#include "esfem/mesh.hpp"

namespace esfem {

GradientCoefficients triangle_gradients(const Vec3& a, const Vec3& b,
                                        const Vec3& c) {
    const double two_area =
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (!(two_area > 0.0)) {
        throw Error(ErrorCategory::InvalidMesh,
                    "degenerate or negatively oriented triangle");
    }
    GradientCoefficients g;
    g.vertex_count = 3;
    g.measure = 0.5 * two_area;
    // N_i linear with N_i(x_j) = delta_ij; gradient components are the
    // classic (z_j - z_k, r_k - r_j) / 2S cyclic pattern.
    g.grads[0] = Vec3(b.y - c.y, c.x - b.x, 0.0) / two_area;
    g.grads[1] = Vec3(c.y - a.y, a.x - c.x, 0.0) / two_area;
    g.grads[2] = Vec3(a.y - b.y, b.x - a.x, 0.0) / two_area;
    g.centroid = (a + b + c) / 3.0;
    g.centroid_radius = g.centroid.x;
    return g;
}

GradientCoefficients tet_gradients(const Vec3& a, const Vec3& b, const Vec3& c,
                                   const Vec3& d) {
    const Vec3 u = b - a, v = c - a, w = d - a;
    const double det = u.dot(v.cross(w));
    if (!(det > 0.0)) {
        throw Error(ErrorCategory::InvalidMesh,
                    "degenerate or negatively oriented tet");
    }
    GradientCoefficients g;
    g.vertex_count = 4;
    g.measure = det / 6.0;
    g.grads[1] = v.cross(w) / det;
    g.grads[2] = w.cross(u) / det;
    g.grads[3] = u.cross(v) / det;
    g.grads[0] = (g.grads[1] + g.grads[2] + g.grads[3]) * -1.0;
    g.centroid = (a + b + c + d) / 4.0;
    return g;
}

GradientCoefficients element_gradients(const Mesh& mesh, int element) {
    const auto& el = mesh.elements[element];
    const auto& n = mesh.nodes;
    if (mesh.mode == DimensionMode::Cylindrical2D) {
        return triangle_gradients(n[el[0]], n[el[1]], n[el[2]]);
    }
    return tet_gradients(n[el[0]], n[el[1]], n[el[2]], n[el[3]]);
}

}  // namespace esfem
