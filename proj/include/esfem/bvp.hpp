#pragma once

#include <functional>
#include <string>
#include <vector>

#include "esfem/mesh.hpp"

namespace esfem {

using ScalarField = std::function<double(const Vec3&)>;

enum class BcKind { Dirichlet, Neumann, Robin };

inline const char* to_string(BcKind k) {
    switch (k) {
        case BcKind::Dirichlet: return "dirichlet";
        case BcKind::Neumann: return "neumann";
        case BcKind::Robin: return "robin";
    }
    return "dirichlet";
}

// Boundary condition a*dV/dn + gamma*V = q on all facets carrying the tag.
// Kind is pinned by the coefficient pattern: Dirichlet a=0, gamma!=0 (value
// q/gamma); Neumann a!=0, gamma=0; Robin a!=0, gamma!=0.
struct BoundaryCondition {
    int tag = 0;
    BcKind kind = BcKind::Dirichlet;
    double a = 0.0;
    double gamma = 1.0;
    ScalarField q;

    static BoundaryCondition dirichlet(int tag, double value);
    static BoundaryCondition dirichlet(int tag, ScalarField value);
    static BoundaryCondition neumann(int tag, double flux);
    static BoundaryCondition neumann(int tag, ScalarField flux);
    static BoundaryCondition robin(int tag, double a, double gamma, double q);
};

// Material coefficients, source and boundary data for the scalar
// electrostatic problem -div(alpha grad V) + beta V = f. Facets whose tag has
// no condition are natural (homogeneous Neumann).
struct BvpSpec {
    DimensionMode mode = DimensionMode::Cartesian3D;
    std::vector<double> alpha;  // per element, > 0
    std::vector<double> beta;   // per element
    ScalarField source;         // evaluated at element centroids
    std::vector<BoundaryCondition> boundary_conditions;
};

// Uniform coefficients, zero source, no boundary conditions.
BvpSpec uniform_spec(const Mesh& mesh, double alpha = 1.0, double beta = 0.0);

// Unit-cube benchmark: Laplace with V = 10 sin(pi x) sin(pi y) on the top
// face (tag 6) and V = 0 on the other five faces.
BvpSpec box_spec(const Mesh& mesh);

// Laplace with Dirichlet data offset + gradient . x on every boundary tag
// present in the mesh; a linear-element solver must reproduce the field
// exactly. 2D cylindrical meshes require gradient.x == 0 (fields affine in z).
BvpSpec patch_affine_spec(const Mesh& mesh, double offset, const Vec3& gradient);

// Checks all spec invariants against the mesh; throws Error(InvalidSpec).
void validate(const BvpSpec& spec, const Mesh& mesh);

}  // namespace esfem
