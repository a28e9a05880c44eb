#include "esfem/bvp.hpp"

#include <cmath>
#include <set>
#include <string>

namespace esfem {

BoundaryCondition BoundaryCondition::dirichlet(int tag, double value) {
    return dirichlet(tag, ScalarField([value](const Vec3&) { return value; }));
}

BoundaryCondition BoundaryCondition::dirichlet(int tag, ScalarField value) {
    BoundaryCondition bc;
    bc.tag = tag;
    bc.kind = BcKind::Dirichlet;
    bc.a = 0.0;
    bc.gamma = 1.0;
    bc.q = std::move(value);
    return bc;
}

BoundaryCondition BoundaryCondition::neumann(int tag, double flux) {
    return neumann(tag, ScalarField([flux](const Vec3&) { return flux; }));
}

BoundaryCondition BoundaryCondition::neumann(int tag, ScalarField flux) {
    BoundaryCondition bc;
    bc.tag = tag;
    bc.kind = BcKind::Neumann;
    bc.a = 1.0;
    bc.gamma = 0.0;
    bc.q = std::move(flux);
    return bc;
}

BoundaryCondition BoundaryCondition::robin(int tag, double a, double gamma,
                                           double q) {
    BoundaryCondition bc;
    bc.tag = tag;
    bc.kind = BcKind::Robin;
    bc.a = a;
    bc.gamma = gamma;
    bc.q = [q](const Vec3&) { return q; };
    return bc;
}

BvpSpec uniform_spec(const Mesh& mesh, double alpha, double beta) {
    BvpSpec spec;
    spec.mode = mesh.mode;
    spec.alpha.assign(mesh.elements.size(), alpha);
    spec.beta.assign(mesh.elements.size(), beta);
    spec.source = [](const Vec3&) { return 0.0; };
    return spec;
}

BvpSpec box_spec(const Mesh& mesh) {
    if (mesh.mode != DimensionMode::Cartesian3D) {
        throw Error(ErrorCategory::InvalidSpec,
                    "the box benchmark needs a cartesian3d mesh");
    }
    BvpSpec spec = uniform_spec(mesh);
    spec.boundary_conditions.push_back(BoundaryCondition::dirichlet(
        kTagZMax, ScalarField([](const Vec3& p) {
            return 10.0 * std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
        })));
    for (int tag : {kTagXMin, kTagXMax, kTagYMin, kTagYMax, kTagZMin}) {
        spec.boundary_conditions.push_back(
            BoundaryCondition::dirichlet(tag, 0.0));
    }
    return spec;
}

BvpSpec patch_affine_spec(const Mesh& mesh, double offset,
                          const Vec3& gradient) {
    if (mesh.mode == DimensionMode::Cylindrical2D && gradient.x != 0.0) {
        throw Error(ErrorCategory::InvalidSpec,
                    "cylindrical patch fields must not vary with r");
    }
    BvpSpec spec = uniform_spec(mesh);
    std::set<int> tags;
    for (const auto& facet : mesh.boundary_facets) tags.insert(facet.tag);
    for (int tag : tags) {
        spec.boundary_conditions.push_back(BoundaryCondition::dirichlet(
            tag, ScalarField([offset, gradient](const Vec3& p) {
                return offset + gradient.dot(p);
            })));
    }
    return spec;
}

void validate(const BvpSpec& spec, const Mesh& mesh) {
    if (spec.mode != mesh.mode) {
        throw Error(ErrorCategory::InvalidSpec,
                    "spec dimension mode does not match the mesh");
    }
    const auto elements = static_cast<std::size_t>(mesh.element_count());
    if (spec.alpha.size() != elements || spec.beta.size() != elements) {
        throw Error(ErrorCategory::InvalidSpec,
                    "alpha/beta must have one entry per element");
    }
    for (std::size_t e = 0; e < spec.alpha.size(); ++e) {
        if (!(spec.alpha[e] > 0.0)) {
            throw Error(ErrorCategory::InvalidSpec,
                        "alpha must be positive (element " + std::to_string(e) +
                            ")");
        }
    }
    std::set<int> mesh_tags;
    for (const auto& facet : mesh.boundary_facets) mesh_tags.insert(facet.tag);
    std::set<int> seen;
    for (const auto& bc : spec.boundary_conditions) {
        if (!mesh_tags.count(bc.tag)) {
            throw Error(ErrorCategory::InvalidSpec,
                        "boundary tag " + std::to_string(bc.tag) +
                            " does not appear in the mesh");
        }
        if (!seen.insert(bc.tag).second) {
            throw Error(ErrorCategory::InvalidSpec,
                        "boundary tag " + std::to_string(bc.tag) +
                            " has two conditions");
        }
        const bool has_a = bc.a != 0.0, has_gamma = bc.gamma != 0.0;
        if (!has_a && !has_gamma) {
            throw Error(ErrorCategory::InvalidSpec,
                        "boundary tag " + std::to_string(bc.tag) +
                            ": a and gamma cannot both be zero");
        }
        const BcKind expected = !has_a  ? BcKind::Dirichlet
                                : !has_gamma ? BcKind::Neumann
                                             : BcKind::Robin;
        if (bc.kind != expected) {
            throw Error(ErrorCategory::InvalidSpec,
                        "boundary tag " + std::to_string(bc.tag) +
                            ": kind does not match the (a, gamma) pattern");
        }
        if (!bc.q) {
            throw Error(ErrorCategory::InvalidSpec,
                        "boundary tag " + std::to_string(bc.tag) +
                            ": missing q data");
        }
    }
    if (!spec.source) {
        throw Error(ErrorCategory::InvalidSpec, "missing source field");
    }
}

}  // namespace esfem
