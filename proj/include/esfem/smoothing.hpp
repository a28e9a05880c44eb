#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esfem/mesh.hpp"
#include "esfem/shape.hpp"

namespace esfem {

// Per-edge smoothing domain: each incident element donates a fixed fraction
// of its measure (one third per triangle, one sixth per tet).
struct SmoothingDomain {
    int edge = -1;
    double measure = 0.0;  // S_k, sum of the donated fractions
    struct Contribution {
        int element = -1;
        double fraction = 0.0;  // donated share of the element measure
    };
    std::vector<Contribution> contributions;
    // sorted union of the vertex sets of the incident elements
    std::vector<int> support_nodes;
    double weighted_radius = 0.0;    // contribution-weighted centroid radius (2D)
    double weighted_material = 1.0;  // contribution-weighted mean alpha
};

struct SmoothingDomainSet {
    std::vector<SmoothingDomain> domains;
    std::uint64_t mesh_hash = 0;  // guards against stale derived data
    double total_measure = 0.0;   // sum of S_k over all domains
};

// Smoothed shape-function gradient over one domain, one vector per support
// node (same order as SmoothingDomain::support_nodes).
struct SmoothedGradientMatrix {
    int edge = -1;
    std::vector<Vec3> gradients;
};

// Geometry-only build (weighted_material = 1 everywhere).
SmoothingDomainSet build_smoothing_domains(const Mesh& mesh,
                                           const EdgeTopology& edges);
// Also fills weighted_material from a per-element alpha.
SmoothingDomainSet build_smoothing_domains(const Mesh& mesh,
                                           const EdgeTopology& edges,
                                           const std::vector<double>& alpha);

// Weighted-average path: gradient at support node j is the contribution-
// weighted mean of the incident elements' shape gradients for j, divided by
// the domain measure.
SmoothedGradientMatrix smoothed_gradient_matrix(
    const SmoothingDomain& domain, const Mesh& mesh,
    const std::vector<GradientCoefficients>& element_gradients);

// Independent cross-check: integrates N times the outward normal over the
// explicit sub-domain boundary (triangles fanned from element centroids in
// 2D, barycentric wedges in 3D) with midpoint quadrature, which is exact for
// linear shape functions on flat facets. Must agree with
// smoothed_gradient_matrix to roundoff.
SmoothedGradientMatrix smoothed_gradient_boundary_oracle(
    const Mesh& mesh, const EdgeTopology& edges, const SmoothingDomain& domain);

// Geometric measure of the explicit sub-domain built by the oracle, for
// verifying that the fractional split tiles the mesh.
double oracle_domain_measure(const Mesh& mesh, const EdgeTopology& edges,
                             const SmoothingDomain& domain);

// Closedness defect: norm of the sum of (outward normal x facet measure) over
// the explicit domain boundary. Zero for a watertight construction.
double oracle_boundary_defect(const Mesh& mesh, const EdgeTopology& edges,
                              const SmoothingDomain& domain);

// Debug dump of domain geometry (edge, measure, boundary polygons) as JSON.
void dump_smoothing_domains(const Mesh& mesh, const EdgeTopology& edges,
                            const SmoothingDomainSet& set,
                            const std::string& path);

}  // namespace esfem
