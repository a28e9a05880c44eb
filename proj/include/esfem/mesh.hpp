#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "esfem/types.hpp"

namespace esfem {

// Element node tuple; entry [3] is -1 for triangles.
using ElementNodes = std::array<int, 4>;
// Boundary facet node tuple; entry [2] is -1 for 2D segment facets.
using FacetNodes = std::array<int, 3>;

struct BoundaryFacet {
    FacetNodes nodes{-1, -1, -1};
    int tag = 0;
};

// Simplicial mesh: triangles in the (r, z) half-plane for Cylindrical2D,
// tetrahedra for Cartesian3D. Coordinates are meters. Elements are kept
// positively oriented; node_flags marks nodes that lie on any facet owned by
// exactly one element.
struct Mesh {
    DimensionMode mode = DimensionMode::Cartesian3D;
    std::vector<Vec3> nodes;
    std::vector<ElementNodes> elements;
    std::vector<BoundaryFacet> boundary_facets;
    std::vector<bool> node_flags;

    int nodes_per_element() const {
        return mode == DimensionMode::Cylindrical2D ? 3 : 4;
    }
    int edges_per_element() const {
        return mode == DimensionMode::Cylindrical2D ? 3 : 6;
    }
    int node_count() const { return static_cast<int>(nodes.size()); }
    int element_count() const { return static_cast<int>(elements.size()); }
};

// Unique element edges, sorted lexicographically by (low node, high node),
// with ascending incident-element lists.
struct EdgeTopology {
    std::vector<std::array<int, 2>> edges;
    std::vector<std::vector<int>> incident_elements;

    int edge_count() const { return static_cast<int>(edges.size()); }
};

struct QualityReport {
    // max/min edge length per element
    std::vector<double> per_element_ratio;
    // counts per ratio bin: kBinCount-1 bins of width kBinWidth starting at
    // 1.0, final bin collects everything past the last edge
    std::vector<std::int64_t> histogram;
    double mean_edge_length = 0.0;

    static constexpr double kBinWidth = 0.25;
    static constexpr int kBinCount = 13;

    double bin_lower(int b) const { return 1.0 + kBinWidth * b; }
    // fraction of elements whose ratio strictly exceeds the threshold
    double fraction_above(double threshold) const;
};

struct BoundingBox {
    Vec3 lo;
    Vec3 hi;
};

// Axis divisions for structured generation; nz ignored in 2D (nx = radial,
// ny = axial there).
struct Divisions {
    int nx = 1;
    int ny = 1;
    int nz = 1;

    Divisions() = default;
    Divisions(int n) : nx(n), ny(n), nz(n) {}
    Divisions(int a, int b, int c) : nx(a), ny(b), nz(c) {}
};

// Face tags used by the structured generator: 2D {1:r-min, 2:r-max, 3:z-min,
// 4:z-max}; 3D {1:x-min, 2:x-max, 3:y-min, 4:y-max, 5:z-min, 6:z-max}.
inline constexpr int kTagXMin = 1, kTagXMax = 2, kTagYMin = 3, kTagYMax = 4,
                     kTagZMin = 5, kTagZMax = 6;

Mesh generate_structured_mesh(DimensionMode mode, const Divisions& divisions,
                              const BoundingBox& extents);
// unit square / unit cube
Mesh generate_structured_mesh(DimensionMode mode, int divisions);

EdgeTopology extract_edges(const Mesh& mesh);

// Displace interior nodes by a seeded random offset of length at most
// magnitude times the node's mean incident edge length, rejecting (and
// finally clamping) moves that would invert an element. Pure function of
// (mesh, magnitude, seed).
Mesh perturb_interior_nodes(const Mesh& mesh, double magnitude,
                            std::uint64_t seed);

QualityReport quality(const Mesh& mesh);

// Checks every Mesh invariant; throws Error(InvalidMesh) with a diagnostic.
void validate_mesh(const Mesh& mesh);

// Orients elements positively and recomputes node_flags from topology.
void finalize_mesh(Mesh& mesh);

// FNV-1a over coordinates, connectivity and facet tags; used to detect stale
// derived data (smoothing domains built from a different mesh).
std::uint64_t content_hash(const Mesh& mesh);

double element_measure(const Mesh& mesh, int element);
Vec3 element_centroid(const Mesh& mesh, int element);

}  // namespace esfem
