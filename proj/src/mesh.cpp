#include "esfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "esfem/rng.hpp"

namespace esfem {

namespace {

constexpr std::array<std::array<int, 2>, 3> kTriEdges = {{{0, 1}, {0, 2}, {1, 2}}};
constexpr std::array<std::array<int, 2>, 6> kTetEdges = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// local facet vertex tuples (edges of a triangle, faces of a tet)
constexpr std::array<std::array<int, 3>, 3> kTriFacets = {
    {{0, 1, -1}, {0, 2, -1}, {1, 2, -1}}};
constexpr std::array<std::array<int, 3>, 4> kTetFacets = {
    {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};

double signed_measure(const Mesh& mesh, const ElementNodes& el) {
    const auto& n = mesh.nodes;
    if (mesh.mode == DimensionMode::Cylindrical2D) {
        const Vec3 u = n[el[1]] - n[el[0]];
        const Vec3 v = n[el[2]] - n[el[0]];
        return 0.5 * (u.x * v.y - u.y * v.x);
    }
    const Vec3 u = n[el[1]] - n[el[0]];
    const Vec3 v = n[el[2]] - n[el[0]];
    const Vec3 w = n[el[3]] - n[el[0]];
    return u.cross(v).dot(w) / 6.0;
}

FacetNodes sorted_facet(FacetNodes f) {
    if (f[2] < 0) {
        if (f[0] > f[1]) std::swap(f[0], f[1]);
    } else {
        std::sort(f.begin(), f.end());
    }
    return f;
}

// sorted facet -> number of owning elements
std::map<FacetNodes, int> facet_ownership(const Mesh& mesh) {
    std::map<FacetNodes, int> count;
    const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
    for (const auto& el : mesh.elements) {
        const int nf = tri ? 3 : 4;
        for (int f = 0; f < nf; ++f) {
            FacetNodes fn{-1, -1, -1};
            for (int v = 0; v < (tri ? 2 : 3); ++v) {
                fn[v] = el[tri ? kTriFacets[f][v] : kTetFacets[f][v]];
            }
            ++count[sorted_facet(fn)];
        }
    }
    return count;
}

}  // namespace

double QualityReport::fraction_above(double threshold) const {
    if (per_element_ratio.empty()) return 0.0;
    std::int64_t n = 0;
    for (double r : per_element_ratio) {
        if (r > threshold) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(per_element_ratio.size());
}

void finalize_mesh(Mesh& mesh) {
    for (auto& el : mesh.elements) {
        if (signed_measure(mesh, el) < 0.0) {
            std::swap(el[1], el[2]);
        }
    }
    mesh.node_flags.assign(mesh.nodes.size(), false);
    for (const auto& [facet, owners] : facet_ownership(mesh)) {
        if (owners == 1) {
            for (int v : facet) {
                if (v >= 0) mesh.node_flags[v] = true;
            }
        }
    }
}

void validate_mesh(const Mesh& mesh) {
    const int nn = mesh.node_count();
    const int npe = mesh.nodes_per_element();
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& el = mesh.elements[e];
        for (int v = 0; v < npe; ++v) {
            if (el[v] < 0 || el[v] >= nn) {
                throw Error(ErrorCategory::InvalidMesh,
                            "element " + std::to_string(e) +
                                " references node " + std::to_string(el[v]));
            }
            for (int w = v + 1; w < npe; ++w) {
                if (el[v] == el[w]) {
                    throw Error(ErrorCategory::InvalidMesh,
                                "element " + std::to_string(e) +
                                    " repeats node " + std::to_string(el[v]));
                }
            }
        }
        if (npe == 3 && el[3] != -1) {
            throw Error(ErrorCategory::InvalidMesh,
                        "triangle element " + std::to_string(e) +
                            " carries a fourth node");
        }
        if (signed_measure(mesh, el) <= 0.0) {
            throw Error(ErrorCategory::InvalidMesh,
                        "element " + std::to_string(e) +
                            " has non-positive measure");
        }
    }
    if (mesh.mode == DimensionMode::Cylindrical2D) {
        for (int i = 0; i < nn; ++i) {
            if (mesh.nodes[i].x < 0.0) {
                throw Error(ErrorCategory::InvalidMesh,
                            "node " + std::to_string(i) +
                                " has negative radial coordinate");
            }
        }
    }
    const auto owners = facet_ownership(mesh);
    for (std::size_t i = 0; i < mesh.boundary_facets.size(); ++i) {
        const auto key = sorted_facet(mesh.boundary_facets[i].nodes);
        const auto it = owners.find(key);
        if (it == owners.end()) {
            throw Error(ErrorCategory::InvalidMesh,
                        "boundary facet " + std::to_string(i) +
                            " is not a facet of any element");
        }
        if (it->second != 1) {
            throw Error(ErrorCategory::InvalidMesh,
                        "boundary facet " + std::to_string(i) +
                            " is shared by " + std::to_string(it->second) +
                            " elements");
        }
    }
    if (mesh.node_flags.size() != mesh.nodes.size()) {
        throw Error(ErrorCategory::InvalidMesh, "node_flags size mismatch");
    }
    std::vector<bool> expected(mesh.nodes.size(), false);
    for (const auto& [facet, count] : owners) {
        if (count == 1) {
            for (int v : facet) {
                if (v >= 0) expected[v] = true;
            }
        }
    }
    for (int i = 0; i < nn; ++i) {
        if (mesh.node_flags[i] != expected[i]) {
            throw Error(ErrorCategory::InvalidMesh,
                        "node " + std::to_string(i) +
                            " has a stale boundary flag");
        }
    }
}

Mesh generate_structured_mesh(DimensionMode mode, const Divisions& div,
                              const BoundingBox& extents) {
    if (div.nx < 1 || div.ny < 1 ||
        (mode == DimensionMode::Cartesian3D && div.nz < 1)) {
        throw Error(ErrorCategory::InvalidMesh,
                    "divisions must be at least 1 per axis");
    }
    const Vec3 span = extents.hi - extents.lo;
    const bool tri = mode == DimensionMode::Cylindrical2D;
    if (span.x <= 0.0 || span.y <= 0.0 || (!tri && span.z <= 0.0)) {
        throw Error(ErrorCategory::InvalidMesh, "degenerate extents");
    }
    if (tri && extents.lo.x < 0.0) {
        throw Error(ErrorCategory::InvalidMesh,
                    "cylindrical extents require r >= 0");
    }

    Mesh mesh;
    mesh.mode = mode;
    if (tri) {
        const int nr = div.nx, nz = div.ny;
        auto id = [nr](int i, int j) { return j * (nr + 1) + i; };
        for (int j = 0; j <= nz; ++j) {
            for (int i = 0; i <= nr; ++i) {
                mesh.nodes.emplace_back(extents.lo.x + span.x * i / nr,
                                        extents.lo.y + span.y * j / nz, 0.0);
            }
        }
        for (int j = 0; j < nz; ++j) {
            for (int i = 0; i < nr; ++i) {
                const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1),
                          d = id(i, j + 1);
                mesh.elements.push_back({a, b, c, -1});
                mesh.elements.push_back({a, c, d, -1});
            }
        }
        for (int j = 0; j < nz; ++j) {
            mesh.boundary_facets.push_back({{id(0, j), id(0, j + 1), -1}, kTagXMin});
            mesh.boundary_facets.push_back({{id(nr, j), id(nr, j + 1), -1}, kTagXMax});
        }
        for (int i = 0; i < nr; ++i) {
            mesh.boundary_facets.push_back({{id(i, 0), id(i + 1, 0), -1}, kTagYMin});
            mesh.boundary_facets.push_back({{id(i, nz), id(i + 1, nz), -1}, kTagYMax});
        }
    } else {
        const int nx = div.nx, ny = div.ny, nz = div.nz;
        auto id = [nx, ny](int i, int j, int k) {
            return (k * (ny + 1) + j) * (nx + 1) + i;
        };
        for (int k = 0; k <= nz; ++k) {
            for (int j = 0; j <= ny; ++j) {
                for (int i = 0; i <= nx; ++i) {
                    mesh.nodes.emplace_back(extents.lo.x + span.x * i / nx,
                                            extents.lo.y + span.y * j / ny,
                                            extents.lo.z + span.z * k / nz);
                }
            }
        }
        // Kuhn split: six tets per cell sharing the main diagonal; each tet
        // walks from the low corner to the high corner along an axis
        // permutation.
        constexpr std::array<std::array<int, 3>, 6> kPerms = {
            {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    for (const auto& p : kPerms) {
                        std::array<int, 3> c = {i, j, k};
                        ElementNodes el;
                        el[0] = id(c[0], c[1], c[2]);
                        ++c[p[0]];
                        el[1] = id(c[0], c[1], c[2]);
                        ++c[p[1]];
                        el[2] = id(c[0], c[1], c[2]);
                        el[3] = id(i + 1, j + 1, k + 1);
                        mesh.elements.push_back(el);
                    }
                }
            }
        }
        // Each boundary cell face splits along its low-low to high-high
        // diagonal, matching the Kuhn tet faces.
        auto face = [&mesh](int a, int b, int c, int d, int tag) {
            mesh.boundary_facets.push_back({{a, b, c}, tag});
            mesh.boundary_facets.push_back({{a, c, d}, tag});
        };
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < ny; ++j) {
                face(id(0, j, k), id(0, j + 1, k), id(0, j + 1, k + 1),
                     id(0, j, k + 1), kTagXMin);
                face(id(nx, j, k), id(nx, j + 1, k), id(nx, j + 1, k + 1),
                     id(nx, j, k + 1), kTagXMax);
            }
        }
        for (int k = 0; k < nz; ++k) {
            for (int i = 0; i < nx; ++i) {
                face(id(i, 0, k), id(i + 1, 0, k), id(i + 1, 0, k + 1),
                     id(i, 0, k + 1), kTagYMin);
                face(id(i, ny, k), id(i + 1, ny, k), id(i + 1, ny, k + 1),
                     id(i, ny, k + 1), kTagYMax);
            }
        }
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                face(id(i, j, 0), id(i + 1, j, 0), id(i + 1, j + 1, 0),
                     id(i, j + 1, 0), kTagZMin);
                face(id(i, j, nz), id(i + 1, j, nz), id(i + 1, j + 1, nz),
                     id(i, j + 1, nz), kTagZMax);
            }
        }
    }
    finalize_mesh(mesh);
    validate_mesh(mesh);
    return mesh;
}

Mesh generate_structured_mesh(DimensionMode mode, int divisions) {
    return generate_structured_mesh(mode, Divisions(divisions),
                                    {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
}

EdgeTopology extract_edges(const Mesh& mesh) {
    struct Entry {
        int a, b, element;
        bool operator<(const Entry& o) const {
            if (a != o.a) return a < o.a;
            if (b != o.b) return b < o.b;
            return element < o.element;
        }
    };
    std::vector<Entry> entries;
    const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
    entries.reserve(mesh.elements.size() * (tri ? 3 : 6));
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& el = mesh.elements[e];
        const int ne = tri ? 3 : 6;
        for (int s = 0; s < ne; ++s) {
            int a = el[tri ? kTriEdges[s][0] : kTetEdges[s][0]];
            int b = el[tri ? kTriEdges[s][1] : kTetEdges[s][1]];
            if (a > b) std::swap(a, b);
            entries.push_back({a, b, e});
        }
    }
    std::sort(entries.begin(), entries.end());
    EdgeTopology topo;
    for (std::size_t i = 0; i < entries.size();) {
        const int a = entries[i].a, b = entries[i].b;
        topo.edges.push_back({a, b});
        topo.incident_elements.emplace_back();
        while (i < entries.size() && entries[i].a == a && entries[i].b == b) {
            topo.incident_elements.back().push_back(entries[i].element);
            ++i;
        }
    }
    return topo;
}

Mesh perturb_interior_nodes(const Mesh& mesh, double magnitude,
                            std::uint64_t seed) {
    if (magnitude < 0.0 || magnitude >= 0.5) {
        throw Error(ErrorCategory::InvalidMesh,
                    "perturbation magnitude must lie in [0, 0.5)");
    }
    const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
    const EdgeTopology topo = extract_edges(mesh);

    // mean incident edge length per node, from the unperturbed coordinates
    std::vector<double> length_sum(mesh.nodes.size(), 0.0);
    std::vector<int> length_count(mesh.nodes.size(), 0);
    for (const auto& edge : topo.edges) {
        const double len = (mesh.nodes[edge[1]] - mesh.nodes[edge[0]]).norm();
        length_sum[edge[0]] += len;
        ++length_count[edge[0]];
        length_sum[edge[1]] += len;
        ++length_count[edge[1]];
    }

    std::vector<std::vector<int>> node_elements(mesh.nodes.size());
    for (int e = 0; e < mesh.element_count(); ++e) {
        for (int v = 0; v < mesh.nodes_per_element(); ++v) {
            node_elements[mesh.elements[e][v]].push_back(e);
        }
    }

    Mesh out = mesh;
    UniformRng rng(seed);
    constexpr int kRetries = 32;
    constexpr int kClampSteps = 48;
    auto valid_around = [&](int node) {
        for (int e : node_elements[node]) {
            if (signed_measure(out, out.elements[e]) <= 0.0) return false;
        }
        return !tri || out.nodes[node].x >= 0.0;
    };

    for (int i = 0; i < mesh.node_count(); ++i) {
        if (mesh.node_flags[i]) continue;
        const double h = length_count[i] > 0
                             ? length_sum[i] / length_count[i]
                             : 0.0;
        Vec3 disp;
        bool placed = false;
        for (int attempt = 0; attempt < kRetries && !placed; ++attempt) {
            Vec3 dir;
            if (tri) {
                const double theta = rng.next(0.0, 2.0 * M_PI);
                dir = {std::cos(theta), std::sin(theta), 0.0};
            } else {
                const double c = rng.next(-1.0, 1.0);
                const double phi = rng.next(0.0, 2.0 * M_PI);
                const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
                dir = {s * std::cos(phi), s * std::sin(phi), c};
            }
            disp = dir * rng.next(0.0, magnitude * h);
            out.nodes[i] = mesh.nodes[i] + disp;
            placed = valid_around(i);
        }
        for (int step = 0; step < kClampSteps && !placed; ++step) {
            disp *= 0.5;
            out.nodes[i] = mesh.nodes[i] + disp;
            placed = valid_around(i);
        }
        if (!placed) {
            out.nodes[i] = mesh.nodes[i];
            if (!valid_around(i)) {
                throw Error(ErrorCategory::InvalidMesh,
                            "perturbation could not keep elements around node " +
                                std::to_string(i) + " positively oriented");
            }
        }
    }
    validate_mesh(out);
    return out;
}

QualityReport quality(const Mesh& mesh) {
    QualityReport report;
    report.histogram.assign(QualityReport::kBinCount, 0);
    const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
    for (const auto& el : mesh.elements) {
        double lo = 0.0, hi = 0.0;
        const int ne = tri ? 3 : 6;
        for (int s = 0; s < ne; ++s) {
            const int a = el[tri ? kTriEdges[s][0] : kTetEdges[s][0]];
            const int b = el[tri ? kTriEdges[s][1] : kTetEdges[s][1]];
            const double len = (mesh.nodes[b] - mesh.nodes[a]).norm();
            lo = (s == 0) ? len : std::min(lo, len);
            hi = (s == 0) ? len : std::max(hi, len);
        }
        const double ratio = hi / lo;
        report.per_element_ratio.push_back(ratio);
        int bin = static_cast<int>((ratio - 1.0) / QualityReport::kBinWidth);
        bin = std::clamp(bin, 0, QualityReport::kBinCount - 1);
        ++report.histogram[bin];
    }
    const EdgeTopology topo = extract_edges(mesh);
    double total = 0.0;
    for (const auto& edge : topo.edges) {
        total += (mesh.nodes[edge[1]] - mesh.nodes[edge[0]]).norm();
    }
    report.mean_edge_length =
        topo.edges.empty() ? 0.0 : total / static_cast<double>(topo.edges.size());
    return report;
}

std::uint64_t content_hash(const Mesh& mesh) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    const int mode = static_cast<int>(mesh.mode);
    mix(&mode, sizeof mode);
    for (const auto& p : mesh.nodes) {
        mix(&p.x, sizeof p.x);
        mix(&p.y, sizeof p.y);
        mix(&p.z, sizeof p.z);
    }
    for (const auto& el : mesh.elements) mix(el.data(), sizeof el);
    for (const auto& f : mesh.boundary_facets) {
        mix(f.nodes.data(), sizeof f.nodes);
        mix(&f.tag, sizeof f.tag);
    }
    return h;
}

double element_measure(const Mesh& mesh, int element) {
    return signed_measure(mesh, mesh.elements[element]);
}

Vec3 element_centroid(const Mesh& mesh, int element) {
    const auto& el = mesh.elements[element];
    Vec3 c;
    const int n = mesh.nodes_per_element();
    for (int v = 0; v < n; ++v) c += mesh.nodes[el[v]];
    return c / static_cast<double>(n);
}

}  // namespace esfem
