#include "esfem/smoothing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

namespace esfem {

namespace {

SmoothingDomainSet build_impl(const Mesh& mesh, const EdgeTopology& edges,
                              const std::vector<double>* alpha) {
    if (alpha && alpha->size() != mesh.elements.size()) {
        throw Error(ErrorCategory::InvalidSpec,
                    "per-element alpha length does not match the mesh");
    }
    const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
    const double share = tri ? 1.0 / 3.0 : 1.0 / 6.0;

    SmoothingDomainSet set;
    set.mesh_hash = content_hash(mesh);
    set.domains.reserve(edges.edges.size());
    for (int k = 0; k < edges.edge_count(); ++k) {
        SmoothingDomain domain;
        domain.edge = k;
        double weighted_r = 0.0, weighted_a = 0.0;
        for (int e : edges.incident_elements[k]) {
            const double measure = element_measure(mesh, e);
            const double fraction = measure * share;
            domain.contributions.push_back({e, fraction});
            domain.measure += fraction;
            weighted_r += fraction * element_centroid(mesh, e).x;
            weighted_a += fraction * (alpha ? (*alpha)[e] : 1.0);
            for (int v = 0; v < mesh.nodes_per_element(); ++v) {
                domain.support_nodes.push_back(mesh.elements[e][v]);
            }
        }
        std::sort(domain.support_nodes.begin(), domain.support_nodes.end());
        domain.support_nodes.erase(std::unique(domain.support_nodes.begin(),
                                               domain.support_nodes.end()),
                                   domain.support_nodes.end());
        domain.weighted_radius = tri ? weighted_r / domain.measure : 0.0;
        domain.weighted_material = weighted_a / domain.measure;
        set.total_measure += domain.measure;
        set.domains.push_back(std::move(domain));
    }
    return set;
}

// Sub-cell boundary face carrying its owning element (whose shape functions
// are integrated over it) and the outward normal scaled by the face measure.
struct OracleFace {
    std::array<Vec3, 3> verts;
    int vert_count = 0;
    int element = -1;
    Vec3 weighted_normal;  // outward unit normal times length / area
    Vec3 centroid;
};

struct OracleCell {
    std::array<Vec3, 4> verts;
    int vert_count = 0;
    int element = -1;
};

// Midpoints and centroids are always computed from index-sorted node lists so
// the same geometric point is bit-identical from every incident element;
// internal faces can then be matched exactly.
Vec3 point_mean(const Mesh& mesh, std::vector<int> nodes) {
    std::sort(nodes.begin(), nodes.end());
    Vec3 sum;
    for (int n : nodes) sum += mesh.nodes[n];
    return sum / static_cast<double>(nodes.size());
}

std::vector<OracleCell> domain_cells(const Mesh& mesh,
                                     const EdgeTopology& edges,
                                     const SmoothingDomain& domain) {
    const auto& edge = edges.edges[domain.edge];
    const Vec3 pa = mesh.nodes[edge[0]];
    const Vec3 pb = mesh.nodes[edge[1]];
    std::vector<OracleCell> cells;
    for (const auto& contribution : domain.contributions) {
        const int e = contribution.element;
        const auto& el = mesh.elements[e];
        if (mesh.mode == DimensionMode::Cylindrical2D) {
            const Vec3 g = point_mean(mesh, {el[0], el[1], el[2]});
            cells.push_back({{pa, pb, g, Vec3()}, 3, e});
        } else {
            const Vec3 g = point_mean(mesh, {el[0], el[1], el[2], el[3]});
            const Vec3 m = point_mean(mesh, {edge[0], edge[1]});
            // the two tet faces containing the edge give the wedge's face
            // centroids
            std::array<Vec3, 2> face_centroids;
            int found = 0;
            for (int skip = 0; skip < 4; ++skip) {
                std::vector<int> face;
                bool has_a = false, has_b = false;
                for (int v = 0; v < 4; ++v) {
                    if (v == skip) continue;
                    face.push_back(el[v]);
                    has_a |= el[v] == edge[0];
                    has_b |= el[v] == edge[1];
                }
                if (has_a && has_b) {
                    if (found == 2) {
                        throw Error(ErrorCategory::Internal,
                                    "edge contained in more than two faces");
                    }
                    face_centroids[found++] = point_mean(mesh, face);
                }
            }
            if (found != 2) {
                throw Error(ErrorCategory::Internal,
                            "edge not contained in exactly two element faces");
            }
            for (const Vec3& p : {pa, pb}) {
                for (const Vec3& f : face_centroids) {
                    cells.push_back({{p, m, f, g}, 4, e});
                }
            }
        }
    }
    return cells;
}

double cell_measure(const OracleCell& cell) {
    if (cell.vert_count == 3) {
        const Vec3 u = cell.verts[1] - cell.verts[0];
        const Vec3 v = cell.verts[2] - cell.verts[0];
        return 0.5 * std::abs(u.x * v.y - u.y * v.x);
    }
    const Vec3 u = cell.verts[1] - cell.verts[0];
    const Vec3 v = cell.verts[2] - cell.verts[0];
    const Vec3 w = cell.verts[3] - cell.verts[0];
    return std::abs(u.dot(v.cross(w))) / 6.0;
}

std::vector<OracleFace> cell_faces(const OracleCell& cell) {
    std::vector<OracleFace> faces;
    if (cell.vert_count == 3) {
        const Vec3 interior = (cell.verts[0] + cell.verts[1] + cell.verts[2]) / 3.0;
        constexpr std::array<std::array<int, 2>, 3> kSides = {
            {{0, 1}, {1, 2}, {2, 0}}};
        for (const auto& side : kSides) {
            OracleFace face;
            face.vert_count = 2;
            face.element = cell.element;
            face.verts[0] = cell.verts[side[0]];
            face.verts[1] = cell.verts[side[1]];
            const Vec3 d = face.verts[1] - face.verts[0];
            Vec3 normal(d.y, -d.x, 0.0);  // length-weighted already
            face.centroid = (face.verts[0] + face.verts[1]) * 0.5;
            if (normal.dot(face.centroid - interior) < 0.0) normal *= -1.0;
            face.weighted_normal = normal;
            faces.push_back(face);
        }
    } else {
        const Vec3 interior =
            (cell.verts[0] + cell.verts[1] + cell.verts[2] + cell.verts[3]) / 4.0;
        constexpr std::array<std::array<int, 3>, 4> kSides = {
            {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
        for (const auto& side : kSides) {
            OracleFace face;
            face.vert_count = 3;
            face.element = cell.element;
            for (int v = 0; v < 3; ++v) face.verts[v] = cell.verts[side[v]];
            Vec3 normal = (face.verts[1] - face.verts[0])
                              .cross(face.verts[2] - face.verts[0]) *
                          0.5;  // area-weighted
            face.centroid = (face.verts[0] + face.verts[1] + face.verts[2]) / 3.0;
            if (normal.dot(face.centroid - interior) < 0.0) normal *= -1.0;
            face.weighted_normal = normal;
            faces.push_back(face);
        }
    }
    return faces;
}

using FaceKey = std::array<double, 9>;

FaceKey face_key(const OracleFace& face) {
    std::array<std::array<double, 3>, 3> rows{};
    for (int v = 0; v < face.vert_count; ++v) {
        rows[v] = {face.verts[v].x, face.verts[v].y, face.verts[v].z};
    }
    if (face.vert_count == 2) {
        rows[2] = {0.0, 0.0, 0.0};
    }
    std::sort(rows.begin(), rows.begin() + face.vert_count);
    FaceKey key{};
    for (int v = 0; v < 3; ++v) {
        for (int c = 0; c < 3; ++c) key[v * 3 + c] = rows[v][c];
    }
    return key;
}

// Faces shared by two sub-cells are interior to the domain and drop out;
// what remains is the watertight domain boundary.
std::vector<OracleFace> outer_faces(const Mesh& mesh, const EdgeTopology& edges,
                                    const SmoothingDomain& domain) {
    std::map<FaceKey, std::vector<OracleFace>> by_key;
    for (const auto& cell : domain_cells(mesh, edges, domain)) {
        for (auto& face : cell_faces(cell)) {
            by_key[face_key(face)].push_back(face);
        }
    }
    std::vector<OracleFace> outer;
    for (auto& [key, group] : by_key) {
        if (group.size() == 1) {
            outer.push_back(group.front());
        } else if (group.size() != 2) {
            throw Error(ErrorCategory::Internal,
                        "smoothing-domain face shared by more than two cells");
        }
    }
    return outer;
}

double shape_value(const GradientCoefficients& g, int local, const Vec3& p) {
    return 1.0 / g.vertex_count + g.grads[local].dot(p - g.centroid);
}

}  // namespace

SmoothingDomainSet build_smoothing_domains(const Mesh& mesh,
                                           const EdgeTopology& edges) {
    return build_impl(mesh, edges, nullptr);
}

SmoothingDomainSet build_smoothing_domains(const Mesh& mesh,
                                           const EdgeTopology& edges,
                                           const std::vector<double>& alpha) {
    return build_impl(mesh, edges, &alpha);
}

SmoothedGradientMatrix smoothed_gradient_matrix(
    const SmoothingDomain& domain, const Mesh& mesh,
    const std::vector<GradientCoefficients>& element_gradients) {
    SmoothedGradientMatrix result;
    result.edge = domain.edge;
    result.gradients.assign(domain.support_nodes.size(), Vec3());
    for (const auto& contribution : domain.contributions) {
        if (contribution.element < 0 ||
            contribution.element >= static_cast<int>(element_gradients.size())) {
            throw Error(ErrorCategory::Internal,
                        "missing element gradients for smoothing domain");
        }
        const auto& g = element_gradients[contribution.element];
        const auto& el = mesh.elements[contribution.element];
        for (int v = 0; v < g.vertex_count; ++v) {
            const auto it = std::lower_bound(domain.support_nodes.begin(),
                                             domain.support_nodes.end(), el[v]);
            const auto slot = std::distance(domain.support_nodes.begin(), it);
            result.gradients[slot] += g.grads[v] * contribution.fraction;
        }
    }
    for (auto& grad : result.gradients) grad *= 1.0 / domain.measure;
    return result;
}

SmoothedGradientMatrix smoothed_gradient_boundary_oracle(
    const Mesh& mesh, const EdgeTopology& edges, const SmoothingDomain& domain) {
    SmoothedGradientMatrix result;
    result.edge = domain.edge;
    result.gradients.assign(domain.support_nodes.size(), Vec3());
    for (const auto& face : outer_faces(mesh, edges, domain)) {
        const GradientCoefficients g = element_gradients(mesh, face.element);
        const auto& el = mesh.elements[face.element];
        for (int v = 0; v < g.vertex_count; ++v) {
            const auto it = std::lower_bound(domain.support_nodes.begin(),
                                             domain.support_nodes.end(), el[v]);
            const auto slot = std::distance(domain.support_nodes.begin(), it);
            // midpoint rule, exact for a linear integrand on a flat facet
            result.gradients[slot] +=
                face.weighted_normal * shape_value(g, v, face.centroid);
        }
    }
    for (auto& grad : result.gradients) grad *= 1.0 / domain.measure;
    return result;
}

double oracle_domain_measure(const Mesh& mesh, const EdgeTopology& edges,
                             const SmoothingDomain& domain) {
    double total = 0.0;
    for (const auto& cell : domain_cells(mesh, edges, domain)) {
        total += cell_measure(cell);
    }
    return total;
}

double oracle_boundary_defect(const Mesh& mesh, const EdgeTopology& edges,
                              const SmoothingDomain& domain) {
    Vec3 sum;
    for (const auto& face : outer_faces(mesh, edges, domain)) {
        sum += face.weighted_normal;
    }
    return sum.norm();
}

void dump_smoothing_domains(const Mesh& mesh, const EdgeTopology& edges,
                            const SmoothingDomainSet& set,
                            const std::string& path) {
    using nlohmann::json;
    json doc;
    doc["format"] = "esfem-domains";
    doc["version"] = 1;
    doc["mode"] = to_string(mesh.mode);
    json domains = json::array();
    for (const auto& domain : set.domains) {
        json entry;
        entry["edge"] = json::array(
            {edges.edges[domain.edge][0], edges.edges[domain.edge][1]});
        entry["measure"] = domain.measure;
        entry["support_nodes"] = domain.support_nodes;
        json boundary = json::array();
        for (const auto& face : outer_faces(mesh, edges, domain)) {
            json polygon = json::array();
            for (int v = 0; v < face.vert_count; ++v) {
                polygon.push_back(json::array(
                    {face.verts[v].x, face.verts[v].y, face.verts[v].z}));
            }
            boundary.push_back(std::move(polygon));
        }
        entry["boundary"] = std::move(boundary);
        domains.push_back(std::move(entry));
    }
    doc["domains"] = std::move(domains);
    std::ofstream file(path);
    if (!file) {
        throw Error(ErrorCategory::FileNotFound,
                    "cannot open " + path + " for writing");
    }
    file << doc.dump(2) << '\n';
}

}  // namespace esfem
