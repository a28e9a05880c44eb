#include "esfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "esfem/shape.hpp"

namespace esfem {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
// Two Dirichlet tags may meet at a node; their data must agree there.
constexpr double kDirichletConflictTol = 1e-9;

class SystemBuilder {
public:
    explicit SystemBuilder(int n) : rows_(n), rhs_(n, 0.0) {}

    void add(int i, int j, double value) { rows_[i][j] += value; }
    void add_rhs(int i, double value) { rhs_[i] += value; }

    SparseSystem finish() {
        SparseSystem system;
        system.n = static_cast<int>(rows_.size());
        system.row_ptr.reserve(rows_.size() + 1);
        system.row_ptr.push_back(0);
        for (auto& row : rows_) {
            // the diagonal always exists so Dirichlet elimination can pivot
            row.try_emplace(static_cast<int>(&row - rows_.data()), 0.0);
            for (const auto& [col, value] : row) {
                system.col_idx.push_back(col);
                system.values.push_back(value);
            }
            system.row_ptr.push_back(static_cast<int>(system.col_idx.size()));
        }
        system.rhs = std::move(rhs_);
        return system;
    }

private:
    std::vector<std::map<int, double>> rows_;
    std::vector<double> rhs_;
};

// measure weight shared by stiffness, mass and load integrals
double element_weight(const Mesh& mesh, const GradientCoefficients& g) {
    return mesh.mode == DimensionMode::Cylindrical2D
               ? kTwoPi * g.centroid_radius
               : 1.0;
}

// consistent element mass and one-point load, both element-wise for either
// assembly path
void add_reaction_and_load(SystemBuilder& builder, const Mesh& mesh,
                           const BvpSpec& spec) {
    const int npe = mesh.nodes_per_element();
    for (int e = 0; e < mesh.element_count(); ++e) {
        const GradientCoefficients g = element_gradients(mesh, e);
        const double weight = element_weight(mesh, g);
        const auto& el = mesh.elements[e];
        const double beta = spec.beta[e];
        if (beta != 0.0) {
            // int N_i N_j over the element: measure/12 (tri) or /20 (tet)
            // times (1 + delta_ij)
            const double scale =
                beta * weight * g.measure / (npe == 3 ? 12.0 : 20.0);
            for (int i = 0; i < npe; ++i) {
                for (int j = 0; j < npe; ++j) {
                    builder.add(el[i], el[j], scale * (i == j ? 2.0 : 1.0));
                }
            }
        }
        const double f = spec.source(g.centroid);
        if (f != 0.0) {
            const double share = f * weight * g.measure / npe;
            for (int i = 0; i < npe; ++i) builder.add_rhs(el[i], share);
        }
    }
}

struct FacetGeometry {
    std::array<int, 3> nodes{-1, -1, -1};
    int node_count = 0;
    // weighted integrals of N_i and N_i N_j over the facet, including the
    // 2 pi r factor in cylindrical mode
    std::array<double, 3> int_n{};
    std::array<std::array<double, 3>, 3> int_nn{};
    Vec3 midpoint;
};

FacetGeometry facet_geometry(const Mesh& mesh, const BoundaryFacet& facet) {
    FacetGeometry geo;
    if (mesh.mode == DimensionMode::Cylindrical2D) {
        geo.node_count = 2;
        geo.nodes = {facet.nodes[0], facet.nodes[1], -1};
        const Vec3 p1 = mesh.nodes[facet.nodes[0]];
        const Vec3 p2 = mesh.nodes[facet.nodes[1]];
        const double len = (p2 - p1).norm();
        const double r1 = p1.x, r2 = p2.x;
        // exact integrals of r N_i and r N_i N_j along the segment
        geo.int_n[0] = kTwoPi * len * (2.0 * r1 + r2) / 6.0;
        geo.int_n[1] = kTwoPi * len * (r1 + 2.0 * r2) / 6.0;
        geo.int_nn[0][0] = kTwoPi * len * (3.0 * r1 + r2) / 12.0;
        geo.int_nn[1][1] = kTwoPi * len * (r1 + 3.0 * r2) / 12.0;
        geo.int_nn[0][1] = geo.int_nn[1][0] = kTwoPi * len * (r1 + r2) / 12.0;
        geo.midpoint = (p1 + p2) * 0.5;
    } else {
        geo.node_count = 3;
        geo.nodes = facet.nodes;
        const Vec3 p1 = mesh.nodes[facet.nodes[0]];
        const Vec3 p2 = mesh.nodes[facet.nodes[1]];
        const Vec3 p3 = mesh.nodes[facet.nodes[2]];
        const double area = 0.5 * (p2 - p1).cross(p3 - p1).norm();
        for (int i = 0; i < 3; ++i) {
            geo.int_n[i] = area / 3.0;
            for (int j = 0; j < 3; ++j) {
                geo.int_nn[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
            }
        }
        geo.midpoint = (p1 + p2 + p3) / 3.0;
    }
    return geo;
}

}  // namespace

std::vector<double> SparseSystem::multiply(const std::vector<double>& x) const {
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            sum += values[p] * x[col_idx[p]];
        }
        y[i] = sum;
    }
    return y;
}

double SparseSystem::entry(int i, int j) const {
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
        if (col_idx[p] == j) return values[p];
    }
    return 0.0;
}

double SparseSystem::max_abs_value() const {
    double best = 0.0;
    for (double v : values) best = std::max(best, std::abs(v));
    return best;
}

double SparseSystem::symmetry_defect() const {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            worst = std::max(worst,
                             std::abs(values[p] - entry(col_idx[p], i)));
        }
    }
    return worst;
}

std::vector<std::vector<double>> SparseSystem::to_dense() const {
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            dense[i][col_idx[p]] = values[p];
        }
    }
    return dense;
}

std::array<std::array<double, 4>, 4> element_stiffness_fem(const Mesh& mesh,
                                                           int element,
                                                           double alpha,
                                                           bool unit_weight) {
    const GradientCoefficients g = element_gradients(mesh, element);
    const double weight = unit_weight ? 1.0 : element_weight(mesh, g);
    std::array<std::array<double, 4>, 4> block{};
    for (int i = 0; i < g.vertex_count; ++i) {
        for (int j = 0; j < g.vertex_count; ++j) {
            block[i][j] =
                alpha * weight * g.measure * g.grads[i].dot(g.grads[j]);
        }
    }
    return block;
}

SparseSystem assemble_fem(const Mesh& mesh, const BvpSpec& spec) {
    validate(spec, mesh);
    SystemBuilder builder(mesh.node_count());
    const int npe = mesh.nodes_per_element();
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto block = element_stiffness_fem(mesh, e, spec.alpha[e]);
        const auto& el = mesh.elements[e];
        for (int i = 0; i < npe; ++i) {
            for (int j = 0; j < npe; ++j) {
                builder.add(el[i], el[j], block[i][j]);
            }
        }
    }
    add_reaction_and_load(builder, mesh, spec);
    return builder.finish();
}

SparseSystem assemble_esfem(const Mesh& mesh, const EdgeTopology& edges,
                            const SmoothingDomainSet& domains,
                            const BvpSpec& spec) {
    validate(spec, mesh);
    if (domains.mesh_hash != content_hash(mesh)) {
        throw Error(ErrorCategory::Internal,
                    "smoothing domains were built from a different mesh");
    }
    if (domains.domains.size() != edges.edges.size()) {
        throw Error(ErrorCategory::Internal,
                    "smoothing domains do not match the edge topology");
    }
    std::vector<GradientCoefficients> gradients;
    gradients.reserve(mesh.elements.size());
    for (int e = 0; e < mesh.element_count(); ++e) {
        gradients.push_back(element_gradients(mesh, e));
    }

    const bool cylindrical = mesh.mode == DimensionMode::Cylindrical2D;
    SystemBuilder builder(mesh.node_count());
    std::vector<Vec3> accum;
    for (const auto& domain : domains.domains) {
        const auto& support = domain.support_nodes;
        accum.assign(support.size(), Vec3());
        double total_weight = 0.0;
        // Fold material and, in cylindrical mode, the 2 pi r centroid factor
        // into each element's donated weight. The smoothed gradient is then
        // the weighted average and the domain stiffness the rank-1 form
        // below; with uniform coefficients this reduces to the plain
        // measure-average times alpha S_k (2D: times 2 pi r_k).
        for (const auto& contribution : domain.contributions) {
            const auto& g = gradients[contribution.element];
            const double w =
                contribution.fraction * spec.alpha[contribution.element] *
                (cylindrical ? kTwoPi * g.centroid_radius : 1.0);
            total_weight += w;
            const auto& el = mesh.elements[contribution.element];
            for (int v = 0; v < g.vertex_count; ++v) {
                const auto it =
                    std::lower_bound(support.begin(), support.end(), el[v]);
                accum[std::distance(support.begin(), it)] += g.grads[v] * w;
            }
        }
        for (std::size_t i = 0; i < support.size(); ++i) {
            for (std::size_t j = 0; j < support.size(); ++j) {
                builder.add(support[i], support[j],
                            accum[i].dot(accum[j]) / total_weight);
            }
        }
    }
    add_reaction_and_load(builder, mesh, spec);
    return builder.finish();
}

void apply_boundary_conditions(SparseSystem& system, const Mesh& mesh,
                               const BvpSpec& spec) {
    validate(spec, mesh);
    if (system.n != mesh.node_count()) {
        throw Error(ErrorCategory::Internal,
                    "system size does not match the mesh");
    }
    std::map<int, const BoundaryCondition*> by_tag;
    for (const auto& bc : spec.boundary_conditions) by_tag[bc.tag] = &bc;

    // Flux and Robin data are stated against dV/dn, so the surface integrals
    // carry the material coefficient of the facet's owning element. Boundary
    // facets have exactly one owner (validated); interior collisions in this
    // map are never queried.
    std::map<std::array<int, 3>, int> facet_owner;
    {
        const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
        const int nf = tri ? 3 : 4;
        for (int e = 0; e < mesh.element_count(); ++e) {
            const auto& el = mesh.elements[e];
            for (int f = 0; f < nf; ++f) {
                std::array<int, 3> key{-1, -1, -1};
                if (tri) {
                    key[1] = el[f];
                    key[2] = el[(f + 1) % 3];
                } else {
                    int w = 0;
                    for (int v = 0; v < 4; ++v) {
                        if (v != f) key[w++] = el[v];
                    }
                }
                std::sort(key.begin(), key.end());
                facet_owner[key] = e;
            }
        }
    }
    auto owning_alpha = [&](const BoundaryFacet& facet) {
        std::array<int, 3> key = facet.nodes;
        std::sort(key.begin(), key.end());
        const auto it = facet_owner.find(key);
        if (it == facet_owner.end()) {
            throw Error(ErrorCategory::Internal,
                        "boundary facet without an owning element");
        }
        return spec.alpha[it->second];
    };

    // Robin terms enter the matrix through the same deterministic builder
    // mechanism: collect first, then merge facet by facet.
    std::map<int, double> dirichlet;
    std::map<int, int> dirichlet_source_tag;
    for (const auto& facet : mesh.boundary_facets) {
        const auto it = by_tag.find(facet.tag);
        if (it == by_tag.end()) continue;  // natural boundary
        const BoundaryCondition& bc = *it->second;
        if (bc.kind == BcKind::Dirichlet) {
            for (int v = 0; v < (mesh.mode == DimensionMode::Cylindrical2D ? 2
                                                                           : 3);
                 ++v) {
                const int node = facet.nodes[v];
                const double value = bc.q(mesh.nodes[node]) / bc.gamma;
                const auto existing = dirichlet.find(node);
                if (existing == dirichlet.end()) {
                    dirichlet.emplace(node, value);
                    dirichlet_source_tag.emplace(node, bc.tag);
                } else if (std::abs(existing->second - value) >
                           kDirichletConflictTol *
                               std::max({1.0, std::abs(existing->second),
                                         std::abs(value)})) {
                    throw Error(
                        ErrorCategory::InvalidSpec,
                        "node " + std::to_string(node) +
                            " receives conflicting Dirichlet values from tags " +
                            std::to_string(dirichlet_source_tag[node]) +
                            " and " + std::to_string(bc.tag));
                }
            }
            continue;
        }
        const FacetGeometry geo = facet_geometry(mesh, facet);
        const double alpha = owning_alpha(facet);
        const double q_over_a = alpha * bc.q(geo.midpoint) / bc.a;
        for (int i = 0; i < geo.node_count; ++i) {
            system.rhs[geo.nodes[i]] += q_over_a * geo.int_n[i];
        }
        if (bc.kind == BcKind::Robin) {
            const double gamma_over_a = alpha * bc.gamma / bc.a;
            for (int i = 0; i < geo.node_count; ++i) {
                for (int j = 0; j < geo.node_count; ++j) {
                    const double value = gamma_over_a * geo.int_nn[i][j];
                    // Robin facets are rare; a linear scan per entry is fine
                    bool found = false;
                    for (int p = system.row_ptr[geo.nodes[i]];
                         p < system.row_ptr[geo.nodes[i] + 1]; ++p) {
                        if (system.col_idx[p] == geo.nodes[j]) {
                            system.values[p] += value;
                            found = true;
                            break;
                        }
                    }
                    if (!found) {
                        throw Error(ErrorCategory::Internal,
                                    "Robin facet couples nodes outside the "
                                    "assembled sparsity pattern");
                    }
                }
            }
        }
    }

    // symmetric elimination: move constrained columns to the rhs, then unit
    // rows and columns
    for (int i = 0; i < system.n; ++i) {
        const bool constrained = dirichlet.count(i) > 0;
        for (int p = system.row_ptr[i]; p < system.row_ptr[i + 1]; ++p) {
            const int j = system.col_idx[p];
            const auto it = dirichlet.find(j);
            if (constrained) {
                system.values[p] = (i == j) ? 1.0 : 0.0;
            } else if (it != dirichlet.end()) {
                system.rhs[i] -= system.values[p] * it->second;
                system.values[p] = 0.0;
            }
        }
    }
    for (const auto& [node, value] : dirichlet) system.rhs[node] = value;
    system.dirichlet_map = std::move(dirichlet);
}

void dump_system(const SparseSystem& system, const std::string& matrix_path,
                 const std::string& rhs_path) {
    std::ofstream matrix(matrix_path);
    if (!matrix) {
        throw Error(ErrorCategory::FileNotFound,
                    "cannot open " + matrix_path + " for writing");
    }
    char line[128];
    for (int i = 0; i < system.n; ++i) {
        for (int p = system.row_ptr[i]; p < system.row_ptr[i + 1]; ++p) {
            std::snprintf(line, sizeof line, "%d %d %.17g\n", i,
                          system.col_idx[p], system.values[p]);
            matrix << line;
        }
    }
    std::ofstream rhs(rhs_path);
    if (!rhs) {
        throw Error(ErrorCategory::FileNotFound,
                    "cannot open " + rhs_path + " for writing");
    }
    for (double v : system.rhs) {
        std::snprintf(line, sizeof line, "%.17g\n", v);
        rhs << line;
    }
}

}  // namespace esfem
