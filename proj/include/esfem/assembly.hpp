#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "esfem/bvp.hpp"
#include "esfem/mesh.hpp"
#include "esfem/smoothing.hpp"

namespace esfem {

enum class Method { FEM, ESFEM };

inline const char* to_string(Method m) {
    return m == Method::FEM ? "fem" : "esfem";
}

// Symmetric sparse system K phi = b in CSR form. Entries are accumulated in a
// fixed element-then-local-index order, so assembly is bit-reproducible.
struct SparseSystem {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;
    std::vector<double> rhs;
    // constrained node -> value, filled by apply_boundary_conditions
    std::map<int, double> dirichlet_map;

    std::vector<double> multiply(const std::vector<double>& x) const;
    double entry(int i, int j) const;  // 0.0 when outside the pattern
    double max_abs_value() const;
    // max |K_ij - K_ji| over the stored pattern
    double symmetry_defect() const;
    std::vector<std::vector<double>> to_dense() const;
};

// Classical element-wise assembly. 2D cylindrical entries use the one-point
// centroid radius rule, which is exact here because the integrand is linear
// in r.
SparseSystem assemble_fem(const Mesh& mesh, const BvpSpec& spec);

// Smoothing-domain assembly: the stiffness of each edge domain is the rank-1
// form (sum_e w_e grad N)(...)^T / (sum_e w_e) over its support nodes, where
// w_e folds the donated measure fraction, the element material, and in
// cylindrical mode the 2 pi r centroid weight. Reaction and load terms are
// element-wise, identical to the FEM path. Throws Error(Internal) if the
// domain set was built from a different mesh.
SparseSystem assemble_esfem(const Mesh& mesh, const EdgeTopology& edges,
                            const SmoothingDomainSet& domains,
                            const BvpSpec& spec);

// Dense stiffness of one element (3x3 or 4x4 block in the element's node
// order). unit_weight replaces the cylindrical 2 pi r factor by 1 for
// Cartesian-limit checks; it is never used by assemble_fem itself.
std::array<std::array<double, 4>, 4> element_stiffness_fem(
    const Mesh& mesh, int element, double alpha, bool unit_weight = false);

// Applies surface terms (Neumann, Robin) and then Dirichlet constraints by
// symmetric elimination: constrained columns move to the rhs, constrained
// rows and columns are zeroed with a unit diagonal. Keeps K symmetric.
void apply_boundary_conditions(SparseSystem& system, const Mesh& mesh,
                               const BvpSpec& spec);

// Coordinate-triplet text dump of K ("i j value" per line) and b (one value
// per line) for external verification.
void dump_system(const SparseSystem& system, const std::string& matrix_path,
                 const std::string& rhs_path);

}  // namespace esfem
