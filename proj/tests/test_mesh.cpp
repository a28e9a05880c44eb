#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "esfem/mesh.hpp"

using namespace esfem;

namespace {

Mesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    Mesh mesh;
    mesh.mode = DimensionMode::Cylindrical2D;
    mesh.nodes = {a, b, c};
    mesh.elements = {{0, 1, 2, -1}};
    finalize_mesh(mesh);
    return mesh;
}

Mesh two_tets() {
    Mesh mesh;
    mesh.mode = DimensionMode::Cartesian3D;
    mesh.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.3, 0.3, -1}};
    mesh.elements = {{0, 1, 2, 3}, {0, 1, 2, 4}};
    finalize_mesh(mesh);
    return mesh;
}

// every vertex pair of every element, deduplicated
std::set<std::pair<int, int>> brute_force_edges(const Mesh& mesh) {
    std::set<std::pair<int, int>> pairs;
    const int npe = mesh.nodes_per_element();
    for (const auto& el : mesh.elements) {
        for (int i = 0; i < npe; ++i) {
            for (int j = i + 1; j < npe; ++j) {
                pairs.emplace(std::min(el[i], el[j]), std::max(el[i], el[j]));
            }
        }
    }
    return pairs;
}

}  // namespace

TEST_CASE("structured unit cube with one division is the minimal split") {
    const Mesh mesh = generate_structured_mesh(DimensionMode::Cartesian3D, 1);
    CHECK(mesh.node_count() == 8);
    CHECK(mesh.element_count() == 6);
    for (int i = 0; i < 8; ++i) CHECK(mesh.node_flags[i]);
    const EdgeTopology topo = extract_edges(mesh);
    CHECK(topo.edge_count() == 19);
    double volume = 0.0;
    for (int e = 0; e < 6; ++e) volume += element_measure(mesh, e);
    CHECK(volume == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("structured 2x2 rectangle counts") {
    const Mesh mesh = generate_structured_mesh(DimensionMode::Cylindrical2D, 2);
    CHECK(mesh.node_count() == 9);
    CHECK(mesh.element_count() == 8);
    int boundary = 0;
    for (bool f : mesh.node_flags) boundary += f ? 1 : 0;
    CHECK(boundary == 8);  // all but the centre node
}

TEST_CASE("structured cube n=4 against the brute-force edge enumeration") {
    const Mesh mesh = generate_structured_mesh(DimensionMode::Cartesian3D, 4);
    CHECK(mesh.node_count() == 125);
    CHECK(mesh.element_count() == 384);
    const EdgeTopology topo = extract_edges(mesh);
    const auto pairs = brute_force_edges(mesh);
    CHECK(topo.edge_count() == 604);
    REQUIRE(topo.edge_count() == static_cast<int>(pairs.size()));
    int k = 0;
    for (const auto& [a, b] : pairs) {
        CHECK(topo.edges[k][0] == a);
        CHECK(topo.edges[k][1] == b);
        ++k;
    }
}

TEST_CASE("boundary facet tags cover each box face") {
    const Mesh mesh = generate_structured_mesh(DimensionMode::Cartesian3D, 2);
    std::map<int, int> per_tag;
    for (const auto& facet : mesh.boundary_facets) ++per_tag[facet.tag];
    for (int tag = kTagXMin; tag <= kTagZMax; ++tag) {
        CHECK(per_tag[tag] == 8);  // 2x2 cells, two triangles each
    }
    const Mesh rect = generate_structured_mesh(DimensionMode::Cylindrical2D, 3);
    per_tag.clear();
    for (const auto& facet : rect.boundary_facets) ++per_tag[facet.tag];
    for (int tag = kTagXMin; tag <= kTagYMax; ++tag) CHECK(per_tag[tag] == 3);
}

TEST_CASE("anisotropic divisions") {
    const Mesh mesh = generate_structured_mesh(
        DimensionMode::Cartesian3D, Divisions(2, 3, 4),
        BoundingBox{{0, 0, 0}, {2, 3, 4}});
    CHECK(mesh.node_count() == 3 * 4 * 5);
    CHECK(mesh.element_count() == 2 * 3 * 4 * 6);
    double volume = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) {
        volume += element_measure(mesh, e);
    }
    CHECK(volume == doctest::Approx(24.0).epsilon(1e-13));
}

TEST_CASE("generator rejects bad input") {
    CHECK_THROWS_AS(generate_structured_mesh(DimensionMode::Cartesian3D, 0),
                    Error);
    CHECK_THROWS_AS(
        generate_structured_mesh(DimensionMode::Cylindrical2D, Divisions(2),
                                 BoundingBox{{0, 0, 0}, {0, 1, 0}}),
        Error);
    // cylindrical meshes cannot cross the axis
    CHECK_THROWS_AS(
        generate_structured_mesh(DimensionMode::Cylindrical2D, Divisions(2),
                                 BoundingBox{{-0.5, 0, 0}, {1, 1, 0}}),
        Error);
}

TEST_CASE("edge extraction of single elements") {
    const Mesh tri = single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
    const EdgeTopology tri_topo = extract_edges(tri);
    REQUIRE(tri_topo.edge_count() == 3);
    for (const auto& incident : tri_topo.incident_elements) {
        CHECK(incident == std::vector<int>{0});
    }

    Mesh tet;
    tet.mode = DimensionMode::Cartesian3D;
    tet.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    tet.elements = {{0, 1, 2, 3}};
    finalize_mesh(tet);
    const EdgeTopology tet_topo = extract_edges(tet);
    REQUIRE(tet_topo.edge_count() == 6);
    for (const auto& incident : tet_topo.incident_elements) {
        CHECK(incident == std::vector<int>{0});
    }
}

TEST_CASE("two tets sharing a face") {
    const Mesh mesh = two_tets();
    const EdgeTopology topo = extract_edges(mesh);
    REQUIRE(topo.edge_count() == 9);
    const std::set<std::pair<int, int>> shared = {{0, 1}, {0, 2}, {1, 2}};
    for (int k = 0; k < 9; ++k) {
        const auto key = std::make_pair(topo.edges[k][0], topo.edges[k][1]);
        const std::size_t expected = shared.count(key) ? 2 : 1;
        CHECK(topo.incident_elements[k].size() == expected);
    }
}

TEST_CASE("incidence totals match element edge counts") {
    for (const Mesh& mesh :
         {generate_structured_mesh(DimensionMode::Cartesian3D, 3),
          generate_structured_mesh(DimensionMode::Cylindrical2D, 4)}) {
        const EdgeTopology topo = extract_edges(mesh);
        std::size_t total = 0;
        for (const auto& incident : topo.incident_elements) {
            total += incident.size();
        }
        CHECK(total == static_cast<std::size_t>(mesh.element_count()) *
                           mesh.edges_per_element());
    }
}

TEST_CASE("edge extraction is independent of element order") {
    Mesh mesh = generate_structured_mesh(DimensionMode::Cartesian3D, 2);
    const EdgeTopology before = extract_edges(mesh);
    std::reverse(mesh.elements.begin(), mesh.elements.end());
    finalize_mesh(mesh);
    const EdgeTopology after = extract_edges(mesh);
    REQUIRE(before.edge_count() == after.edge_count());
    for (int k = 0; k < before.edge_count(); ++k) {
        CHECK(before.edges[k] == after.edges[k]);
    }
}

TEST_CASE("perturbation determinism and bounds") {
    const Mesh mesh = generate_structured_mesh(DimensionMode::Cartesian3D, 4);
    const Mesh copy = mesh;

    const Mesh zero = perturb_interior_nodes(mesh, 0.0, 7);
    for (int i = 0; i < mesh.node_count(); ++i) {
        CHECK(zero.nodes[i].x == mesh.nodes[i].x);
        CHECK(zero.nodes[i].y == mesh.nodes[i].y);
        CHECK(zero.nodes[i].z == mesh.nodes[i].z);
    }

    const Mesh a = perturb_interior_nodes(mesh, 0.2, 7);
    const Mesh b = perturb_interior_nodes(mesh, 0.2, 7);
    bool identical = true;
    bool interior_moved = false;
    for (int i = 0; i < mesh.node_count(); ++i) {
        identical = identical && a.nodes[i].x == b.nodes[i].x &&
                    a.nodes[i].y == b.nodes[i].y && a.nodes[i].z == b.nodes[i].z;
        if (mesh.node_flags[i]) {
            // boundary nodes never move
            CHECK(a.nodes[i].x == mesh.nodes[i].x);
            CHECK(a.nodes[i].y == mesh.nodes[i].y);
            CHECK(a.nodes[i].z == mesh.nodes[i].z);
        } else if ((a.nodes[i] - mesh.nodes[i]).norm() > 0.0) {
            interior_moved = true;
        }
    }
    CHECK(identical);
    CHECK(interior_moved);

    const Mesh other_seed = perturb_interior_nodes(mesh, 0.2, 8);
    bool differs = false;
    for (int i = 0; i < mesh.node_count(); ++i) {
        differs = differs || a.nodes[i].x != other_seed.nodes[i].x;
    }
    CHECK(differs);

    // the input mesh is untouched
    for (int i = 0; i < mesh.node_count(); ++i) {
        CHECK(mesh.nodes[i].x == copy.nodes[i].x);
        CHECK(mesh.nodes[i].y == copy.nodes[i].y);
        CHECK(mesh.nodes[i].z == copy.nodes[i].z);
    }

    // displacement is bounded by magnitude times the mean incident edge
    // length of the unperturbed mesh
    const EdgeTopology topo = extract_edges(mesh);
    std::vector<double> sum(mesh.node_count(), 0.0);
    std::vector<int> count(mesh.node_count(), 0);
    for (const auto& edge : topo.edges) {
        const double len = (mesh.nodes[edge[1]] - mesh.nodes[edge[0]]).norm();
        sum[edge[0]] += len;
        ++count[edge[0]];
        sum[edge[1]] += len;
        ++count[edge[1]];
    }
    for (int i = 0; i < mesh.node_count(); ++i) {
        const double disp = (a.nodes[i] - mesh.nodes[i]).norm();
        CHECK(disp <= 0.2 * sum[i] / count[i] * (1.0 + 1e-12));
    }

    for (int e = 0; e < a.element_count(); ++e) {
        CHECK(element_measure(a, e) > 0.0);
    }
    CHECK_NOTHROW(validate_mesh(a));

    CHECK_THROWS_AS(perturb_interior_nodes(mesh, 0.6, 7), Error);
    CHECK_THROWS_AS(perturb_interior_nodes(mesh, -0.1, 7), Error);
}

TEST_CASE("cylindrical perturbation keeps r nonnegative") {
    const Mesh mesh = generate_structured_mesh(DimensionMode::Cylindrical2D, 6);
    const Mesh perturbed = perturb_interior_nodes(mesh, 0.3, 123);
    for (const auto& p : perturbed.nodes) CHECK(p.x >= 0.0);
    CHECK_NOTHROW(validate_mesh(perturbed));
}

TEST_CASE("quality ratios") {
    const Mesh equilateral = single_triangle(
        {0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2.0, 0});
    CHECK(quality(equilateral).per_element_ratio[0] ==
          doctest::Approx(1.0).epsilon(1e-12));

    const Mesh right = single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
    CHECK(quality(right).per_element_ratio[0] ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("quality histogram sums to the element count") {
    const Mesh mesh = perturb_interior_nodes(
        generate_structured_mesh(DimensionMode::Cartesian3D, 4), 0.2, 7);
    const QualityReport report = quality(mesh);
    std::int64_t total = 0;
    for (std::int64_t c : report.histogram) total += c;
    CHECK(total == mesh.element_count());
    CHECK(report.mean_edge_length > 0.0);
    for (double ratio : report.per_element_ratio) CHECK(ratio >= 1.0);
}

TEST_CASE("perturbation raises the fraction of stretched elements") {
    const Mesh regular = generate_structured_mesh(DimensionMode::Cartesian3D, 6);
    const Mesh perturbed = perturb_interior_nodes(regular, 0.2, 7);
    const double before = quality(regular).fraction_above(2.0);
    const double after = quality(perturbed).fraction_above(2.0);
    CHECK(after > before);
}

TEST_CASE("validator rejects invariant violations") {
    SUBCASE("node index out of range") {
        Mesh mesh = two_tets();
        mesh.elements[0][2] = 99;
        CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                             doctest::Contains("references node"), Error);
    }
    SUBCASE("repeated node in an element") {
        Mesh mesh = two_tets();
        mesh.elements[1][1] = mesh.elements[1][0];
        CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                             doctest::Contains("repeats node"), Error);
    }
    SUBCASE("non-positive measure") {
        Mesh mesh = two_tets();
        std::swap(mesh.elements[0][0], mesh.elements[0][1]);
        CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                             doctest::Contains("non-positive measure"), Error);
    }
    SUBCASE("facet that belongs to two elements") {
        Mesh mesh = two_tets();
        mesh.boundary_facets.push_back({{0, 1, 2}, 1});
        CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                             doctest::Contains("shared by 2"), Error);
    }
    SUBCASE("facet that matches no element") {
        Mesh mesh = two_tets();
        mesh.boundary_facets.push_back({{0, 3, 4}, 1});
        CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                             doctest::Contains("not a facet"), Error);
    }
    SUBCASE("stale boundary flags") {
        Mesh mesh = two_tets();
        mesh.node_flags[0] = false;
        CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                             doctest::Contains("stale boundary flag"), Error);
    }
    SUBCASE("negative radius in cylindrical mode") {
        Mesh mesh = single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
        mesh.nodes[0].x = -0.25;
        CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                             doctest::Contains("negative radial"), Error);
    }
}

TEST_CASE("content hash tracks geometry and connectivity") {
    const Mesh mesh = generate_structured_mesh(DimensionMode::Cartesian3D, 3);
    CHECK(content_hash(mesh) == content_hash(mesh));
    const Mesh perturbed = perturb_interior_nodes(mesh, 0.1, 2);
    CHECK(content_hash(mesh) != content_hash(perturbed));
}

TEST_CASE("element centroid") {
    const Mesh mesh = single_triangle({0, 0, 0}, {3, 0, 0}, {0, 3, 0});
    const Vec3 c = element_centroid(mesh, 0);
    CHECK(c.x == doctest::Approx(1.0));
    CHECK(c.y == doctest::Approx(1.0));
}
