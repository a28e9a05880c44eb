// Python bindings for the core operations: structured meshing, perturbation,
// smoothing-domain queries, assembly, solving and the benchmark drivers.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "esfem/analysis.hpp"
#include "esfem/assembly.hpp"
#include "esfem/bvp.hpp"
#include "esfem/mesh.hpp"
#include "esfem/mesh_io.hpp"
#include "esfem/smoothing.hpp"
#include "esfem/solver.hpp"

namespace py = pybind11;
using namespace esfem;

namespace {

DimensionMode parse_mode(const std::string& mode) {
    if (mode == "2d" || mode == "cylindrical2d") {
        return DimensionMode::Cylindrical2D;
    }
    if (mode == "3d" || mode == "cartesian3d") {
        return DimensionMode::Cartesian3D;
    }
    throw Error(ErrorCategory::InvalidSpec, "unknown mode '" + mode + "'");
}

Method parse_method(const std::string& method) {
    if (method == "fem") return Method::FEM;
    if (method == "esfem") return Method::ESFEM;
    throw Error(ErrorCategory::InvalidSpec,
                "unknown method '" + method + "' (expected fem or esfem)");
}

// mesh + box spec + chosen assembly, solved with CG
py::dict solve_box(const Mesh& mesh, const std::string& method,
                   double tolerance) {
    const BvpSpec spec = box_spec(mesh);
    SparseSystem system;
    if (parse_method(method) == Method::FEM) {
        system = assemble_fem(mesh, spec);
    } else {
        const EdgeTopology edges = extract_edges(mesh);
        const SmoothingDomainSet domains =
            build_smoothing_domains(mesh, edges, spec.alpha);
        system = assemble_esfem(mesh, edges, domains, spec);
    }
    apply_boundary_conditions(system, mesh, spec);
    SolveOptions options;
    options.tolerance = tolerance;
    const SolveReport report = solve(system, options);
    const std::vector<double> reference = box_reference_at_nodes(mesh);

    py::dict out;
    out["solution"] = report.solution;
    out["iterations"] = report.iterations;
    out["rmse"] = rmse(report.solution, reference);
    out["max_abs_error"] = max_abs_error(report.solution, reference);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Edge-smoothed finite element solver for scalar electrostatics";

    py::register_exception<Error>(m, "EsfemError");

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<double, double, double>(), py::arg("x"), py::arg("y") = 0.0,
             py::arg("z") = 0.0)
        .def_readwrite("x", &Vec3::x)
        .def_readwrite("y", &Vec3::y)
        .def_readwrite("z", &Vec3::z)
        .def("__repr__", [](const Vec3& v) {
            return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) +
                   ", " + std::to_string(v.z) + ")";
        });

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("mode",
                               [](const Mesh& mesh) {
                                   return std::string(to_string(mesh.mode));
                               })
        .def_property_readonly("node_count", &Mesh::node_count)
        .def_property_readonly("element_count", &Mesh::element_count)
        .def_property_readonly("boundary_facet_count",
                               [](const Mesh& mesh) {
                                   return mesh.boundary_facets.size();
                               })
        .def_property_readonly("nodes",
                               [](const Mesh& mesh) {
                                   py::list out;
                                   for (const auto& p : mesh.nodes) {
                                       out.append(py::make_tuple(p.x, p.y, p.z));
                                   }
                                   return out;
                               })
        .def_property_readonly("elements",
                               [](const Mesh& mesh) {
                                   py::list out;
                                   const int npe = mesh.nodes_per_element();
                                   for (const auto& el : mesh.elements) {
                                       py::list tuple;
                                       for (int v = 0; v < npe; ++v) {
                                           tuple.append(el[v]);
                                       }
                                       out.append(tuple);
                                   }
                                   return out;
                               })
        .def("edge_count",
             [](const Mesh& mesh) { return extract_edges(mesh).edge_count(); })
        .def("content_hash", [](const Mesh& mesh) { return content_hash(mesh); })
        .def("__repr__", [](const Mesh& mesh) {
            return "Mesh(" + std::string(to_string(mesh.mode)) + ", " +
                   std::to_string(mesh.node_count()) + " nodes, " +
                   std::to_string(mesh.element_count()) + " elements)";
        });

    m.def(
        "structured_mesh",
        [](const std::string& mode, int divisions) {
            return generate_structured_mesh(parse_mode(mode), divisions);
        },
        py::arg("mode"), py::arg("divisions"),
        "Uniform simplicial mesh of the unit box: triangles in '2d' "
        "(cylindrical r-z) mode, tetrahedra in '3d' mode.");

    m.def(
        "perturb",
        [](const Mesh& mesh, double magnitude, std::uint64_t seed) {
            return perturb_interior_nodes(mesh, magnitude, seed);
        },
        py::arg("mesh"), py::arg("magnitude"), py::arg("seed"),
        "Deterministically displaces interior nodes by up to magnitude times "
        "the local mean edge length; boundary nodes stay fixed.");

    m.def(
        "quality_fraction_above",
        [](const Mesh& mesh, double threshold) {
            return quality(mesh).fraction_above(threshold);
        },
        py::arg("mesh"), py::arg("threshold"),
        "Fraction of elements whose max/min edge ratio exceeds the threshold.");

    m.def("import_mesh",
          [](const std::string& path) { return import_mesh(path); },
          py::arg("path"), "Reads a native JSON or Gmsh MSH 2.2 mesh file.");
    m.def("export_json", &export_native_json, py::arg("mesh"), py::arg("path"),
          "Writes the native JSON mesh format (bit-exact round trip).");
    m.def(
        "export_vtk",
        [](const Mesh& mesh, const std::string& path,
           const std::vector<double>& field, const std::string& name) {
            export_vtk(mesh, field, name, path);
        },
        py::arg("mesh"), py::arg("path"),
        py::arg("field") = std::vector<double>{},
        py::arg("name") = std::string("field"),
        "Writes a VTK legacy unstructured grid, optionally with one nodal "
        "scalar field.");

    m.def("box_reference", &box_reference, py::arg("x"), py::arg("y"),
          py::arg("z"),
          "Closed-form potential of the unit-cube benchmark problem.");

    m.def(
        "patch_test",
        [](const Mesh& mesh, const std::string& method, double offset,
           double gx, double gy, double gz) {
            return patch_test(mesh, parse_method(method), offset,
                              Vec3{gx, gy, gz});
        },
        py::arg("mesh"), py::arg("method"), py::arg("offset"), py::arg("gx"),
        py::arg("gy"), py::arg("gz"),
        "Max nodal deviation from the affine field offset + g.x when it is "
        "imposed as Dirichlet data everywhere.");

    m.def("solve_box", &solve_box, py::arg("mesh"), py::arg("method"),
          py::arg("tolerance") = 1e-10,
          "Assembles and solves the unit-cube benchmark; returns solution, "
          "iterations and error norms against the closed form.");

    m.def(
        "smoothing_domain_count",
        [](const Mesh& mesh) {
            const EdgeTopology edges = extract_edges(mesh);
            return build_smoothing_domains(mesh, edges).domains.size();
        },
        py::arg("mesh"), "Number of per-edge smoothing domains (= edge count).");

    m.def(
        "smoothing_total_measure",
        [](const Mesh& mesh) {
            const EdgeTopology edges = extract_edges(mesh);
            return build_smoothing_domains(mesh, edges).total_measure;
        },
        py::arg("mesh"),
        "Sum of all smoothing-domain measures; equals the mesh measure.");

    m.def(
        "box_study",
        [](const std::vector<int>& divisions, double perturbation,
           std::uint64_t seed, double tolerance) {
            BoxStudyOptions options;
            options.divisions = divisions;
            options.perturbation = perturbation;
            options.seed = seed;
            options.tolerance = tolerance;
            const BoxStudyResult result = run_box_study(options);
            py::list rows;
            for (const auto& report : result.reports) {
                py::dict row;
                row["mesh_descriptor"] = report.mesh_descriptor;
                row["method"] = std::string(to_string(report.method));
                row["h"] = report.h;
                row["rmse"] = report.rmse;
                row["max_abs_error"] = report.max_abs_error;
                row["iterations"] = report.iterations;
                rows.append(row);
            }
            return rows;
        },
        py::arg("divisions") = std::vector<int>{4, 8, 16},
        py::arg("perturbation") = 0.2, py::arg("seed") = 7,
        py::arg("tolerance") = 1e-10,
        "Runs the unit-cube benchmark over the requested meshes with both "
        "assembly methods; returns one dict per (mesh, method) pair.");

    m.def("verify", []() {
        py::list out;
        for (const CheckResult& check : run_verification()) {
            py::dict entry;
            entry["name"] = check.name;
            entry["passed"] = check.passed;
            entry["detail"] = check.detail;
            out.append(entry);
        }
        return out;
    }, "Runs the internal invariant suite; returns one dict per check.");
}
