#include "esfem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "esfem/bvp.hpp"
#include "esfem/shape.hpp"
#include "esfem/smoothing.hpp"

namespace esfem {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

SolveReport solve_with_method(const Mesh& mesh, const BvpSpec& spec,
                              Method method, double tolerance) {
    SparseSystem system;
    if (method == Method::FEM) {
        system = assemble_fem(mesh, spec);
    } else {
        const EdgeTopology edges = extract_edges(mesh);
        const SmoothingDomainSet domains = build_smoothing_domains(mesh, edges);
        system = assemble_esfem(mesh, edges, domains, spec);
    }
    apply_boundary_conditions(system, mesh, spec);
    SolveOptions options;
    options.tolerance = tolerance;
    return solve(system, options);
}

}  // namespace

double box_reference(double x, double y, double z) {
    const double k = M_PI * std::sqrt(2.0);
    return 10.0 * std::sin(M_PI * x) * std::sin(M_PI * y) * std::sinh(k * z) /
           std::sinh(k);
}

std::vector<double> box_reference_at_nodes(const Mesh& mesh) {
    std::vector<double> values;
    values.reserve(mesh.nodes.size());
    for (const auto& p : mesh.nodes) {
        values.push_back(box_reference(p.x, p.y, p.z));
    }
    return values;
}

double rmse(const std::vector<double>& numerical,
            const std::vector<double>& reference) {
    if (numerical.size() != reference.size()) {
        throw Error(ErrorCategory::Internal,
                    "rmse inputs have different lengths");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < numerical.size(); ++i) {
        const double diff = numerical[i] - reference[i];
        num += diff * diff;
        den += reference[i] * reference[i];
    }
    if (den == 0.0) {
        throw Error(ErrorCategory::Internal,
                    "rmse reference has zero norm");
    }
    return std::sqrt(num / den);
}

double max_abs_error(const std::vector<double>& numerical,
                     const std::vector<double>& reference) {
    if (numerical.size() != reference.size()) {
        throw Error(ErrorCategory::Internal,
                    "error inputs have different lengths");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < numerical.size(); ++i) {
        worst = std::max(worst, std::abs(numerical[i] - reference[i]));
    }
    return worst;
}

double patch_test(const Mesh& mesh, Method method, double offset,
                  const Vec3& gradient, double solver_tolerance) {
    const BvpSpec spec = patch_affine_spec(mesh, offset, gradient);
    const SolveReport report =
        solve_with_method(mesh, spec, method, solver_tolerance);
    double worst = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i) {
        const double exact = offset + gradient.dot(mesh.nodes[i]);
        worst = std::max(worst, std::abs(report.solution[i] - exact));
    }
    return worst;
}

BoxStudyResult run_box_study(const BoxStudyOptions& options) {
    for (int n : options.divisions) {
        if (n < 2) {
            throw Error(ErrorCategory::InvalidSpec,
                        "box study divisions must be at least 2");
        }
    }
    BoxStudyResult result;
    for (int n : options.divisions) {
        const Mesh regular =
            generate_structured_mesh(DimensionMode::Cartesian3D, n);
        std::vector<std::pair<std::string, Mesh>> meshes;
        meshes.emplace_back("regular-n" + std::to_string(n), regular);
        if (options.perturbation > 0.0) {
            meshes.emplace_back(
                "perturbed-n" + std::to_string(n) + "-m" +
                    format_short(options.perturbation) + "-seed" +
                    std::to_string(options.seed),
                perturb_interior_nodes(regular, options.perturbation,
                                       options.seed));
        }
        for (const auto& [descriptor, mesh] : meshes) {
            const QualityReport q = quality(mesh);
            result.quality.push_back({descriptor, q});
            const std::vector<double> reference = box_reference_at_nodes(mesh);
            const BvpSpec spec = box_spec(mesh);
            for (Method method : options.methods) {
                const SolveReport report =
                    solve_with_method(mesh, spec, method, options.tolerance);
                ErrorReport row;
                row.mesh_descriptor = descriptor;
                row.method = method;
                row.h = q.mean_edge_length;
                row.rmse = rmse(report.solution, reference);
                row.max_abs_error = max_abs_error(report.solution, reference);
                row.iterations = report.iterations;
                row.wall_time = report.wall_time;
                result.reports.push_back(std::move(row));
            }
        }
    }
    return result;
}

double convergence_slope(const std::vector<std::pair<double, double>>& h_rmse) {
    if (h_rmse.size() < 2) {
        throw Error(ErrorCategory::Internal,
                    "convergence slope needs at least two points");
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& [h, e] : h_rmse) {
        sx += std::log(h);
        sy += std::log(e);
    }
    const double mx = sx / h_rmse.size(), my = sy / h_rmse.size();
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [h, e] : h_rmse) {
        const double dx = std::log(h) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(e) - my);
    }
    return sxy / sxx;
}

void write_error_csv(const std::vector<ErrorReport>& reports,
                     const std::string& path) {
    std::ofstream file(path);
    if (!file) {
        throw Error(ErrorCategory::FileNotFound,
                    "cannot open " + path + " for writing");
    }
    file << "mesh_descriptor,method,h,rmse,max_abs_error,iterations,"
            "wall_time\n";
    for (const auto& row : reports) {
        file << row.mesh_descriptor << ',' << to_string(row.method) << ','
             << format_double(row.h) << ',' << format_double(row.rmse) << ','
             << format_double(row.max_abs_error) << ',' << row.iterations
             << ',' << format_double(row.wall_time) << '\n';
    }
}

void write_quality_csv(const std::vector<QualityRow>& rows,
                       const std::string& path) {
    std::ofstream file(path);
    if (!file) {
        throw Error(ErrorCategory::FileNotFound,
                    "cannot open " + path + " for writing");
    }
    file << "mesh_descriptor,bin_lower,bin_upper,count,fraction_above_two,"
            "mean_edge_length\n";
    for (const auto& row : rows) {
        const double fraction = row.report.fraction_above(2.0);
        for (int b = 0; b < QualityReport::kBinCount; ++b) {
            const double lower = row.report.bin_lower(b);
            file << row.mesh_descriptor << ',' << format_double(lower) << ',';
            if (b + 1 == QualityReport::kBinCount) {
                file << "inf";
            } else {
                file << format_double(lower + QualityReport::kBinWidth);
            }
            file << ',' << row.report.histogram[b] << ','
                 << format_double(fraction) << ','
                 << format_double(row.report.mean_edge_length) << '\n';
        }
    }
}

namespace {

struct CorpusEntry {
    std::string name;
    Mesh mesh;
};

std::vector<CorpusEntry> verification_corpus() {
    std::vector<CorpusEntry> corpus;
    const BoundingBox offset_rect{{0.5, 0.0, 0.0}, {1.5, 1.0, 0.0}};
    auto add = [&corpus](const std::string& name, Mesh mesh) {
        corpus.push_back({name, std::move(mesh)});
    };
    Mesh rect = generate_structured_mesh(DimensionMode::Cylindrical2D,
                                         Divisions(4), offset_rect);
    add("2d-regular-n4", rect);
    add("2d-perturbed-n4", perturb_interior_nodes(rect, 0.25, 11));
    Mesh axis = generate_structured_mesh(DimensionMode::Cylindrical2D, 3);
    add("2d-axis-n3", axis);
    add("2d-axis-perturbed-n3", perturb_interior_nodes(axis, 0.2, 5));
    Mesh cube2 = generate_structured_mesh(DimensionMode::Cartesian3D, 2);
    add("3d-regular-n2", cube2);
    add("3d-perturbed-n2", perturb_interior_nodes(cube2, 0.25, 3));
    Mesh cube3 = generate_structured_mesh(DimensionMode::Cartesian3D, 3);
    add("3d-regular-n3", cube3);
    add("3d-perturbed-n3", perturb_interior_nodes(cube3, 0.2, 9));
    return corpus;
}

double mesh_measure(const Mesh& mesh) {
    double total = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) {
        total += element_measure(mesh, e);
    }
    return total;
}

}  // namespace

std::vector<CheckResult> run_verification() {
    std::vector<CheckResult> results;
    auto record = [&results](const std::string& name, bool passed,
                             const std::string& detail) {
        results.push_back({name, passed, detail});
    };

    // patch tests: affine fields must be reproduced on perturbed meshes
    {
        const Mesh cube = generate_structured_mesh(DimensionMode::Cartesian3D, 3);
        const Mesh cube_p = perturb_interior_nodes(cube, 0.25, 17);
        const Vec3 g3(2.0, 3.0, -1.0);
        const double scale = 7.0;  // about max |1 + g3 . x| on the cube
        for (Method method : {Method::FEM, Method::ESFEM}) {
            const double err = patch_test(cube_p, method, 1.0, g3);
            record(std::string("patch-3d-") + to_string(method), err <= 1e-10 * scale,
                   "max nodal error " + format_short(err));
        }
        const Mesh rect = generate_structured_mesh(
            DimensionMode::Cylindrical2D, Divisions(4),
            BoundingBox{{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}});
        const Mesh rect_p = perturb_interior_nodes(rect, 0.25, 17);
        for (Method method : {Method::FEM, Method::ESFEM}) {
            const double err =
                patch_test(rect_p, method, 3.0, Vec3(0.0, 2.0, 0.0));
            record(std::string("patch-2d-") + to_string(method), err <= 1e-10 * 5.0,
                   "max nodal error " + format_short(err));
        }
    }

    // smoothing identities over the corpus
    {
        double worst_partition = 0.0, worst_zero_sum = 0.0,
               worst_linear = 0.0, worst_oracle = 0.0, worst_defect = 0.0,
               worst_measure = 0.0;
        const Vec3 affine_g(1.0, -3.0, 0.5);
        for (const auto& entry : verification_corpus()) {
            const Mesh& mesh = entry.mesh;
            const EdgeTopology edges = extract_edges(mesh);
            const SmoothingDomainSet domains =
                build_smoothing_domains(mesh, edges);
            worst_partition = std::max(
                worst_partition,
                std::abs(domains.total_measure - mesh_measure(mesh)) /
                    mesh_measure(mesh));
            std::vector<GradientCoefficients> gradients;
            for (int e = 0; e < mesh.element_count(); ++e) {
                gradients.push_back(element_gradients(mesh, e));
            }
            const Vec3 g = mesh.mode == DimensionMode::Cylindrical2D
                               ? Vec3(affine_g.x, affine_g.y, 0.0)
                               : affine_g;
            for (const auto& domain : domains.domains) {
                const SmoothedGradientMatrix formula =
                    smoothed_gradient_matrix(domain, mesh, gradients);
                const SmoothedGradientMatrix oracle =
                    smoothed_gradient_boundary_oracle(mesh, edges, domain);
                double max_grad = 0.0, oracle_diff = 0.0;
                Vec3 sum, reproduced;
                for (std::size_t j = 0; j < formula.gradients.size(); ++j) {
                    max_grad =
                        std::max(max_grad, formula.gradients[j].max_abs());
                    sum += formula.gradients[j];
                    const Vec3 xj = mesh.nodes[domain.support_nodes[j]];
                    reproduced += formula.gradients[j] * (2.0 + g.dot(xj));
                    oracle_diff = std::max(
                        oracle_diff,
                        (formula.gradients[j] - oracle.gradients[j]).max_abs());
                }
                worst_zero_sum =
                    std::max(worst_zero_sum, sum.max_abs() / max_grad);
                worst_linear = std::max(
                    worst_linear, (reproduced - g).max_abs() / g.max_abs());
                worst_oracle = std::max(worst_oracle, oracle_diff / max_grad);
                worst_defect = std::max(
                    worst_defect,
                    oracle_boundary_defect(mesh, edges, domain) /
                        std::pow(domain.measure,
                                 mesh.mode == DimensionMode::Cylindrical2D
                                     ? 0.5
                                     : 2.0 / 3.0));
                worst_measure = std::max(
                    worst_measure,
                    std::abs(oracle_domain_measure(mesh, edges, domain) -
                             domain.measure) /
                        domain.measure);
            }
        }
        record("smoothing-partition", worst_partition <= 1e-12,
               "worst relative defect " + format_short(worst_partition));
        record("smoothing-zero-sum", worst_zero_sum <= 1e-12,
               "worst relative defect " + format_short(worst_zero_sum));
        record("smoothing-linear-exactness", worst_linear <= 1e-12,
               "worst relative defect " + format_short(worst_linear));
        record("smoothing-oracle-agreement", worst_oracle <= 1e-12,
               "worst relative difference " + format_short(worst_oracle));
        record("smoothing-oracle-closedness", worst_defect <= 1e-12,
               "worst normalized defect " + format_short(worst_defect));
        record("smoothing-oracle-measure", worst_measure <= 1e-12,
               "worst relative difference " + format_short(worst_measure));
    }

    // nullspace and symmetry of assembled operators
    {
        double worst_nullspace = 0.0, worst_symmetry = 0.0;
        for (const auto& entry : verification_corpus()) {
            const Mesh& mesh = entry.mesh;
            const BvpSpec spec = uniform_spec(mesh);
            const EdgeTopology edges = extract_edges(mesh);
            const SmoothingDomainSet domains =
                build_smoothing_domains(mesh, edges);
            for (Method method : {Method::FEM, Method::ESFEM}) {
                const SparseSystem system =
                    method == Method::FEM
                        ? assemble_fem(mesh, spec)
                        : assemble_esfem(mesh, edges, domains, spec);
                const std::vector<double> ones(system.n, 1.0);
                const std::vector<double> k_ones = system.multiply(ones);
                double worst = 0.0;
                for (double v : k_ones) worst = std::max(worst, std::abs(v));
                worst_nullspace = std::max(
                    worst_nullspace, worst / system.max_abs_value());
                worst_symmetry =
                    std::max(worst_symmetry, system.symmetry_defect());
            }
        }
        record("assembly-nullspace", worst_nullspace <= 1e-12,
               "worst |K 1| / |K|_max " + format_short(worst_nullspace));
        record("assembly-symmetry", worst_symmetry == 0.0,
               "worst |K_ij - K_ji| " + format_short(worst_symmetry));
    }

    // solver cross-check on the box problem
    {
        const Mesh cube = generate_structured_mesh(DimensionMode::Cartesian3D, 4);
        const BvpSpec spec = box_spec(cube);
        SparseSystem system = assemble_fem(cube, spec);
        apply_boundary_conditions(system, cube, spec);
        SolveOptions cg_options;
        cg_options.tolerance = 1e-12;
        const SolveReport cg = solve(system, cg_options);
        SolveOptions chol_options;
        chol_options.method = SolveMethod::DenseCholesky;
        const SolveReport chol = solve(system, chol_options);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < system.n; ++i) {
            num += (cg.solution[i] - chol.solution[i]) *
                   (cg.solution[i] - chol.solution[i]);
            den += chol.solution[i] * chol.solution[i];
        }
        const double rel = std::sqrt(num / den);
        record("solver-cross-check", rel <= 1e-8,
               "CG vs Cholesky relative difference " + format_short(rel));
    }

    // determinism of the study driver
    {
        BoxStudyOptions options;
        options.divisions = {2, 3};
        options.perturbation = 0.2;
        options.seed = 7;
        const BoxStudyResult a = run_box_study(options);
        const BoxStudyResult b = run_box_study(options);
        bool identical = a.reports.size() == b.reports.size();
        for (std::size_t i = 0; identical && i < a.reports.size(); ++i) {
            identical = a.reports[i].mesh_descriptor ==
                            b.reports[i].mesh_descriptor &&
                        a.reports[i].method == b.reports[i].method &&
                        a.reports[i].h == b.reports[i].h &&
                        a.reports[i].rmse == b.reports[i].rmse &&
                        a.reports[i].max_abs_error ==
                            b.reports[i].max_abs_error &&
                        a.reports[i].iterations == b.reports[i].iterations;
        }
        record("study-determinism", identical,
               identical ? "two runs agree bitwise"
                         : "reports differ between identical runs");
    }

    return results;
}

}  // namespace esfem
