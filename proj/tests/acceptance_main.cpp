// Acceptance gate: one self-contained check per numbered criterion, each
// printing a single PASS/FAIL line. Run with no arguments for the full set,
// with a number for one criterion, and --cli <path> to point criterion 9 at
// the command-line binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "esfem/analysis.hpp"
#include "esfem/assembly.hpp"
#include "esfem/bvp.hpp"
#include "esfem/mesh.hpp"
#include "esfem/smoothing.hpp"
#include "esfem/solver.hpp"

using namespace esfem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
}

std::string fmt(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.3g", value);
    return buffer;
}

// mixed corpus for the smoothing checks: both modes, regular and perturbed,
// unit and offset extents
std::vector<std::pair<std::string, Mesh>> smoothing_corpus() {
    std::vector<std::pair<std::string, Mesh>> corpus;
    auto add = [&](std::string name, Mesh mesh) {
        corpus.emplace_back(std::move(name), std::move(mesh));
    };
    const BoundingBox offset_rect{{0.5, 0.0, 0.0}, {1.5, 1.0, 0.0}};

    for (int n : {1, 2, 3}) {
        add("3d-n" + std::to_string(n),
            generate_structured_mesh(DimensionMode::Cartesian3D, n));
    }
    add("3d-aniso",
        generate_structured_mesh(DimensionMode::Cartesian3D, Divisions(2, 3, 4),
                                 BoundingBox{{0, 0, 0}, {1, 1, 1}}));
    add("3d-n2-p1", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cartesian3D, 2),
                        0.2, 1));
    add("3d-n2-p2", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cartesian3D, 2),
                        0.3, 2));
    add("3d-n3-p3", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cartesian3D, 3),
                        0.2, 3));
    add("3d-n3-p4", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cartesian3D, 3),
                        0.25, 4));

    for (int n : {2, 3, 4, 6}) {
        add("2d-n" + std::to_string(n),
            generate_structured_mesh(DimensionMode::Cylindrical2D, n));
    }
    add("2d-offset", generate_structured_mesh(DimensionMode::Cylindrical2D,
                                              Divisions(4), offset_rect));
    add("2d-offset-p8",
        perturb_interior_nodes(
            generate_structured_mesh(DimensionMode::Cylindrical2D, Divisions(4),
                                     offset_rect),
            0.25, 8));
    add("2d-n4-p5", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cylindrical2D, 4),
                        0.2, 5));
    add("2d-n4-p6", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cylindrical2D, 4),
                        0.3, 6));
    add("2d-n6-p7", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cylindrical2D, 6),
                        0.2, 7));
    add("2d-n3-p9", perturb_interior_nodes(
                        generate_structured_mesh(DimensionMode::Cylindrical2D, 3),
                        0.2, 9));
    add("2d-n3-p10", perturb_interior_nodes(
                         generate_structured_mesh(DimensionMode::Cylindrical2D, 3),
                         0.1, 10));
    add("2d-n5-p11", perturb_interior_nodes(
                         generate_structured_mesh(DimensionMode::Cylindrical2D, 5),
                         0.2, 11));
    return corpus;
}

Outcome criterion_oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    const auto corpus = smoothing_corpus();
    double worst = 0.0;
    std::string worst_mesh;
    std::size_t domain_count = 0;
    for (const auto& [name, mesh] : corpus) {
        const EdgeTopology edges = extract_edges(mesh);
        const SmoothingDomainSet set = build_smoothing_domains(mesh, edges);
        std::vector<GradientCoefficients> grads;
        grads.reserve(mesh.element_count());
        for (int e = 0; e < mesh.element_count(); ++e) {
            grads.push_back(element_gradients(mesh, e));
        }
        for (const auto& domain : set.domains) {
            ++domain_count;
            const SmoothedGradientMatrix direct =
                smoothed_gradient_matrix(domain, mesh, grads);
            const SmoothedGradientMatrix oracle =
                smoothed_gradient_boundary_oracle(mesh, edges, domain);
            double scale = 0.0;
            double diff = 0.0;
            for (std::size_t j = 0; j < direct.gradients.size(); ++j) {
                scale = std::max(scale, direct.gradients[j].norm());
                diff = std::max(
                    diff, (direct.gradients[j] - oracle.gradients[j]).norm());
            }
            const double rel = diff / scale;
            if (rel > worst) {
                worst = rel;
                worst_mesh = name;
            }
        }
    }
    const double elapsed = seconds_since(start);
    Outcome outcome;
    outcome.passed = worst <= 1e-12 && elapsed < 10.0 && corpus.size() >= 20;
    outcome.detail = std::to_string(corpus.size()) + " meshes, " +
                     std::to_string(domain_count) +
                     " domains, worst relative difference " + fmt(worst) +
                     " on " + worst_mesh + ", limit 1e-12, " + fmt(elapsed) +
                     " s";
    return outcome;
}

Outcome criterion_partition() {
    const auto corpus = smoothing_corpus();
    double worst = 0.0;
    std::string worst_mesh;
    for (const auto& [name, mesh] : corpus) {
        const EdgeTopology edges = extract_edges(mesh);
        const SmoothingDomainSet set = build_smoothing_domains(mesh, edges);
        double mesh_measure = 0.0;
        for (int e = 0; e < mesh.element_count(); ++e) {
            mesh_measure += element_measure(mesh, e);
        }
        double domain_measure = 0.0;
        for (const auto& domain : set.domains) domain_measure += domain.measure;
        const double rel = std::abs(domain_measure - mesh_measure) / mesh_measure;
        if (rel > worst) {
            worst = rel;
            worst_mesh = name;
        }
    }
    Outcome outcome;
    outcome.passed = worst <= 1e-12 && corpus.size() >= 20;
    outcome.detail = std::to_string(corpus.size()) +
                     " meshes, worst relative measure defect " + fmt(worst) +
                     " on " + worst_mesh + ", limit 1e-12";
    return outcome;
}

Outcome criterion_patch() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string worst_case;
    auto record = [&](const std::string& name, double relative) {
        if (relative > worst) {
            worst = relative;
            worst_case = name;
        }
    };

    for (std::uint64_t seed : {17ull, 18ull}) {
        const Mesh cube = perturb_interior_nodes(
            generate_structured_mesh(DimensionMode::Cartesian3D, 3), 0.25, seed);
        const Vec3 g{2.0, 3.0, -1.0};
        const double scale = 7.0;  // max |1 + g . x| over the unit cube
        record("3d-fem-s" + std::to_string(seed),
               patch_test(cube, Method::FEM, 1.0, g) / scale);
        record("3d-esfem-s" + std::to_string(seed),
               patch_test(cube, Method::ESFEM, 1.0, g) / scale);
        record("3d-const", patch_test(cube, Method::FEM, 5.0, Vec3{}) / 5.0);
    }
    for (std::uint64_t seed : {23ull, 24ull}) {
        const Mesh rect = perturb_interior_nodes(
            generate_structured_mesh(DimensionMode::Cylindrical2D, 3), 0.2, seed);
        const Vec3 axial{0.0, 2.0, 0.0};
        const double scale = 5.0;
        record("2d-fem-s" + std::to_string(seed),
               patch_test(rect, Method::FEM, 3.0, axial) / scale);
        record("2d-esfem-s" + std::to_string(seed),
               patch_test(rect, Method::ESFEM, 3.0, axial) / scale);
    }
    const double elapsed = seconds_since(start);
    Outcome outcome;
    outcome.passed = worst <= 1e-10 && elapsed < 30.0;
    outcome.detail = "worst relative nodal error " + fmt(worst) + " (" +
                     worst_case + "), limit 1e-10, " + fmt(elapsed) + " s";
    return outcome;
}

Outcome criterion_nullspace() {
    double worst = 0.0;
    std::string worst_case;
    for (DimensionMode mode :
         {DimensionMode::Cylindrical2D, DimensionMode::Cartesian3D}) {
        const int n = mode == DimensionMode::Cylindrical2D ? 4 : 3;
        const Mesh mesh = perturb_interior_nodes(
            generate_structured_mesh(mode, n), 0.2, 47);
        const BvpSpec spec = uniform_spec(mesh, 1.75);
        const EdgeTopology edges = extract_edges(mesh);
        const SmoothingDomainSet domains =
            build_smoothing_domains(mesh, edges, spec.alpha);
        const std::vector<double> ones(mesh.node_count(), 1.0);
        const std::pair<std::string, SparseSystem> systems[] = {
            {"fem", assemble_fem(mesh, spec)},
            {"esfem", assemble_esfem(mesh, edges, domains, spec)}};
        for (const auto& [label, system] : systems) {
            const std::vector<double> y = system.multiply(ones);
            double defect = 0.0;
            for (double v : y) defect = std::max(defect, std::abs(v));
            const double rel = defect / system.max_abs_value();
            if (rel > worst) {
                worst = rel;
                worst_case = to_string(mode) + std::string("-") + label;
            }
        }
    }
    Outcome outcome;
    outcome.passed = worst <= 1e-12;
    outcome.detail = "worst |K 1| / |K|_max " + fmt(worst) + " (" + worst_case +
                     "), limit 1e-12";
    return outcome;
}

// shared by criteria 5 and 6: pull one (descriptor, method) rmse out of the
// study table
double find_rmse(const BoxStudyResult& result, const std::string& descriptor,
                 Method method) {
    for (const auto& report : result.reports) {
        if (report.mesh_descriptor == descriptor && report.method == method) {
            return report.rmse;
        }
    }
    throw Error(ErrorCategory::Internal,
                "missing study row " + descriptor + "/" + to_string(method));
}

Outcome criterion_convergence() {
    const auto start = std::chrono::steady_clock::now();
    BoxStudyOptions options;
    options.divisions = {4, 8, 16};
    options.perturbation = 0.0;
    const BoxStudyResult result = run_box_study(options);

    std::vector<std::pair<double, double>> fem_points, esfem_points;
    bool ordering = true;
    std::string per_division;
    for (int n : options.divisions) {
        const std::string descriptor = "regular-n" + std::to_string(n);
        double h = 0.0;
        for (const auto& report : result.reports) {
            if (report.mesh_descriptor == descriptor) h = report.h;
        }
        const double fem = find_rmse(result, descriptor, Method::FEM);
        const double esfem = find_rmse(result, descriptor, Method::ESFEM);
        fem_points.emplace_back(h, fem);
        esfem_points.emplace_back(h, esfem);
        ordering = ordering && esfem < fem;
        per_division += " n" + std::to_string(n) + ": fem " + fmt(fem) +
                        " esfem " + fmt(esfem) + ";";
    }
    const double fem_slope = convergence_slope(fem_points);
    const double esfem_slope = convergence_slope(esfem_points);
    const double elapsed = seconds_since(start);

    Outcome outcome;
    outcome.passed = fem_slope >= 1.8 && esfem_slope >= 1.8 && ordering &&
                     elapsed < 120.0;
    outcome.detail = "slopes fem " + fmt(fem_slope) + " esfem " +
                     fmt(esfem_slope) + " (needed >= 1.8); esfem < fem at every "
                     "division: " +
                     (ordering ? "yes" : "no") + ";" + per_division + " " +
                     fmt(elapsed) + " s";
    return outcome;
}

Outcome criterion_distortion() {
    BoxStudyOptions options;
    options.divisions = {8, 16};
    options.perturbation = 0.2;
    options.seed = 7;
    const BoxStudyResult result = run_box_study(options);

    bool stability = true, ratio_ordering = true, accuracy = true;
    std::string numbers;
    for (int n : options.divisions) {
        const std::string regular = "regular-n" + std::to_string(n);
        const std::string perturbed =
            "perturbed-n" + std::to_string(n) + "-m0.2-seed7";
        const double fem_reg = find_rmse(result, regular, Method::FEM);
        const double fem_pert = find_rmse(result, perturbed, Method::FEM);
        const double es_reg = find_rmse(result, regular, Method::ESFEM);
        const double es_pert = find_rmse(result, perturbed, Method::ESFEM);
        stability = stability && es_pert <= 1.5 * es_reg;
        ratio_ordering =
            ratio_ordering && fem_pert / fem_reg > es_pert / es_reg;
        accuracy = accuracy && es_pert < fem_pert;
        numbers += " n" + std::to_string(n) + ": esfem " + fmt(es_reg) + "->" +
                   fmt(es_pert) + ", fem " + fmt(fem_reg) + "->" +
                   fmt(fem_pert) + ";";
    }
    Outcome outcome;
    outcome.passed = stability && ratio_ordering && accuracy;
    outcome.detail = std::string("esfem degradation <= 1.5x: ") +
                     (stability ? "yes" : "no") +
                     "; fem degrades more than esfem: " +
                     (ratio_ordering ? "yes" : "no") +
                     "; esfem beats fem when perturbed: " +
                     (accuracy ? "yes" : "no") + ";" + numbers;
    return outcome;
}

Outcome criterion_quality() {
    bool strict = true;
    std::string numbers;
    for (DimensionMode mode :
         {DimensionMode::Cartesian3D, DimensionMode::Cylindrical2D}) {
        for (int n : {8, 16}) {
            const Mesh regular = generate_structured_mesh(mode, n);
            const Mesh perturbed = perturb_interior_nodes(regular, 0.2, 7);
            const double before = quality(regular).fraction_above(2.0);
            const double after = quality(perturbed).fraction_above(2.0);
            strict = strict && after > before;
            numbers += std::string(" ") +
                       (mode == DimensionMode::Cartesian3D ? "3d" : "2d") +
                       "-n" + std::to_string(n) + ": " + fmt(before) + "->" +
                       fmt(after) + ";";
        }
    }
    Outcome outcome;
    outcome.passed = strict;
    outcome.detail = "fraction of elements with edge ratio > 2, regular -> "
                     "perturbed (must strictly increase):" +
                     numbers;
    return outcome;
}

Outcome criterion_solver_agreement() {
    double worst = 0.0;
    std::string worst_case;
    struct Case {
        std::string name;
        Mesh mesh;
    };
    std::vector<Case> cases;
    cases.push_back({"3d-n4-box",
                     generate_structured_mesh(DimensionMode::Cartesian3D, 4)});
    cases.push_back({"3d-n5-box",
                     generate_structured_mesh(DimensionMode::Cartesian3D, 5)});
    for (const auto& entry : cases) {
        const BvpSpec spec = box_spec(entry.mesh);
        SparseSystem system = assemble_fem(entry.mesh, spec);
        apply_boundary_conditions(system, entry.mesh, spec);
        if (system.n > kCholeskyLimit) {
            throw Error(ErrorCategory::Internal, "cross-check system too large");
        }
        SolveOptions cg;
        cg.tolerance = 1e-12;
        const SolveReport iterative = solve(system, cg);
        SolveOptions direct;
        direct.method = SolveMethod::DenseCholesky;
        const SolveReport factored = solve(system, direct);
        double scale = 0.0, diff = 0.0;
        for (int i = 0; i < system.n; ++i) {
            scale = std::max(scale, std::abs(factored.solution[i]));
            diff = std::max(diff, std::abs(factored.solution[i] -
                                           iterative.solution[i]));
        }
        const double rel = diff / scale;
        if (rel > worst) {
            worst = rel;
            worst_case = entry.name + " (n=" + std::to_string(system.n) + ")";
        }
    }
    Outcome outcome;
    outcome.passed = worst <= 1e-8;
    outcome.detail = "worst relative disagreement " + fmt(worst) + " on " +
                     worst_case + ", limit 1e-8";
    return outcome;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream file(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(file, line)) lines.push_back(line);
    return lines;
}

// drop the final (timing) column of a results row; every other byte must match
std::string strip_last_field(const std::string& line) {
    const auto pos = line.find_last_of(',');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

Outcome criterion_determinism(const std::string& cli) {
    Outcome outcome;
    if (cli.empty()) {
        outcome.detail = "path to the command-line binary not provided (--cli)";
        return outcome;
    }
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "esfem-acceptance";
    const fs::path dir_a = base / "run-a";
    const fs::path dir_b = base / "run-b";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(dir_a);
    fs::create_directories(dir_b);

    const std::string args =
        " box-study --divisions 4,8 --perturb 0.2 --seed 7 --tol 1e-10 --out ";
    for (const fs::path& dir : {dir_a, dir_b}) {
        const std::string command = "\"" + cli + "\"" + args + dir.string() +
                                    " > " + (dir / "stdout.txt").string() +
                                    " 2>&1";
        if (std::system(command.c_str()) != 0) {
            outcome.detail = "box-study run failed in " + dir.string();
            return outcome;
        }
    }

    const auto results_a = read_lines(dir_a / "results.csv");
    const auto results_b = read_lines(dir_b / "results.csv");
    const auto quality_a = read_lines(dir_a / "quality.csv");
    const auto quality_b = read_lines(dir_b / "quality.csv");
    if (results_a.empty() || results_a.size() != results_b.size()) {
        outcome.detail = "results.csv differs in row count";
        return outcome;
    }
    for (std::size_t i = 0; i < results_a.size(); ++i) {
        if (strip_last_field(results_a[i]) != strip_last_field(results_b[i])) {
            outcome.detail = "results.csv row " + std::to_string(i) +
                             " differs beyond the timing column";
            return outcome;
        }
    }
    if (quality_a.empty() || quality_a != quality_b) {
        outcome.detail = "quality.csv is not byte-identical";
        return outcome;
    }
    fs::remove_all(base, ec);
    outcome.passed = true;
    outcome.detail =
        std::to_string(results_a.size() - 1) + " data rows byte-identical " +
        "(timing column excluded), quality histogram byte-identical";
    return outcome;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    std::vector<int> requested;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) {
            cli = argv[++i];
        } else if (!arg.empty() &&
                   arg.find_first_not_of("0123456789") == std::string::npos) {
            requested.push_back(std::stoi(arg));
        } else {
            std::fprintf(stderr,
                         "usage: acceptance [criterion-number ...] "
                         "[--cli <esfem binary>]\n");
            return 2;
        }
    }

    struct Entry {
        int number;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries = {
        {1, "smoothed gradients match the boundary-integral oracle",
         criterion_oracle_equivalence},
        {2, "smoothing domains partition the mesh measure", criterion_partition},
        {3, "affine patch reproduction by both methods", criterion_patch},
        {4, "unconstrained stiffness annihilates constants", criterion_nullspace},
        {5, "regular-mesh convergence and accuracy ordering",
         criterion_convergence},
        {6, "distortion robustness ordering", criterion_distortion},
        {7, "perturbation degrades element quality", criterion_quality},
        {8, "iterative and direct solvers agree", criterion_solver_agreement},
        {9, "repeated study runs are byte-identical",
         [&cli] { return criterion_determinism(cli); }},
    };

    if (requested.empty()) {
        for (const auto& entry : entries) requested.push_back(entry.number);
    }

    int failures = 0;
    for (int number : requested) {
        const Entry* entry = nullptr;
        for (const auto& candidate : entries) {
            if (candidate.number == number) entry = &candidate;
        }
        if (entry == nullptr) {
            std::fprintf(stderr, "unknown criterion %d\n", number);
            return 2;
        }
        Outcome outcome;
        try {
            outcome = entry->run();
        } catch (const std::exception& e) {
            outcome.passed = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d %s: %s (%s)\n", entry->number, entry->name,
                    outcome.passed ? "PASS" : "FAIL", outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.passed) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
