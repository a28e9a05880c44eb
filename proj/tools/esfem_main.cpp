#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esfem/analysis.hpp"
#include "esfem/assembly.hpp"
#include "esfem/bvp.hpp"
#include "esfem/mesh.hpp"
#include "esfem/mesh_io.hpp"
#include "esfem/smoothing.hpp"
#include "esfem/solver.hpp"

namespace {

using namespace esfem;

int exit_code_for(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::ConfigParse: return 2;
        case ErrorCategory::FileNotFound: return 3;
        case ErrorCategory::MeshFormat: return 4;
        case ErrorCategory::InvalidMesh: return 5;
        case ErrorCategory::InvalidSpec: return 6;
        case ErrorCategory::SolverFailure: return 7;
        case ErrorCategory::Internal: return 10;
    }
    return 10;
}

std::vector<double> parse_numbers(const std::string& text,
                                  const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw Error(ErrorCategory::ConfigParse,
                        what + ": cannot parse number '" + token + "'");
        }
    }
    if (values.empty()) {
        throw Error(ErrorCategory::ConfigParse, what + ": empty list");
    }
    return values;
}

std::vector<int> parse_ints(const std::string& text, const std::string& what) {
    std::vector<int> values;
    for (double v : parse_numbers(text, what)) {
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v) {
            throw Error(ErrorCategory::ConfigParse,
                        what + ": expected an integer list");
        }
        values.push_back(i);
    }
    return values;
}

DimensionMode parse_mode(const std::string& text) {
    if (text == "2d" || text == "cylindrical2d") {
        return DimensionMode::Cylindrical2D;
    }
    if (text == "3d" || text == "cartesian3d") {
        return DimensionMode::Cartesian3D;
    }
    throw Error(ErrorCategory::ConfigParse,
                "unknown mode '" + text + "' (expected 2d or 3d)");
}

std::vector<Method> parse_methods(const std::string& text) {
    if (text == "fem") return {Method::FEM};
    if (text == "esfem") return {Method::ESFEM};
    if (text == "both") return {Method::FEM, Method::ESFEM};
    throw Error(ErrorCategory::ConfigParse,
                "unknown method '" + text + "' (expected fem, esfem or both)");
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) {
        throw Error(ErrorCategory::FileNotFound,
                    "cannot create output directory " + path + ": " +
                        ec.message());
    }
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// shared mesh-source options (generate or load, then optionally perturb)
struct MeshSourceOptions {
    std::string mesh_path;
    std::string mode = "3d";
    std::string divisions = "4";
    std::string extents;
    double perturb = 0.0;
    std::uint64_t seed = 7;

    void attach(CLI::App* cmd, bool with_extents) {
        cmd->add_option("--mesh", mesh_path,
                        "mesh file to load (.json or .msh); mutually "
                        "exclusive with --divisions");
        cmd->add_option("--mode", mode,
                        "mesh mode for generation: 2d (cylindrical r-z) or 3d "
                        "(cartesian)")
            ->capture_default_str();
        cmd->add_option("--divisions", divisions,
                        "structured divisions per axis, e.g. 4 or 4,6,8")
            ->capture_default_str();
        if (with_extents) {
            cmd->add_option("--extents", extents,
                            "bounding box lo,hi as x0,y0,x1,y1 (2d) or "
                            "x0,y0,z0,x1,y1,z1 (3d); default unit box");
        }
        cmd->add_option("--perturb", perturb,
                        "interior-node perturbation magnitude in [0, 0.5)")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "perturbation seed")
            ->capture_default_str();
    }

    Mesh resolve(std::string* descriptor) const {
        Mesh mesh;
        std::string desc;
        if (!mesh_path.empty()) {
            mesh = import_mesh(mesh_path);
            desc = std::filesystem::path(mesh_path).stem().string();
        } else {
            const DimensionMode dim = parse_mode(mode);
            const std::vector<int> div = parse_ints(divisions, "--divisions");
            Divisions d;
            if (div.size() == 1) {
                d = Divisions(div[0]);
            } else if (div.size() == 3) {
                d = Divisions(div[0], div[1], div[2]);
            } else if (div.size() == 2 &&
                       dim == DimensionMode::Cylindrical2D) {
                d = Divisions(div[0], div[1], 1);
            } else {
                throw Error(ErrorCategory::ConfigParse,
                            "--divisions expects 1 value, or one per axis");
            }
            BoundingBox box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
            if (!extents.empty()) {
                const std::vector<double> e =
                    parse_numbers(extents, "--extents");
                if (dim == DimensionMode::Cylindrical2D && e.size() == 4) {
                    box = {{e[0], e[1], 0.0}, {e[2], e[3], 0.0}};
                } else if (dim == DimensionMode::Cartesian3D &&
                           e.size() == 6) {
                    box = {{e[0], e[1], e[2]}, {e[3], e[4], e[5]}};
                } else {
                    throw Error(ErrorCategory::ConfigParse,
                                "--extents expects 4 values in 2d mode and 6 "
                                "in 3d mode");
                }
            }
            mesh = generate_structured_mesh(dim, d, box);
            desc = std::string(dim == DimensionMode::Cylindrical2D ? "2d-n"
                                                                   : "3d-n") +
                   divisions;
        }
        if (perturb > 0.0) {
            mesh = perturb_interior_nodes(mesh, perturb, seed);
            char suffix[64];
            std::snprintf(suffix, sizeof suffix, "-perturbed-m%g-seed%llu",
                          perturb,
                          static_cast<unsigned long long>(seed));
            desc += suffix;
        }
        if (descriptor) *descriptor = desc;
        return mesh;
    }
};

BoundaryCondition parse_bc(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ':')) parts.push_back(token);
    if (parts.size() != 3) {
        throw Error(ErrorCategory::ConfigParse,
                    "--bc expects TAG:KIND:VALUES, got '" + text + "'");
    }
    int tag = 0;
    try {
        tag = std::stoi(parts[0]);
    } catch (const std::exception&) {
        throw Error(ErrorCategory::ConfigParse,
                    "--bc tag is not an integer in '" + text + "'");
    }
    const std::vector<double> values = parse_numbers(parts[2], "--bc values");
    if (parts[1] == "dirichlet" && values.size() == 1) {
        return BoundaryCondition::dirichlet(tag, values[0]);
    }
    if (parts[1] == "neumann" && values.size() == 1) {
        return BoundaryCondition::neumann(tag, values[0]);
    }
    if (parts[1] == "robin" && values.size() == 3) {
        return BoundaryCondition::robin(tag, values[0], values[1], values[2]);
    }
    throw Error(ErrorCategory::ConfigParse,
                "--bc kind must be dirichlet:VALUE, neumann:FLUX or "
                "robin:A,GAMMA,Q; got '" + text + "'");
}

int run_verify() {
    const std::vector<CheckResult> results = run_verification();
    bool all_passed = true;
    for (const auto& result : results) {
        std::printf("%-28s %s  (%s)\n", result.name.c_str(),
                    result.passed ? "PASS" : "FAIL", result.detail.c_str());
        all_passed = all_passed && result.passed;
    }
    std::printf("%zu checks, %s\n", results.size(),
                all_passed ? "all passed" : "FAILURES PRESENT");
    return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "esfem: classical and edge-based smoothed finite element solver for "
        "scalar electrostatics on triangular (axisymmetric r-z) and "
        "tetrahedral meshes"};
    app.set_config("--config", "",
                   "TOML-style config file ([subcommand] sections); "
                   "command-line flags override file values");
    app.require_subcommand(1);
    int exit_code = 0;

    // ---- mesh ----------------------------------------------------------
    auto* mesh_cmd =
        app.add_subcommand("mesh", "generate, inspect and convert meshes");
    mesh_cmd->require_subcommand(1);

    auto* generate = mesh_cmd->add_subcommand(
        "generate", "structured mesh generation with optional perturbation");
    auto gen_source = std::make_shared<MeshSourceOptions>();
    gen_source->attach(generate, true);
    auto gen_out = std::make_shared<std::string>();
    auto gen_vtk = std::make_shared<std::string>();
    generate->add_option("--out", *gen_out, "output mesh path (.json)")
        ->required();
    generate->add_option("--vtk", *gen_vtk, "also write a VTK copy");
    generate->callback([gen_source, gen_out, gen_vtk]() {
        if (!gen_source->mesh_path.empty()) {
            throw Error(ErrorCategory::ConfigParse,
                        "mesh generate does not take --mesh; use mesh convert");
        }
        const Mesh mesh = gen_source->resolve(nullptr);
        export_native_json(mesh, *gen_out);
        if (!gen_vtk->empty()) export_vtk(mesh, {}, "field", *gen_vtk);
        const EdgeTopology edges = extract_edges(mesh);
        std::printf("wrote %s: %d nodes, %d elements, %d edges (%s)\n",
                    gen_out->c_str(), mesh.node_count(), mesh.element_count(),
                    edges.edge_count(), to_string(mesh.mode));
    });

    auto* quality_cmd = mesh_cmd->add_subcommand(
        "quality", "edge-length ratio report for a mesh");
    auto quality_mesh = std::make_shared<std::string>();
    auto quality_out = std::make_shared<std::string>();
    quality_cmd->add_option("--mesh", *quality_mesh, "mesh file")->required();
    quality_cmd->add_option("--out", *quality_out,
                            "write the histogram as CSV");
    quality_cmd->callback([quality_mesh, quality_out]() {
        const Mesh mesh = import_mesh(*quality_mesh);
        const QualityReport report = quality(mesh);
        std::printf("elements: %zu\n", report.per_element_ratio.size());
        std::printf("mean edge length: %.6g\n", report.mean_edge_length);
        std::printf("fraction with ratio > 2: %.4f\n",
                    report.fraction_above(2.0));
        for (int b = 0; b < QualityReport::kBinCount; ++b) {
            if (report.histogram[b] == 0) continue;
            const double lower = report.bin_lower(b);
            if (b + 1 == QualityReport::kBinCount) {
                std::printf("  [%4.2f,  inf): %lld\n", lower,
                            static_cast<long long>(report.histogram[b]));
            } else {
                std::printf("  [%4.2f, %4.2f): %lld\n", lower,
                            lower + QualityReport::kBinWidth,
                            static_cast<long long>(report.histogram[b]));
            }
        }
        if (!quality_out->empty()) {
            const std::string descriptor =
                std::filesystem::path(*quality_mesh).stem().string();
            write_quality_csv({{descriptor, report}}, *quality_out);
        }
    });

    auto* convert = mesh_cmd->add_subcommand(
        "convert", "convert between .msh / .json input and .json / .vtk output");
    auto convert_in = std::make_shared<std::string>();
    auto convert_out = std::make_shared<std::string>();
    convert->add_option("--mesh", *convert_in, "input mesh (.json or .msh)")
        ->required();
    convert->add_option("--out", *convert_out, "output path (.json or .vtk)")
        ->required();
    convert->callback([convert_in, convert_out]() {
        const Mesh mesh = import_mesh(*convert_in);
        const std::string& out = *convert_out;
        const auto dot = out.find_last_of('.');
        const std::string ext = dot == std::string::npos ? "" : out.substr(dot);
        if (ext == ".json") {
            export_native_json(mesh, out);
        } else if (ext == ".vtk") {
            export_vtk(mesh, {}, "field", out);
        } else {
            throw Error(ErrorCategory::ConfigParse,
                        "convert output must end in .json or .vtk");
        }
        std::printf("wrote %s\n", out.c_str());
    });

    // ---- solve ---------------------------------------------------------
    auto* solve_cmd = app.add_subcommand(
        "solve", "assemble and solve one boundary-value problem");
    auto solve_source = std::make_shared<MeshSourceOptions>();
    solve_source->attach(solve_cmd, true);
    struct SolveArgs {
        std::string spec = "box";
        std::vector<std::string> bcs;
        double alpha = 1.0;
        double beta = 0.0;
        double source = 0.0;
        double patch_offset = 1.0;
        std::string patch_gradient;
        std::string method = "both";
        double tol = 1e-10;
        std::string out = "out";
        std::string dump_domains;
        std::string dump_system_prefix;
    };
    auto solve_args = std::make_shared<SolveArgs>();
    solve_cmd
        ->add_option("--spec", solve_args->spec,
                     "built-in problem: box (unit-cube benchmark), "
                     "patch-affine (affine Dirichlet patch), or custom "
                     "(define with --bc/--alpha/--beta/--source)")
        ->capture_default_str();
    solve_cmd->add_option(
        "--bc", solve_args->bcs,
        "custom boundary condition TAG:dirichlet:VALUE, TAG:neumann:FLUX or "
        "TAG:robin:A,GAMMA,Q (repeatable; implies --spec custom)");
    solve_cmd->add_option("--alpha", solve_args->alpha,
                          "uniform material coefficient for custom specs")
        ->capture_default_str();
    solve_cmd->add_option("--beta", solve_args->beta,
                          "uniform reaction coefficient for custom specs")
        ->capture_default_str();
    solve_cmd->add_option("--source", solve_args->source,
                          "uniform source density for custom specs")
        ->capture_default_str();
    solve_cmd->add_option("--patch-offset", solve_args->patch_offset,
                          "patch-affine field offset")
        ->capture_default_str();
    solve_cmd->add_option("--patch-gradient", solve_args->patch_gradient,
                          "patch-affine gradient gx,gy,gz (default 2,3,-1 in "
                          "3d; 0,2 in 2d)");
    solve_cmd->add_option("--method", solve_args->method,
                          "fem, esfem or both")
        ->capture_default_str();
    solve_cmd->add_option("--tol", solve_args->tol,
                          "solver relative-residual tolerance")
        ->capture_default_str();
    solve_cmd->add_option("--out", solve_args->out, "output directory")
        ->capture_default_str();
    solve_cmd->add_option("--dump-domains", solve_args->dump_domains,
                          "write smoothing-domain geometry as JSON");
    solve_cmd->add_option("--dump-system", solve_args->dump_system_prefix,
                          "write K and b as text with this path prefix");
    solve_cmd->callback([solve_source, solve_args]() {
        std::string descriptor;
        const Mesh mesh = solve_source->resolve(&descriptor);
        const SolveArgs& args = *solve_args;

        std::string spec_name = args.spec;
        if (!args.bcs.empty() && spec_name == "box") spec_name = "custom";
        BvpSpec spec;
        std::vector<double> reference;
        if (spec_name == "box") {
            spec = box_spec(mesh);
            reference = box_reference_at_nodes(mesh);
        } else if (spec_name == "patch-affine") {
            Vec3 gradient = mesh.mode == DimensionMode::Cylindrical2D
                                ? Vec3(0.0, 2.0, 0.0)
                                : Vec3(2.0, 3.0, -1.0);
            if (!args.patch_gradient.empty()) {
                const std::vector<double> g =
                    parse_numbers(args.patch_gradient, "--patch-gradient");
                if (g.size() == 2) {
                    gradient = Vec3(g[0], g[1], 0.0);
                } else if (g.size() == 3) {
                    gradient = Vec3(g[0], g[1], g[2]);
                } else {
                    throw Error(ErrorCategory::ConfigParse,
                                "--patch-gradient expects 2 or 3 components");
                }
            }
            spec = patch_affine_spec(mesh, args.patch_offset, gradient);
            reference.reserve(mesh.nodes.size());
            for (const auto& p : mesh.nodes) {
                reference.push_back(args.patch_offset + gradient.dot(p));
            }
        } else if (spec_name == "custom") {
            spec = uniform_spec(mesh, args.alpha, args.beta);
            const double f = args.source;
            spec.source = [f](const Vec3&) { return f; };
            for (const std::string& text : args.bcs) {
                spec.boundary_conditions.push_back(parse_bc(text));
            }
        } else {
            throw Error(ErrorCategory::ConfigParse,
                        "unknown spec '" + args.spec +
                            "' (expected box, patch-affine or custom)");
        }
        validate(spec, mesh);
        ensure_directory(args.out);

        const std::vector<Method> methods = parse_methods(args.method);
        const bool needs_domains =
            !args.dump_domains.empty() ||
            std::find(methods.begin(), methods.end(), Method::ESFEM) !=
                methods.end();
        EdgeTopology edges;
        SmoothingDomainSet domains;
        if (needs_domains) {
            edges = extract_edges(mesh);
            domains = build_smoothing_domains(mesh, edges, spec.alpha);
        }
        if (!args.dump_domains.empty()) {
            dump_smoothing_domains(mesh, edges, domains, args.dump_domains);
        }

        std::vector<ErrorReport> rows;
        std::ofstream log(join_path(args.out, "solve.log"));
        for (Method method : methods) {
            SparseSystem system =
                method == Method::FEM
                    ? assemble_fem(mesh, spec)
                    : assemble_esfem(mesh, edges, domains, spec);
            apply_boundary_conditions(system, mesh, spec);
            if (!args.dump_system_prefix.empty()) {
                dump_system(system,
                            args.dump_system_prefix + "_" + to_string(method) +
                                "_K.txt",
                            args.dump_system_prefix + "_" + to_string(method) +
                                "_b.txt");
            }
            SolveOptions options;
            options.tolerance = args.tol;
            const SolveReport report = solve(system, options);
            export_vtk(mesh, report.solution, "potential",
                       join_path(args.out,
                                 std::string("solution_") + to_string(method) +
                                     ".vtk"));
            ErrorReport row;
            row.mesh_descriptor = descriptor;
            row.method = method;
            row.h = quality(mesh).mean_edge_length;
            row.rmse = reference.empty()
                           ? std::nan("")
                           : rmse(report.solution, reference);
            row.max_abs_error = reference.empty()
                                    ? std::nan("")
                                    : max_abs_error(report.solution, reference);
            row.iterations = report.iterations;
            row.wall_time = report.wall_time;
            rows.push_back(row);
            log << "method=" << to_string(method)
                << " iterations=" << report.iterations
                << " final_relative_residual=" << report.final_relative_residual
                << " wall_time=" << report.wall_time << "\n";
            std::printf(
                "%s: iterations=%d residual=%.3e wall=%.3fs rmse=%.6e\n",
                to_string(method), report.iterations,
                report.final_relative_residual, report.wall_time, row.rmse);
        }
        write_error_csv(rows, join_path(args.out, "solve.csv"));
    });

    // ---- box-study -----------------------------------------------------
    auto* study_cmd = app.add_subcommand(
        "box-study",
        "unit-cube convergence and distortion benchmark (both methods)");
    struct StudyArgs {
        std::string divisions = "4,8,16";
        double perturb = 0.2;
        std::uint64_t seed = 7;
        std::string method = "both";
        double tol = 1e-10;
        std::string out = "out";
    };
    auto study_args = std::make_shared<StudyArgs>();
    study_cmd->add_option("--divisions", study_args->divisions,
                          "comma-separated division counts")
        ->capture_default_str();
    study_cmd->add_option("--perturb", study_args->perturb,
                          "perturbation magnitude (0 disables perturbed runs)")
        ->capture_default_str();
    study_cmd->add_option("--seed", study_args->seed, "perturbation seed")
        ->capture_default_str();
    study_cmd->add_option("--method", study_args->method, "fem, esfem or both")
        ->capture_default_str();
    study_cmd->add_option("--tol", study_args->tol,
                          "solver relative-residual tolerance")
        ->capture_default_str();
    study_cmd->add_option("--out", study_args->out, "output directory")
        ->capture_default_str();
    study_cmd->callback([study_args]() {
        BoxStudyOptions options;
        options.divisions = parse_ints(study_args->divisions, "--divisions");
        options.perturbation = study_args->perturb;
        options.seed = study_args->seed;
        options.methods = parse_methods(study_args->method);
        options.tolerance = study_args->tol;
        const BoxStudyResult result = run_box_study(options);
        ensure_directory(study_args->out);
        write_error_csv(result.reports,
                        join_path(study_args->out, "results.csv"));
        write_quality_csv(result.quality,
                          join_path(study_args->out, "quality.csv"));
        std::printf("%-28s %-6s %-12s %-12s %-12s %s\n", "mesh", "method",
                    "h", "rmse", "max_error", "iterations");
        for (const auto& row : result.reports) {
            std::printf("%-28s %-6s %-12.5e %-12.5e %-12.5e %d\n",
                        row.mesh_descriptor.c_str(), to_string(row.method),
                        row.h, row.rmse, row.max_abs_error, row.iterations);
        }
        for (Method method : options.methods) {
            std::vector<std::pair<double, double>> points;
            for (const auto& row : result.reports) {
                if (row.method == method &&
                    row.mesh_descriptor.rfind("regular-", 0) == 0) {
                    points.emplace_back(row.h, row.rmse);
                }
            }
            if (points.size() >= 2) {
                std::printf("%s regular-mesh convergence slope: %.3f\n",
                            to_string(method), convergence_slope(points));
            }
        }
        std::printf("wrote %s and %s\n",
                    join_path(study_args->out, "results.csv").c_str(),
                    join_path(study_args->out, "quality.csv").c_str());
    });

    // ---- verify --------------------------------------------------------
    auto* verify_cmd = app.add_subcommand(
        "verify", "run the invariant suite and report pass/fail");
    verify_cmd->callback([&exit_code]() { exit_code = run_verify(); });

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error category=config-parse: " << e.what() << "\n";
        return exit_code_for(ErrorCategory::ConfigParse);
    } catch (const Error& e) {
        std::cerr << "error category=" << to_string(e.category()) << ": "
                  << e.what() << "\n";
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error category=internal: " << e.what() << "\n";
        return exit_code_for(ErrorCategory::Internal);
    }
    return exit_code;
}
