#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "esfem/assembly.hpp"
#include "esfem/mesh.hpp"
#include "esfem/solver.hpp"

namespace esfem {

// One row of the benchmark CSV (column order is part of the CLI contract).
struct ErrorReport {
    std::string mesh_descriptor;
    Method method = Method::FEM;
    double h = 0.0;  // mean edge length
    double rmse = 0.0;
    double max_abs_error = 0.0;
    int iterations = 0;
    double wall_time = 0.0;
};

// Separable reference potential for the unit-cube benchmark:
// 10 sin(pi x) sin(pi y) sinh(sqrt(2) pi z) / sinh(sqrt(2) pi).
double box_reference(double x, double y, double z);
std::vector<double> box_reference_at_nodes(const Mesh& mesh);

// sqrt(sum (num - ref)^2 / sum ref^2); throws on a zero reference norm.
double rmse(const std::vector<double>& numerical,
            const std::vector<double>& reference);
double max_abs_error(const std::vector<double>& numerical,
                     const std::vector<double>& reference);

// Solves the Laplace problem whose Dirichlet data is the affine field
// offset + gradient . x on the whole boundary and returns the max nodal
// deviation from that field. Linear elements must reproduce it to roundoff.
double patch_test(const Mesh& mesh, Method method, double offset,
                  const Vec3& gradient, double solver_tolerance = 1e-12);

struct BoxStudyOptions {
    std::vector<int> divisions{4, 8, 16};
    double perturbation = 0.2;  // 0 skips the perturbed runs
    std::uint64_t seed = 7;
    std::vector<Method> methods{Method::FEM, Method::ESFEM};
    double tolerance = 1e-10;
};

struct QualityRow {
    std::string mesh_descriptor;
    QualityReport report;
};

struct BoxStudyResult {
    std::vector<ErrorReport> reports;   // ordered by (division, state, method)
    std::vector<QualityRow> quality;    // one row per mesh
};

// Benchmark driver: for each division a regular unit-cube mesh and, when
// perturbation > 0, its perturbed sibling; every mesh solved with every
// requested method and compared against box_reference at the nodes.
BoxStudyResult run_box_study(const BoxStudyOptions& options);

// Least-squares slope of log(rmse) against log(h).
double convergence_slope(const std::vector<std::pair<double, double>>& h_rmse);

void write_error_csv(const std::vector<ErrorReport>& reports,
                     const std::string& path);
void write_quality_csv(const std::vector<QualityRow>& rows,
                       const std::string& path);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Invariant suite behind the CLI `verify` subcommand: patch tests, smoothing
// partition/zero-sum/linear-exactness, boundary-integral cross-check,
// nullspace, solver cross-check, determinism.
std::vector<CheckResult> run_verification();

}  // namespace esfem
