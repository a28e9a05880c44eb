#include "esfem/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace esfem {

namespace {

double norm2(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

// A system with no Dirichlet rows and the constant vector in the nullspace
// cannot determine the potential level; report it instead of iterating.
void check_singular(const SparseSystem& system) {
    if (!system.dirichlet_map.empty()) return;
    const std::vector<double> ones(system.n, 1.0);
    const std::vector<double> k_ones = system.multiply(ones);
    double worst = 0.0;
    for (double v : k_ones) worst = std::max(worst, std::abs(v));
    if (worst <= 1e-12 * system.max_abs_value()) {
        throw Error(ErrorCategory::SolverFailure,
                    "singular system: constant fields lie in the nullspace "
                    "(no Dirichlet constraint, no absorption term)");
    }
}

SolveReport solve_cg(const SparseSystem& system, const SolveOptions& options) {
    const int n = system.n;
    SolveReport report;
    report.method = SolveMethod::ConjugateGradient;

    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i) diag[i] = system.entry(i, i);
    for (int i = 0; i < n; ++i) {
        if (!(diag[i] > 0.0)) {
            throw Error(ErrorCategory::SolverFailure,
                        "non-positive diagonal at row " + std::to_string(i) +
                            "; system is not positive definite");
        }
    }

    const double b_norm = norm2(system.rhs);
    if (b_norm == 0.0) {
        report.solution.assign(n, 0.0);
        return report;
    }

    std::vector<double> x;
    if (options.initial_guess.empty()) {
        x.assign(n, 0.0);
    } else {
        if (options.initial_guess.size() != static_cast<std::size_t>(n)) {
            throw Error(ErrorCategory::Internal,
                        "initial guess length does not match the system");
        }
        x = options.initial_guess;
    }

    std::vector<double> r = system.rhs;
    {
        const std::vector<double> kx = system.multiply(x);
        for (int i = 0; i < n; ++i) r[i] -= kx[i];
    }
    std::vector<double> z(n), p(n), kp;
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    double rel = norm2(r) / b_norm;
    report.final_relative_residual = rel;

    const int max_iterations = options.max_iterations > 0
                                   ? options.max_iterations
                                   : 10 * n + 100;
    int iteration = 0;
    while (rel > options.tolerance) {
        if (iteration >= max_iterations) {
            std::string history;
            const std::size_t tail =
                std::min<std::size_t>(report.residual_history.size(), 5);
            for (std::size_t i = report.residual_history.size() - tail;
                 i < report.residual_history.size(); ++i) {
                history += " " + std::to_string(report.residual_history[i]);
            }
            throw Error(ErrorCategory::SolverFailure,
                        "conjugate gradient did not reach " +
                            std::to_string(options.tolerance) + " in " +
                            std::to_string(max_iterations) +
                            " iterations; relative residual " +
                            std::to_string(rel) + "; history tail:" + history);
        }
        kp = system.multiply(p);
        const double alpha = rz / dot(p, kp);
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * kp[i];
        rel = norm2(r) / b_norm;
        ++iteration;
        report.residual_history.push_back(rel);
        if (rel <= options.tolerance) break;
        for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    report.solution = std::move(x);
    report.iterations = iteration;
    report.final_relative_residual = rel;
    return report;
}

SolveReport solve_cholesky(const SparseSystem& system,
                           const SolveOptions& options) {
    const int n = system.n;
    if (n > kCholeskyLimit) {
        throw Error(ErrorCategory::SolverFailure,
                    "dense Cholesky is limited to " +
                        std::to_string(kCholeskyLimit) + " unknowns, got " +
                        std::to_string(n));
    }
    SolveReport report;
    report.method = SolveMethod::DenseCholesky;

    std::vector<std::vector<double>> a = system.to_dense();
    for (int j = 0; j < n; ++j) {
        double pivot = a[j][j];
        for (int k = 0; k < j; ++k) pivot -= a[j][k] * a[j][k];
        if (!(pivot > 0.0)) {
            throw Error(ErrorCategory::SolverFailure,
                        "indefinite pivot at column " + std::to_string(j) +
                            " during Cholesky; constraints were likely not "
                            "applied to a singular block");
        }
        a[j][j] = std::sqrt(pivot);
        for (int i = j + 1; i < n; ++i) {
            double sum = a[i][j];
            for (int k = 0; k < j; ++k) sum -= a[i][k] * a[j][k];
            a[i][j] = sum / a[j][j];
        }
    }
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = system.rhs[i];
        for (int k = 0; k < i; ++k) sum -= a[i][k] * y[k];
        y[i] = sum / a[i][i];
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double sum = y[i];
        for (int k = i + 1; k < n; ++k) sum -= a[k][i] * x[k];
        x[i] = sum / a[i][i];
    }

    const double b_norm = norm2(system.rhs);
    if (b_norm > 0.0) {
        std::vector<double> residual = system.multiply(x);
        for (int i = 0; i < n; ++i) residual[i] -= system.rhs[i];
        report.final_relative_residual = norm2(residual) / b_norm;
    }
    report.solution = std::move(x);
    return report;
}

}  // namespace

SolveReport solve(const SparseSystem& system, const SolveOptions& options) {
    if (!(options.tolerance > 0.0) || !(options.tolerance < 1.0)) {
        throw Error(ErrorCategory::SolverFailure,
                    "solver tolerance must lie in (0, 1)");
    }
    const auto start = std::chrono::steady_clock::now();
    check_singular(system);
    SolveReport report = options.method == SolveMethod::ConjugateGradient
                             ? solve_cg(system, options)
                             : solve_cholesky(system, options);
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
}

}  // namespace esfem
