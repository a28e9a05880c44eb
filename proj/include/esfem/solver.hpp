#pragma once

#include <vector>

#include "esfem/assembly.hpp"

namespace esfem {

enum class SolveMethod { ConjugateGradient, DenseCholesky };

inline const char* to_string(SolveMethod m) {
    return m == SolveMethod::ConjugateGradient ? "conjugate-gradient"
                                               : "dense-cholesky";
}

struct SolveOptions {
    double tolerance = 1e-10;  // relative residual |K x - b| / |b|
    int max_iterations = 0;    // 0 picks 10 n + 100
    SolveMethod method = SolveMethod::ConjugateGradient;
    // starting point for CG; empty means zero
    std::vector<double> initial_guess;
};

struct SolveReport {
    std::vector<double> solution;
    int iterations = 0;
    double final_relative_residual = 0.0;
    SolveMethod method = SolveMethod::ConjugateGradient;
    double wall_time = 0.0;  // seconds
    // relative residual after each iteration
    std::vector<double> residual_history;
};

// Jacobi-preconditioned conjugate gradient with fixed-order reductions, or
// dense Cholesky for systems up to kCholeskyLimit unknowns. Detects the pure
// Neumann constant nullspace up front and reports it as a SolverFailure, as
// it does non-convergence and indefinite pivots.
SolveReport solve(const SparseSystem& system, const SolveOptions& options = {});

inline constexpr int kCholeskyLimit = 2000;

}  // namespace esfem
