#pragma once

// Feasibility solver for small dense LMI systems. Feasibility is posed as a
// convex set-intersection problem: the affine graph of the scalarized
// constraints on one side, the product of shifted PSD cones and the variable
// norm ball on the other, solved by Douglas-Rachford alternating projections.
// Strict inequalities are driven to an interior target and certified against
// the system's strictness margin.

#include <iosfwd>
#include <optional>

#include "mjsmc/lmi.hpp"

namespace mjsmc {

struct SolverOptions {
    int max_iterations = 100000;
    double tolerance = 1e-8;
    /// Defaults to the LmiSystem's strictness margin when unset.
    std::optional<double> strictness_margin;
    /// Per-variable Frobenius norm cap; keeps the feasibility problem compact.
    double variable_bound = 1e4;
    int seed = 0;
    /// Optional CSV iteration log (iteration, t-value, worst residual).
    std::ostream* iteration_log = nullptr;
};

enum class FeasibilityStatus { StrictlyFeasible, InfeasibleWithinBound, IterationLimit };

struct FeasibilityResult {
    FeasibilityStatus status = FeasibilityStatus::IterationLimit;
    std::optional<Assignment> assignment;
    double worst_residual = std::numeric_limits<double>::infinity();
    std::map<std::string, double> per_constraint_residuals;
    int iterations = 0;
};

/// Deterministic given options; strictly_feasible guarantees every strict
/// constraint has residual <= -margin + tolerance and every non-strict
/// constraint residual <= tolerance. infeasible_within_bound means the
/// projections stalled with positive gap inside the variable bound; it is not
/// a proof of mathematical infeasibility.
FeasibilityResult solve_feasibility(const LmiSystem& system, const SolverOptions& options = {});

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
Matrix project_psd(const Matrix& matrix);

}  // namespace mjsmc
