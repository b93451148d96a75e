#pragma once

// Sliding-surface synthesis: assembles the delay-dependent stochastic
// stability LMIs over the reduced (n-m)-dimensional block, solves them as one
// joint feasibility problem, and extracts the surface parameters C_i together
// with the reduced sliding dynamics.

#include <map>

#include "mjsmc/lmi.hpp"
#include "mjsmc/model.hpp"
#include "mjsmc/regular_form.hpp"
#include "mjsmc/solver.hpp"

#include <nlohmann/json_fwd.hpp>

namespace mjsmc {

/// Per-mode decision variables of the synthesis problem.
struct SurfaceModeVars {
    VarHandle X;             // (n-m) sym PD
    VarHandle Q1, Q2, Q3;    // (n-m) sym PD, mode-dependent
    VarHandle W1, W2, W3;    // (n-m) sym
    VarHandle V;             // (n-m) sym
    VarHandle M, N, S;       // 4(n-m) x (n-m) stacked blocks
    VarHandle Y;             // m x (n-m)
};

struct SurfaceLmis {
    LmiSystem system;
    std::vector<SurfaceModeVars> mode_vars;
    VarHandle Q1s, Q2s, Q3s;  // shared (n-m) sym PD
    VarHandle R1s, R2s;       // shared (n-m) sym PD
};

SurfaceLmis build_surface_lmis(const MjlsSystem& system, const std::vector<RegularForm>& forms);

struct SurfaceDesign {
    std::vector<Matrix> C;  // m x (n-m) per mode
    std::vector<Matrix> X;
    std::vector<Matrix> Y;
    std::map<std::string, double> residual_report;
    std::vector<std::pair<Matrix, Matrix>> sliding;  // (A~_i, Ad~_i)
    FeasibilityStatus status = FeasibilityStatus::IterationLimit;
};

/// Solves the joint feasibility problem and recovers C_i = Y_i X_i^{-1}.
/// Throws on n == m (no sliding block) and on numerically singular X_i.
SurfaceDesign synthesize_surface(const MjlsSystem& system, const std::vector<RegularForm>& forms,
                                 const SolverOptions& options = {});

/// Reduced dynamics pairs (A11 - A12 C, Ad11 - Ad12 C) per mode.
std::vector<std::pair<Matrix, Matrix>> sliding_dynamics(const std::vector<Matrix>& C,
                                                        const std::vector<RegularForm>& forms);

nlohmann::json surface_to_json(const SurfaceDesign& design);
SurfaceDesign surface_from_json(const nlohmann::json& j);

}  // namespace mjsmc
