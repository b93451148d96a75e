#pragma once

// Reachability gain synthesis and evaluation of the two sliding mode control
// laws: the delay-aware law and the adaptive law for unknown delays.

#include "mjsmc/model.hpp"
#include "mjsmc/regular_form.hpp"
#include "mjsmc/solver.hpp"
#include "mjsmc/surface.hpp"

#include <nlohmann/json_fwd.hpp>

namespace mjsmc {

enum class ControllerVariant { KnownDelay, Adaptive };

/// Switching-gain margin handling in the adaptive law; Additive enlarges the
/// switching gain by the robustness margin, AsPrinted subtracts it.
enum class MarginMode { Additive, AsPrinted };

/// Surface factors s = C1 z1 + C2 z2 with C = C2^{-1} C1. C2 = I by default.
struct SurfaceRealization {
    std::vector<Matrix> C1;  // m x (n-m)
    std::vector<Matrix> C2;  // m x m, invertible
};

SurfaceRealization make_realization(const SurfaceDesign& design);

struct ControllerGains {
    ControllerVariant variant = ControllerVariant::KnownDelay;
    std::vector<Matrix> Omega;     // m x m sym PD per mode
    std::vector<Matrix> coupling;  // V-hat (known delay) or H-hat (adaptive)
    std::vector<double> epsilon;   // switching margins, > 0
    std::vector<double> f;         // disturbance bounds
    double beta = 1.0;             // adaptive gain rate (adaptive only)
    std::map<std::string, double> residual_report;
};

struct ReachabilityLmis {
    LmiSystem system;
    std::vector<VarHandle> Omega;
    std::vector<VarHandle> coupling;
};

ReachabilityLmis build_reachability_lmis(const MjlsSystem& system, ControllerVariant variant);

/// Solves the coupling LMIs; Omega_i is bounded below by 1e-3 I to avoid the
/// trivial scaling degeneracy. epsilon defaults to 0.2 per mode.
ControllerGains synthesize_gains(const MjlsSystem& system, ControllerVariant variant,
                                 const SolverOptions& options = {}, double epsilon = 0.2,
                                 double beta = 2.0);

/// s = C1_i z1 + C2_i z2, state split at n-m.
Vector surface_value(const SurfaceRealization& realization, const Vector& z, int mode);

/// Delay-aware SMC law; z_delayed = z(t - tau_i(t)).
Vector smc_control(const ControllerGains& gains, const SurfaceRealization& realization,
                   const std::vector<RegularForm>& forms, const TransitionSpec& transitions,
                   const Vector& z, const Vector& z_delayed, int mode);

/// Adaptive SMC law using only the instantaneous state and the Razumikhin
/// estimate r.
Vector adaptive_control(const ControllerGains& gains, const SurfaceRealization& realization,
                        const std::vector<RegularForm>& forms, const TransitionSpec& transitions,
                        const Vector& z, const Vector& s, double r, int mode,
                        MarginMode margin = MarginMode::Additive);

/// dr/dt of the adaptive estimate; always >= 0.
double adaptive_rate(const ControllerGains& gains, const SurfaceRealization& realization,
                     const std::vector<RegularForm>& forms, const Vector& s, const Vector& z,
                     double beta);

/// Analytic reaching-time bound t* = 2 V^{1/2}(z0, mode0) / rho.
double reaching_time_bound(const ControllerGains& gains, const SurfaceRealization& realization,
                           const std::vector<RegularForm>& forms, const Vector& z0, int mode0);

nlohmann::json gains_to_json(const ControllerGains& gains);
ControllerGains gains_from_json(const nlohmann::json& j);

}  // namespace mjsmc
