#pragma once

// Closed-loop Monte-Carlo simulation: exact CTMC mode sampling, fixed-step
// RK4 integration of the delayed dynamics in z-coordinates with a linear
// interpolation history buffer, sample-and-hold control, and trajectory
// recording.

#include <optional>

#include "mjsmc/controller.hpp"
#include "mjsmc/model.hpp"
#include "mjsmc/regular_form.hpp"
#include "mjsmc/surface.hpp"

namespace mjsmc {

struct DisturbanceSpec {
    double amplitude = 0.1;  // w(t) = amplitude * sin(omega t)
    double omega = 1.0;
};

struct SimConfig {
    double t_final = 20.0;
    double dt = 1e-3;
    int seed = 0;
    int runs = 1;
    Vector z0;
    int mode0 = 0;
    DisturbanceSpec disturbance;
    ControllerVariant variant = ControllerVariant::KnownDelay;
    MarginMode margin = MarginMode::Additive;
    double surface_tolerance = 0.02;
};

struct ModePath {
    std::vector<double> jump_times;  // ascending, starts at 0
    std::vector<int> modes;          // same length; consecutive entries differ

    int mode_at(double t) const;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<int> mode;
    std::vector<Vector> z;
    std::vector<Vector> s;
    std::vector<Vector> u;
    std::vector<double> r;
    std::vector<double> tau;
};

/// Exact CTMC sample: exponential holding times with rate -lambda_ii,
/// categorical jumps with probability lambda_ij / (-lambda_ii).
ModePath sample_mode_path(const Matrix& true_rates, int mode0, double t_final, int seed);

/// Full closed loop in z-coordinates; mode jumps snap to the grid point at or
/// after the true jump; delayed state is read by linear interpolation with
/// constant pre-history z0; control is held over each step.
Trajectory simulate(const MjlsSystem& system, const ControllerGains& gains,
                    const SurfaceRealization& realization, const SimConfig& config);

/// Reduced sliding dynamics z1' = A~_i z1 + Ad~_i z1(t - tau_i(t)) only,
/// under the same mode process. Initial z1 is config.z0 (dimension n-m).
Trajectory simulate_sliding(const MjlsSystem& system,
                            const std::vector<std::pair<Matrix, Matrix>>& sliding,
                            const SimConfig& config);

/// Mean over runs of the Riemann sum of ||z||^2 dt.
double empirical_ss_metric(const std::vector<Trajectory>& trajectories);

/// First grid time after which ||s(t)|| <= tol for all remaining samples.
std::optional<double> reaching_time_empirical(const Trajectory& trajectory, double tol);

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace mjsmc
