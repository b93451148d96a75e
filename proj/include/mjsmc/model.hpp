#pragma once

// Jump-system data: per-mode matrices, mode-dependent delay bounds, the
// partly unknown transition-rate matrix, and validation of the standing
// assumptions. Synthesis only ever sees the known/unknown mask; the optional
// fully known generator exists for the simulator alone.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mjsmc/linalg.hpp"

namespace mjsmc {

struct ModeData {
    Matrix A;   // n x n
    Matrix Ad;  // n x n delayed-state matrix
    Matrix B;   // n x m, full column rank
    double f = 0.0;  // disturbance bound ||F w(t)|| <= f
};

/// Parametric delay a + b*sin(omega t) or a + b*cos(omega t).
struct TauForm {
    enum class Shape { Sin, Cos };
    Shape shape = Shape::Sin;
    double a = 0.0;
    double b = 0.0;
    double omega = 0.0;

    double operator()(double t) const {
        return a + b * (shape == Shape::Sin ? std::sin(omega * t) : std::cos(omega * t));
    }
};

struct DelaySpec {
    std::vector<double> h1i, h2i, mui;
    std::vector<TauForm> tau;

    double h1() const;  // min_i h1i
    double h2() const;  // max_i h2i
};

struct TransitionSpec {
    int N = 0;
    /// Row-major mask; nullopt marks an unknown rate.
    std::vector<std::vector<std::optional<double>>> entries;
    /// Fully known generator, used only by the simulator.
    std::optional<Matrix> true_rates;
};

struct MjlsSystem {
    std::vector<ModeData> modes;
    DelaySpec delays;
    TransitionSpec transitions;
    int n = 0;
    int m = 0;

    int mode_count() const { return static_cast<int>(modes.size()); }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool valid() const { return violations.empty(); }
};

/// Checks every structural invariant; violations are data, not exceptions.
/// Delay-derivative mismatches between tau and mu are reported, not rejected.
ValidationReport validate_system(const MjlsSystem& system);

struct KnownIndexSets {
    std::vector<int> known;    // l_K^i, ascending (0-based)
    std::vector<int> unknown;  // l_uK^i, ascending
    std::vector<int> kappa;    // known indices in ascending order
    int alpha = 0;             // known off-diagonal count
};

/// Partition of {0..N-1} for row i of the mask.
KnownIndexSets known_index_sets(const TransitionSpec& transitions, int i);

MjlsSystem system_from_json(const nlohmann::json& config);
nlohmann::json system_to_json(const MjlsSystem& system);

}  // namespace mjsmc
