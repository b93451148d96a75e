#include "mjsmc/controller.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mjsmc {

SurfaceRealization make_realization(const SurfaceDesign& design) {
    SurfaceRealization r;
    for (const Matrix& c : design.C) {
        r.C1.push_back(c);
        r.C2.push_back(Matrix::Identity(c.rows(), c.rows()));
    }
    return r;
}

ReachabilityLmis build_reachability_lmis(const MjlsSystem& system, ControllerVariant variant) {
    const int N = system.mode_count();
    const char* cname = variant == ControllerVariant::KnownDelay ? "Vhat_" : "Hhat_";
    ReachabilityLmis out;
    LmiSystem& sys = out.system;
    for (int i = 0; i < N; ++i) {
        out.Omega.push_back(sys.declare_symmetric("Omega_" + std::to_string(i + 1), system.m,
                                                  SignHint::PositiveDefinite));
        out.coupling.push_back(sys.declare_symmetric(cname + std::to_string(i + 1), system.m));
    }
    const Matrix Im = Matrix::Identity(system.m, system.m);
    for (int i = 0; i < N; ++i) {
        const KnownIndexSets sets = known_index_sets(system.transitions, i);
        for (int j : sets.unknown) {
            MatrixExpr e = MatrixExpr::variable(out.Omega[j]) - MatrixExpr::variable(out.coupling[i]);
            if (j == i)
                sys.add(std::move(e), Sense::PositiveSemidefinite,
                        "U2[i=" + std::to_string(i + 1) + "]");
            else
                sys.add(std::move(e), Sense::NegativeSemidefinite,
                        "U1[i=" + std::to_string(i + 1) + ",j=" + std::to_string(j + 1) + "]");
        }
        sys.add(MatrixExpr::variable(out.Omega[i]), Sense::PositiveDefinite,
                "PD[Omega_" + std::to_string(i + 1) + "]");
        sys.add(MatrixExpr::variable(out.Omega[i]) - MatrixExpr::from_constant(1e-3 * Im),
                Sense::PositiveSemidefinite, "LB[Omega_" + std::to_string(i + 1) + "]");
    }
    return out;
}

ControllerGains synthesize_gains(const MjlsSystem& system, ControllerVariant variant,
                                 const SolverOptions& options, double epsilon, double beta) {
    ReachabilityLmis lmis = build_reachability_lmis(system, variant);
    FeasibilityResult result = solve_feasibility(lmis.system, options);
    if (result.status != FeasibilityStatus::StrictlyFeasible)
        throw std::runtime_error("synthesize_gains: reachability LMIs not strictly feasible");

    ControllerGains g;
    g.variant = variant;
    g.beta = beta;
    g.residual_report = result.per_constraint_residuals;
    for (int i = 0; i < system.mode_count(); ++i) {
        g.Omega.push_back(result.assignment->at(lmis.Omega[i].id));
        g.coupling.push_back(result.assignment->at(lmis.coupling[i].id));
        g.epsilon.push_back(epsilon);
        g.f.push_back(system.modes[i].f);
    }
    return g;
}

Vector surface_value(const SurfaceRealization& realization, const Vector& z, int mode) {
    const Matrix& C1 = realization.C1[mode];
    const Matrix& C2 = realization.C2[mode];
    const int q = static_cast<int>(C1.cols());
    const int m = static_cast<int>(C2.cols());
    if (z.size() != q + m) throw std::invalid_argument("surface_value: state dimension mismatch");
    return C1 * z.head(q) + C2 * z.tail(m);
}

namespace {

Matrix full_surface(const SurfaceRealization& r, int mode) {
    Matrix C(r.C2[mode].rows(), r.C1[mode].cols() + r.C2[mode].cols());
    C.leftCols(r.C1[mode].cols()) = r.C1[mode];
    C.rightCols(r.C2[mode].cols()) = r.C2[mode];
    return C;
}

/// -1/2 (Omega_i C2 B2)^{-1} sum_{j known} lambda_ij (Omega_j - coupling_i) s
Vector coupling_term(const ControllerGains& gains, const Matrix& C2B2,
                     const TransitionSpec& transitions, const Vector& s, int mode) {
    const KnownIndexSets sets = known_index_sets(transitions, mode);
    Matrix acc = Matrix::Zero(C2B2.rows(), C2B2.cols());
    for (int j : sets.known)
        acc += (*transitions.entries[mode][j]) * (gains.Omega[j] - gains.coupling[mode]);
    const Matrix lead = gains.Omega[mode] * C2B2;
    return -0.5 * lead.partialPivLu().solve(acc * s);
}

}  // namespace

Vector smc_control(const ControllerGains& gains, const SurfaceRealization& realization,
                   const std::vector<RegularForm>& forms, const TransitionSpec& transitions,
                   const Vector& z, const Vector& z_delayed, int mode) {
    if (gains.variant != ControllerVariant::KnownDelay)
        throw std::invalid_argument("smc_control: gains are not the known-delay variant");
    const RegularForm& rf = forms[mode];
    const Matrix C = full_surface(realization, mode);
    const Matrix C2B2 = realization.C2[mode] * rf.B2;

    const Vector s = surface_value(realization, z, mode);
    const Vector drift = C * (rf.Abar() * z + rf.Adbar() * z_delayed);
    const Vector u_eq = -C2B2.partialPivLu().solve(drift);
    const Vector sgn = sign_vector(C2B2.transpose() * gains.Omega[mode] * s);
    const Vector u_sw = -(gains.epsilon[mode] + gains.f[mode]) * sgn;
    return u_eq + u_sw + coupling_term(gains, C2B2, transitions, s, mode);
}

Vector adaptive_control(const ControllerGains& gains, const SurfaceRealization& realization,
                        const std::vector<RegularForm>& forms, const TransitionSpec& transitions,
                        const Vector& z, const Vector& s, double r, int mode, MarginMode margin) {
    if (gains.variant != ControllerVariant::Adaptive)
        throw std::invalid_argument("adaptive_control: gains are not the adaptive variant");
    if (r < 0.0) throw std::invalid_argument("adaptive_control: r must be nonnegative");
    const RegularForm& rf = forms[mode];
    const Matrix C = full_surface(realization, mode);
    const Matrix C2B2 = realization.C2[mode] * rf.B2;

    const double prefactor =
        1.0 / std::sqrt(min_eigenvalue(C2B2.transpose() * C2B2));
    const double robust = gains.epsilon[mode] + spectral_norm(C2B2) * gains.f[mode];
    const double margin_term = margin == MarginMode::Additive ? -robust : robust;
    const double gain = spectral_norm(C) *
                            (spectral_norm(rf.Abar()) + r * spectral_norm(rf.Adbar())) * z.norm() -
                        margin_term;
    const Vector sgn = sign_vector(C2B2.transpose() * gains.Omega[mode] * s);
    return -prefactor * gain * sgn + coupling_term(gains, C2B2, transitions, s, mode);
}

double adaptive_rate(const ControllerGains& gains, const SurfaceRealization& realization,
                     const std::vector<RegularForm>& forms, const Vector& s, const Vector& z,
                     double beta) {
    if (beta <= 0.0) throw std::invalid_argument("adaptive_rate: beta must be positive");
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < gains.Omega.size(); ++i) {
        const double v = s.norm() * spectral_norm(gains.Omega[i]) *
                         spectral_norm(full_surface(realization, static_cast<int>(i))) *
                         spectral_norm(forms[i].Adbar()) * z.norm();
        best = std::min(best, v);
    }
    return best / beta;
}

double reaching_time_bound(const ControllerGains& gains, const SurfaceRealization& realization,
                           const std::vector<RegularForm>& forms, const Vector& z0, int mode0) {
    double min_eps = std::numeric_limits<double>::infinity();
    double min_omega = std::numeric_limits<double>::infinity();
    double min_cb = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < gains.Omega.size(); ++i) {
        min_eps = std::min(min_eps, gains.epsilon[i]);
        min_omega = std::min(min_omega, min_eigenvalue(gains.Omega[i]));
        const Matrix cb = realization.C2[i] * forms[i].B2;
        min_cb = std::min(min_cb, min_eigenvalue(cb * cb.transpose()));
    }
    const double rho = std::sqrt(2.0) * min_eps * std::sqrt(min_omega) * std::sqrt(min_cb);
    if (rho <= 0.0) throw std::runtime_error("reaching_time_bound: nonpositive decay rate");
    const Vector s0 = surface_value(realization, z0, mode0);
    const double v0 = 0.5 * s0.dot(gains.Omega[mode0] * s0);
    return 2.0 * std::sqrt(v0) / rho;
}

nlohmann::json gains_to_json(const ControllerGains& gains) {
    auto mat = [](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    nlohmann::json j;
    j["variant"] = gains.variant == ControllerVariant::KnownDelay ? "known" : "adaptive";
    j["Omega"] = nlohmann::json::array();
    j["coupling"] = nlohmann::json::array();
    for (const Matrix& o : gains.Omega) j["Omega"].push_back(mat(o));
    for (const Matrix& c : gains.coupling) j["coupling"].push_back(mat(c));
    j["epsilon"] = gains.epsilon;
    j["f"] = gains.f;
    j["beta"] = gains.beta;
    j["residuals"] = gains.residual_report;
    return j;
}

ControllerGains gains_from_json(const nlohmann::json& j) {
    auto mat = [](const nlohmann::json& jm) {
        const int r = static_cast<int>(jm.size());
        const int c = static_cast<int>(jm[0].size());
        Matrix m(r, c);
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < c; ++k) m(i, k) = jm[i][k].get<double>();
        return m;
    };
    ControllerGains g;
    g.variant = j.at("variant").get<std::string>() == "adaptive" ? ControllerVariant::Adaptive
                                                                 : ControllerVariant::KnownDelay;
    for (const auto& o : j.at("Omega")) g.Omega.push_back(mat(o));
    for (const auto& c : j.at("coupling")) g.coupling.push_back(mat(c));
    g.epsilon = j.at("epsilon").get<std::vector<double>>();
    g.f = j.at("f").get<std::vector<double>>();
    g.beta = j.at("beta").get<double>();
    if (j.contains("residuals"))
        for (auto it = j["residuals"].begin(); it != j["residuals"].end(); ++it)
            g.residual_report[it.key()] = it.value().get<double>();
    return g;
}

}  // namespace mjsmc
