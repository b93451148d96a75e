#include "mjsmc/surface.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mjsmc {

namespace {

using Grid = std::vector<std::vector<std::optional<MatrixExpr>>>;

std::string tag(const std::string& name, int i) { return name + "[i=" + std::to_string(i + 1) + "]"; }
std::string tag2(const std::string& name, int i, int j) {
    return name + "[i=" + std::to_string(i + 1) + ",j=" + std::to_string(j + 1) + "]";
}

}  // namespace

SurfaceLmis build_surface_lmis(const MjlsSystem& system, const std::vector<RegularForm>& forms) {
    const int N = system.mode_count();
    const int q = system.n - system.m;
    if (q < 1)
        throw std::invalid_argument("build_surface_lmis: n == m leaves no sliding block");
    if (static_cast<int>(forms.size()) != N)
        throw std::invalid_argument("build_surface_lmis: one regular form per mode required");

    const double h1 = system.delays.h1();
    const double h2 = system.delays.h2();
    const double h21 = h2 - h1;

    SurfaceLmis out;
    LmiSystem& sys = out.system;
    const Matrix Iq = Matrix::Identity(q, q);

    for (int i = 0; i < N; ++i) {
        SurfaceModeVars mv;
        const std::string si = std::to_string(i + 1);
        mv.X = sys.declare_symmetric("X_" + si, q, SignHint::PositiveDefinite);
        mv.Q1 = sys.declare_symmetric("Q1_" + si, q, SignHint::PositiveDefinite);
        mv.Q2 = sys.declare_symmetric("Q2_" + si, q, SignHint::PositiveDefinite);
        mv.Q3 = sys.declare_symmetric("Q3_" + si, q, SignHint::PositiveDefinite);
        mv.W1 = sys.declare_symmetric("W1_" + si, q);
        mv.W2 = sys.declare_symmetric("W2_" + si, q);
        mv.W3 = sys.declare_symmetric("W3_" + si, q);
        mv.V = sys.declare_symmetric("V_" + si, q);
        mv.M = sys.declare_rectangular("M_" + si, 4 * q, q);
        mv.N = sys.declare_rectangular("N_" + si, 4 * q, q);
        mv.S = sys.declare_rectangular("S_" + si, 4 * q, q);
        mv.Y = sys.declare_rectangular("Y_" + si, system.m, q);
        out.mode_vars.push_back(mv);
    }
    out.Q1s = sys.declare_symmetric("Q1", q, SignHint::PositiveDefinite);
    out.Q2s = sys.declare_symmetric("Q2", q, SignHint::PositiveDefinite);
    out.Q3s = sys.declare_symmetric("Q3", q, SignHint::PositiveDefinite);
    out.R1s = sys.declare_symmetric("R1", q, SignHint::PositiveDefinite);
    out.R2s = sys.declare_symmetric("R2", q, SignHint::PositiveDefinite);

    auto var = [&](const VarHandle& v) { return MatrixExpr::variable(v); };
    // p-th (n-m) sub-block of a stacked 4(n-m) x (n-m) variable.
    auto stacked = [&](const VarHandle& v, int p) {
        Matrix sel = Matrix::Zero(q, 4 * q);
        sel.block(0, p * q, q, q) = Iq;
        return MatrixExpr::term(sel, v, Iq);
    };

    for (int i = 0; i < N; ++i) {
        const SurfaceModeVars& mv = out.mode_vars[i];
        const RegularForm& rf = forms[i];
        const KnownIndexSets sets = known_index_sets(system.transitions, i);
        const bool diag_known = system.transitions.entries[i][i].has_value();
        const double mu = system.delays.mui[i];

        const MatrixExpr AX =
            MatrixExpr::term(rf.A11, mv.X, Iq) - MatrixExpr::term(rf.A12, mv.Y, Iq);
        const MatrixExpr ADX =
            MatrixExpr::term(rf.Ad11, mv.X, Iq) - MatrixExpr::term(rf.Ad12, mv.Y, Iq);

        // theta_11: selected by whether the diagonal rate lambda_ii is known.
        MatrixExpr th11 = symmetrized(AX) + var(mv.Q1) + var(mv.Q3);
        for (int j : sets.known)
            th11 = th11 - (*system.transitions.entries[i][j]) * var(mv.V);
        if (diag_known)
            th11 = th11 + (*system.transitions.entries[i][i]) * var(mv.X);

        auto phi = [&](int p, int c) -> MatrixExpr {
            switch (c) {
                case 0: return stacked(mv.M, p);
                case 1: return stacked(mv.N, p) - stacked(mv.M, p) - stacked(mv.S, p);
                case 2: return stacked(mv.S, p);
                default: return -1.0 * stacked(mv.N, p);
            }
        };

        // One fine-grained symmetric grid per Delta LMI. Sections whose scale
        // factor vanishes (h1 = 0 or h1 = h2) are dropped so no zero diagonal
        // block enters a strict inequality.
        for (int which = 0; which < 2; ++which) {
            const bool first = which == 0;
            struct Col {
                MatrixExpr diag;
                std::vector<std::pair<int, MatrixExpr>> rows;  // (fine row p, entry)
            };
            std::vector<Col> cols;
            auto add_col = [&](MatrixExpr diag, std::vector<std::pair<int, MatrixExpr>> rows) {
                cols.push_back(Col{std::move(diag), std::move(rows)});
            };

            if (h2 > 0.0)
                add_col(-h2 * var(out.R1s),
                        {{0, h2 * AX.transpose()}, {1, h2 * ADX.transpose()}});
            if (h21 > 0.0)
                add_col(-h21 * var(out.R2s),
                        {{0, h21 * AX.transpose()}, {1, h21 * ADX.transpose()}});
            const double cm = first ? h1 : h2;  // scale of the M column
            if (cm > 0.0) {
                std::vector<std::pair<int, MatrixExpr>> rows;
                for (int p = 0; p < 4; ++p) rows.emplace_back(p, cm * stacked(mv.M, p));
                add_col(cm * (var(out.R1s) - 2.0 * var(mv.X)), std::move(rows));
            }
            if (h21 > 0.0) {
                std::vector<std::pair<int, MatrixExpr>> rows;
                for (int p = 0; p < 4; ++p)
                    rows.emplace_back(p, h21 * stacked(first ? mv.N : mv.S, p));
                add_col(first ? h21 * (var(out.R1s) + var(out.R2s) - 4.0 * var(mv.X))
                              : h21 * (var(out.R2s) - 2.0 * var(mv.X)),
                        std::move(rows));
            }
            // Gamma/Xi sections: h1 X, h21 X, h2 X against the shared Q
            // inverses, then sqrt(lambda) X against X_kappa for known rates.
            if (h1 > 0.0) add_col(-h1 * var(out.Q1s), {{0, h1 * var(mv.X)}});
            if (h21 > 0.0) add_col(-h21 * var(out.Q2s), {{0, h21 * var(mv.X)}});
            if (h2 > 0.0) add_col(-h2 * var(out.Q3s), {{0, h2 * var(mv.X)}});
            for (int kappa : sets.kappa) {
                if (kappa == i) continue;
                const double rate = *system.transitions.entries[i][kappa];
                add_col(-1.0 * var(out.mode_vars[kappa].X),
                        {{0, std::sqrt(rate) * var(mv.X)}});
            }

            const int nb = 4 + static_cast<int>(cols.size());
            Grid grid(nb, std::vector<std::optional<MatrixExpr>>(nb));
            for (int p = 0; p < 4; ++p)
                for (int c = p; c < 4; ++c) {
                    MatrixExpr e = phi(p, c) + phi(c, p).transpose();
                    if (p == 0 && c == 0) e = e + th11;
                    if (p == 0 && c == 1) e = e + ADX;
                    if (p == 1 && c == 1) e = e - (1.0 - mu) * var(mv.Q2);
                    if (p == 2 && c == 2) e = e + var(mv.Q2) - var(mv.Q1);
                    if (p == 3 && c == 3) e = e - 1.0 * var(mv.Q3);
                    grid[p][c] = std::move(e);
                }
            for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
                grid[4 + c][4 + c] = cols[c].diag;
                for (auto& [p, e] : cols[c].rows) grid[p][4 + c] = e;
            }
            sys.add(assemble_block(grid, true), Sense::NegativeDefinite,
                    tag(first ? "LMI1" : "LMI2", i));
        }

        // Free-connection bounds absorbing the unknown rates.
        if (diag_known) {
            for (int j : sets.unknown) {
                Grid g(2, std::vector<std::optional<MatrixExpr>>(2));
                g[0][0] = -1.0 * var(mv.V);
                g[0][1] = var(mv.X);
                g[1][1] = -1.0 * var(out.mode_vars[j].X);
                sys.add(assemble_block(g, true), Sense::NegativeSemidefinite, tag2("LMI3", i, j));
            }
        } else {
            sys.add(var(mv.X) - var(mv.V), Sense::PositiveSemidefinite, tag("LMI4", i));
        }

        // Q-family groups r = 1, 2, 3 bounding the rate-weighted sums of the
        // mode-dependent Q matrices by the shared ones.
        const std::array<std::array<VarHandle, 3>, 3> fams = {{
            {mv.Q1, mv.W1, out.Q1s},
            {mv.Q2, mv.W2, out.Q2s},
            {mv.Q3, mv.W3, out.Q3s},
        }};
        const std::array<std::array<const char*, 3>, 3> names = {{
            {"LMI5", "LMI6", "LMI7"},
            {"LMI8", "LMI9", "LMI10"},
            {"LMI11", "LMI12", "LMI13"},
        }};
        for (int r = 0; r < 3; ++r) {
            const VarHandle& Wri = fams[r][1];
            const VarHandle& Qs = fams[r][2];
            for (int j : sets.known) {
                if (j == i) continue;
                const double rate = *system.transitions.entries[i][j];
                const SurfaceModeVars& mj = out.mode_vars[j];
                const VarHandle& Qrj = (r == 0 ? mj.Q1 : r == 1 ? mj.Q2 : mj.Q3);
                Grid g(2, std::vector<std::optional<MatrixExpr>>(2));
                g[0][0] = rate * var(Qrj) - 2.0 * var(mj.X) +
                          static_cast<double>(sets.alpha) * var(Qs);
                g[0][1] = rate * var(mj.X);
                // Schur corner: -lambda_ij * W_ri^-1 keeps the corner negative
                // definite with W_ri > 0, which the coupling conditions on the
                // unknown-rate columns require of W_ri in the first place.
                g[1][1] = -rate * var(Wri);
                sys.add(assemble_block(g, true), Sense::NegativeDefinite,
                        tag2(names[r][0], i, j));
            }
            for (int j : sets.unknown) {
                if (j == i) continue;
                const SurfaceModeVars& mj = out.mode_vars[j];
                const VarHandle& Qrj = (r == 0 ? mj.Q1 : r == 1 ? mj.Q2 : mj.Q3);
                sys.add(var(Qrj) - 2.0 * var(mj.X) + var(Wri), Sense::NegativeSemidefinite,
                        tag2(names[r][1], i, j));
            }
            const VarHandle& Qri = fams[r][0];
            sys.add(var(Qri) - 2.0 * var(mv.X) + var(Wri), Sense::PositiveSemidefinite,
                    tag(names[r][2], i));
        }
    }

    // Positive-definiteness declarations.
    for (const VarHandle& v : sys.variables)
        if (v.sign_hint == SignHint::PositiveDefinite)
            sys.add(MatrixExpr::variable(v), Sense::PositiveDefinite, "PD[" + v.name + "]");

    sys.check_wellformed();
    return out;
}

std::vector<std::pair<Matrix, Matrix>> sliding_dynamics(const std::vector<Matrix>& C,
                                                        const std::vector<RegularForm>& forms) {
    std::vector<std::pair<Matrix, Matrix>> out;
    for (size_t i = 0; i < C.size(); ++i)
        out.emplace_back(forms[i].A11 - forms[i].A12 * C[i],
                         forms[i].Ad11 - forms[i].Ad12 * C[i]);
    return out;
}

SurfaceDesign synthesize_surface(const MjlsSystem& system, const std::vector<RegularForm>& forms,
                                 const SolverOptions& options) {
    SurfaceLmis lmis = build_surface_lmis(system, forms);
    FeasibilityResult result = solve_feasibility(lmis.system, options);

    SurfaceDesign design;
    design.status = result.status;
    design.residual_report = result.per_constraint_residuals;
    if (result.status != FeasibilityStatus::StrictlyFeasible) return design;

    const Assignment& a = *result.assignment;
    for (int i = 0; i < system.mode_count(); ++i) {
        const Matrix& X = a.at(lmis.mode_vars[i].X.id);
        const Matrix& Y = a.at(lmis.mode_vars[i].Y.id);
        const Vector sv = X.jacobiSvd().singularValues();
        if (sv.minCoeff() <= 0.0 || sv.maxCoeff() / sv.minCoeff() > 1e12)
            throw std::runtime_error("synthesize_surface: X_" + std::to_string(i + 1) +
                                     " is numerically singular");
        design.X.push_back(X);
        design.Y.push_back(Y);
        design.C.push_back(Y * X.inverse());
    }
    design.sliding = sliding_dynamics(design.C, forms);
    return design;
}

namespace {

nlohmann::json mat_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Matrix mat_from(const nlohmann::json& j) {
    const int r = static_cast<int>(j.size());
    const int c = static_cast<int>(j[0].size());
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    return m;
}

}  // namespace

nlohmann::json surface_to_json(const SurfaceDesign& design) {
    nlohmann::json j;
    j["C"] = nlohmann::json::array();
    j["X"] = nlohmann::json::array();
    j["Y"] = nlohmann::json::array();
    for (const Matrix& c : design.C) j["C"].push_back(mat_json(c));
    for (const Matrix& x : design.X) j["X"].push_back(mat_json(x));
    for (const Matrix& y : design.Y) j["Y"].push_back(mat_json(y));
    j["residuals"] = design.residual_report;
    return j;
}

SurfaceDesign surface_from_json(const nlohmann::json& j) {
    SurfaceDesign d;
    d.status = FeasibilityStatus::StrictlyFeasible;
    for (const auto& c : j.at("C")) d.C.push_back(mat_from(c));
    for (const auto& x : j.at("X")) d.X.push_back(mat_from(x));
    for (const auto& y : j.at("Y")) d.Y.push_back(mat_from(y));
    if (j.contains("residuals"))
        for (auto it = j["residuals"].begin(); it != j["residuals"].end(); ++it)
            d.residual_report[it.key()] = it.value().get<double>();
    return d;
}

}  // namespace mjsmc
