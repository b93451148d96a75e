#include "mjsmc/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mjsmc {

namespace {

int param_count(const VarHandle& v) {
    return v.kind == VarKind::Symmetric ? v.rows * (v.rows + 1) / 2 : v.rows * v.cols;
}

// Orthonormal parameter basis: unit diagonal matrices and off-diagonal
// symmetric pairs scaled by 1/sqrt(2) (symmetric vectorization convention).
Matrix param_basis(const VarHandle& v, int p) {
    Matrix e = Matrix::Zero(v.rows, v.cols);
    if (v.kind == VarKind::Rectangular) {
        e(p / v.cols, p % v.cols) = 1.0;
        return e;
    }
    int idx = 0;
    for (int j = 0; j < v.cols; ++j)
        for (int i = 0; i <= j; ++i) {
            if (idx++ != p) continue;
            if (i == j)
                e(i, i) = 1.0;
            else
                e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
            return e;
        }
    throw std::logic_error("param index out of range");
}

Vector svec(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    Vector v(n * (n + 1) / 2);
    int idx = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i)
            v(idx++) = (i == j) ? m(i, i) : std::sqrt(2.0) * m(i, j);
    return v;
}

Matrix smat(const Vector& v, int n) {
    Matrix m(n, n);
    int idx = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
            const double x = v(idx++);
            if (i == j)
                m(i, i) = x;
            else
                m(i, j) = m(j, i) = x / std::sqrt(2.0);
        }
    return m;
}

struct Scalarized {
    std::vector<int> offset;  // per variable id
    int dim = 0;
    // per constraint, after sense normalization to "matrix <= shift * I"
    std::vector<Matrix> map;    // sdim x dim
    std::vector<Vector> base;   // sdim
    std::vector<int> order;     // matrix size
    std::vector<bool> strict;
};

Scalarized scalarize(const LmiSystem& sys) {
    Scalarized s;
    s.offset.resize(sys.variables.size());
    for (const VarHandle& v : sys.variables) {
        s.offset[v.id] = s.dim;
        s.dim += param_count(v);
    }
    for (const Constraint& c : sys.constraints) {
        const double sign =
            (c.sense == Sense::PositiveSemidefinite || c.sense == Sense::PositiveDefinite) ? -1.0
                                                                                          : 1.0;
        const int n = c.expr.rows;
        Matrix base = 0.5 * (c.expr.constant + c.expr.constant.transpose()) * sign;
        Matrix M = Matrix::Zero(n * (n + 1) / 2, s.dim);
        for (const VarHandle& v : sys.variables) {
            bool used = false;
            for (const Term& t : c.expr.terms) used = used || t.var.id == v.id;
            if (!used) continue;
            for (int p = 0; p < param_count(v); ++p) {
                const Matrix e = param_basis(v, p);
                Matrix acc = Matrix::Zero(n, n);
                for (const Term& t : c.expr.terms) {
                    if (t.var.id != v.id) continue;
                    acc += t.left * (t.transposed ? Matrix(e.transpose()) : e) * t.right;
                }
                M.col(s.offset[v.id] + p) = svec(0.5 * (acc + acc.transpose()) * sign);
            }
        }
        s.map.push_back(std::move(M));
        s.base.push_back(svec(base));
        s.order.push_back(n);
        s.strict.push_back(is_strict(c.sense));
    }
    return s;
}

Assignment unpack(const LmiSystem& sys, const Scalarized& s, const Vector& x) {
    Assignment a;
    for (const VarHandle& v : sys.variables) {
        Matrix m = Matrix::Zero(v.rows, v.cols);
        for (int p = 0; p < param_count(v); ++p)
            m += x(s.offset[v.id] + p) * param_basis(v, p);
        a[v.id] = m;
    }
    return a;
}

}  // namespace

Matrix project_psd(const Matrix& matrix) {
    if (!matrix.allFinite()) throw std::invalid_argument("project_psd: non-finite input");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (matrix + matrix.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("project_psd: eigensolver failed");
    Vector d = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

FeasibilityResult solve_feasibility(const LmiSystem& system, const SolverOptions& options) {
    system.check_wellformed();
    if (system.constraints.empty())
        throw std::invalid_argument("solve_feasibility: system has no constraints");
    const double margin = options.strictness_margin.value_or(system.strictness_margin);
    if (margin <= 0.0 || options.tolerance <= 0.0)
        throw std::invalid_argument("solve_feasibility: margin and tolerance must be positive");
    if (options.tolerance * 10.0 > margin * (1.0 + 1e-12))
        throw std::invalid_argument(
            "solve_feasibility: tolerance must be at most strictness_margin/10");

    const Scalarized sc = scalarize(system);
    const int K = static_cast<int>(system.constraints.size());

    // Affine projection factor: H = I + sum M_k^T M_k.
    Matrix H = Matrix::Identity(sc.dim, sc.dim);
    for (int k = 0; k < K; ++k) H += sc.map[k].transpose() * sc.map[k];
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_feasibility: affine projection factorization failed");

    // Deterministic start: identity for symmetric variables, zero otherwise.
    Vector x0 = Vector::Zero(sc.dim);
    {
        Assignment init;
        for (const VarHandle& v : system.variables)
            init[v.id] = v.kind == VarKind::Symmetric
                             ? Matrix(Matrix::Identity(v.rows, v.cols))
                             : Matrix(Matrix::Zero(v.rows, v.cols));
        for (const VarHandle& v : system.variables) {
            const Matrix& m = init[v.id];
            for (int p = 0; p < param_count(v); ++p)
                x0(sc.offset[v.id] + p) = (param_basis(v, p).array() * m.array()).sum();
        }
    }

    auto residuals_at = [&](const Vector& x) {
        Vector r(K);
        for (int k = 0; k < K; ++k)
            r(k) = max_eigenvalue(smat(sc.map[k] * x + sc.base[k], sc.order[k]));
        return r;
    };
    auto worst = [&](const Vector& r) { return r.maxCoeff(); };
    auto success = [&](const Vector& r) {
        return worst(r) <= -margin + options.tolerance;
    };

    auto project_affine = [&](const Vector& xh, const std::vector<Vector>& zh, Vector& x,
                              std::vector<Vector>& z) {
        Vector rhs = xh;
        for (int k = 0; k < K; ++k) rhs += sc.map[k].transpose() * (zh[k] - sc.base[k]);
        x = llt.solve(rhs);
        for (int k = 0; k < K; ++k) z[k] = sc.map[k] * x + sc.base[k];
    };

    // Interior target: drive all constraints below -delta, relaxing toward the
    // certification margin when the iteration stalls.
    double delta = std::max(1e-3, 10.0 * margin);
    // Iterations without measurable merit improvement before the interior
    // target is relaxed one decade.
    constexpr int kStallWindow = 5000;

    auto project_cones = [&](const Vector& xh, const std::vector<Vector>& zh, Vector& x,
                             std::vector<Vector>& z) {
        x = xh;
        for (const VarHandle& v : system.variables) {
            auto seg = x.segment(sc.offset[v.id], param_count(v));
            const double nrm = seg.norm();  // equals the variable's Frobenius norm
            if (nrm > options.variable_bound) seg *= options.variable_bound / nrm;
        }
        for (int k = 0; k < K; ++k) {
            const int n = sc.order[k];
            Eigen::SelfAdjointEigenSolver<Matrix> es(smat(zh[k], n));
            if (es.info() != Eigen::Success)
                throw std::runtime_error("solve_feasibility: cone projection eigensolver failed");
            Vector d = es.eigenvalues().cwiseMin(-delta);
            z[k] = svec(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
        }
    };

    // Douglas-Rachford iterate y = (x, z); the affine shadow P_A(y) carries the
    // candidate assignments.
    Vector yx = x0;
    std::vector<Vector> yz(K);
    for (int k = 0; k < K; ++k) yz[k] = sc.map[k] * x0 + sc.base[k];

    Vector best_x = x0;
    Vector best_res = residuals_at(x0);
    double best_merit = worst(best_res);

    FeasibilityResult result;
    result.status = FeasibilityStatus::IterationLimit;

    Vector pax(sc.dim), pbx(sc.dim);
    std::vector<Vector> paz(K), pbz(K);
    int stall = 0;
    double stall_merit = best_merit;
    int it = 0;
    bool done = false;
    for (; it < options.max_iterations && !done; ++it) {
        project_affine(yx, yz, pax, paz);
        if (!pax.allFinite())
            throw std::runtime_error("solve_feasibility: non-finite iterate at iteration " +
                                     std::to_string(it));
        const Vector res = residuals_at(pax);
        const double merit = worst(res);
        if (merit < best_merit) {  // accepted iteration: merit is non-increasing on best
            best_merit = merit;
            best_res = res;
            best_x = pax;
        }
        if (options.iteration_log)
            (*options.iteration_log) << it << ',' << merit << ',' << best_merit << '\n';
        if (success(best_res)) {
            result.status = FeasibilityStatus::StrictlyFeasible;
            done = true;
            continue;  // count this iteration, then leave the loop
        }

        // Plateau detection: if the best merit has not improved measurably for
        // a while, the current interior target is unreachable — relax it, and
        // give up once it reaches the certification margin.
        if (best_merit < stall_merit - options.tolerance) {
            stall_merit = best_merit;
            stall = 0;
        } else {
            ++stall;
        }
        if (stall >= kStallWindow) {
            if (delta > margin * (1.0 + 1e-12)) {
                delta = std::max(delta / 10.0, margin);
                stall_merit = best_merit;
                stall = 0;
            } else {
                result.status = FeasibilityStatus::InfeasibleWithinBound;
                done = true;
                continue;
            }
        }

        // y <- y + P_B(2 P_A(y) - y) - P_A(y)
        Vector rx = 2.0 * pax - yx;
        std::vector<Vector> rz(K);
        for (int k = 0; k < K; ++k) rz[k] = 2.0 * paz[k] - yz[k];
        project_cones(rx, rz, pbx, pbz);
        yx += pbx - pax;
        for (int k = 0; k < K; ++k) yz[k] += pbz[k] - paz[k];
    }

    result.iterations = it;
    result.assignment = unpack(system, sc, best_x);
    double w = -std::numeric_limits<double>::infinity();
    for (const Constraint& c : system.constraints) {
        const double r = residual(c, *result.assignment);
        result.per_constraint_residuals[c.label] = r;
        w = std::max(w, r);
    }
    result.worst_residual = w;
    if (result.status == FeasibilityStatus::StrictlyFeasible &&
        w > -margin + options.tolerance)
        result.status = FeasibilityStatus::IterationLimit;  // scalarized check was optimistic
    return result;
}

}  // namespace mjsmc
