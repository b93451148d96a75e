#include "mjsmc/lmi.hpp"

#include <set>
#include <stdexcept>

namespace mjsmc {

MatrixExpr MatrixExpr::zero(int rows, int cols) {
    MatrixExpr e;
    e.rows = rows;
    e.cols = cols;
    e.constant = Matrix::Zero(rows, cols);
    return e;
}

MatrixExpr MatrixExpr::from_constant(const Matrix& c) {
    MatrixExpr e;
    e.rows = static_cast<int>(c.rows());
    e.cols = static_cast<int>(c.cols());
    e.constant = c;
    return e;
}

MatrixExpr MatrixExpr::term(const Matrix& left, const VarHandle& v, const Matrix& right,
                            bool transposed) {
    const int vr = transposed ? v.cols : v.rows;
    const int vc = transposed ? v.rows : v.cols;
    if (left.cols() != vr || right.rows() != vc)
        throw std::invalid_argument("term coefficients do not compose with variable " + v.name);
    MatrixExpr e = zero(static_cast<int>(left.rows()), static_cast<int>(right.cols()));
    e.terms.push_back(Term{left, v, right, transposed});
    return e;
}

MatrixExpr MatrixExpr::variable(const VarHandle& v) {
    return term(Matrix::Identity(v.rows, v.rows), v, Matrix::Identity(v.cols, v.cols));
}

MatrixExpr MatrixExpr::transpose() const {
    MatrixExpr e = zero(cols, rows);
    e.constant = constant.transpose();
    for (const Term& t : terms)
        e.terms.push_back(Term{t.right.transpose(), t.var, t.left.transpose(), !t.transposed});
    return e;
}

MatrixExpr MatrixExpr::operator+(const MatrixExpr& other) const {
    if (rows != other.rows || cols != other.cols)
        throw std::invalid_argument("expression shape mismatch in +");
    MatrixExpr e = *this;
    e.constant += other.constant;
    e.terms.insert(e.terms.end(), other.terms.begin(), other.terms.end());
    return e;
}

MatrixExpr MatrixExpr::operator-(const MatrixExpr& other) const { return *this + (-other); }

MatrixExpr MatrixExpr::operator-() const { return -1.0 * (*this); }

MatrixExpr operator*(double s, const MatrixExpr& e) {
    MatrixExpr out = e;
    out.constant *= s;
    for (Term& t : out.terms) t.left *= s;
    return out;
}

MatrixExpr symmetrized(const MatrixExpr& e) { return e + e.transpose(); }

VarHandle LmiSystem::declare_symmetric(const std::string& name, int n, SignHint hint) {
    VarHandle v{static_cast<int>(variables.size()), name, VarKind::Symmetric, n, n, hint};
    variables.push_back(v);
    return v;
}

VarHandle LmiSystem::declare_rectangular(const std::string& name, int rows, int cols) {
    VarHandle v{static_cast<int>(variables.size()), name, VarKind::Rectangular,
                rows, cols, SignHint::Free};
    variables.push_back(v);
    return v;
}

void LmiSystem::add(MatrixExpr expr, Sense sense, std::string label) {
    if (expr.rows != expr.cols)
        throw std::invalid_argument("constraint '" + label + "' is not square");
    constraints.push_back(Constraint{std::move(expr), sense, std::move(label)});
}

void LmiSystem::check_wellformed() const {
    std::set<int> declared;
    for (const VarHandle& v : variables) declared.insert(v.id);
    for (const Constraint& c : constraints)
        for (const Term& t : c.expr.terms)
            if (!declared.count(t.var.id))
                throw std::invalid_argument("constraint '" + c.label +
                                            "' references undeclared variable " + t.var.name);
}

MatrixExpr assemble_block(const std::vector<std::vector<std::optional<MatrixExpr>>>& grid,
                          bool symmetry) {
    const int nr = static_cast<int>(grid.size());
    if (nr == 0) throw std::invalid_argument("assemble_block: empty grid");
    const int nc = static_cast<int>(grid[0].size());
    for (const auto& row : grid)
        if (static_cast<int>(row.size()) != nc)
            throw std::invalid_argument("assemble_block: grid is not rectangular");
    if (symmetry && nr != nc)
        throw std::invalid_argument("assemble_block: symmetric grid must be square");

    std::vector<int> row_h(nr, -1), col_w(nc, -1);
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nc; ++j) {
            if (symmetry && j < i && grid[i][j].has_value())
                throw std::invalid_argument(
                    "assemble_block: lower-triangle block (" + std::to_string(i) + "," +
                    std::to_string(j) + ") must be absent with symmetry=true");
            if (!grid[i][j].has_value()) continue;
            const MatrixExpr& e = *grid[i][j];
            int h = e.rows, w = e.cols;
            auto fit = [&](std::vector<int>& dims, int k, int d, const char* what) {
                if (dims[k] < 0)
                    dims[k] = d;
                else if (dims[k] != d)
                    throw std::invalid_argument("assemble_block: " + std::string(what) + " " +
                                                std::to_string(k) + " has conflicting size at block (" +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
            };
            fit(row_h, i, h, "block row");
            fit(col_w, j, w, "block column");
            if (symmetry) {
                // mirror block fixes the transposed dimensions
                fit(row_h, j, w, "block row");
                fit(col_w, i, h, "block column");
            }
        }
    }
    for (int i = 0; i < nr; ++i)
        if (row_h[i] < 0)
            throw std::invalid_argument("assemble_block: block row " + std::to_string(i) +
                                        " has no block to define its height");
    for (int j = 0; j < nc; ++j)
        if (col_w[j] < 0)
            throw std::invalid_argument("assemble_block: block column " + std::to_string(j) +
                                        " has no block to define its width");

    std::vector<int> roff(nr + 1, 0), coff(nc + 1, 0);
    for (int i = 0; i < nr; ++i) roff[i + 1] = roff[i] + row_h[i];
    for (int j = 0; j < nc; ++j) coff[j + 1] = coff[j] + col_w[j];
    const int R = roff[nr], C = coff[nc];

    MatrixExpr out = MatrixExpr::zero(R, C);
    auto embed = [&](const MatrixExpr& e, int r0, int c0) {
        out.constant.block(r0, c0, e.rows, e.cols) += e.constant;
        for (const Term& t : e.terms) {
            Matrix L = Matrix::Zero(R, t.left.cols());
            L.block(r0, 0, t.left.rows(), t.left.cols()) = t.left;
            Matrix Rt = Matrix::Zero(t.right.rows(), C);
            Rt.block(0, c0, t.right.rows(), t.right.cols()) = t.right;
            out.terms.push_back(Term{L, t.var, Rt, t.transposed});
        }
    };
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) {
            if (!grid[i][j].has_value()) continue;
            embed(*grid[i][j], roff[i], coff[j]);
            if (symmetry && j != i) embed(grid[i][j]->transpose(), roff[j], coff[i]);
        }
    return out;
}

Matrix evaluate(const MatrixExpr& expr, const Assignment& assignment) {
    Matrix acc = expr.constant;
    for (const Term& t : expr.terms) {
        auto it = assignment.find(t.var.id);
        if (it == assignment.end())
            throw std::invalid_argument("evaluate: missing assignment for variable " + t.var.name);
        const Matrix& v = it->second;
        if (v.rows() != t.var.rows || v.cols() != t.var.cols)
            throw std::invalid_argument("evaluate: shape mismatch for variable " + t.var.name);
        if (t.var.kind == VarKind::Symmetric && max_asymmetry(v) > kAssignmentSymTol)
            throw std::invalid_argument("evaluate: symmetric variable " + t.var.name +
                                        " assigned an asymmetric matrix");
        acc += t.left * (t.transposed ? Matrix(v.transpose()) : v) * t.right;
    }
    if (expr.rows != expr.cols || max_asymmetry(acc) > kEvalSymTol)
        throw std::runtime_error("evaluate: expression is not symmetric-valued");
    return 0.5 * (acc + acc.transpose());
}

double residual(const Constraint& constraint, const Assignment& assignment) {
    const Matrix m = evaluate(constraint.expr, assignment);
    switch (constraint.sense) {
        case Sense::NegativeDefinite:
        case Sense::NegativeSemidefinite:
            return max_eigenvalue(m);
        case Sense::PositiveSemidefinite:
        case Sense::PositiveDefinite:
            return -min_eigenvalue(m);
    }
    throw std::logic_error("unreachable");
}

MatrixExpr partial_substitute(const MatrixExpr& expr, const Assignment& fixed) {
    MatrixExpr out = MatrixExpr::zero(expr.rows, expr.cols);
    out.constant = expr.constant;
    for (const Term& t : expr.terms) {
        auto it = fixed.find(t.var.id);
        if (it == fixed.end()) {
            out.terms.push_back(t);
            continue;
        }
        const Matrix& v = it->second;
        out.constant += t.left * (t.transposed ? Matrix(v.transpose()) : v) * t.right;
    }
    return out;
}

}  // namespace mjsmc
