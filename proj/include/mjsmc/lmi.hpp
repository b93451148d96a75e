#pragma once

// Modeling layer for affine block LMIs: matrix variables, affine matrix
// expressions, sign-definite constraints and their evaluation at concrete
// assignments. All types are immutable value types once built.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mjsmc/linalg.hpp"

namespace mjsmc {

enum class VarKind { Symmetric, Rectangular };
enum class SignHint { PositiveDefinite, Free, SymmetricFree };

struct VarHandle {
    int id = -1;
    std::string name;
    VarKind kind = VarKind::Symmetric;
    int rows = 0;
    int cols = 0;
    SignHint sign_hint = SignHint::Free;
};

/// One affine term left * V * right (or left * V^T * right).
struct Term {
    Matrix left;
    VarHandle var;
    Matrix right;
    bool transposed = false;
};

/// Affine matrix-valued expression: constant + sum of terms.
struct MatrixExpr {
    int rows = 0;
    int cols = 0;
    std::vector<Term> terms;
    Matrix constant;  // rows x cols

    static MatrixExpr zero(int rows, int cols);
    static MatrixExpr from_constant(const Matrix& c);
    /// left * V * right; identity coefficients by default.
    static MatrixExpr term(const Matrix& left, const VarHandle& v, const Matrix& right,
                           bool transposed = false);
    static MatrixExpr variable(const VarHandle& v);

    MatrixExpr transpose() const;
    MatrixExpr operator+(const MatrixExpr& other) const;
    MatrixExpr operator-(const MatrixExpr& other) const;
    MatrixExpr operator-() const;
    friend MatrixExpr operator*(double s, const MatrixExpr& e);
};

/// expr + expr^T, a symmetric-valued building block.
MatrixExpr symmetrized(const MatrixExpr& e);

enum class Sense { NegativeDefinite, NegativeSemidefinite, PositiveSemidefinite, PositiveDefinite };

inline bool is_strict(Sense s) {
    return s == Sense::NegativeDefinite || s == Sense::PositiveDefinite;
}

struct Constraint {
    MatrixExpr expr;  // must be square and symmetric-valued
    Sense sense = Sense::NegativeDefinite;
    std::string label;
};

struct LmiSystem {
    std::vector<VarHandle> variables;
    std::vector<Constraint> constraints;
    double strictness_margin = 1e-7;

    VarHandle declare_symmetric(const std::string& name, int n,
                                SignHint hint = SignHint::SymmetricFree);
    VarHandle declare_rectangular(const std::string& name, int rows, int cols);
    void add(MatrixExpr expr, Sense sense, std::string label);

    /// Throws if a constraint references an undeclared variable.
    void check_wellformed() const;
};

/// Map from VarHandle id to concrete matrix of the declared shape.
using Assignment = std::map<int, Matrix>;

/// Tolerance on assigned symmetric variables.
inline constexpr double kAssignmentSymTol = 1e-10;
/// Tolerance on evaluated symmetric-valued expressions.
inline constexpr double kEvalSymTol = 1e-8;

/// Assemble a 2-D grid of blocks into a single expression. Missing blocks are
/// zero. With symmetry=true only the upper triangle (incl. diagonal) may be
/// given; the (j,i) block is the transpose of the (i,j) block.
MatrixExpr assemble_block(const std::vector<std::vector<std::optional<MatrixExpr>>>& grid,
                          bool symmetry);

/// constant + sum of terms, symmetrized by (M + M^T)/2 with an asymmetry check.
Matrix evaluate(const MatrixExpr& expr, const Assignment& assignment);

/// Signed feasibility residual: negative senses report the maximum eigenvalue,
/// positive senses the negated minimum eigenvalue. residual < 0 means strictly
/// satisfied, residual <= 0 non-strictly satisfied.
double residual(const Constraint& constraint, const Assignment& assignment);

/// Fold the given variables into the constant part, keeping the rest symbolic.
MatrixExpr partial_substitute(const MatrixExpr& expr, const Assignment& fixed);

}  // namespace mjsmc
