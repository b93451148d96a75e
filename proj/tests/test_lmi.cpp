#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mjsmc/lmi.hpp"

using namespace mjsmc;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> dist;
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

Matrix random_symmetric(std::mt19937_64& rng, int n) {
    const Matrix m = random_matrix(rng, n, n);
    return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("evaluate: constants, terms and transposes") {
    LmiSystem sys;
    const VarHandle X = sys.declare_symmetric("X", 1);
    Assignment a;
    a[X.id] = Matrix::Constant(1, 1, 0.8974);
    CHECK(evaluate(MatrixExpr::variable(X), a)(0, 0) == doctest::Approx(0.8974).epsilon(1e-14));

    // A X + (A X)^T with A = [[0,1],[0,0]], X = I
    LmiSystem sys2;
    const VarHandle X2 = sys2.declare_symmetric("X2", 2);
    Matrix A(2, 2);
    A << 0, 1, 0, 0;
    const MatrixExpr e = symmetrized(MatrixExpr::term(A, X2, Matrix::Identity(2, 2)));
    Assignment a2;
    a2[X2.id] = Matrix::Identity(2, 2);
    Matrix expected(2, 2);
    expected << 0, 1, 1, 0;
    CHECK((evaluate(e, a2) - expected).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("evaluate: scalar surface-parameter combination") {
    // A11*X - A12*Y at the benchmark's first-mode reduced data.
    LmiSystem sys;
    const VarHandle X = sys.declare_symmetric("X", 1);
    const VarHandle Y = sys.declare_rectangular("Y", 1, 1);
    const Matrix a11 = Matrix::Constant(1, 1, -2.0);
    const Matrix a12 = Matrix::Constant(1, 1, 2.0);
    const MatrixExpr e = MatrixExpr::term(a11, X, Matrix::Identity(1, 1)) -
                         MatrixExpr::term(a12, Y, Matrix::Identity(1, 1));
    Assignment a;
    a[X.id] = Matrix::Constant(1, 1, 0.8974);
    a[Y.id] = Matrix::Constant(1, 1, -0.1495);
    CHECK(evaluate(e, a)(0, 0) == doctest::Approx(-1.4958).epsilon(1e-12));
}

TEST_CASE("evaluate: missing variable and asymmetry are rejected") {
    LmiSystem sys;
    const VarHandle X = sys.declare_symmetric("X", 2);
    CHECK_THROWS_WITH_AS(evaluate(MatrixExpr::variable(X), {}),
                         doctest::Contains("X"), std::invalid_argument);

    Assignment bad;
    bad[X.id] = (Matrix(2, 2) << 0, 1, 0, 0).finished();
    CHECK_THROWS_AS(evaluate(MatrixExpr::variable(X), bad), std::invalid_argument);

    // Non-symmetric-valued expression (constant) must be flagged.
    const MatrixExpr skew = MatrixExpr::from_constant((Matrix(2, 2) << 0, 1, -1, 0).finished());
    CHECK_THROWS_AS(evaluate(skew, {}), std::runtime_error);
}

TEST_CASE("assemble_block: identity, symmetric mirror, dimension errors") {
    LmiSystem sys;
    const VarHandle X = sys.declare_symmetric("X", 1);

    // [[E]] -> E unchanged
    std::mt19937_64 rng(1);
    const Matrix E = random_symmetric(rng, 2);
    {
        std::vector<std::vector<std::optional<MatrixExpr>>> grid{{MatrixExpr::from_constant(E)}};
        Assignment a;
        CHECK((evaluate(assemble_block(grid, true), a) - E).norm() ==
              doctest::Approx(0.0).epsilon(1e-14));
    }

    // diagonal -1 blocks, upper block X -> [[-1,3],[3,-1]] at X=3
    {
        const MatrixExpr minus_one = MatrixExpr::from_constant(-Matrix::Identity(1, 1));
        std::vector<std::vector<std::optional<MatrixExpr>>> grid{
            {minus_one, MatrixExpr::variable(X)},
            {std::nullopt, minus_one}};
        Assignment a;
        a[X.id] = Matrix::Constant(1, 1, 3.0);
        Matrix expected(2, 2);
        expected << -1, 3, 3, -1;
        CHECK((evaluate(assemble_block(grid, true), a) - expected).norm() ==
              doctest::Approx(0.0).epsilon(1e-14));
    }

    // conflicting block widths in one column -> error naming indices
    {
        std::vector<std::vector<std::optional<MatrixExpr>>> grid{
            {MatrixExpr::from_constant(Matrix::Identity(1, 1)),
             MatrixExpr::from_constant(Matrix::Zero(1, 2))},
            {std::nullopt, MatrixExpr::from_constant(Matrix::Identity(1, 1))}};
        CHECK_THROWS_AS(assemble_block(grid, true), std::invalid_argument);
    }
}

TEST_CASE("assemble_block: symmetric assembly evaluates symmetric for random grids") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        LmiSystem sys;
        const VarHandle X = sys.declare_symmetric("X", 2);
        std::vector<std::vector<std::optional<MatrixExpr>>> grid(2);
        grid[0] = {MatrixExpr::from_constant(random_symmetric(rng, 2)),
                   MatrixExpr::term(random_matrix(rng, 2, 2), X, random_matrix(rng, 2, 2))};
        grid[1] = {std::nullopt, MatrixExpr::variable(X)};
        Assignment a;
        a[X.id] = random_symmetric(rng, 2);
        const Matrix v = evaluate(assemble_block(grid, true), a);
        CHECK((v - v.transpose()).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("residual sign conventions") {
    LmiSystem sys;
    const VarHandle X = sys.declare_symmetric("X", 1);
    Assignment a;
    a[X.id] = Matrix::Constant(1, 1, 0.8974);
    CHECK(residual({MatrixExpr::variable(X), Sense::PositiveDefinite, "pd"}, a) ==
          doctest::Approx(-0.8974).epsilon(1e-14));

    a[X.id] = Matrix::Zero(1, 1);
    CHECK(residual({MatrixExpr::variable(X), Sense::NegativeDefinite, "nd"}, a) ==
          doctest::Approx(0.0).epsilon(1e-14));

    const Matrix M = (Matrix(2, 2) << -1, 2, 2, -1).finished();
    CHECK(residual({MatrixExpr::from_constant(M), Sense::NegativeSemidefinite, "nsd"}, {}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("residual agrees with a dense eigenvalue oracle on random matrices") {
    std::mt19937_64 rng(11);
    for (int n = 2; n <= 6; ++n) {
        for (int trial = 0; trial < 25; ++trial) {
            const Matrix M = random_symmetric(rng, n);
            Eigen::SelfAdjointEigenSolver<Matrix> es(M);
            const double lmax = es.eigenvalues().maxCoeff();
            const double lmin = es.eigenvalues().minCoeff();
            const Constraint neg{MatrixExpr::from_constant(M), Sense::NegativeDefinite, "n"};
            const Constraint pos{MatrixExpr::from_constant(M), Sense::PositiveDefinite, "p"};
            CHECK(residual(neg, {}) == doctest::Approx(lmax).epsilon(1e-10));
            CHECK(residual(pos, {}) == doctest::Approx(-lmin).epsilon(1e-10));
            CHECK((residual(neg, {}) < 0) == (lmax < 0));
            CHECK((residual(pos, {}) < 0) == (lmin > 0));
        }
    }
}

TEST_CASE("affinity of evaluation in the assignment") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        LmiSystem sys;
        const VarHandle X = sys.declare_symmetric("X", 3);
        const VarHandle Y = sys.declare_rectangular("Y", 2, 3);
        MatrixExpr e = MatrixExpr::from_constant(random_symmetric(rng, 3)) +
                       symmetrized(MatrixExpr::term(random_matrix(rng, 3, 3), X,
                                                    random_matrix(rng, 3, 3))) +
                       symmetrized(MatrixExpr::term(random_matrix(rng, 3, 2), Y,
                                                    random_matrix(rng, 3, 3)));
        Assignment a1, a2, mix;
        a1[X.id] = random_symmetric(rng, 3);
        a1[Y.id] = random_matrix(rng, 2, 3);
        a2[X.id] = random_symmetric(rng, 3);
        a2[Y.id] = random_matrix(rng, 2, 3);
        const double lambda = std::uniform_real_distribution<double>(0, 1)(rng);
        for (int id : {X.id, Y.id}) mix[id] = lambda * a1[id] + (1 - lambda) * a2[id];
        const Matrix lhs = evaluate(e, mix);
        const Matrix rhs = lambda * evaluate(e, a1) + (1 - lambda) * evaluate(e, a2);
        CHECK((lhs - rhs).norm() == doctest::Approx(0.0).epsilon(1e-10));
    }
}

TEST_CASE("partial_substitute folds fixed variables exactly") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        LmiSystem sys;
        const VarHandle X = sys.declare_symmetric("X", 2);
        const VarHandle Y = sys.declare_rectangular("Y", 1, 2);
        MatrixExpr e = MatrixExpr::from_constant(random_symmetric(rng, 2)) +
                       symmetrized(MatrixExpr::term(random_matrix(rng, 2, 2), X,
                                                    random_matrix(rng, 2, 2))) +
                       symmetrized(MatrixExpr::term(random_matrix(rng, 2, 1), Y,
                                                    random_matrix(rng, 2, 2)));
        Assignment full;
        full[X.id] = random_symmetric(rng, 2);
        full[Y.id] = random_matrix(rng, 1, 2);
        Assignment fixed{{X.id, full[X.id]}};
        Assignment rest{{Y.id, full[Y.id]}};
        const MatrixExpr folded = partial_substitute(e, fixed);
        CHECK((evaluate(folded, rest) - evaluate(e, full)).norm() ==
              doctest::Approx(0.0).epsilon(1e-12));
        for (const Term& t : folded.terms) CHECK(t.var.id != X.id);
    }
}

TEST_CASE("check_wellformed rejects undeclared variables") {
    LmiSystem other;
    const VarHandle foreign = other.declare_symmetric("Z", 2);
    LmiSystem sys;
    sys.add(MatrixExpr::variable(foreign), Sense::NegativeDefinite, "bad");
    CHECK_THROWS_AS(sys.check_wellformed(), std::exception);
}
