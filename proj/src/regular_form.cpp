#include "mjsmc/regular_form.hpp"

#include <stdexcept>

namespace mjsmc {

Matrix RegularForm::Abar() const {
    const int q = static_cast<int>(A11.rows());
    const int m = static_cast<int>(A22.rows());
    Matrix out(q + m, q + m);
    out.topLeftCorner(q, q) = A11;
    out.topRightCorner(q, m) = A12;
    out.bottomLeftCorner(m, q) = A21;
    out.bottomRightCorner(m, m) = A22;
    return out;
}

Matrix RegularForm::Adbar() const {
    const int q = static_cast<int>(Ad11.rows());
    const int m = static_cast<int>(Ad22.rows());
    Matrix out(q + m, q + m);
    out.topLeftCorner(q, q) = Ad11;
    out.topRightCorner(q, m) = Ad12;
    out.bottomLeftCorner(m, q) = Ad21;
    out.bottomRightCorner(m, m) = Ad22;
    return out;
}

RegularForm compute_regular_form(const ModeData& mode) {
    const int n = static_cast<int>(mode.B.rows());
    const int m = static_cast<int>(mode.B.cols());
    if (m < 1 || m > n) throw std::invalid_argument("compute_regular_form: need 1 <= m <= n");

    Eigen::JacobiSVD<Matrix> svd(mode.B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    if (sv.minCoeff() <= 1e-10)
        throw std::invalid_argument("compute_regular_form: B is rank deficient");

    Matrix U = svd.matrixU();  // n x n
    Matrix J = svd.matrixV();  // m x m
    // Sign convention: largest-magnitude entry of each singular vector is
    // positive, ties broken by lowest index. Left flips for k < m carry over
    // to J so that B = U [Sigma; 0] J^T is preserved.
    for (int k = 0; k < n; ++k) {
        int arg = 0;
        for (int r = 1; r < n; ++r)
            if (std::abs(U(r, k)) > std::abs(U(arg, k))) arg = r;
        if (U(arg, k) < 0.0) {
            U.col(k) *= -1.0;
            if (k < m) J.col(k) *= -1.0;
        }
    }

    RegularForm rf;
    rf.U1 = U.leftCols(m);
    rf.U2 = U.rightCols(n - m);
    rf.Sigma = sv.asDiagonal();
    rf.J = J;
    rf.B2 = rf.Sigma * rf.J.transpose();

    rf.T.resize(n, n);
    rf.T.topRows(n - m) = rf.U2.transpose();
    rf.T.bottomRows(m) = rf.U1.transpose();
    rf.T_inv.resize(n, n);
    rf.T_inv.leftCols(n - m) = rf.U2;
    rf.T_inv.rightCols(m) = rf.U1;

    rf.A11 = rf.U2.transpose() * mode.A * rf.U2;
    rf.A12 = rf.U2.transpose() * mode.A * rf.U1;
    rf.A21 = rf.U1.transpose() * mode.A * rf.U2;
    rf.A22 = rf.U1.transpose() * mode.A * rf.U1;
    rf.Ad11 = rf.U2.transpose() * mode.Ad * rf.U2;
    rf.Ad12 = rf.U2.transpose() * mode.Ad * rf.U1;
    rf.Ad21 = rf.U1.transpose() * mode.Ad * rf.U2;
    rf.Ad22 = rf.U1.transpose() * mode.Ad * rf.U1;
    return rf;
}

}  // namespace mjsmc
