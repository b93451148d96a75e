#pragma once

#include <Eigen/Dense>

namespace mjsmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest eigenvalue of a symmetric matrix.
inline double max_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Induced 2-norm (largest singular value).
inline double spectral_norm(const Matrix& m) {
    return m.jacobiSvd().singularValues()(0);
}

inline double max_asymmetry(const Matrix& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Component-wise sign with sign(0) = 0.
inline Vector sign_vector(const Vector& v) {
    Vector out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out(k) = v(k) > 0.0 ? 1.0 : (v(k) < 0.0 ? -1.0 : 0.0);
    return out;
}

}  // namespace mjsmc
