#pragma once

// Per-mode coordinate change z = T x that moves the input matrix into
// [0; B2], splitting the state into the sliding block z1 and the actuated
// block z2.

#include "mjsmc/model.hpp"

namespace mjsmc {

struct RegularForm {
    Matrix T;      // [U2^T; U1^T], orthogonal
    Matrix T_inv;  // [U2 U1]
    Matrix U1;     // n x m
    Matrix U2;     // n x (n-m)
    Matrix Sigma;  // m x m diagonal positive
    Matrix J;      // m x m orthogonal
    Matrix B2;     // Sigma * J^T, nonsingular

    Matrix A11, A12, A21, A22;      // blocks of T A T^-1
    Matrix Ad11, Ad12, Ad21, Ad22;  // blocks of T Ad T^-1

    Matrix Abar() const;   // T A T^-1 assembled from the blocks
    Matrix Adbar() const;
};

/// Deterministic under the sign convention that each singular vector's
/// largest-magnitude entry is positive (ties broken by lowest index).
RegularForm compute_regular_form(const ModeData& mode);

}  // namespace mjsmc
