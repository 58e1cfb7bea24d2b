#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "ceqfi/errors.hpp"

namespace ceqfi {

using cxd = std::complex<double>;
using CMat2 = Eigen::Matrix2cd;
using CMatX = Eigen::MatrixXcd;
using CVecX = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

/// Pauli basis element sigma_i, i in 0..3 (sigma_0 = identity).
const CMat2& pauli(int i);

/// sigma_n = n . (sigma_1, sigma_2, sigma_3) for a (not necessarily unit) vector n.
CMat2 pauli_of_axis(const Vec3& n);

/// Expansion coefficients a_i = tr(m sigma_i) / 2. Complex in general,
/// real iff m is Hermitian.
std::array<cxd, 4> pauli_decompose(const CMat2& m);

/// Rebuild sum_i a_i sigma_i.
CMat2 pauli_compose(const std::array<cxd, 4>& a);

bool is_hermitian(const CMatX& m, double tol);

/// Real Pauli coefficients of a Hermitian 2x2 matrix together with the
/// derived vector norm C = |(a1,a2,a3)| and axis (a1,a2,a3)/C.
struct PauliVec {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;

    static PauliVec from_hermitian(const CMat2& m, double tol = 1e-9);

    double coeff_norm() const;  // C
    Vec3 axis() const;          // zero vector when C == 0
    CMat2 reconstruct() const;
};

/// Operator norm |a0| + C of a Hermitian 2x2 matrix. Equals the largest
/// singular value, i.e. max_i |lambda_i|.
double op_norm2(const CMat2& m, double tol = 1e-9);

/// Spectral decomposition of a Hermitian matrix. Eigenvalues are sorted
/// descending; eigenvector columns match the eigenvalue order.
struct EigenSystem {
    Eigen::VectorXd eigenvalues;
    CMatX eigenvectors;

    CMatX reconstruct() const;
};

EigenSystem herm_eig(const CMatX& m, double tol = 1e-9);

}  // namespace ceqfi
