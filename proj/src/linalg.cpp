#include "ceqfi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ceqfi {

namespace {

std::array<CMat2, 4> make_pauli_basis() {
    const cxd I(0.0, 1.0);
    std::array<CMat2, 4> s;
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, -I, I, 0;
    s[3] << 1, 0, 0, -1;
    return s;
}

const std::array<CMat2, 4>& pauli_basis() {
    static const std::array<CMat2, 4> basis = make_pauli_basis();
    return basis;
}

}  // namespace

const CMat2& pauli(int i) {
    if (i < 0 || i > 3) throw OutOfRangeError("pauli index must be in 0..3");
    return pauli_basis()[i];
}

CMat2 pauli_of_axis(const Vec3& n) {
    return n.x() * pauli(1) + n.y() * pauli(2) + n.z() * pauli(3);
}

std::array<cxd, 4> pauli_decompose(const CMat2& m) {
    std::array<cxd, 4> a;
    for (int i = 0; i < 4; ++i) a[i] = 0.5 * (m * pauli(i)).trace();
    return a;
}

CMat2 pauli_compose(const std::array<cxd, 4>& a) {
    CMat2 m = CMat2::Zero();
    for (int i = 0; i < 4; ++i) m += a[i] * pauli(i);
    return m;
}

bool is_hermitian(const CMatX& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

PauliVec PauliVec::from_hermitian(const CMat2& m, double tol) {
    if (!is_hermitian(m, tol)) throw NonHermitianError("matrix is not Hermitian");
    const auto a = pauli_decompose(m);
    PauliVec v;
    v.a0 = a[0].real();
    v.a1 = a[1].real();
    v.a2 = a[2].real();
    v.a3 = a[3].real();
    return v;
}

double PauliVec::coeff_norm() const {
    return std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
}

Vec3 PauliVec::axis() const {
    const double c = coeff_norm();
    if (c == 0.0) return Vec3::Zero();
    return Vec3(a1 / c, a2 / c, a3 / c);
}

CMat2 PauliVec::reconstruct() const {
    return pauli_compose({cxd(a0), cxd(a1), cxd(a2), cxd(a3)});
}

double op_norm2(const CMat2& m, double tol) {
    const PauliVec v = PauliVec::from_hermitian(m, tol);
    return std::abs(v.a0) + v.coeff_norm();
}

CMatX EigenSystem::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
}

namespace {

// Closed-form spectral decomposition on the Pauli sphere: exact for the hot
// 2x2 path, no iteration. Hermiticity already checked by the caller.
EigenSystem herm_eig2(const CMat2& m) {
    const CMat2 sym = 0.5 * (m + m.adjoint());
    const auto coeffs = pauli_decompose(sym);
    PauliVec v;
    v.a0 = coeffs[0].real();
    v.a1 = coeffs[1].real();
    v.a2 = coeffs[2].real();
    v.a3 = coeffs[3].real();
    const double c = v.coeff_norm();

    EigenSystem sys;
    sys.eigenvalues.resize(2);
    sys.eigenvalues << v.a0 + c, v.a0 - c;
    sys.eigenvectors.resize(2, 2);

    if (c < 1e-300) {
        sys.eigenvectors = CMat2::Identity();
        return sys;
    }

    const Vec3 axis = v.axis();
    const double cos_half = std::sqrt(std::max(0.0, (1.0 + axis.z()) / 2.0));
    const double sin_half = std::sqrt(std::max(0.0, (1.0 - axis.z()) / 2.0));
    const double phi = std::atan2(axis.y(), axis.x());
    const cxd phase = std::exp(cxd(0.0, phi));

    sys.eigenvectors(0, 0) = cos_half;
    sys.eigenvectors(1, 0) = phase * sin_half;
    sys.eigenvectors(0, 1) = -std::conj(phase) * sin_half;
    sys.eigenvectors(1, 1) = cos_half;
    return sys;
}

}  // namespace

EigenSystem herm_eig(const CMatX& m, double tol) {
    if (m.rows() != m.cols()) throw DimensionMismatchError("herm_eig expects a square matrix");
    if (!is_hermitian(m, tol)) {
        std::ostringstream os;
        os << "herm_eig: symmetry violated by "
           << (m - m.adjoint()).cwiseAbs().maxCoeff();
        throw NonHermitianError(os.str());
    }

    if (m.rows() == 2) return herm_eig2(m);

    const CMatX sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatX> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("herm_eig: eigensolver failed");

    const Eigen::Index n = m.rows();
    EigenSystem sys;
    sys.eigenvalues.resize(n);
    sys.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sys.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
        sys.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return sys;
}

}  // namespace ceqfi
