// qubit.hpp — 2x2 complex operator algebra: Pauli matrices, Liouvillian
// action, trace norm, Bloch coordinates.
//
// Conventions (used everywhere): energies in units of Omega, times in units
// of 1/Omega, hbar = 1, Omega = 1 internally. Basis ordering is
// (|1> excited, |0> ground), so sigma_z|1> = +|1> and the excited state sits
// at the north pole of the Bloch sphere. Matrix index (0,0) is the excited
// population rho11.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <complex>

namespace spinbath {

using QubitOp = Eigen::Matrix2cd;
using Complex = std::complex<double>;

namespace ops {

inline QubitOp identity() { return QubitOp::Identity(); }

inline QubitOp sigma_x() {
    QubitOp m;
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

inline QubitOp sigma_y() {
    QubitOp m;
    m << 0.0, Complex(0.0, -1.0),
         Complex(0.0, 1.0), 0.0;
    return m;
}

inline QubitOp sigma_z() {
    QubitOp m;
    m << 1.0,  0.0,
         0.0, -1.0;
    return m;
}

enum class Axis { x, y, z };

inline QubitOp pauli(Axis axis) {
    switch (axis) {
        case Axis::x: return sigma_x();
        case Axis::y: return sigma_y();
        default:      return sigma_z();
    }
}

inline QubitOp sigma_plus() {   // |1><0|
    QubitOp m = QubitOp::Zero();
    m(0, 1) = 1.0;
    return m;
}

inline QubitOp sigma_minus() {  // |0><1|
    QubitOp m = QubitOp::Zero();
    m(1, 0) = 1.0;
    return m;
}

inline QubitOp excited_projector() {  // |1><1|
    QubitOp m = QubitOp::Zero();
    m(0, 0) = 1.0;
    return m;
}

inline QubitOp ground_projector() {   // |0><0|
    QubitOp m = QubitOp::Zero();
    m(1, 1) = 1.0;
    return m;
}

// Gibbs state of the bare system Hamiltonian Omega*sigma_z at inverse
// temperature beta (Omega = 1). Ground-state dominated for beta > 0.
inline QubitOp gibbs_state(double beta) {
    QubitOp m = QubitOp::Zero();
    const double z = 2.0 * std::cosh(beta);
    m(0, 0) = std::exp(-beta) / z;
    m(1, 1) = std::exp(beta) / z;
    return m;
}

// -i[H, A]
inline QubitOp liouville_apply(const QubitOp& h, const QubitOp& a) {
    return Complex(0.0, -1.0) * (h * a - a * h);
}

inline bool is_hermitian(const QubitOp& a, double tol = 1e-10) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_density_matrix(const QubitOp& a, double tol = 1e-8) {
    if (!is_hermitian(a, 1e-10)) return false;
    if (std::abs(a.trace().real() - 1.0) > 1e-10) return false;
    if (std::abs(a.trace().imag()) > 1e-10) return false;
    // 2x2 hermitian eigenvalues from trace and determinant
    const double tr = a.trace().real();
    const double det = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc >= -tol;
}

// (1/2) * sum of singular values, always via SVD.
inline double trace_norm_half_svd(const QubitOp& a) {
    Eigen::JacobiSVD<QubitOp> svd(a);
    return 0.5 * svd.singularValues().sum();
}

// (1/2)||A||_1. Hermitian traceless matrices (difference operators) take the
// closed form sqrt(d^2 + |o|^2) with d the diagonal entry and o the
// off-diagonal entry; everything else goes through the singular values.
inline double trace_norm_half(const QubitOp& a) {
    const double scale = a.cwiseAbs().maxCoeff();
    const double tol = 1e-13 * std::max(scale, 1.0);
    const bool hermitian_traceless =
        std::abs(a(0, 0).imag()) <= tol && std::abs(a(1, 1).imag()) <= tol &&
        std::abs(a(0, 0).real() + a(1, 1).real()) <= tol &&
        std::abs(a(0, 1) - std::conj(a(1, 0))) <= tol;
    if (hermitian_traceless) {
        const double d = a(0, 0).real();
        return std::sqrt(d * d + std::norm(a(0, 1)));
    }
    return trace_norm_half_svd(a);
}

inline std::array<double, 3> bloch_vector(const QubitOp& rho) {
    return {(sigma_x() * rho).trace().real(),
            (sigma_y() * rho).trace().real(),
            (sigma_z() * rho).trace().real()};
}

}  // namespace ops
}  // namespace spinbath
