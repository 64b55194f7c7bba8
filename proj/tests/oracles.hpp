// Test-side oracles, deliberately independent of the production code paths:
// the master-equation generator is re-assembled from the generic
// commutator-plus-Lindblad form with matrix products, and the steady state is
// reached by exact time integration via the matrix exponential.
#ifndef CPTCLONE_TEST_ORACLES_HPP
#define CPTCLONE_TEST_ORACLES_HPP

#include <complex>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cptclone/lambda_system.hpp"

namespace cptclone::test_oracles {

// -i[H, rho] + sum_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}) - gamma_12 dephasing,
// assembled with generic matrix algebra.
inline Eigen::Matrix3cd lindblad_rhs(const Eigen::Matrix3cd& rho, const LambdaParams& p,
                                     const DriveParams& d) {
    const std::complex<double> I{0.0, 1.0};
    Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
    h(1, 1) = p.delta_2 - p.delta_1;
    h(2, 2) = -p.delta_1;
    h(2, 0) = -d.G;
    h(0, 2) = -std::conj(d.G);
    h(2, 1) = -d.g;
    h(1, 2) = -std::conj(d.g);

    Eigen::Matrix3cd out = -I * (h * rho - rho * h);

    Eigen::Matrix3cd l1 = Eigen::Matrix3cd::Zero();
    l1(0, 2) = std::sqrt(p.branch_1 * p.gamma);
    Eigen::Matrix3cd l2 = Eigen::Matrix3cd::Zero();
    l2(1, 2) = std::sqrt(p.branch_2 * p.gamma);
    for (const auto& l : {l1, l2}) {
        const Eigen::Matrix3cd ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    out(0, 1) -= p.gamma_12 * rho(0, 1);
    out(1, 0) -= p.gamma_12 * rho(1, 0);
    return out;
}

// Generator on the real 9-vector, built column by column from lindblad_rhs.
inline Eigen::Matrix<double, 9, 9> lindblad_generator(const LambdaParams& p, const DriveParams& d) {
    Eigen::Matrix<double, 9, 9> m;
    for (int j = 0; j < 9; ++j) {
        DensityMatrix3::RealVector e = DensityMatrix3::RealVector::Zero();
        e[j] = 1.0;
        const Eigen::Matrix3cd rho = DensityMatrix3::from_real_vector(e).matrix();
        const Eigen::Matrix3cd dr = lindblad_rhs(rho, p, d);
        m.col(j) << dr(0, 0).real(), dr(1, 1).real(), dr(2, 2).real(), dr(0, 1).real(),
            dr(0, 1).imag(), dr(0, 2).real(), dr(0, 2).imag(), dr(1, 2).real(), dr(1, 2).imag();
    }
    return m;
}

// Integrates d(rho)/dt = M rho from rho11 = 1 by repeated squaring of the
// matrix exponential until the residual ||M rho|| drops below `residual_tol`
// (in units of the fastest rate in M). Exact integration, so arbitrarily
// stiff generators converge; throws after `max_doublings` if no stationary
// point is reached (degenerate manifolds drift forever between ground
// mixtures but already satisfy the residual test, so genuine failures are
// non-relaxing spectra).
inline DensityMatrix3 relax_to_steady_state(const Eigen::Matrix<double, 9, 9>& m,
                                            double rate_scale, double residual_tol = 1e-12,
                                            int max_doublings = 80) {
    DensityMatrix3::RealVector x = DensityMatrix3::pure_ground(1).to_real_vector();
    const double h0 = 0.1 / rate_scale;
    Eigen::Matrix<double, 9, 9> step = (m * h0).exp();
    for (int i = 0; i < max_doublings; ++i) {
        x = step * x;
        const double residual = (m * x).norm() / rate_scale;
        if (residual < residual_tol) return DensityMatrix3::from_real_vector(x);
        step = step * step;   // doubles the integrated time every iteration
    }
    throw std::runtime_error("relax_to_steady_state: no convergence");
}

} // namespace cptclone::test_oracles

#endif
