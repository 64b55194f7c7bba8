#include "cptclone/lambda_system.hpp"

#include <cmath>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cptclone {

namespace {

constexpr std::complex<double> I{0.0, 1.0};

bool finite(const std::complex<double>& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

} // namespace

void LambdaParams::validate() const {
    if (!(gamma > 0.0)) throw ConfigError("LambdaParams: gamma must be > 0");
    if (branch_1 < 0.0 || branch_2 < 0.0)
        throw ConfigError("LambdaParams: branching fractions must be >= 0");
    if (std::abs(branch_1 + branch_2 - 1.0) > 1e-12)
        throw ConfigError("LambdaParams: branch_1 + branch_2 must equal 1");
    if (gamma_12 < 0.0) throw ConfigError("LambdaParams: gamma_12 must be >= 0");
    if (!std::isfinite(delta_1) || !std::isfinite(delta_2))
        throw ConfigError("LambdaParams: detunings must be finite");
}

void DriveParams::validate() const {
    if (!finite(g) || !finite(G)) throw ConfigError("DriveParams: Rabi frequencies must be finite");
}

DensityMatrix3 DensityMatrix3::from_matrix(const Matrix& m, double tol) {
    DensityMatrix3 rho;
    rho.m_ = 0.5 * (m + m.adjoint());
    if ((m - rho.m_).cwiseAbs().maxCoeff() > tol)
        throw ConfigError("DensityMatrix3: input is not Hermitian");
    if (std::abs(rho.m_.trace().real() - 1.0) > tol)
        throw ConfigError("DensityMatrix3: trace must be 1");
    if (rho.min_eigenvalue() < -tol)
        throw ConfigError("DensityMatrix3: negative eigenvalue");
    return rho;
}

DensityMatrix3 DensityMatrix3::pure_ground(int level) {
    if (level != 1 && level != 2) throw ConfigError("pure_ground: level must be 1 or 2");
    DensityMatrix3 rho;
    rho.m_(level - 1, level - 1) = 1.0;
    return rho;
}

DensityMatrix3::RealVector DensityMatrix3::to_real_vector() const {
    RealVector x;
    x << m_(0, 0).real(), m_(1, 1).real(), m_(2, 2).real(),
         m_(0, 1).real(), m_(0, 1).imag(),
         m_(0, 2).real(), m_(0, 2).imag(),
         m_(1, 2).real(), m_(1, 2).imag();
    return x;
}

DensityMatrix3 DensityMatrix3::from_real_vector(const RealVector& x) {
    DensityMatrix3 rho;
    Matrix& m = rho.m_;
    m(0, 0) = x[0];
    m(1, 1) = x[1];
    m(2, 2) = x[2];
    m(0, 1) = {x[3], x[4]};
    m(1, 0) = std::conj(m(0, 1));
    m(0, 2) = {x[5], x[6]};
    m(2, 0) = std::conj(m(0, 2));
    m(1, 2) = {x[7], x[8]};
    m(2, 1) = std::conj(m(1, 2));
    return rho;
}

double DensityMatrix3::trace_error() const { return std::abs(m_.trace().real() - 1.0); }

double DensityMatrix3::hermiticity_error() const {
    return (m_ - m_.adjoint().eval()).cwiseAbs().maxCoeff();
}

double DensityMatrix3::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::Matrix3cd master_equation_rhs(const Eigen::Matrix3cd& rho, const LambdaParams& params,
                                     const DriveParams& drives) {
    const double gam = params.gamma;
    const double g12 = params.gamma_12;
    const double d1 = params.delta_1;
    const double d2 = params.delta_2;
    const double dr = d2 - d1;   // two-photon (Raman) detuning of |2> in the frame
    const std::complex<double> g = drives.g;
    const std::complex<double> G = drives.G;

    const std::complex<double> r12 = rho(0, 1);
    const std::complex<double> r13 = rho(0, 2);
    const std::complex<double> r23 = rho(1, 2);
    const std::complex<double> r32 = std::conj(r23);
    const double r11 = rho(0, 0).real();
    const double r22 = rho(1, 1).real();
    const double r33 = rho(2, 2).real();

    // Populations: field terms plus radiative feed from |3>.
    const double pump_1 = 2.0 * std::imag(G * r13);
    const double pump_2 = 2.0 * std::imag(g * r23);
    const std::complex<double> d11 = pump_1 + params.branch_1 * gam * r33;
    const std::complex<double> d22 = pump_2 + params.branch_2 * gam * r33;
    const std::complex<double> d33 = -pump_1 - pump_2 - gam * r33;

    // Coherences.
    const std::complex<double> d12 =
        I * std::conj(G) * r32 + I * dr * r12 - I * g * r13 - g12 * r12;
    const std::complex<double> d13 =
        I * std::conj(G) * (r33 - r11) - I * std::conj(g) * r12 - I * d1 * r13 - 0.5 * gam * r13;
    const std::complex<double> d23 =
        -I * d2 * r23 - I * std::conj(g) * (r22 - r33) - I * std::conj(G) * std::conj(r12) -
        0.5 * gam * r23;

    Eigen::Matrix3cd d;
    d << d11, d12, d13,
         std::conj(d12), d22, d23,
         std::conj(d13), std::conj(d23), d33;
    return d;
}

Liouvillian build_liouvillian(const LambdaParams& params, const DriveParams& drives) {
    params.validate();
    drives.validate();

    Liouvillian::Matrix9 m;
    for (int j = 0; j < 9; ++j) {
        DensityMatrix3::RealVector e = DensityMatrix3::RealVector::Zero();
        e[j] = 1.0;
        const Eigen::Matrix3cd basis = DensityMatrix3::from_real_vector(e).matrix();
        const Eigen::Matrix3cd d = master_equation_rhs(basis, params, drives);
        m.col(j) << d(0, 0).real(), d(1, 1).real(), d(2, 2).real(),
                    d(0, 1).real(), d(0, 1).imag(),
                    d(0, 2).real(), d(0, 2).imag(),
                    d(1, 2).real(), d(1, 2).imag();
    }
    return Liouvillian(m);
}

DensityMatrix3 steady_state(const Liouvillian& m) {
    // Secondary rank estimate: one small singular value belongs to the
    // stationary direction; two or more means a degenerate dark manifold.
    Eigen::JacobiSVD<Liouvillian::Matrix9> svd(m.matrix());
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (!(smax > 0.0)) throw DegenerateSteadyState("steady_state: zero generator");
    int small = 0;
    for (int i = 0; i < 9; ++i)
        if (sv(i) < 1e-9 * smax) ++small;
    if (small > 1)
        throw DegenerateSteadyState("steady_state: stationary manifold has dimension " +
                                    std::to_string(small));

    Liouvillian::Matrix9 a = m.matrix();
    a.row(0) << 1, 1, 1, 0, 0, 0, 0, 0, 0;   // trace constraint picks the physical solution
    DensityMatrix3::RealVector b = DensityMatrix3::RealVector::Zero();
    b[0] = 1.0;
    const DensityMatrix3::RealVector x = a.fullPivLu().solve(b);
    if (!x.allFinite()) throw NumericGuard("steady_state: solve produced non-finite state");
    return DensityMatrix3::from_real_vector(x);
}

SusceptibilityResult probe_susceptibility(const LambdaParams& params, const DriveParams& drives,
                                          double density, double wavelength) {
    if (drives.g == std::complex<double>{0.0, 0.0})
        throw ZeroProbe("probe_susceptibility: chi is defined per unit probe field, g must be nonzero");
    if (density < 0.0) throw ConfigError("probe_susceptibility: density must be >= 0");

    const DensityMatrix3 rho = steady_state(build_liouvillian(params, drives));
    const std::complex<double> rho32 = std::conj(rho.coherence(2, 3));
    // Calibrated so a repumped two-level atom at resonance gives
    // Im chi = 3 N lambda^3 / (4 pi^2).
    const double c_unit =
        3.0 * wavelength * wavelength * wavelength / (4.0 * units::pi * units::pi) *
        (params.gamma / 2.0);
    return {c_unit * density * rho32 / drives.g, rho};
}

RabiAnchor probe_anchor() { return {1.4e-3, 5.0e-3, 8.4 * units::rb_d1_gamma}; }
RabiAnchor coupling_anchor() { return {1.5e-3, 1.5e-3, 29.0 * units::rb_d1_gamma}; }

double rabi_from_power(double power, double beam_diameter, const RabiAnchor& anchor) {
    if (!(anchor.power > 0.0) || !(anchor.beam_diameter > 0.0))
        throw BadAnchor("rabi_from_power: anchor power and diameter must be positive");
    if (power < 0.0) throw ConfigError("rabi_from_power: power must be >= 0");
    if (!(beam_diameter > 0.0)) throw ConfigError("rabi_from_power: diameter must be > 0");
    const double k = anchor.rabi * anchor.beam_diameter / std::sqrt(anchor.power);
    return k * std::sqrt(power) / beam_diameter;
}

} // namespace cptclone
