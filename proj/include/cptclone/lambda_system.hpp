#ifndef CPTCLONE_LAMBDA_SYSTEM_HPP
#define CPTCLONE_LAMBDA_SYSTEM_HPP

#include <complex>
#include <Eigen/Dense>

#include "cptclone/errors.hpp"
#include "cptclone/units.hpp"

namespace cptclone {

// Three-level Lambda scheme: ground states |1>, |2>, excited |3>.
// The coupling field drives |1> <-> |3> (detuning delta_1), the probe drives
// |2> <-> |3> (detuning delta_2). Detunings are laser minus transition
// frequency, so blue detuning is positive. Everything is in rad/s.
//
// Rotating-frame Hamiltonian (hbar = 1), with the drive matrix elements equal
// to the full Rabi frequencies:
//
//   H = (delta_2 - delta_1)|2><2| - delta_1|3><3|
//       - ( G|3><1| + g|3><2| + h.c. )
//
// This normalisation is fixed by the susceptibility calibration below: a
// repumped two-level atom on resonance must give the textbook
// Im chi = 3 N lambda^3 / (4 pi^2).

struct LambdaParams {
    double gamma = units::rb_d1_gamma;   // total decay rate of |3>
    double branch_1 = 0.5;               // |3> -> |1> branching fraction
    double branch_2 = 0.5;               // |3> -> |2> branching fraction
    double gamma_12 = 0.0;               // ground-coherence decay on rho_12
    double delta_1 = 0.0;                // coupling detuning
    double delta_2 = 0.0;                // probe detuning

    void validate() const;
};

struct DriveParams {
    std::complex<double> g{0.0, 0.0};    // probe Rabi frequency
    std::complex<double> G{0.0, 0.0};    // coupling Rabi frequency

    void validate() const;
};

// Hermitian trace-one state of the Lambda system.
class DensityMatrix3 {
public:
    using Matrix = Eigen::Matrix3cd;
    using RealVector = Eigen::Matrix<double, 9, 1>;

    DensityMatrix3() : m_(Matrix::Zero()) {}

    // Hermitises and checks trace/positivity within `tol`.
    static DensityMatrix3 from_matrix(const Matrix& m, double tol = 1e-9);
    static DensityMatrix3 pure_ground(int level);   // |level><level|, level in {1, 2}

    const Matrix& matrix() const { return m_; }
    double population(int level) const { return m_(level - 1, level - 1).real(); }
    std::complex<double> coherence(int bra, int ket) const { return m_(bra - 1, ket - 1); }

    // Real 9-vector [r11, r22, r33, Re r12, Im r12, Re r13, Im r13, Re r23, Im r23].
    RealVector to_real_vector() const;
    static DensityMatrix3 from_real_vector(const RealVector& x);

    double trace_error() const;        // |tr - 1|
    double hermiticity_error() const;  // max |rho - rho^dag|
    double min_eigenvalue() const;

private:
    Matrix m_;
};

// Generator M of d(rho)/dt = M rho on the real 9-vector parametrisation.
class Liouvillian {
public:
    using Matrix9 = Eigen::Matrix<double, 9, 9>;

    Liouvillian() : m_(Matrix9::Zero()) {}
    explicit Liouvillian(const Matrix9& m) : m_(m) {}

    const Matrix9& matrix() const { return m_; }
    DensityMatrix3::RealVector apply(const DensityMatrix3::RealVector& x) const { return m_ * x; }

private:
    Matrix9 m_;
};

// d(rho)/dt of the master equation, written out element by element
// (commutator with H above, Lindblad decay of |3> split by branching,
// pure gamma_12 dephasing of rho_12).
Eigen::Matrix3cd master_equation_rhs(const Eigen::Matrix3cd& rho, const LambdaParams& params,
                                     const DriveParams& drives);

Liouvillian build_liouvillian(const LambdaParams& params, const DriveParams& drives);

// Unique stationary state via the trace-replaced direct solve. Throws
// DegenerateSteadyState when the nullspace of M has dimension > 1
// (e.g. g = G = 0 with gamma_12 = 0, where any ground mixture is stationary).
DensityMatrix3 steady_state(const Liouvillian& m);

struct SusceptibilityResult {
    std::complex<double> chi;
    DensityMatrix3 rho;
};

// Probe susceptibility chi = C_unit * density * rho32 / g with
// C_unit = 3 lambda^3/(4 pi^2) * (gamma/2); density in atoms/m^3.
SusceptibilityResult probe_susceptibility(const LambdaParams& params, const DriveParams& drives,
                                          double density,
                                          double wavelength = units::rb_d1_wavelength);

// One measured (power, beam diameter) -> Rabi frequency calibration point.
struct RabiAnchor {
    double power;           // W
    double beam_diameter;   // m
    double rabi;            // rad/s
};

// Measured anchors: probe 1.4 mW over 5 mm -> 8.4 gamma, coupling 1.5 mW over
// 1.5 mm -> 29 gamma.
RabiAnchor probe_anchor();
RabiAnchor coupling_anchor();

// Omega = K sqrt(power)/diameter, K fixed by the anchor.
double rabi_from_power(double power, double beam_diameter, const RabiAnchor& anchor);

} // namespace cptclone

#endif
