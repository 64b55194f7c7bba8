#ifndef CPTCLONE_WAVE_OPTICS_HPP
#define CPTCLONE_WAVE_OPTICS_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cptclone/grid.hpp"

// Forward declarations so FFTW stays an implementation detail of the .cpp.
struct fftw_plan_s;

namespace cptclone {

// Guard diagnostics collected while propagating. The border-energy check is a
// warning, not an error: runs proceed and the harness reports the worst case.
struct PropagationWarning {
    enum class Kind { border_energy };
    Kind kind;
    double value;          // measured border power fraction
    double z;              // position of the offending plane, m (cumulative)
    std::string context;
};

// |amplitude|^2 integrated over the grid: sum |E|^2 dx dy.
double field_power(const ComplexField2D& field);

// Angular-spectrum propagator over one fixed grid. Caches the FFT plans and
// the transverse k^2 table; create one per grid (and per thread, instances
// are not shareable across concurrent calls).
class Propagator {
public:
    explicit Propagator(const GridSpec& grid);
    ~Propagator();
    Propagator(const Propagator&) = delete;
    Propagator& operator=(const Propagator&) = delete;

    const GridSpec& grid() const { return grid_; }

    // Paraxial free-space step: multiply the angular spectrum by
    // H(kx, ky) = exp(-i (kx^2 + ky^2) z / (2 k)). Exact in z within the
    // paraxial model; unitary, so power is conserved.
    ComplexField2D propagate_free(const ComplexField2D& field, double z);

    // Thin screen of a longitudinally uniform slab of thickness dz:
    // pointwise multiply by exp(i k chi(x, y) dz / 2)  (n = 1 + chi/2).
    ComplexField2D medium_screen(const ComplexField2D& field, const SusceptibilityMap& chi,
                                 double dz) const;

    // chi provider for split stepping; called once per step, in order, with
    // the step index, the z of the step midpoint (relative to the medium
    // entrance) and the step length. May carry mutable state (e.g. a
    // co-propagating coupling field).
    using ChiProvider =
        std::function<const SusceptibilityMap&(std::size_t step, double z_mid, double step_len)>;

    // Symmetrised (Strang) split-step march through a structured medium:
    // half screen, full diffraction step, half screen; ceil(length/dz) steps
    // with a shortened final one. Second order in dz.
    ComplexField2D propagate_medium(const ComplexField2D& field, const ChiProvider& chi_of_z,
                                    double length, double dz);

    const std::vector<PropagationWarning>& warnings() const { return warnings_; }
    void clear_warnings() { warnings_.clear(); }

    // Power fraction in the outer 2-pixel frame above which a warning is
    // recorded (aliasing guard).
    double border_energy_threshold = 1e-6;

private:
    void check_border(const ComplexField2D& field, double z, const char* context);
    void fft_forward(std::vector<complexd>& data) const;
    void fft_backward(std::vector<complexd>& data) const;

    GridSpec grid_;
    std::vector<double> k_squared_;    // kx^2 + ky^2 per sample, FFT layout
    fftw_plan_s* fwd_ = nullptr;
    fftw_plan_s* bwd_ = nullptr;
    std::vector<complexd> buffer_;
    std::vector<PropagationWarning> warnings_;
    double z_cursor_ = 0.0;            // cumulative z for warning positions
};

// Convenience wrappers creating a throwaway Propagator. Warnings, if any, are
// appended to `warnings` when given.
ComplexField2D propagate_free(const ComplexField2D& field, double z,
                              std::vector<PropagationWarning>* warnings = nullptr);
ComplexField2D medium_screen(const ComplexField2D& field, const SusceptibilityMap& chi, double dz);

// Power fraction in the outer 2-pixel frame of the grid.
double border_power_fraction(const ComplexField2D& field);

} // namespace cptclone

#endif
