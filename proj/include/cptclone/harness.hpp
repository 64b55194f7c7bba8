#ifndef CPTCLONE_HARNESS_HPP
#define CPTCLONE_HARNESS_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cptclone/metrics.hpp"
#include "cptclone/scenario.hpp"
#include "cptclone/wave_optics.hpp"

namespace cptclone {

struct MetricRow {
    std::string scenario_id;
    std::string name;
    double value;
    std::string units;
};

struct RunReport {
    std::string scenario_id;
    std::vector<MetricRow> metrics;
    std::vector<std::string> artifacts;          // emitted file paths
    std::vector<PropagationWarning> warnings;
    std::vector<std::string> notes;              // skipped metrics etc.
    double wall_seconds = 0.0;

    bool has_metric(const std::string& name) const;
    double metric(const std::string& name) const;
};

// In-memory results of one pipeline execution, for tests and sweeps.
struct RunOutputs {
    GridSpec grid;
    IntensityImage probe_image;            // probe through the medium, camera plane
    IntensityImage coupling_image;         // masked coupling, free space, camera plane
    IntensityImage probe_free_image;       // unmasked probe, free space, camera plane
    IntensityImage mask_reference;         // mask transmission resampled on the grid
    IntensityImage reference_illuminated;  // |mask x input coupling|^2, the clone target
    ComplexField2D probe_out_field;
    PixelRect analysis_window;
};

struct RunResult {
    RunReport report;
    RunOutputs outputs;
};

struct RunOptions {
    bool write_artifacts = true;
    std::optional<std::filesystem::path> out_dir;   // overrides config outputs.directory
};

// Full pipeline: beams, mask, gap, split-step cell with the co-propagating
// coupling defining chi(x, y, z), gap, camera images and metrics.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

// Advances a free-space coupling field to step midpoints and serves the
// corresponding susceptibility map to Propagator::propagate_medium.
class CouplingChiProvider {
public:
    CouplingChiProvider(const ComplexField2D& coupling_at_entrance, const ChiTable* table,
                        double density, double rabi_scale,
                        double border_energy_threshold = 1e-6);

    const SusceptibilityMap& operator()(std::size_t step, double z_mid, double step_len);
    const ComplexField2D& coupling() const { return coupling_; }
    const std::vector<PropagationWarning>& warnings() const;

private:
    std::unique_ptr<Propagator> prop_;
    ComplexField2D coupling_;
    const ChiTable* table_;   // nullptr -> vacuum (zero chi)
    double density_;
    double rabi_scale_;
    double z_ = 0.0;
    SusceptibilityMap map_;
};

enum class SweepParameter { probe_power, coupling_power, density };

SweepParameter sweep_parameter_from_name(const std::string& name);
std::vector<double> default_sweep_values(SweepParameter p);

struct SweepResult {
    SweepParameter parameter;
    std::vector<double> values;
    std::vector<RunReport> reports;
    std::vector<double> clone_ncc;    // |NCC| per value, 0 for no-signal points
    std::filesystem::path csv_path;
    std::filesystem::path strip_path;
};

// One run_scenario per value; emits sweep.csv, a concatenated camera-image
// strip and the chi(g), chi(G), chi(N) curves alongside. Parallel across
// values, capped by the CPTCLONE_THREADS environment variable.
SweepResult sweep(const ScenarioConfig& config, SweepParameter parameter,
                  const std::vector<double>& values, const std::filesystem::path& out_dir);

enum class ChiAxis { g, G, N };

struct ChiCurvePoint {
    double axis_value;
    double re_chi;
    double im_chi;
};

// Re/Im chi tabulated along one axis with the other parameters at the given
// scenario's values. g = 0 sample points are skipped with a note.
std::vector<ChiCurvePoint> chi_curve(const ScenarioConfig& config, ChiAxis axis, double from,
                                     double to, int points, std::vector<std::string>* notes = nullptr);
void write_chi_curve_csv(const std::filesystem::path& path, ChiAxis axis,
                         const std::vector<ChiCurvePoint>& curve,
                         const std::vector<std::string>& notes);

// 16-bit P5 PGM, intensity normalised to the image maximum.
void render_pgm(const std::filesystem::path& path, const IntensityImage& image);
void render_cf2d_to_pgm(const std::filesystem::path& cf2d_path, const std::filesystem::path& pgm_path);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);
void write_report_json(const std::filesystem::path& path, const RunReport& report);

} // namespace cptclone

#endif
