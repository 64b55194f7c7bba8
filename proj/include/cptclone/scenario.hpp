#ifndef CPTCLONE_SCENARIO_HPP
#define CPTCLONE_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "cptclone/lambda_system.hpp"
#include "cptclone/scene.hpp"

namespace cptclone {

// Declarative experiment description. Physical quantities in the text format
// carry explicit unit suffixes (mm, MHz, mW, per_cm3, gamma, ...); unitless
// numbers are accepted only for dimensionless fields and counts.
struct ScenarioConfig {
    std::string id = "scenario";

    struct Geometry {
        double gap_before_cell = 45e-3;   // m
        double cell_length = 50e-3;       // m
        double gap_after_cell = 205e-3;   // m
        // Optional consistency pin: must equal the sum of the three legs.
        std::optional<double> camera_distance;

        double z0() const { return gap_before_cell + cell_length + gap_after_cell; }
    } geometry;

    struct Beams {
        double probe_power = 1.4e-3;        // W
        double probe_diameter = 5e-3;       // m (interpreted as 2x waist)
        double coupling_power = 1.5e-3;     // W
        double coupling_diameter = 1.5e-3;  // m
    } beams;

    struct Atom {
        LambdaParams params = {units::rb_d1_gamma, 0.5, 0.5, 0.0,
                               units::mhz_to_angular(361.0), units::mhz_to_angular(375.0)};
        double density = units::density_anchor_per_m3;   // atoms/m^3
        double wavelength = units::rb_d1_wavelength;     // m
    } atom;

    enum class MaskKind { two_slit, glyph, pgm_file };

    struct Mask {
        MaskKind kind = MaskKind::two_slit;
        double slit_width = 100e-6;
        double slit_separation = 400e-6;
        Glyph glyph = Glyph::U;
        double glyph_height = 1e-3;
        double glyph_stroke = 0.15e-3;
        std::string pgm_path;
    } mask;

    struct Numerics {
        int nx = 512;
        int ny = 512;
        double window = 10e-3;   // m
        double dz = 0.5e-3;      // m
        int chi_table_points = 8192;
        bool edge_smoothing = false;
        double border_guard = 1e-6;
    } numerics;

    struct Outputs {
        std::string directory = "out";
        bool dump_fields = false;
    } outputs;

    void validate() const;
    GridSpec make_grid() const;
    Mask2D make_mask() const;
};

ScenarioConfig parse_scenario(const std::string& text, const std::string& default_id = "scenario");
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioConfig& config);

} // namespace cptclone

#endif
