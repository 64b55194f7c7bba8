#include "cptclone/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cptclone/cf2d_io.hpp"

namespace cptclone {

namespace {

namespace fs = std::filesystem;

std::string format_value(double v) {
    if (v == 0.0) v = 0.0;   // canonicalise negative zero
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

ComplexField2D beam_from_power(const GridSpec& grid, double power, double diameter) {
    // Diameter is read as twice the Gaussian waist; amplitude normalised so
    // the analytic beam power equals `power` (W-equivalent units).
    const double waist = diameter / 2.0;
    const double amplitude = power > 0.0 ? std::sqrt(2.0 * power / (units::pi * waist * waist)) : 0.0;
    return gaussian_beam(grid, waist, amplitude);
}

IntensityImage mask_image(const Mask2D& mask) {
    IntensityImage img(mask.grid);
    img.values = mask.transmission;
    return img;
}

double disk_power(const IntensityImage& img, double radius) {
    const GridSpec& g = img.grid;
    const double r2 = radius * radius;
    double sum = 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
        const double y = g.y(iy);
        for (int ix = 0; ix < g.nx; ++ix) {
            const double x = g.x(ix);
            if (x * x + y * y <= r2) sum += img.at(ix, iy);
        }
    }
    return sum * g.dx * g.dy;
}

std::vector<double> crop_samples(const IntensityImage& img, const PixelRect& w) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(w.width()) * w.height());
    for (int iy = w.y0; iy <= w.y1; ++iy)
        for (int ix = w.x0; ix <= w.x1; ++ix) out.push_back(img.at(ix, iy));
    return out;
}

unsigned sweep_worker_cap() {
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CPTCLONE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) cap = static_cast<unsigned>(v);
    }
    return cap;
}

} // namespace

bool RunReport::has_metric(const std::string& name) const {
    return std::any_of(metrics.begin(), metrics.end(),
                       [&](const MetricRow& r) { return r.name == name; });
}

double RunReport::metric(const std::string& name) const {
    for (const auto& r : metrics)
        if (r.name == name) return r.value;
    throw Error("RunReport: no metric named " + name);
}

CouplingChiProvider::CouplingChiProvider(const ComplexField2D& coupling_at_entrance,
                                         const ChiTable* table, double density, double rabi_scale,
                                         double border_energy_threshold)
    : prop_(std::make_unique<Propagator>(coupling_at_entrance.grid())),
      coupling_(coupling_at_entrance),
      table_(table),
      density_(density),
      rabi_scale_(rabi_scale),
      map_(coupling_at_entrance.grid()) {
    prop_->border_energy_threshold = border_energy_threshold;
}

const SusceptibilityMap& CouplingChiProvider::operator()(std::size_t, double z_mid, double) {
    if (!table_) return map_;   // vacuum: chi stays identically zero
    if (z_mid > z_) {
        coupling_ = prop_->propagate_free(coupling_, z_mid - z_);
        z_ = z_mid;
    }
    map_ = susceptibility_from_coupling(coupling_, *table_, density_, rabi_scale_);
    return map_;
}

const std::vector<PropagationWarning>& CouplingChiProvider::warnings() const {
    return prop_->warnings();
}

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();

    const GridSpec grid = config.make_grid();
    const Mask2D mask = config.make_mask();

    ComplexField2D probe0 = beam_from_power(grid, config.beams.probe_power, config.beams.probe_diameter);
    ComplexField2D coupling0 =
        beam_from_power(grid, config.beams.coupling_power, config.beams.coupling_diameter);
    ComplexField2D coupling_masked = apply_mask(coupling0, mask);

    // One calibration constant, fixed by the probe anchor, converts both
    // beam powers to Rabi frequencies.
    const RabiAnchor anchor = probe_anchor();
    const double g_nom =
        rabi_from_power(config.beams.probe_power, config.beams.probe_diameter, anchor);
    const double g_coupling_nom =
        rabi_from_power(config.beams.coupling_power, config.beams.coupling_diameter, anchor);
    if (g_nom <= 0.0) throw ZeroProbe("run_scenario: probe power is zero");

    double coupling_peak = 0.0;
    for (const auto& v : coupling0.samples()) coupling_peak = std::max(coupling_peak, std::abs(v));

    std::unique_ptr<ChiTable> table;
    double rabi_scale = 1.0;
    const bool coupling_on = config.beams.coupling_power > 0.0 && config.atom.density > 0.0;
    if (coupling_on) {
        rabi_scale = g_coupling_nom / coupling_peak;
        // Generous range: diffraction inside the cell can overshoot the
        // input peak amplitude near hard edges.
        const double g_max = 2.5 * g_coupling_nom;
        table = std::make_unique<ChiTable>(config.atom.params, std::complex<double>(g_nom, 0.0),
                                           g_max, config.numerics.chi_table_points,
                                           config.atom.wavelength);
    }

    Propagator prop(grid);
    prop.border_energy_threshold = config.numerics.border_guard;

    // Probe leg: gap, structured cell, gap.
    ComplexField2D probe_at_cell = prop.propagate_free(probe0, config.geometry.gap_before_cell);
    ComplexField2D coupling_at_cell =
        prop.propagate_free(coupling_masked, config.geometry.gap_before_cell);
    CouplingChiProvider provider(coupling_at_cell, table.get(), config.atom.density, rabi_scale,
                                 config.numerics.border_guard);
    const double probe_power_cell_in = field_power(probe_at_cell);
    ComplexField2D probe_after_cell = prop.propagate_medium(
        probe_at_cell, std::ref(provider), config.geometry.cell_length, config.numerics.dz);
    const double probe_power_cell_out = field_power(probe_after_cell);
    ComplexField2D probe_cam = prop.propagate_free(probe_after_cell, config.geometry.gap_after_cell);

    // References at the camera: the masked coupling treated as far-detuned
    // (pure free space), and the unmasked probe with the medium off.
    const double z0 = config.geometry.z0();
    ComplexField2D coupling_cam = prop.propagate_free(coupling_masked, z0);
    ComplexField2D probe_free_cam = prop.propagate_free(probe0, z0);

    if (!probe_cam.all_finite() || !coupling_cam.all_finite())
        throw NumericGuard("run_scenario: non-finite field at the camera plane");

    RunResult result;
    RunOutputs& out = result.outputs;
    out.grid = grid;
    out.probe_image = IntensityImage::from_field(probe_cam);
    out.coupling_image = IntensityImage::from_field(coupling_cam);
    out.probe_free_image = IntensityImage::from_field(probe_free_cam);
    out.mask_reference = mask_image(mask);
    out.reference_illuminated = IntensityImage::from_field(coupling_masked);
    out.probe_out_field = probe_cam;

    RunReport& report = result.report;
    report.scenario_id = config.id;
    auto add = [&](const std::string& name, double value, const std::string& units) {
        report.metrics.push_back({config.id, name, value, units});
    };

    // Clone fidelity: background-subtracted probe image against the
    // illuminated mask, inside the reference support window. The sign gives
    // the polarity (negative = the clone is the complement of the mask).
    const double w_c = config.beams.coupling_diameter / 2.0;
    if (coupling_on) {
        const int dilate = static_cast<int>(std::lround(w_c / 3.0 / grid.dx));
        out.analysis_window = support_window(out.reference_illuminated, 0.01, dilate);

        std::vector<double> clone_signal = crop_samples(out.probe_image, out.analysis_window);
        {
            const std::vector<double> bg = crop_samples(out.probe_free_image, out.analysis_window);
            for (std::size_t i = 0; i < clone_signal.size(); ++i) clone_signal[i] -= bg[i];
        }
        const std::vector<double> ref = crop_samples(out.reference_illuminated, out.analysis_window);

        double clone_ncc_signed = 0.0;
        bool clone_measurable = true;
        try {
            clone_ncc_signed = ncc_samples(clone_signal, ref);
        } catch (const ZeroVariance&) {
            clone_measurable = false;
            report.notes.push_back("clone NCC: no imprint (zero-variance signal), recorded as 0");
        }
        add("clone_ncc_signed", clone_ncc_signed, "1");
        add("clone_ncc", clone_measurable ? std::abs(clone_ncc_signed) : 0.0, "1");
        add("clone_polarity", clone_ncc_signed < 0.0 ? -1.0 : 1.0, "1");

        const double coupling_ncc =
            ncc(out.coupling_image, out.reference_illuminated, out.analysis_window);
        add("coupling_ncc", coupling_ncc, "1");
        add("clone_minus_coupling_ncc",
            (clone_measurable ? std::abs(clone_ncc_signed) : 0.0) - std::abs(coupling_ncc), "1");

        try {
            const auto profile = horizontal_profile(out.coupling_image, out.analysis_window);
            add("coupling_fringe_visibility", fringe_visibility(profile), "1");
        } catch (const NoFringes&) {
            report.notes.push_back("coupling fringe visibility: no fringes in window");
        }

        // Sharpness report for slit scenarios: 10-90% edge of the clone dip
        // versus the freely diffracted coupling edge.
        if (config.mask.kind == ScenarioConfig::MaskKind::two_slit) {
            try {
                IntensityImage dip(grid);
                for (std::size_t i = 0; i < dip.values.size(); ++i) {
                    const double d = out.probe_free_image.values[i] - out.probe_image.values[i];
                    dip.values[i] = d > 0.0 ? d : 0.0;
                }
                const auto clone_profile = horizontal_profile(dip, out.analysis_window);
                const auto coupling_profile = horizontal_profile(out.coupling_image, out.analysis_window);
                const double we_clone = edge_width(clone_profile, grid.dx);
                const double we_coupling = edge_width(coupling_profile, grid.dx);
                add("edge_width_clone", we_clone, "m");
                add("edge_width_coupling", we_coupling, "m");
                add("edge_sharpness_ratio", we_coupling / we_clone, "1");
            } catch (const NumericGuard&) {
                report.notes.push_back("edge widths: no clean monotone edge, skipped");
            }
        }
    } else {
        out.analysis_window = full_frame(grid);
        add("clone_ncc", 0.0, "1");
        add("clone_ncc_signed", 0.0, "1");
        add("clone_polarity", 1.0, "1");
        report.notes.push_back(
            "no coupling power or no atoms: medium invisible, clone metrics recorded as 0");
    }

    const double probe_power_in = field_power(probe0);
    add("probe_power_in", probe_power_in, "W");
    add("probe_power_cell_in", probe_power_cell_in, "W");
    add("probe_power_cell_out", probe_power_cell_out, "W");
    add("transmitted_power_fraction", transmitted_power_fraction(probe_cam, probe0), "1");
    // Transmitted power of the cloned image: probe power at the
    // camera inside the coupling-beam footprint.
    add("clone_region_power", disk_power(out.probe_image, w_c), "W");

    report.warnings = prop.warnings();
    const auto& pw = provider.warnings();
    report.warnings.insert(report.warnings.end(), pw.begin(), pw.end());
    double worst = 0.0;
    for (const auto& w : report.warnings) worst = std::max(worst, w.value);
    add("border_energy_worst", worst, "1");

    if (options.write_artifacts) {
        const fs::path dir = options.out_dir.value_or(fs::path(config.outputs.directory));
        fs::create_directories(dir);
        auto emit = [&](const std::string& name, const IntensityImage& img) {
            const fs::path p = dir / name;
            render_pgm(p, img);
            report.artifacts.push_back(p.string());
        };
        emit("probe_camera.pgm", out.probe_image);
        emit("coupling_camera.pgm", out.coupling_image);
        emit("probe_free_camera.pgm", out.probe_free_image);
        emit("mask_reference.pgm", out.mask_reference);
        emit("reference_illuminated.pgm", out.reference_illuminated);
        {
            // |medium-on minus medium-off| probe intensity: the clone itself.
            IntensityImage clone(grid);
            for (std::size_t i = 0; i < clone.values.size(); ++i)
                clone.values[i] =
                    std::abs(out.probe_image.values[i] - out.probe_free_image.values[i]);
            emit("clone_signal.pgm", clone);
        }
        if (config.outputs.dump_fields) {
            const fs::path f1 = dir / "probe_camera.cf2d";
            write_cf2d(f1, probe_cam);
            report.artifacts.push_back(f1.string());
            const fs::path f2 = dir / "coupling_camera.cf2d";
            write_cf2d(f2, coupling_cam);
            report.artifacts.push_back(f2.string());
        }
        write_metrics_csv(dir / "metrics.csv", report.metrics);
        report.artifacts.push_back((dir / "metrics.csv").string());
        report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_report_json(dir / "report.json", report);
        report.artifacts.push_back((dir / "report.json").string());
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

SweepParameter sweep_parameter_from_name(const std::string& name) {
    if (name == "probe_power") return SweepParameter::probe_power;
    if (name == "coupling_power") return SweepParameter::coupling_power;
    if (name == "density") return SweepParameter::density;
    throw ConfigError("sweep: parameter must be probe_power|coupling_power|density");
}

std::vector<double> default_sweep_values(SweepParameter p) {
    switch (p) {
        case SweepParameter::probe_power:
            return {2e-3, 3e-3, 4e-3, 5e-3, 6e-3};
        case SweepParameter::coupling_power:
            // A finer grid crosses the light-shifted Raman resonance near
            // 0.6 mW, where the clone NCC genuinely dips before recovering.
            return {0.0, 0.1e-3, 0.3e-3, 1.0e-3, 1.5e-3};
        case SweepParameter::density:
            return {2.5e18, 1.0e18, 0.5e18, 0.25e18, 0.1e18};
    }
    throw ConfigError("sweep: unknown parameter");
}

namespace {

ScenarioConfig with_value(const ScenarioConfig& base, SweepParameter p, double v, int index) {
    ScenarioConfig c = base;
    switch (p) {
        case SweepParameter::probe_power: c.beams.probe_power = v; break;
        case SweepParameter::coupling_power: c.beams.coupling_power = v; break;
        case SweepParameter::density: c.atom.density = v; break;
    }
    c.id = base.id + "_p" + std::to_string(index);
    return c;
}

std::string parameter_name(SweepParameter p) {
    switch (p) {
        case SweepParameter::probe_power: return "probe_power";
        case SweepParameter::coupling_power: return "coupling_power";
        case SweepParameter::density: return "density";
    }
    return "?";
}

// Side-by-side strip of the per-value probe camera images, normalised jointly.
void write_strip(const fs::path& path, const std::vector<IntensityImage>& images) {
    if (images.empty()) return;
    const GridSpec& g = images.front().grid;
    const int n = static_cast<int>(images.size());
    double peak = 0.0;
    for (const auto& img : images)
        for (double v : img.values) peak = std::max(peak, v);
    if (peak <= 0.0) peak = 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_strip: cannot open " + path.string());
    out << "P5\n" << g.nx * n << " " << g.ny << "\n65535\n";
    for (int iy = 0; iy < g.ny; ++iy)
        for (int s = 0; s < n; ++s)
            for (int ix = 0; ix < g.nx; ++ix) {
                const auto v = static_cast<std::uint16_t>(
                    std::lround(std::clamp(images[s].at(ix, iy) / peak, 0.0, 1.0) * 65535.0));
                out.put(static_cast<char>(v >> 8));
                out.put(static_cast<char>(v & 0xff));
            }
}

} // namespace

SweepResult sweep(const ScenarioConfig& config, SweepParameter parameter,
                  const std::vector<double>& values, const fs::path& out_dir) {
    if (values.empty()) throw ConfigError("sweep: need at least one value");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("sweep: values must be finite and >= 0");

    fs::create_directories(out_dir);
    SweepResult result;
    result.parameter = parameter;
    result.values = values;
    result.reports.resize(values.size());
    result.clone_ncc.resize(values.size());
    std::vector<IntensityImage> images(values.size());

    const unsigned workers =
        std::min<unsigned>(sweep_worker_cap(), static_cast<unsigned>(values.size()));
    std::mutex mx;
    std::size_t next = 0;
    std::vector<std::exception_ptr> errors;

    auto work = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mx);
                if (next >= values.size() || !errors.empty()) return;
                i = next++;
            }
            try {
                ScenarioConfig c = with_value(config, parameter, values[i], static_cast<int>(i));
                RunOptions opts;
                opts.write_artifacts = true;
                opts.out_dir = out_dir / ("value_" + std::to_string(i));
                RunResult r = run_scenario(c, opts);
                {
                    std::lock_guard<std::mutex> lock(mx);
                    result.reports[i] = std::move(r.report);
                    result.clone_ncc[i] = result.reports[i].metric("clone_ncc");
                    images[i] = std::move(r.outputs.probe_image);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mx);
                errors.push_back(std::current_exception());
                return;
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (!errors.empty()) std::rethrow_exception(errors.front());

    // Sweep table.
    result.csv_path = out_dir / "sweep.csv";
    {
        std::ofstream csv(result.csv_path);
        if (!csv) throw IoError("sweep: cannot open " + result.csv_path.string());
        csv << "index," << parameter_name(parameter)
            << ",clone_ncc,clone_polarity,coupling_ncc,transmitted_power_fraction,clone_region_power\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            const RunReport& r = result.reports[i];
            csv << i << "," << format_value(values[i]) << "," << format_value(r.metric("clone_ncc"))
                << "," << format_value(r.metric("clone_polarity")) << ","
                << format_value(r.has_metric("coupling_ncc") ? r.metric("coupling_ncc") : 0.0) << ","
                << format_value(r.metric("transmitted_power_fraction")) << ","
                << format_value(r.metric("clone_region_power")) << "\n";
        }
    }

    result.strip_path = out_dir / "camera_strip.pgm";
    write_strip(result.strip_path, images);

    // chi curves along g, G and N emitted next to the sweep data.
    const double gam = config.atom.params.gamma;
    std::vector<std::string> notes;
    auto curve_g = chi_curve(config, ChiAxis::g, 10.0 * gam, 17.4 * gam, 41, &notes);
    write_chi_curve_csv(out_dir / "chi_vs_g.csv", ChiAxis::g, curve_g, notes);
    notes.clear();
    auto curve_G = chi_curve(config, ChiAxis::G, 0.0, 29.0 * gam, 59, &notes);
    write_chi_curve_csv(out_dir / "chi_vs_G.csv", ChiAxis::G, curve_G, notes);
    notes.clear();
    auto curve_N = chi_curve(config, ChiAxis::N, 0.1e18, 2.5e18, 25, &notes);
    write_chi_curve_csv(out_dir / "chi_vs_N.csv", ChiAxis::N, curve_N, notes);

    return result;
}

std::vector<ChiCurvePoint> chi_curve(const ScenarioConfig& config, ChiAxis axis, double from,
                                     double to, int points, std::vector<std::string>* notes) {
    if (points < 2) throw ConfigError("chi_curve: need at least 2 points");
    if (!(to > from) || from < 0.0) throw ConfigError("chi_curve: need 0 <= from < to");

    const RabiAnchor anchor = probe_anchor();
    const double g_nom =
        rabi_from_power(config.beams.probe_power, config.beams.probe_diameter, anchor);
    const double g_coupling_nom =
        rabi_from_power(config.beams.coupling_power, config.beams.coupling_diameter, anchor);

    std::vector<ChiCurvePoint> curve;
    curve.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double v = from + (to - from) * i / (points - 1);
        DriveParams drives{std::complex<double>(g_nom, 0.0),
                           std::complex<double>(g_coupling_nom, 0.0)};
        double density = config.atom.density;
        switch (axis) {
            case ChiAxis::g: drives.g = v; break;
            case ChiAxis::G: drives.G = v; break;
            case ChiAxis::N: density = v; break;
        }
        if (drives.g == std::complex<double>{0.0, 0.0}) {
            if (notes) notes->push_back("skipped axis value " + format_value(v) + ": zero probe");
            continue;
        }
        const auto res =
            probe_susceptibility(config.atom.params, drives, density, config.atom.wavelength);
        curve.push_back({v, res.chi.real(), res.chi.imag()});
    }
    return curve;
}

void write_chi_curve_csv(const fs::path& path, ChiAxis axis,
                         const std::vector<ChiCurvePoint>& curve,
                         const std::vector<std::string>& notes) {
    std::ofstream out(path);
    if (!out) throw IoError("write_chi_curve_csv: cannot open " + path.string());
    const char* axis_name = axis == ChiAxis::g ? "g_rad_s" : axis == ChiAxis::G ? "G_rad_s" : "N_per_m3";
    for (const auto& n : notes) out << "# " << n << "\n";
    out << axis_name << ",re_chi,im_chi\n";
    for (const auto& p : curve)
        out << format_value(p.axis_value) << "," << format_value(p.re_chi) << ","
            << format_value(p.im_chi) << "\n";
}

void render_pgm(const fs::path& path, const IntensityImage& image) {
    double peak = 0.0;
    for (double v : image.values) peak = std::max(peak, v);
    if (peak <= 0.0) peak = 1.0;   // all-zero image renders all-zero
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("render_pgm: cannot open " + path.string());
    out << "P5\n" << image.grid.nx << " " << image.grid.ny << "\n65535\n";
    for (int iy = 0; iy < image.grid.ny; ++iy)
        for (int ix = 0; ix < image.grid.nx; ++ix) {
            const auto v = static_cast<std::uint16_t>(
                std::lround(std::clamp(image.at(ix, iy) / peak, 0.0, 1.0) * 65535.0));
            out.put(static_cast<char>(v >> 8));   // PGM 16-bit is big-endian
            out.put(static_cast<char>(v & 0xff));
        }
    if (!out) throw IoError("render_pgm: write failed for " + path.string());
}

void render_cf2d_to_pgm(const fs::path& cf2d_path, const fs::path& pgm_path) {
    const ComplexField2D field = read_cf2d(cf2d_path);
    render_pgm(pgm_path, IntensityImage::from_field(field));
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("write_metrics_csv: cannot open " + path.string());
    out << "scenario_id,metric_name,value,units\n";
    for (const auto& r : rows)
        out << r.scenario_id << "," << r.name << "," << format_value(r.value) << "," << r.units
            << "\n";
}

void write_report_json(const fs::path& path, const RunReport& report) {
    nlohmann::json j;
    j["scenario_id"] = report.scenario_id;
    j["wall_seconds"] = report.wall_seconds;
    j["metrics"] = nlohmann::json::array();
    for (const auto& m : report.metrics)
        j["metrics"].push_back({{"name", m.name}, {"value", m.value}, {"units", m.units}});
    j["artifacts"] = report.artifacts;
    j["notes"] = report.notes;
    j["warnings"] = nlohmann::json::array();
    for (const auto& w : report.warnings)
        j["warnings"].push_back(
            {{"kind", "border_energy"}, {"fraction", w.value}, {"z_m", w.z}, {"context", w.context}});
    std::ofstream out(path);
    if (!out) throw IoError("write_report_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace cptclone
