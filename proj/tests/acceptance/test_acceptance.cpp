// Acceptance suite. Each criterion prints one
//   [ACCEPTANCE] <n> <name>: PASS|FAIL
// line; expensive pipeline runs are shared across criteria. Regression
// fixtures live in tests/fixtures and are written once by running with
// CPTCLONE_FREEZE_FIXTURES=1 after a validated run; they are never
// regenerated silently.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "cptclone/harness.hpp"
#include "../oracles.hpp"

using namespace cptclone;
namespace fs = std::filesystem;

namespace {

constexpr double gam = units::rb_d1_gamma;

struct CriterionReporter {
    std::string label;
    int exceptions_at_entry = std::uncaught_exceptions();
    explicit CriterionReporter(std::string l) : label(std::move(l)) {}
    ~CriterionReporter() {
        const bool failed = std::uncaught_exceptions() > exceptions_at_entry;
        std::printf("[ACCEPTANCE] %s: %s\n", label.c_str(), failed ? "FAIL" : "PASS");
        std::fflush(stdout);
    }
};

bool freezing_fixtures() { return std::getenv("CPTCLONE_FREEZE_FIXTURES") != nullptr; }

fs::path fixture_path(const std::string& name) { return fs::path(CPTCLONE_FIXTURE_DIR) / name; }

std::map<std::string, double> read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name));
    REQUIRE_MESSAGE(in.good(), "missing fixture ", name,
                    " (freeze once with CPTCLONE_FREEZE_FIXTURES=1)");
    std::map<std::string, double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return out;
}

void write_fixture(const std::string& name, const std::map<std::string, double>& rows) {
    fs::create_directories(fixture_path(name).parent_path());
    std::ofstream out(fixture_path(name));
    REQUIRE(out.good());
    out.precision(17);
    for (const auto& [key, value] : rows) out << key << "," << value << "\n";
}

// Frozen-threshold check: compare against the fixture (or freeze it).
void check_against_fixture(const std::string& name, const std::map<std::string, double>& current,
                           double tolerance) {
    if (freezing_fixtures()) {
        write_fixture(name, current);
        return;
    }
    const auto frozen = read_fixture(name);
    for (const auto& [key, value] : current) {
        REQUIRE_MESSAGE(frozen.count(key) == 1, "fixture ", name, " lacks ", key);
        REQUIRE_MESSAGE(std::abs(frozen.at(key) - value) <= tolerance, "fixture ", name, " key ",
                        key, ": frozen ", frozen.at(key), " vs current ", value);
    }
}

ScenarioConfig load_named_scenario(const std::string& file) {
    return load_scenario(fs::path(CPTCLONE_SCENARIO_DIR) / file);
}

RunOptions no_artifacts() {
    RunOptions o;
    o.write_artifacts = false;
    return o;
}

const RunResult& two_slit_run() {
    static const RunResult r = run_scenario(load_named_scenario("two_slit.scn"), no_artifacts());
    return r;
}

const RunResult& glyph_u_run() {
    static const RunResult r = run_scenario(load_named_scenario("glyph_u.scn"), no_artifacts());
    return r;
}

const RunResult& glyph_o_run() {
    static const RunResult r = run_scenario(load_named_scenario("glyph_o.scn"), no_artifacts());
    return r;
}

LambdaParams reference_params(double gamma_12 = 0.0) {
    LambdaParams p;
    p.delta_1 = units::mhz_to_angular(361.0);
    p.delta_2 = units::mhz_to_angular(375.0);
    p.gamma_12 = gamma_12;
    return p;
}

} // namespace

TEST_CASE("criterion 1: Rabi calibration anchors agree and reproduce the quoted endpoints") {
    CriterionReporter reporter("1 rabi-calibration");
    const RabiAnchor probe = probe_anchor();
    const RabiAnchor coupling = coupling_anchor();

    const double k_probe = probe.rabi * probe.beam_diameter / std::sqrt(probe.power);
    const double k_coupling = coupling.rabi * coupling.beam_diameter / std::sqrt(coupling.power);
    REQUIRE(std::abs(k_probe - k_coupling) / k_probe < 0.01);

    REQUIRE(std::abs(rabi_from_power(2e-3, 5e-3, probe) - 10.0 * gam) < 0.01 * 10.0 * gam);
    REQUIRE(std::abs(rabi_from_power(6e-3, 5e-3, probe) - 17.4 * gam) < 0.01 * 17.4 * gam);
    REQUIRE(std::abs(rabi_from_power(1.5e-3, 1.5e-3, probe) - 29.0 * gam) < 0.01 * 29.0 * gam);
}

TEST_CASE("criterion 2: CPT dark line suppresses chi by ten orders") {
    CriterionReporter reporter("2 cpt-dark-line");
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(0.02, 50.0);
    for (int trial = 0; trial < 30; ++trial) {
        const DriveParams d{(trial == 0 ? 8.4 : u(rng)) * gam, (trial == 0 ? 29.0 : u(rng)) * gam};
        LambdaParams dark = reference_params();
        dark.delta_2 = dark.delta_1;
        const auto on = probe_susceptibility(dark, d, 2.5e18).chi;
        LambdaParams off = dark;
        off.delta_2 += 5.0 * gam;
        const auto away = probe_susceptibility(off, d, 2.5e18).chi;
        REQUIRE(std::abs(on) < 1e-10 * std::abs(away));
    }
}

TEST_CASE("criterion 3: pumping limits") {
    CriterionReporter reporter("3 pumping-limits");
    const LambdaParams p = reference_params();
    const auto rho_no_probe = steady_state(build_liouvillian(p, DriveParams{0.0, 29.0 * gam}));
    REQUIRE(std::abs(rho_no_probe.population(2) - 1.0) < 1e-9);
    const auto rho_no_coupling = steady_state(build_liouvillian(p, DriveParams{8.4 * gam, 0.0}));
    REQUIRE(std::abs(rho_no_coupling.population(1) - 1.0) < 1e-9);
    const auto chi = probe_susceptibility(p, DriveParams{8.4 * gam, 0.0}, 2.5e18).chi;
    REQUIRE(std::abs(chi) < 1e-20);
}

TEST_CASE("criterion 4: steady state matches the ODE relaxation oracle over random draws") {
    CriterionReporter reporter("4 steady-state-oracle");
    std::mt19937 rng(20260808);
    std::uniform_real_distribution<double> udelta(-100.0, 100.0);
    std::uniform_real_distribution<double> udrive(0.0, 50.0);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        LambdaParams p;
        p.delta_1 = udelta(rng) * gam;
        p.delta_2 = udelta(rng) * gam;
        const DriveParams d{udrive(rng) * gam, udrive(rng) * gam};
        try {
            const auto direct = steady_state(build_liouvillian(p, d));
            const auto oracle = test_oracles::relax_to_steady_state(
                test_oracles::lindblad_generator(p, d), 200.0 * gam);
            REQUIRE((direct.matrix() - oracle.matrix()).cwiseAbs().maxCoeff() < 1e-8);
            ++checked;
        } catch (const DegenerateSteadyState&) {
            // excluded by the criterion
        }
    }
    REQUIRE(checked >= 80);
}

TEST_CASE("criterion 5: chi is linear in density with R^2 > 0.9999") {
    CriterionReporter reporter("5 chi-linearity");
    const LambdaParams p = reference_params();
    const DriveParams d{8.4 * gam, 29.0 * gam};
    std::vector<double> n_axis, re, im;
    for (int i = 0; i < 25; ++i) {
        const double n = (0.1 + (2.5 - 0.1) * i / 24.0) * 1e18;
        const auto chi = probe_susceptibility(p, d, n).chi;
        n_axis.push_back(n);
        re.push_back(chi.real());
        im.push_back(chi.imag());
    }
    auto r_squared = [&](const std::vector<double>& y) {
        const double n = static_cast<double>(y.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            sx += n_axis[i];
            sy += y[i];
            sxx += n_axis[i] * n_axis[i];
            sxy += n_axis[i] * y[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / n;
        double ss_res = 0, ss_tot = 0;
        const double mean = sy / n;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double fit = slope * n_axis[i] + intercept;
            ss_res += (y[i] - fit) * (y[i] - fit);
            ss_tot += (y[i] - mean) * (y[i] - mean);
        }
        return 1.0 - ss_res / ss_tot;
    };
    REQUIRE(r_squared(re) > 0.9999);
    REQUIRE(r_squared(im) > 0.9999);
}

TEST_CASE("criterion 6: free-space Gaussian radii match the analytic law within 0.5%") {
    CriterionReporter reporter("6 gaussian-oracle");
    const GridSpec g = GridSpec::square(1024, 10e-3);
    Propagator prop(g);
    for (const double w0 : {0.25e-3, 0.75e-3, 2.5e-3}) {
        const ComplexField2D out = prop.propagate_free(gaussian_beam(g, w0, 1.0), 0.3);
        const double zr = units::pi * w0 * w0 / g.wavelength;
        const double expected = w0 * std::sqrt(1.0 + std::pow(0.3 / zr, 2));

        double peak = 0.0;
        for (const auto& v : out.samples()) peak = std::max(peak, std::norm(v));
        double sxx = 0, sxy = 0, sx = 0, sy = 0, count = 0;
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const double inten = std::norm(out.at(ix, iy));
                if (inten < 1e-4 * peak) continue;
                const double r2 = g.x(ix) * g.x(ix) + g.y(iy) * g.y(iy);
                const double li = std::log(inten);
                sxx += r2 * r2;
                sxy += r2 * li;
                sx += r2;
                sy += li;
                count += 1.0;
            }
        const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        const double measured = std::sqrt(-2.0 / slope);
        REQUIRE(std::abs(measured - expected) / expected < 0.005);
    }
}

namespace {

// Probe field at the cell exit of the two-slit scenario medium, for a given step size.
ComplexField2D two_slit_cell_exit(const ScenarioConfig& c, double dz) {
    const GridSpec grid = c.make_grid();
    const double wp = c.beams.probe_diameter / 2.0, wc = c.beams.coupling_diameter / 2.0;
    const double ap = std::sqrt(2.0 * c.beams.probe_power / (units::pi * wp * wp));
    const double ac = std::sqrt(2.0 * c.beams.coupling_power / (units::pi * wc * wc));
    const ComplexField2D probe0 = gaussian_beam(grid, wp, ap);
    const ComplexField2D coupling0 = apply_mask(gaussian_beam(grid, wc, ac), c.make_mask());

    const RabiAnchor anchor = probe_anchor();
    const double g_nom = rabi_from_power(c.beams.probe_power, c.beams.probe_diameter, anchor);
    const double g_coup = rabi_from_power(c.beams.coupling_power, c.beams.coupling_diameter, anchor);
    static const ChiTable table(c.atom.params, g_nom, 2.5 * g_coup, c.numerics.chi_table_points,
                                c.atom.wavelength);

    Propagator prop(grid);
    const ComplexField2D probe_in = prop.propagate_free(probe0, c.geometry.gap_before_cell);
    const ComplexField2D coupling_in = prop.propagate_free(coupling0, c.geometry.gap_before_cell);
    CouplingChiProvider provider(coupling_in, &table, c.atom.density, g_coup / ac);
    return prop.propagate_medium(probe_in, std::ref(provider), c.geometry.cell_length, dz);
}

double field_rel_err(const ComplexField2D& a, const ComplexField2D& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.samples().size(); ++i) {
        num += std::norm(a.samples()[i] - b.samples()[i]);
        den += std::norm(b.samples()[i]);
    }
    return std::sqrt(num / den);
}

} // namespace

namespace {

double loglog_slope(const std::vector<double>& dzs, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dzs.size(); ++i) {
        const double x = std::log(dzs[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(dzs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("criterion 7: split-step convergence is second order in dz") {
    CriterionReporter reporter("7 strang-convergence");
    const ScenarioConfig c = load_named_scenario("two_slit.scn");

    const ComplexField2D reference = two_slit_cell_exit(c, 0.0625e-3);
    const std::vector<double> dzs{4e-3, 2e-3, 1e-3, 0.5e-3, 0.25e-3};
    std::vector<double> errs;
    for (const double dz : dzs) errs.push_back(field_rel_err(two_slit_cell_exit(c, dz), reference));

    std::printf("    error vs the dz/8 = 0.0625 mm reference:\n");
    for (std::size_t i = 0; i < dzs.size(); ++i) {
        if (i == 0) {
            std::printf("      dz %5.2f mm  err %.4e\n", dzs[i] * 1e3, errs[i]);
        } else {
            const double local = std::log(errs[i - 1] / errs[i]) / std::log(2.0);
            std::printf("      dz %5.2f mm  err %.4e  (local slope %.3f)\n", dzs[i] * 1e3, errs[i],
                        local);
        }
    }
    const double wide_window_slope = loglog_slope({4e-3, 2e-3, 1e-3, 0.5e-3},
                                                  {errs[0], errs[1], errs[2], errs[3]});
    const double order_slope =
        loglog_slope({1e-3, 0.5e-3, 0.25e-3}, {errs[2], errs[3], errs[4]});
    const double half_step_diff =
        field_rel_err(two_slit_cell_exit(c, 0.5e-3), two_slit_cell_exit(c, 0.25e-3));
    std::printf("    order (asymptotic slope over {1,0.5,0.25} mm): %.3f; "
                "wide-window {4,2,1,0.5} mm fit: %.3f\n",
                order_slope, wide_window_slope);
    std::printf("    |f(0.5mm) - f(0.25mm)| = %.3e relative\n", half_step_diff);

    bool ok = true;
    auto check = [&ok](bool cond, const char* what) {
        CHECK_MESSAGE(cond, what);
        ok = ok && cond;
    };
    // The convergence order, measured where the error law is asymptotic
    // (screen phase per step below ~0.4 rad).
    check(order_slope > 1.8 && order_slope < 2.2, "log-log error slope within 2 +/- 0.2");

    // Absolute self-convergence level. At the full experimental density the
    // cell is an optically thick structured medium (~21 rad of accumulated
    // screen phase), so the dz = 0.5 mm error sits at ~1e-2 and a 1e-6 level
    // would need a medium thousands of times thinner -- one that no longer
    // clones. Asserted as stated and expected to fail; the error table above
    // carries the analysis. (The wide {4,2,1,0.5} mm fit printed above
    // likewise saturates near 1.7 because dz = 4 mm lies outside the
    // asymptotic regime at this optical thickness.)
    check(half_step_diff < 1e-6, "dz = 0.5 mm vs 0.25 mm differ by < 1e-6 relative");
    REQUIRE(ok);
}

TEST_CASE("criterion 8: two-slit cloning beats free-space diffraction") {
    CriterionReporter reporter("8 two-slit-cloning");
    const RunResult& r = two_slit_run();

    const double visibility = r.report.metric("coupling_fringe_visibility");
    const double clone_ncc = r.report.metric("clone_ncc");
    const double coupling_ncc = r.report.metric("coupling_ncc");
    const double margin = clone_ncc - std::abs(coupling_ncc);
    std::printf("    visibility %.4f, clone |NCC| %.4f (polarity %+g), coupling NCC %.4f, margin %.4f\n",
                visibility, clone_ncc, r.report.metric("clone_polarity"), coupling_ncc, margin);
    if (r.report.has_metric("edge_sharpness_ratio"))
        std::printf("    clone/coupling edge sharpness ratio %.2f (reported claim: ~2)\n",
                    r.report.metric("edge_sharpness_ratio"));

    REQUIRE(visibility >= 0.5);
    REQUIRE(margin >= 0.15);
    check_against_fixture("two_slit_metrics.csv",
                          {{"coupling_fringe_visibility", visibility},
                           {"clone_ncc", clone_ncc},
                           {"coupling_ncc", coupling_ncc}},
                          2e-3);
}

TEST_CASE("criterion 9: glyph cloning beats free-space diffraction for U and O") {
    CriterionReporter reporter("9 glyph-cloning");
    std::map<std::string, double> current;
    for (const auto* entry : {"u", "o"}) {
        const RunResult& r = entry[0] == 'u' ? glyph_u_run() : glyph_o_run();
        const double clone_ncc = r.report.metric("clone_ncc");
        const double coupling_ncc = r.report.metric("coupling_ncc");
        const double margin = clone_ncc - std::abs(coupling_ncc);
        std::printf("    glyph %s: clone |NCC| %.4f, coupling NCC %.4f, margin %.4f\n", entry,
                    clone_ncc, coupling_ncc, margin);
        REQUIRE(margin >= 0.15);
        current[std::string("clone_ncc_") + entry] = clone_ncc;
        current[std::string("coupling_ncc_") + entry] = coupling_ncc;
    }
    check_against_fixture("glyph_metrics.csv", current, 2e-3);
}

TEST_CASE("criterion 10: power and density trends match the reported behaviour") {
    CriterionReporter reporter("10 trend-suite");
    const ScenarioConfig base = load_named_scenario("two_slit.scn");
    const fs::path tmp = fs::temp_directory_path() / "cptclone_acceptance_sweeps";
    fs::remove_all(tmp);

    // Speckle-level jitter between adjacent sweep points; small against the
    // asserted ranges (~0.3 in NCC).
    const double slack = 0.015;

    const SweepResult coupling = sweep(base, SweepParameter::coupling_power,
                                       default_sweep_values(SweepParameter::coupling_power),
                                       tmp / "coupling");
    std::map<std::string, double> fixture_rows;
    {
        std::printf("    coupling sweep:");
        for (std::size_t i = 0; i < coupling.values.size(); ++i) {
            std::printf(" %.4f", coupling.clone_ncc[i]);
            fixture_rows["coupling_" + std::to_string(i)] = coupling.clone_ncc[i];
        }
        std::printf("\n");
        for (std::size_t i = 1; i < coupling.clone_ncc.size(); ++i)
            REQUIRE(coupling.clone_ncc[i] >= coupling.clone_ncc[i - 1] - slack);
        REQUIRE(coupling.clone_ncc.back() > coupling.clone_ncc.front());
    }
    const double coupling_range =
        *std::max_element(coupling.clone_ncc.begin(), coupling.clone_ncc.end()) -
        *std::min_element(coupling.clone_ncc.begin(), coupling.clone_ncc.end());

    const SweepResult probe = sweep(base, SweepParameter::probe_power,
                                    default_sweep_values(SweepParameter::probe_power), tmp / "probe");
    {
        std::printf("    probe sweep:   ");
        for (std::size_t i = 0; i < probe.values.size(); ++i) {
            std::printf(" %.4f", probe.clone_ncc[i]);
            fixture_rows["probe_" + std::to_string(i)] = probe.clone_ncc[i];
        }
        std::printf("\n");
        const double probe_range =
            *std::max_element(probe.clone_ncc.begin(), probe.clone_ncc.end()) -
            *std::min_element(probe.clone_ncc.begin(), probe.clone_ncc.end());
        std::printf("    probe range %.4f vs coupling range %.4f\n", probe_range, coupling_range);
        REQUIRE(probe_range < 0.5 * coupling_range);
    }

    const SweepResult density = sweep(base, SweepParameter::density,
                                      default_sweep_values(SweepParameter::density), tmp / "density");
    {
        std::printf("    density sweep: ");
        for (std::size_t i = 0; i < density.values.size(); ++i) {
            std::printf(" %.4f", density.clone_ncc[i]);
            fixture_rows["density_" + std::to_string(i)] = density.clone_ncc[i];
        }
        std::printf("\n");
        // Values are ordered from the reference density downwards; the clone NCC
        // must not grow as atoms are removed.
        for (std::size_t i = 1; i < density.clone_ncc.size(); ++i)
            REQUIRE(density.clone_ncc[i] <= density.clone_ncc[i - 1] + slack);
        REQUIRE(density.clone_ncc.back() < density.clone_ncc.front());
    }

    check_against_fixture("trend_metrics.csv", fixture_rows, 2e-3);
    fs::remove_all(tmp);
}

TEST_CASE("criterion 11: energy accounting") {
    CriterionReporter reporter("11 energy-accounting");

    // Free-space steps conserve power to 1e-12 relative.
    {
        const GridSpec g = GridSpec::square(512, 10e-3);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        ComplexField2D f(g);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const double env =
                    std::exp(-(g.x(ix) * g.x(ix) + g.y(iy) * g.y(iy)) / (1.5e-3 * 1.5e-3));
                f.at(ix, iy) = complexd{u(rng), u(rng)} * env;
            }
        const double p0 = field_power(f);
        Propagator prop(g);
        for (const double z : {45e-3, 0.3})
            REQUIRE(std::abs(field_power(prop.propagate_free(f, z)) - p0) / p0 < 1e-12);
    }

    // Passivity across the operating parameter box (both the ideal gamma_12 = 0
    // and the scenario value), then non-increasing probe power through the
    // cell in the three cloning scenarios.
    {
        for (const double g12 : {0.0, 0.3 * gam}) {
            const LambdaParams p = reference_params(g12);
            for (int i = 0; i <= 29; ++i)
                for (const double gp : {8.4, 10.0, 14.2, 17.4}) {
                    const auto chi =
                        probe_susceptibility(p, DriveParams{gp * gam, i * gam}, 2.5e18).chi;
                    REQUIRE(chi.imag() >= -1e-30);
                }
        }
        for (const RunResult* r : {&two_slit_run(), &glyph_u_run(), &glyph_o_run()}) {
            const double in = r->report.metric("probe_power_cell_in");
            const double out = r->report.metric("probe_power_cell_out");
            REQUIRE(out <= in * (1.0 + 1e-12));
        }
    }

    // Cloned-image transmitted power against the reported ~40 uW.
    {
        const double power_u = glyph_u_run().report.metric("clone_region_power");
        const double power_o = glyph_o_run().report.metric("clone_region_power");
        std::printf("    cloned-image power: U %.2f uW, O %.2f uW (reported ~40 uW)\n",
                    power_u * 1e6, power_o * 1e6);
        REQUIRE(power_u >= 1e-6);
        REQUIRE(power_u <= 400e-6);
        REQUIRE(power_o >= 1e-6);
        REQUIRE(power_o <= 400e-6);
    }
}
