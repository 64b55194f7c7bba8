#include "cptclone/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cptclone {

namespace units {

double density_from_temperature(double celsius) {
    // Alcock et al. liquid-Rb correlation: log10(P/atm) = 4.857 - 4215/T.
    auto vapor_density = [](double t_kelvin) {
        const double p_atm = std::pow(10.0, 4.857 - 4215.0 / t_kelvin);
        return p_atm * 101325.0 / (1.380649e-23 * t_kelvin);
    };
    const double t = celsius + 273.15;
    const double t_anchor = density_anchor_celsius + 273.15;
    return density_anchor_per_m3 * vapor_density(t) / vapor_density(t_anchor);
}

} // namespace units

namespace {

struct RawValue {
    double number = 0.0;
    std::string unit;     // empty when unitless
    std::string text;     // raw token(s) for strings/bools
    bool numeric = false;
};

using Section = std::map<std::string, RawValue>;
using Tree = std::map<std::string, Section>;

Tree parse_tree(const std::string& text) {
    Tree tree;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("scenario line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("scenario line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("scenario line " + std::to_string(lineno) + ": empty key or value");

        RawValue rv;
        rv.text = value;
        std::istringstream vs(value);
        double num;
        if (vs >> num) {
            rv.number = num;
            rv.numeric = true;
            std::string unit;
            if (vs >> unit) rv.unit = unit;
            std::string extra;
            if (vs >> extra)
                throw ConfigError("scenario line " + std::to_string(lineno) + ": trailing tokens");
        }
        tree[section][key] = rv;
    }
    return tree;
}

class Extractor {
public:
    explicit Extractor(Tree tree) : tree_(std::move(tree)) {}

    bool has(const std::string& section, const std::string& key) const {
        auto s = tree_.find(section);
        return s != tree_.end() && s->second.count(key) > 0;
    }

    const RawValue& get(const std::string& section, const std::string& key) {
        auto s = tree_.find(section);
        if (s == tree_.end() || !s->second.count(key))
            throw ConfigError("scenario: missing " + section + "." + key);
        used_.insert(section + "." + key);
        return s->second.at(key);
    }

    double length(const std::string& sec, const std::string& key, double fallback) {
        if (!has(sec, key)) return fallback;
        const RawValue& rv = get(sec, key);
        if (!rv.numeric) throw ConfigError("scenario: " + sec + "." + key + " must be a length");
        static const std::map<std::string, double> scale = {
            {"nm", 1e-9}, {"um", 1e-6}, {"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}};
        auto it = scale.find(rv.unit);
        if (it == scale.end())
            throw ConfigError("scenario: " + sec + "." + key +
                              " needs a length unit (nm|um|mm|cm|m), got '" + rv.unit + "'");
        return rv.number * it->second;
    }

    // Frequencies come in as ordinary-frequency units and convert to rad/s;
    // "gamma" means multiples of the resolved decay rate.
    double angular(const std::string& sec, const std::string& key, double fallback,
                   double gamma_ref, bool allow_gamma = true) {
        if (!has(sec, key)) return fallback;
        const RawValue& rv = get(sec, key);
        if (!rv.numeric)
            throw ConfigError("scenario: " + sec + "." + key + " must be a frequency");
        static const std::map<std::string, double> scale = {
            {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
        if (auto it = scale.find(rv.unit); it != scale.end())
            return 2.0 * units::pi * rv.number * it->second;
        if (allow_gamma && rv.unit == "gamma") return rv.number * gamma_ref;
        throw ConfigError("scenario: " + sec + "." + key +
                          " needs a frequency unit (Hz|kHz|MHz|GHz|gamma), got '" + rv.unit + "'");
    }

    double power(const std::string& sec, const std::string& key, double fallback) {
        if (!has(sec, key)) return fallback;
        const RawValue& rv = get(sec, key);
        static const std::map<std::string, double> scale = {{"uW", 1e-6}, {"mW", 1e-3}, {"W", 1.0}};
        auto it = rv.numeric ? scale.find(rv.unit) : scale.end();
        if (it == scale.end())
            throw ConfigError("scenario: " + sec + "." + key + " needs a power unit (uW|mW|W)");
        return rv.number * it->second;
    }

    double density(const std::string& sec, const std::string& key, double fallback) {
        if (!has(sec, key)) return fallback;
        const RawValue& rv = get(sec, key);
        if (rv.numeric && rv.unit == "per_cm3") return units::per_cm3_to_per_m3(rv.number);
        if (rv.numeric && rv.unit == "per_m3") return rv.number;
        throw ConfigError("scenario: " + sec + "." + key + " needs per_cm3 or per_m3");
    }

    double dimensionless(const std::string& sec, const std::string& key, double fallback) {
        if (!has(sec, key)) return fallback;
        const RawValue& rv = get(sec, key);
        if (!rv.numeric || !rv.unit.empty())
            throw ConfigError("scenario: " + sec + "." + key + " must be a bare number");
        return rv.number;
    }

    int count(const std::string& sec, const std::string& key, int fallback) {
        const double v = dimensionless(sec, key, fallback);
        if (v != std::floor(v)) throw ConfigError("scenario: " + sec + "." + key + " must be an integer");
        return static_cast<int>(v);
    }

    bool boolean(const std::string& sec, const std::string& key, bool fallback) {
        if (!has(sec, key)) return fallback;
        const std::string& t = get(sec, key).text;
        if (t == "true") return true;
        if (t == "false") return false;
        throw ConfigError("scenario: " + sec + "." + key + " must be true or false");
    }

    std::string text(const std::string& sec, const std::string& key, const std::string& fallback) {
        if (!has(sec, key)) return fallback;
        return get(sec, key).text;
    }

    void reject_unknown() const {
        for (const auto& [sec, kv] : tree_)
            for (const auto& [key, rv] : kv)
                if (!used_.count(sec + "." + key))
                    throw ConfigError("scenario: unknown key " + sec + "." + key);
    }

private:
    Tree tree_;
    std::set<std::string> used_;
};

} // namespace

void ScenarioConfig::validate() const {
    atom.params.validate();
    if (!(geometry.gap_before_cell > 0.0 && geometry.cell_length > 0.0 &&
          geometry.gap_after_cell > 0.0))
        throw ConfigError("scenario: all geometry legs must be positive");
    if (geometry.camera_distance &&
        std::abs(*geometry.camera_distance - geometry.z0()) > 1e-9)
        throw ConfigError("scenario: camera_distance must equal gap_before + cell + gap_after");
    if (beams.probe_power < 0.0 || beams.coupling_power < 0.0)
        throw ConfigError("scenario: beam powers must be >= 0");
    if (!(beams.probe_diameter > 0.0 && beams.coupling_diameter > 0.0))
        throw ConfigError("scenario: beam diameters must be positive");
    if (atom.density < 0.0) throw ConfigError("scenario: density must be >= 0");
    if (!(atom.wavelength > 0.0)) throw ConfigError("scenario: wavelength must be positive");
    if (!(numerics.dz > 0.0) || numerics.dz > geometry.cell_length)
        throw ConfigError("scenario: need 0 < dz <= cell_length");
    if (numerics.chi_table_points < 16) throw ConfigError("scenario: chi_table_points too small");
    if (mask.kind == MaskKind::pgm_file && mask.pgm_path.empty())
        throw ConfigError("scenario: pgm_file mask needs pgm_path");
    make_grid();   // grid invariants
}

GridSpec ScenarioConfig::make_grid() const {
    GridSpec g;
    g.nx = numerics.nx;
    g.ny = numerics.ny;
    g.dx = numerics.window / numerics.nx;
    g.dy = numerics.window / numerics.ny;
    g.wavelength = atom.wavelength;
    g.validate();
    return g;
}

Mask2D ScenarioConfig::make_mask() const {
    Mask2D m;
    switch (mask.kind) {
        case MaskKind::two_slit:
            m = double_slit(make_grid(), mask.slit_width, mask.slit_separation);
            break;
        case MaskKind::glyph:
            m = glyph_mask(make_grid(), mask.glyph, mask.glyph_height, mask.glyph_stroke);
            break;
        case MaskKind::pgm_file:
            m = read_mask_pgm(mask.pgm_path, atom.wavelength);
            require_same_grid(m.grid, make_grid(), "scenario pgm mask");
            break;
    }
    if (numerics.edge_smoothing) m = smooth_mask_edges(m);
    return m;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& default_id) {
    Extractor ex(parse_tree(text));
    ScenarioConfig c;
    c.id = ex.text("scenario", "id", default_id);

    c.geometry.gap_before_cell = ex.length("geometry", "gap_before_cell", c.geometry.gap_before_cell);
    c.geometry.cell_length = ex.length("geometry", "cell_length", c.geometry.cell_length);
    c.geometry.gap_after_cell = ex.length("geometry", "gap_after_cell", c.geometry.gap_after_cell);
    if (ex.has("geometry", "camera_distance"))
        c.geometry.camera_distance = ex.length("geometry", "camera_distance", 0.0);

    c.beams.probe_power = ex.power("beams", "probe_power", c.beams.probe_power);
    c.beams.probe_diameter = ex.length("beams", "probe_diameter", c.beams.probe_diameter);
    c.beams.coupling_power = ex.power("beams", "coupling_power", c.beams.coupling_power);
    c.beams.coupling_diameter = ex.length("beams", "coupling_diameter", c.beams.coupling_diameter);

    // gamma first: it anchors any later "gamma"-suffixed values.
    c.atom.params.gamma =
        ex.angular("atom", "gamma", c.atom.params.gamma, 0.0, /*allow_gamma=*/false);
    const double gam = c.atom.params.gamma;
    c.atom.params.gamma_12 = ex.angular("atom", "gamma_12", c.atom.params.gamma_12, gam);
    c.atom.params.delta_1 = ex.angular("atom", "delta_1", c.atom.params.delta_1, gam);
    c.atom.params.delta_2 = ex.angular("atom", "delta_2", c.atom.params.delta_2, gam);
    c.atom.params.branch_1 = ex.dimensionless("atom", "branch_1", c.atom.params.branch_1);
    c.atom.params.branch_2 = ex.dimensionless("atom", "branch_2", c.atom.params.branch_2);
    if (ex.has("atom", "temperature")) {
        const RawValue& rv = ex.get("atom", "temperature");
        if (!rv.numeric || rv.unit != "C")
            throw ConfigError("scenario: atom.temperature needs unit C");
        c.atom.density = units::density_from_temperature(rv.number);
    }
    c.atom.density = ex.density("atom", "density", c.atom.density);
    c.atom.wavelength = ex.length("atom", "wavelength", c.atom.wavelength);

    const std::string kind = ex.text("mask", "kind", "two_slit");
    if (kind == "two_slit") c.mask.kind = ScenarioConfig::MaskKind::two_slit;
    else if (kind == "glyph") c.mask.kind = ScenarioConfig::MaskKind::glyph;
    else if (kind == "pgm_file") c.mask.kind = ScenarioConfig::MaskKind::pgm_file;
    else throw ConfigError("scenario: mask.kind must be two_slit|glyph|pgm_file");
    c.mask.slit_width = ex.length("mask", "slit_width", c.mask.slit_width);
    c.mask.slit_separation = ex.length("mask", "slit_separation", c.mask.slit_separation);
    const std::string glyph = ex.text("mask", "glyph", "U");
    if (glyph == "U") c.mask.glyph = Glyph::U;
    else if (glyph == "O") c.mask.glyph = Glyph::O;
    else throw ConfigError("scenario: mask.glyph must be U or O");
    c.mask.glyph_height = ex.length("mask", "glyph_height", c.mask.glyph_height);
    c.mask.glyph_stroke = ex.length("mask", "glyph_stroke", c.mask.glyph_stroke);
    c.mask.pgm_path = ex.text("mask", "pgm_path", "");

    c.numerics.nx = ex.count("numerics", "nx", c.numerics.nx);
    c.numerics.ny = ex.count("numerics", "ny", c.numerics.ny);
    c.numerics.window = ex.length("numerics", "window", c.numerics.window);
    c.numerics.dz = ex.length("numerics", "dz", c.numerics.dz);
    c.numerics.chi_table_points = ex.count("numerics", "chi_table_points", c.numerics.chi_table_points);
    c.numerics.edge_smoothing = ex.boolean("numerics", "edge_smoothing", c.numerics.edge_smoothing);
    c.numerics.border_guard = ex.dimensionless("numerics", "border_guard", c.numerics.border_guard);

    c.outputs.directory = ex.text("outputs", "directory", c.outputs.directory);
    c.outputs.dump_fields = ex.boolean("outputs", "dump_fields", c.outputs.dump_fields);

    ex.reject_unknown();
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_scenario: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.stem().string());
}

std::string serialize_scenario(const ScenarioConfig& c) {
    std::ostringstream out;
    out.precision(17);
    const double gam = c.atom.params.gamma;
    out << "[scenario]\nid = " << c.id << "\n\n";
    out << "[geometry]\n";
    out << "gap_before_cell = " << c.geometry.gap_before_cell * 1e3 << " mm\n";
    out << "cell_length = " << c.geometry.cell_length * 1e3 << " mm\n";
    out << "gap_after_cell = " << c.geometry.gap_after_cell * 1e3 << " mm\n\n";
    out << "[beams]\n";
    out << "probe_power = " << c.beams.probe_power * 1e3 << " mW\n";
    out << "probe_diameter = " << c.beams.probe_diameter * 1e3 << " mm\n";
    out << "coupling_power = " << c.beams.coupling_power * 1e3 << " mW\n";
    out << "coupling_diameter = " << c.beams.coupling_diameter * 1e3 << " mm\n\n";
    out << "[atom]\n";
    out << "gamma = " << units::angular_to_mhz(gam) << " MHz\n";
    out << "gamma_12 = " << c.atom.params.gamma_12 / gam << " gamma\n";
    out << "delta_1 = " << units::angular_to_mhz(c.atom.params.delta_1) << " MHz\n";
    out << "delta_2 = " << units::angular_to_mhz(c.atom.params.delta_2) << " MHz\n";
    out << "branch_1 = " << c.atom.params.branch_1 << "\n";
    out << "branch_2 = " << c.atom.params.branch_2 << "\n";
    out << "density = " << units::per_m3_to_per_cm3(c.atom.density) << " per_cm3\n";
    out << "wavelength = " << c.atom.wavelength * 1e9 << " nm\n\n";
    out << "[mask]\n";
    switch (c.mask.kind) {
        case ScenarioConfig::MaskKind::two_slit:
            out << "kind = two_slit\n";
            out << "slit_width = " << c.mask.slit_width * 1e6 << " um\n";
            out << "slit_separation = " << c.mask.slit_separation * 1e6 << " um\n";
            break;
        case ScenarioConfig::MaskKind::glyph:
            out << "kind = glyph\n";
            out << "glyph = " << (c.mask.glyph == Glyph::U ? "U" : "O") << "\n";
            out << "glyph_height = " << c.mask.glyph_height * 1e3 << " mm\n";
            out << "glyph_stroke = " << c.mask.glyph_stroke * 1e3 << " mm\n";
            break;
        case ScenarioConfig::MaskKind::pgm_file:
            out << "kind = pgm_file\n";
            out << "pgm_path = " << c.mask.pgm_path << "\n";
            break;
    }
    out << "\n[numerics]\n";
    out << "nx = " << c.numerics.nx << "\n";
    out << "ny = " << c.numerics.ny << "\n";
    out << "window = " << c.numerics.window * 1e3 << " mm\n";
    out << "dz = " << c.numerics.dz * 1e3 << " mm\n";
    out << "chi_table_points = " << c.numerics.chi_table_points << "\n";
    out << "edge_smoothing = " << (c.numerics.edge_smoothing ? "true" : "false") << "\n";
    out << "border_guard = " << c.numerics.border_guard << "\n\n";
    out << "[outputs]\n";
    out << "directory = " << c.outputs.directory << "\n";
    out << "dump_fields = " << (c.outputs.dump_fields ? "true" : "false") << "\n";
    return out.str();
}

} // namespace cptclone
