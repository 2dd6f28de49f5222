// config.hpp: run configuration: flat key=value files, overrides, validation

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "tfprobe/backaction.hpp"
#include "tfprobe/model.hpp"

namespace tfprobe::cli {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Mode { Spectrum, Sweep, EqualTime, Backaction, Certify };
enum class OutputFormat { Csv, Json };

inline std::string to_string(Mode m) {
    switch (m) {
        case Mode::Sweep: return "sweep";
        case Mode::EqualTime: return "equal-time";
        case Mode::Backaction: return "backaction";
        case Mode::Certify: return "certify";
        case Mode::Spectrum: break;
    }
    return "spectrum";
}

inline Mode parse_mode(std::string_view s) {
    if (s == "spectrum") return Mode::Spectrum;
    if (s == "sweep") return Mode::Sweep;
    if (s == "equal-time") return Mode::EqualTime;
    if (s == "backaction") return Mode::Backaction;
    if (s == "certify") return Mode::Certify;
    throw ConfigError("unknown mode '" + std::string(s) + "'");
}

/// Every field in external units: GHz / MHz / kHz for nu = omega / 2pi, mK for T.
struct RunConfig {
    Mode mode{Mode::Spectrum};

    double omega_c_ghz{12.0};
    double kappa_khz{100.0};
    double epsilon_khz{600.0};
    double j_ghz{1.0};
    double lambda_mhz{40.0};
    double n_th{0.0};

    double hx_over_2j{1.0};
    int n_sites{20};
    Boundary boundary{Boundary::Periodic};
    CouplingProfile coupling_profile{CouplingProfile::Uniform};
    int pair_i{0};  // pair_i = pair_j = 0: no pair coupling
    int pair_j{0};

    double temperature_mk{20.0};
    OccupationStatistics statistics{OccupationStatistics::FermiDirac};

    std::string sweep_param{"hx_over_2j"};
    double sweep_start{0.2};
    double sweep_stop{1.5};
    int sweep_steps{26};

    double log_floor{1e-30};
    double peak_floor{1e-8};
    int grid_points{4001};
    int grid_samples_per_width{16};
    RegimeSelection regime{RegimeSelection::General};

    // Execution-only settings; they do not change any result and are not hashed.
    std::string output{"-"};
    OutputFormat format{OutputFormat::Csv};
    int workers{1};

    bool has_pair() const { return pair_i != 0 || pair_j != 0; }
};

// ---------------------------------------------------------------------------
// Value formatting and parsing
// ---------------------------------------------------------------------------

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf.data(), end);
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError("key '" + key + "': expected a finite number, got '" + t + "'");
    return v;
}

inline int parse_int(const std::string& key, std::string_view text) {
    const std::string t = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("key '" + key + "': expected an integer, got '" + t + "'");
    return v;
}

inline std::string to_string(RegimeSelection r) {
    switch (r) {
        case RegimeSelection::Auto: return "auto";
        case RegimeSelection::WeakField: return "weak";
        case RegimeSelection::Critical: return "critical";
        case RegimeSelection::StrongField: return "strong";
        case RegimeSelection::General: break;
    }
    return "general";
}

// ---------------------------------------------------------------------------
// Key table
// ---------------------------------------------------------------------------

struct ConfigKey {
    const char* name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

namespace detail {

inline ConfigKey real_key(const char* name, double RunConfig::*field) {
    return {name, [name, field](RunConfig& c, std::string_view v) { c.*field = parse_double(name, v); },
            [field](const RunConfig& c) { return format_double(c.*field); }};
}

inline ConfigKey int_key(const char* name, int RunConfig::*field) {
    return {name, [name, field](RunConfig& c, std::string_view v) { c.*field = parse_int(name, v); },
            [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

template <typename Enum, std::size_t M>
ConfigKey enum_key(const char* name, Enum RunConfig::*field, std::array<std::pair<const char*, Enum>, M> table) {
    return {name,
            [name, field, table](RunConfig& c, std::string_view v) {
                const std::string t = trim(v);
                for (const auto& [text, value] : table)
                    if (t == text) {
                        c.*field = value;
                        return;
                    }
                std::string allowed;
                for (const auto& [text, value] : table) allowed += (allowed.empty() ? "" : "|") + std::string(text);
                throw ConfigError("key '" + std::string(name) + "': expected " + allowed + ", got '" + t + "'");
            },
            [field, table](const RunConfig& c) {
                for (const auto& [text, value] : table)
                    if (c.*field == value) return std::string(text);
                return std::string("?");
            }};
}

}  // namespace detail

/// The result-affecting keys, in canonical order.
inline const std::vector<ConfigKey>& config_keys() {
    using detail::enum_key;
    using detail::int_key;
    using detail::real_key;
    static const std::vector<ConfigKey> keys = {
        real_key("omega_c_ghz", &RunConfig::omega_c_ghz),
        real_key("kappa_khz", &RunConfig::kappa_khz),
        real_key("epsilon_khz", &RunConfig::epsilon_khz),
        real_key("j_ghz", &RunConfig::j_ghz),
        real_key("lambda_mhz", &RunConfig::lambda_mhz),
        real_key("n_th", &RunConfig::n_th),
        real_key("hx_over_2j", &RunConfig::hx_over_2j),
        int_key("n_sites", &RunConfig::n_sites),
        enum_key("boundary", &RunConfig::boundary,
                 std::array{std::pair{"periodic", Boundary::Periodic}, std::pair{"open", Boundary::Open}}),
        enum_key("coupling_profile", &RunConfig::coupling_profile,
                 std::array{std::pair{"uniform", CouplingProfile::Uniform},
                            std::pair{"sine", CouplingProfile::SineLowestEvenMode}}),
        int_key("pair_i", &RunConfig::pair_i),
        int_key("pair_j", &RunConfig::pair_j),
        real_key("temperature_mk", &RunConfig::temperature_mk),
        enum_key("statistics", &RunConfig::statistics,
                 std::array{std::pair{"fermi-dirac", OccupationStatistics::FermiDirac},
                            std::pair{"bose", OccupationStatistics::Bose}}),
        {"sweep_param", [](RunConfig& c, std::string_view v) { c.sweep_param = trim(v); },
         [](const RunConfig& c) { return c.sweep_param; }},
        real_key("sweep_start", &RunConfig::sweep_start),
        real_key("sweep_stop", &RunConfig::sweep_stop),
        int_key("sweep_steps", &RunConfig::sweep_steps),
        real_key("log_floor", &RunConfig::log_floor),
        real_key("peak_floor", &RunConfig::peak_floor),
        int_key("grid_points", &RunConfig::grid_points),
        int_key("grid_samples_per_width", &RunConfig::grid_samples_per_width),
        enum_key("regime", &RunConfig::regime,
                 std::array{std::pair{"general", RegimeSelection::General}, std::pair{"auto", RegimeSelection::Auto},
                            std::pair{"weak", RegimeSelection::WeakField},
                            std::pair{"critical", RegimeSelection::Critical},
                            std::pair{"strong", RegimeSelection::StrongField}}),
    };
    return keys;
}

inline void set_key(RunConfig& c, std::string_view key, std::string_view value) {
    const std::string k = trim(key);
    if (k == "mode") {
        c.mode = parse_mode(trim(value));
        return;
    }
    if (k == "workers") {
        c.workers = parse_int(k, value);
        return;
    }
    for (const auto& spec : config_keys())
        if (k == spec.name) {
            spec.set(c, value);
            return;
        }
    throw ConfigError("unknown configuration key '" + k + "'");
}

/// "key=value" as given on the command line.
inline void apply_override(RunConfig& c, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    set_key(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

/// Flat key=value text; '#' starts a comment, blank lines are ignored.
inline void apply_text(RunConfig& c, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        try {
            apply_override(c, line);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

/// Canonical "key=value" lines of every result-affecting key (mode first).
inline std::string canonical_text(const RunConfig& c) {
    std::string out = "mode=" + to_string(c.mode) + "\n";
    for (const auto& spec : config_keys()) out += std::string(spec.name) + "=" + spec.get(c) + "\n";
    return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const RunConfig& c) {
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << fnv1a(canonical_text(c));
    return "fnv1a64:" + s.str();
}

// ---------------------------------------------------------------------------
// Physical models
// ---------------------------------------------------------------------------

struct Models {
    UnitSystem units;
    ChainModel chain;
    ProbeModel probe;
    ThermalState state;
};

inline Models build_models(const RunConfig& c) {
    const UnitSystem units(c.j_ghz * 1e9);
    Models m{units,
             ChainModel{c.n_sites, 1.0, 2.0 * c.hx_over_2j, c.boundary, c.coupling_profile},
             ProbeModel{units.to_internal(c.omega_c_ghz * 1e9), units.to_internal(c.kappa_khz * 1e3),
                        units.to_internal(c.lambda_mhz * 1e6), units.to_internal(c.epsilon_khz * 1e3), c.n_th},
             ThermalState(c.temperature_mk * 1e-3, units, c.statistics)};
    return m;
}

inline const std::array<const char*, 3>& sweepable_keys() {
    static const std::array<const char*, 3> keys{"hx_over_2j", "temperature_mk", "lambda_mhz"};
    return keys;
}

/// Sweep point i of [start, stop) with `steps` points; values are rounded to 12 decimals
/// so decimal grids land on exact decimal values.
inline double sweep_value(const RunConfig& c, int i) {
    const double v = c.sweep_start + (c.sweep_stop - c.sweep_start) * i / c.sweep_steps;
    return std::round(v * 1e12) / 1e12;
}

inline RunConfig sweep_point(const RunConfig& c, int i) {
    RunConfig p = c;
    set_key(p, c.sweep_param, format_double(sweep_value(c, i)));
    return p;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Diagnostic {
    enum class Severity { Error, Warning } severity{Severity::Error};
    std::string code;
    std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& d) {
    for (const auto& x : d)
        if (x.severity == Diagnostic::Severity::Error) return true;
    return false;
}

/// Diagnostics for a configuration; never throws and never modifies the configuration.
inline std::vector<Diagnostic> validate(const RunConfig& c) {
    std::vector<Diagnostic> out;
    auto error = [&](std::string code, std::string msg) {
        out.push_back({Diagnostic::Severity::Error, std::move(code), std::move(msg)});
    };
    auto warning = [&](std::string code, std::string msg) {
        out.push_back({Diagnostic::Severity::Warning, std::move(code), std::move(msg)});
    };

    if (!(c.omega_c_ghz > 0.0)) error("omega_c", "omega_c_ghz must be > 0");
    if (!(c.kappa_khz > 0.0)) error("kappa", "kappa_khz must be > 0");
    if (!(c.epsilon_khz > 0.0)) error("epsilon", "epsilon_khz must be > 0");
    if (!(c.j_ghz > 0.0)) error("j", "j_ghz must be > 0");
    if (!(c.lambda_mhz >= 0.0)) error("lambda", "lambda_mhz must be >= 0");
    if (!(c.n_th >= 0.0)) error("n_th", "n_th must be >= 0");
    if (!(c.hx_over_2j >= 0.0)) error("hx", "hx_over_2j must be >= 0");
    if (c.n_sites < 2) error("n_sites", "n_sites must be >= 2");
    if (!(c.temperature_mk >= 0.0)) error("temperature", "temperature_mk must be >= 0");
    if (c.coupling_profile == CouplingProfile::SineLowestEvenMode && c.boundary != Boundary::Periodic)
        error("coupling_profile", "the sine coupling profile requires a periodic boundary");
    if (c.has_pair() && (c.pair_i < 1 || c.pair_j < 1 || c.pair_i > c.n_sites || c.pair_j > c.n_sites))
        error("pair", "pair_i and pair_j must both lie in [1, n_sites]");
    if (!(c.log_floor > 0.0)) error("log_floor", "log_floor must be > 0");
    if (c.grid_points < 2) error("grid_points", "grid_points must be >= 2");
    if (c.grid_samples_per_width < 1) error("grid_samples_per_width", "grid_samples_per_width must be >= 1");
    if (c.workers < 1) error("workers", "workers must be >= 1");
    if (c.mode == Mode::Sweep) {
        bool known = false;
        for (const char* k : sweepable_keys()) known = known || c.sweep_param == k;
        if (!known) error("sweep_param", "sweep_param must be one of hx_over_2j, temperature_mk, lambda_mhz");
        if (c.sweep_steps < 2) error("sweep_steps", "sweep_steps must be >= 2");
        if (!(c.sweep_stop > c.sweep_start)) error("sweep_range", "sweep_stop must exceed sweep_start");
    }
    if (has_errors(out)) return out;

    if (c.grid_samples_per_width < 8)
        warning("under-resolved-grid", "grid_samples_per_width < 8: peaks narrower than the grid spacing allows");
    const double j_hz = c.j_ghz * 1e9;
    if (c.lambda_mhz * 1e6 > 0.1 * j_hz)
        warning("weak-probe", "lambda exceeds J/10; the weak-probe approximation is doubtful");

    const Models m = build_models(c);
    const double band = 4.0 * m.chain.ising_coupling + 2.0 * m.chain.transverse_field;
    if (!(m.probe.omega_c > band)) {
        warning("detuning", "omega_c does not exceed 4J + 2h_x; the backaction estimates do not apply");
        if (c.mode == Mode::Backaction) error("detuning", "backaction mode requires omega_c > 4J + 2h_x");
        return out;
    }
    if (!perturbative_validity(m.probe, m.chain)) {
        const int bound = static_cast<int>(std::ceil(2.0 * (m.probe.omega_c - band) / m.probe.lambda)) - 1;
        warning("backaction-perturbative",
                "lambda N / 2 >= omega_c - (4J + 2h_x): perturbation theory fails beyond N = " +
                    std::to_string(bound));
    }
    if (m.probe.lambda > 0.0 && c.boundary == Boundary::Periodic) {
        const BackactionReport r = max_array_size(m.probe, m.chain, c.regime);
        if (c.n_sites > r.max_n)
            warning("backaction-shift", "N = " + std::to_string(c.n_sites) + " exceeds the backaction limit max_n = " +
                                            std::to_string(r.max_n) + " (" + to_string(r.regime) + " regime)");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace tfprobe::cli
