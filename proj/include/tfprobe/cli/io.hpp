// io.hpp: CSV / JSON serialization of spectra, sweeps and reports

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "tfprobe/cli/config.hpp"
#include "tfprobe/response.hpp"

namespace tfprobe::cli {

using nlohmann::ordered_json;

inline constexpr const char* kSpectrumColumns = "omega_over_J,C_total,C_bath,C_zero,C_finite,log10_C_total";

inline double clamped_log10(double v, double floor) { return std::log10(std::max(v, floor)); }

/// '#'-prefixed metadata: version, config hash, then every canonical key.
inline std::string csv_metadata(const RunConfig& c) {
    std::string out = "# tfprobe " + std::string(kVersion) + "\n";
    out += "# config_hash " + config_hash(c) + "\n";
    std::string canon = canonical_text(c);
    std::size_t pos = 0;
    while (pos < canon.size()) {
        const auto nl = canon.find('\n', pos);
        out += "# " + canon.substr(pos, nl - pos) + "\n";
        pos = nl + 1;
    }
    return out;
}

inline std::string csv_spectrum_rows(const SpectrumSeries& s, double log_floor) {
    std::string out = std::string(kSpectrumColumns) + "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_double(s.grid[i]) + "," + format_double(s.total[i]) + "," + format_double(s.bath[i]) + "," +
               format_double(s.zero_part[i]) + "," + format_double(s.finite_part[i]) + "," +
               format_double(clamped_log10(s.total[i], log_floor)) + "\n";
    }
    return out;
}

inline std::string csv_peaks(const PeakList& peaks) {
    std::string out = "# peaks\n# center_over_J,height,fwhm_over_J\n";
    for (const auto& p : peaks)
        out += "# " + format_double(p.center) + "," + format_double(p.height) + "," + format_double(p.width) + "\n";
    return out;
}

inline ordered_json json_meta(const RunConfig& c) {
    ordered_json cfg = ordered_json::object();
    cfg["mode"] = to_string(c.mode);
    for (const auto& spec : config_keys()) cfg[spec.name] = spec.get(c);
    return {{"version", kVersion}, {"config_hash", config_hash(c)}, {"config", cfg}};
}

/// JSON numbers must be finite; NaN widths and similar become null.
inline ordered_json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

inline ordered_json json_peaks(const PeakList& peaks) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : peaks)
        arr.push_back({{"center", json_number(p.center)}, {"height", json_number(p.height)}, {"width", json_number(p.width)}});
    return arr;
}

inline ordered_json json_series(const SpectrumSeries& s) {
    return {{"total", s.total}, {"bath", s.bath}, {"zero", s.zero_part}, {"finite", s.finite_part}};
}

inline std::string dump(const ordered_json& j) { return j.dump(1) + "\n"; }

/// Reads a configuration from either a flat key=value file or a JSON result file
/// (whose meta.config block holds the full configuration that produced it).
inline RunConfig load_config_text(const std::string& text, RunConfig base = {}) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        ordered_json j;
        try {
            j = ordered_json::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("malformed JSON configuration: ") + e.what());
        }
        if (!j.contains("meta") || !j["meta"].contains("config") || !j["meta"]["config"].is_object())
            throw ConfigError("JSON configuration lacks a meta.config object");
        for (const auto& [key, value] : j["meta"]["config"].items()) {
            if (key == "mode") continue;  // the subcommand decides the mode
            set_key(base, key, value.is_string() ? value.get<std::string>() : value.dump());
        }
        return base;
    }
    apply_text(base, text);
    return base;
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
    return load_config_text(read_file(path), std::move(base));
}

}  // namespace tfprobe::cli
