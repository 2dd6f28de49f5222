// run.hpp: executes a RunConfig: spectra, sweeps, equal-time values, backaction reports, certification

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tfprobe/backaction.hpp"
#include "tfprobe/cli/config.hpp"
#include "tfprobe/cli/io.hpp"
#include "tfprobe/oracle.hpp"
#include "tfprobe/response.hpp"
#include "tfprobe/spectral_density.hpp"

namespace tfprobe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitResourceGuard = 3;
inline constexpr int kExitCertification = 4;

// Closed-form spectra are cheap per line but the line count grows as N (periodic) or N^2 (open, pair).
inline constexpr int kMaxPeriodicSites = 4096;
inline constexpr int kMaxQuadraticSites = 512;
inline constexpr int kMaxCertifySites = 6;
inline constexpr double kCertifyTolerance = 1e-6;

inline void check_spectrum_size(const RunConfig& c) {
    const bool quadratic = c.boundary == Boundary::Open || c.has_pair();
    const int limit = quadratic ? kMaxQuadraticSites : kMaxPeriodicSites;
    if (c.n_sites > limit)
        throw ResourceGuardError("n_sites = " + std::to_string(c.n_sites) + " exceeds the limit of " +
                                 std::to_string(limit) + " for this scenario");
}

inline SpectralDensity configured_density(const RunConfig& c, const Models& m) {
    if (c.has_pair()) return density_pair(m.chain, m.state, c.pair_i, c.pair_j);
    return density_for(m.chain, m.state);
}

inline GridOptions grid_options(const RunConfig& c) {
    GridOptions g;
    g.base_points = c.grid_points;
    g.samples_per_width = c.grid_samples_per_width;
    return g;
}

struct SpectrumResult {
    SpectrumSeries series;
    PeakList peaks;           // maxima of C_total
    PeakList finite_peaks;    // maxima of C_finite (the C_nz lines)
};

inline SpectrumResult compute_spectrum(const RunConfig& c) {
    check_spectrum_size(c);
    const Models m = build_models(c);
    const SpectralDensity d = configured_density(c, m);
    SpectrumResult r;
    r.series = spectrum_from_density(m.probe, d, make_frequency_grid(m.probe, m.chain, d, grid_options(c)));
    r.peaks = extract_peaks(r.series, c.peak_floor, m.probe.epsilon, SeriesPart::Total);
    r.finite_peaks = extract_peaks(r.series, c.peak_floor, m.probe.epsilon, SeriesPart::Finite);
    return r;
}

inline std::string render_spectrum(const RunConfig& c) {
    const SpectrumResult r = compute_spectrum(c);
    if (c.format == OutputFormat::Json) {
        ordered_json j = {{"meta", json_meta(c)},
                          {"grid", r.series.grid},
                          {"series", json_series(r.series)},
                          {"peaks", json_peaks(r.peaks)}};
        return dump(j);
    }
    return csv_metadata(c) + csv_peaks(r.peaks) + csv_spectrum_rows(r.series, c.log_floor);
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

/// Runs task(i) for i in [0, count) on up to `workers` threads. Results are written by
/// index, so the caller sees them in sweep order whatever the completion order.
inline void parallel_for(int count, int workers, const std::function<void(int)>& task) {
    workers = std::max(1, std::min(workers, count));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct SweepPoint {
    double value{0.0};
    SpectrumResult result;
    double min_positive_peak{std::numeric_limits<double>::quiet_NaN()};
    int positive_peaks{0};
};

inline std::vector<SweepPoint> compute_sweep(const RunConfig& c) {
    std::vector<SweepPoint> points(static_cast<std::size_t>(c.sweep_steps));
    parallel_for(c.sweep_steps, c.workers, [&](int i) {
        SweepPoint& p = points[static_cast<std::size_t>(i)];
        p.value = sweep_value(c, i);
        p.result = compute_spectrum(sweep_point(c, i));
        for (const auto& pk : p.result.finite_peaks) {
            if (!(pk.center > 0.0)) continue;
            ++p.positive_peaks;
            if (std::isnan(p.min_positive_peak) || pk.center < p.min_positive_peak) p.min_positive_peak = pk.center;
        }
    });
    return points;
}

inline std::string render_sweep(const RunConfig& c) {
    const std::vector<SweepPoint> points = compute_sweep(c);
    if (c.format == OutputFormat::Json) {
        ordered_json blocks = ordered_json::array(), summary = ordered_json::array();
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            blocks.push_back({{"index", i},
                              {"value", p.value},
                              {"grid", p.result.series.grid},
                              {"series", json_series(p.result.series)},
                              {"peaks", json_peaks(p.result.peaks)}});
            summary.push_back({{"index", i},
                               {"value", p.value},
                               {"positive_peaks", p.positive_peaks},
                               {"min_positive_peak", json_number(p.min_positive_peak)}});
        }
        return dump({{"meta", json_meta(c)}, {"points", blocks}, {"peaks_summary", summary}});
    }
    std::string out = csv_metadata(c);
    for (std::size_t i = 0; i < points.size(); ++i) {
        out += "# sweep_index " + std::to_string(i) + "\n# " + c.sweep_param + " " + format_double(points[i].value) + "\n";
        out += csv_spectrum_rows(points[i].result.series, c.log_floor);
    }
    out += "# peaks summary\nsweep_index," + c.sweep_param + ",positive_peaks,min_positive_peak_over_J\n";
    for (std::size_t i = 0; i < points.size(); ++i)
        out += std::to_string(i) + "," + format_double(points[i].value) + "," +
               std::to_string(points[i].positive_peaks) + "," + format_double(points[i].min_positive_peak) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Equal-time and backaction
// ---------------------------------------------------------------------------

inline std::string render_equal_time(const RunConfig& c) {
    check_spectrum_size(c);
    const Models m = build_models(c);
    std::optional<std::pair<int, int>> pair;
    if (c.has_pair()) pair = std::pair{c.pair_i, c.pair_j};
    const EqualTimeResult r = equal_time_spectrum(m.probe, m.chain, m.state, pair);
    if (c.format == OutputFormat::Json)
        return dump({{"meta", json_meta(c)},
                     {"equal_time", {{"C_t0", r.value}, {"QQ", r.qq}, {"scale_warning", r.scale_warning}}}});
    return csv_metadata(c) + "quantity,value\nC_t0," + format_double(r.value) + "\nQQ," + format_double(r.qq) +
           "\nscale_warning," + (r.scale_warning ? "1" : "0") + "\n";
}

inline std::string render_backaction(const RunConfig& c) {
    const Models m = build_models(c);
    const BackactionReport r = max_array_size(m.probe, m.chain, c.regime);
    const std::vector<std::pair<std::string, std::string>> rows = {
        {"regime", to_string(r.regime)},
        {"photon_bound", format_double(r.photon_bound)},
        {"shift_over_J", format_double(r.shift)},
        {"spacing_over_J", format_double(r.spacing)},
        {"max_n", std::to_string(r.max_n)},
        {"valid", r.valid ? "1" : "0"},
        {"perturbative", r.perturbative ? "1" : "0"},
        {"q0_exact", format_double(r.q0_exact)},
        {"q0_half", format_double(r.q0_half)},
        {"quartic_scale_over_J", format_double(r.quartic_scale)},
    };
    if (c.format == OutputFormat::Json) {
        ordered_json rep = {{"photon_bound", r.photon_bound}, {"shift", r.shift},
                            {"spacing", r.spacing},           {"regime", to_string(r.regime)},
                            {"max_n", r.max_n},               {"valid", r.valid},
                            {"perturbative", r.perturbative}, {"q0_exact", r.q0_exact},
                            {"q0_half", r.q0_half},           {"quartic_scale", r.quartic_scale}};
        return dump({{"meta", json_meta(c)}, {"backaction", rep}});
    }
    std::string out = csv_metadata(c) + "quantity,value\n";
    for (const auto& [k, v] : rows) out += k + "," + v + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Certification against exact diagonalization
// ---------------------------------------------------------------------------

struct ScenarioCertificate {
    std::string name;
    double max_center{0.0};
    double max_weight{0.0};
    double sum_rule{0.0};     // |total weight - Tr(rho Q^2)| / max(1, Tr(rho Q^2))
    int unmatched{0};
    double deviation() const {
        if (unmatched > 0) return std::numeric_limits<double>::infinity();
        return std::max({max_center, max_weight, sum_rule});
    }
};

struct CertifyReport {
    std::vector<ScenarioCertificate> scenarios;
    double max_deviation() const {
        double d = 0.0;
        for (const auto& s : scenarios) d = std::max(d, s.deviation());
        return d;
    }
    bool passed(double tol = kCertifyTolerance) const { return max_deviation() <= tol; }
};

inline ScenarioCertificate certify_density(std::string name, const SpectralDensity& closed, const ChainModel& chain,
                                           const ThermalState& state, const oracle::Coupling& coupling) {
    const SpectralDensity ed = oracle::lehmann_density(chain, state, coupling);
    const oracle::DensityDeviation dev = oracle::compare_densities(closed, ed);
    const double q2 = oracle::thermal_q_squared(chain, state, coupling);
    return {std::move(name), dev.max_center, dev.max_weight,
            std::abs(closed.total_weight() - q2) / std::max(1.0, std::abs(q2)), dev.unmatched};
}

/// Uniform-periodic, sine, open-boundary and sigma^x-pair scenarios at the configured
/// N, field and temperature. Periodic scenarios are compared with the parity-twisted
/// spin chain, the exact spin image of the periodic free-fermion model.
inline CertifyReport certify(const RunConfig& c) {
    if (c.n_sites > kMaxCertifySites)
        throw ResourceGuardError("certify: n_sites = " + std::to_string(c.n_sites) + " exceeds the limit of " +
                                 std::to_string(kMaxCertifySites));
    const Models m = build_models(c);
    const ChainModel periodic{c.n_sites, 1.0, m.chain.transverse_field, Boundary::Periodic, CouplingProfile::Uniform};
    ChainModel sine = periodic;
    sine.coupling_profile = CouplingProfile::SineLowestEvenMode;
    ChainModel open = periodic;
    open.boundary = Boundary::Open;
    const int pi = c.has_pair() ? c.pair_i : 1;
    const int pj = c.has_pair() ? c.pair_j : 2;
    ChainModel pair_chain = periodic;
    pair_chain.boundary = c.boundary;

    CertifyReport rep;
    rep.scenarios.push_back(certify_density("uniform-periodic", density_for(periodic, m.state), periodic, m.state,
                                            oracle::UniformSigmaX{}));
    rep.scenarios.push_back(
        certify_density("sine-coupling", density_for(sine, m.state), sine, m.state, oracle::SineSigmaX{}));
    rep.scenarios.push_back(
        certify_density("open-boundary", density_for(open, m.state), open, m.state, oracle::UniformSigmaX{}));
    ScenarioCertificate pair = certify_density("sigma-x-pair", density_pair(pair_chain, m.state, pi, pj), pair_chain,
                                               m.state, oracle::PairSigmaX{pi, pj});
    const double qq = equal_time_qq(pair_chain, m.state, std::pair{pi, pj});
    const double q2 = oracle::thermal_q_squared(pair_chain, m.state, oracle::PairSigmaX{pi, pj});
    pair.sum_rule = std::max(pair.sum_rule, std::abs(qq - q2) / std::max(1.0, std::abs(q2)));
    rep.scenarios.push_back(pair);
    return rep;
}

inline std::string render_certify(const RunConfig& c, const CertifyReport& rep) {
    if (c.format == OutputFormat::Json) {
        ordered_json arr = ordered_json::array();
        for (const auto& s : rep.scenarios)
            arr.push_back({{"scenario", s.name},
                           {"max_center_deviation", s.max_center},
                           {"max_weight_deviation", s.max_weight},
                           {"sum_rule_deviation", s.sum_rule},
                           {"unmatched", s.unmatched},
                           {"deviation", json_number(s.deviation())}});
        return dump({{"meta", json_meta(c)},
                     {"certify",
                      {{"scenarios", arr},
                       {"max_deviation", json_number(rep.max_deviation())},
                       {"tolerance", kCertifyTolerance},
                       {"passed", rep.passed()}}}});
    }
    std::string out = csv_metadata(c) +
                      "scenario,max_center_deviation,max_weight_deviation,sum_rule_deviation,unmatched,deviation\n";
    for (const auto& s : rep.scenarios)
        out += s.name + "," + format_double(s.max_center) + "," + format_double(s.max_weight) + "," +
               format_double(s.sum_rule) + "," + std::to_string(s.unmatched) + "," + format_double(s.deviation()) + "\n";
    out += "# max_deviation " + format_double(rep.max_deviation()) + " tolerance " + format_double(kCertifyTolerance) +
           (rep.passed() ? " PASS" : " FAIL") + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline std::string error_json(int code, const std::string& kind, const std::string& message) {
    return ordered_json{{"error", {{"exit_code", code}, {"kind", kind}, {"message", message}}}}.dump() + "\n";
}

inline std::string diagnostics_json(const std::vector<Diagnostic>& diags) {
    ordered_json arr = ordered_json::array();
    for (const auto& d : diags)
        arr.push_back({{"severity", d.severity == Diagnostic::Severity::Error ? "error" : "warning"},
                       {"code", d.code},
                       {"message", d.message}});
    return arr.dump();
}

inline void write_output(const RunConfig& c, const std::string& text, std::ostream& out) {
    if (c.output.empty() || c.output == "-") {
        out << text;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + c.output + "' for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing '" + c.output + "'");
}

/// Validates and executes the configuration. Results go to the configured output (or
/// `out` for "-"); warnings and machine-readable errors go to `err` as JSON lines.
inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const std::vector<Diagnostic> diags = validate(c);
    if (has_errors(diags)) {
        std::string msg;
        for (const auto& d : diags)
            if (d.severity == Diagnostic::Severity::Error) msg += (msg.empty() ? "" : "; ") + d.message;
        err << error_json(kExitInvalidConfig, "invalid_config", msg);
        return kExitInvalidConfig;
    }
    if (!diags.empty()) err << ordered_json{{"warnings", ordered_json::parse(diagnostics_json(diags))}}.dump() << "\n";
    try {
        switch (c.mode) {
            case Mode::Spectrum: write_output(c, render_spectrum(c), out); break;
            case Mode::Sweep: write_output(c, render_sweep(c), out); break;
            case Mode::EqualTime: write_output(c, render_equal_time(c), out); break;
            case Mode::Backaction: write_output(c, render_backaction(c), out); break;
            case Mode::Certify: {
                const CertifyReport rep = certify(c);
                write_output(c, render_certify(c, rep), out);
                if (!rep.passed()) {
                    err << error_json(kExitCertification, "certification_failure",
                                      "max deviation " + format_double(rep.max_deviation()) + " exceeds " +
                                          format_double(kCertifyTolerance));
                    return kExitCertification;
                }
                break;
            }
        }
    } catch (const ResourceGuardError& e) {
        err << error_json(kExitResourceGuard, "resource_guard", e.what());
        return kExitResourceGuard;
    } catch (const ConfigError& e) {
        err << error_json(kExitInvalidConfig, "invalid_config", e.what());
        return kExitInvalidConfig;
    } catch (const std::domain_error& e) {
        // parameters that are individually valid but outside a formula's domain
        err << error_json(kExitInvalidConfig, "invalid_config", e.what());
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        err << error_json(kExitFailure, "runtime_error", e.what());
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace tfprobe::cli
