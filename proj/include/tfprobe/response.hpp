// response.hpp: resonator spectrum C(omega) = C_b(omega) + C_QQ(omega) and peak readout

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tfprobe/model.hpp"
#include "tfprobe/spectral_density.hpp"

namespace tfprobe {

inline const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

/// f_L(omega, x) = x / (2 pi (omega^2 + x^2 / 4)); unit area, FWHM x.
inline double lorentzian(double omega, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("lorentzian: width must be > 0");
    return width / (2.0 * std::numbers::pi * (omega * omega + 0.25 * width * width));
}

struct SpectrumSeries {
    std::vector<double> grid;
    std::vector<double> total;
    std::vector<double> bath;
    std::vector<double> zero_part;
    std::vector<double> finite_part;

    std::size_t size() const { return grid.size(); }
};

/// C_b(omega) = sqrt(2 pi) [(n_th + 1) f_L(omega - omega_c, kt) + n_th f_L(omega + omega_c, kt)], kt = kappa + eps.
inline std::vector<double> bath_spectrum(const ProbeModel& probe, const std::vector<double>& grid) {
    probe.validate();
    const double kt = probe.kappa_tilde();
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        out[i] = kSqrt2Pi * ((probe.n_th + 1.0) * lorentzian(w - probe.omega_c, kt) +
                             probe.n_th * lorentzian(w + probe.omega_c, kt));
    }
    return out;
}

/// Resonator filter 4 lambda^2 omega_c^2 / ((kappa^2/4 + omega_c^2 - w^2)^2 + kappa^2 w^2).
inline double response_filter(const ProbeModel& probe, double w) {
    const double k2 = probe.kappa * probe.kappa;
    const double a = 0.25 * k2 + probe.omega_c * probe.omega_c - w * w;
    return 4.0 * probe.lambda * probe.lambda * probe.omega_c * probe.omega_c / (a * a + k2 * w * w);
}

struct KernelResponse {
    std::vector<double> zero_part;    // from the omega = 0 weight
    std::vector<double> finite_part;  // from the finite-frequency components
};

/// C_QQ for a delta-list density: the omega_1 integral collapses onto the component
/// centers, each contributing sqrt(2 pi) filter(center) weight f_L(omega - center, eps).
inline KernelResponse kernel_response(const ProbeModel& probe, const SpectralDensity& density,
                                      const std::vector<double>& grid) {
    probe.validate();
    KernelResponse r{std::vector<double>(grid.size(), 0.0), std::vector<double>(grid.size(), 0.0)};
    if (probe.lambda == 0.0) return r;
    const double eps = probe.epsilon;
    const double zero_amp = kSqrt2Pi * response_filter(probe, 0.0) * density.zero_weight;
    std::vector<std::pair<double, double>> amps;
    amps.reserve(density.components.size());
    for (const auto& c : density.components)
        if (c.weight != 0.0) amps.emplace_back(c.center, kSqrt2Pi * response_filter(probe, c.center) * c.weight);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        if (zero_amp != 0.0) r.zero_part[i] = zero_amp * lorentzian(w, eps);
        double s = 0.0;
        for (const auto& [center, amp] : amps) s += amp * lorentzian(w - center, eps);
        r.finite_part[i] = s;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Frequency grid
// ---------------------------------------------------------------------------

struct GridOptions {
    int base_points{4001};
    double window_widths{10.0};  // half-width of each dense window, in linewidths
    int samples_per_width{16};
    bool include_bath{true};
};

/// Coarse uniform base grid plus dense windows around every density center and around
/// +-omega_c. Every window is centered so that the center itself is a grid point.
inline std::vector<double> make_frequency_grid(const ProbeModel& probe, const ChainModel& chain,
                                               const SpectralDensity& density, const GridOptions& opt = {}) {
    probe.validate();
    if (opt.base_points < 2 || opt.samples_per_width < 1 || !(opt.window_widths > 0.0))
        throw std::invalid_argument("make_frequency_grid: invalid grid options");
    const double eps = probe.epsilon;
    const double kt = probe.kappa_tilde();
    double span = 4.0 * chain.ising_coupling + 2.0 * chain.transverse_field;
    for (const auto& c : density.components) span = std::max(span, std::abs(c.center));
    span += opt.window_widths * eps;
    if (opt.include_bath) span = std::max(span, probe.omega_c + opt.window_widths * kt);

    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(opt.base_points) + 2 * opt.samples_per_width * 12 * (density.components.size() + 3));
    for (int i = 0; i < opt.base_points; ++i) g.push_back(-span + 2.0 * span * i / (opt.base_points - 1));

    auto window = [&](double center, double width) {
        const double step = width / opt.samples_per_width;
        const int half = static_cast<int>(std::ceil(opt.window_widths * opt.samples_per_width));
        for (int j = -half; j <= half; ++j) g.push_back(center + j * step);
    };
    window(0.0, eps);
    for (const auto& c : density.components) window(c.center, eps);
    if (opt.include_bath) {
        window(probe.omega_c, kt);
        window(-probe.omega_c, kt);
    }
    std::sort(g.begin(), g.end());
    const double min_gap = 1e-12 * span;
    std::vector<double> out;
    out.reserve(g.size());
    for (double x : g)
        if (out.empty() || x - out.back() > min_gap) out.push_back(x);
    return out;
}

// ---------------------------------------------------------------------------
// Total spectrum
// ---------------------------------------------------------------------------

inline SpectrumSeries spectrum_from_density(const ProbeModel& probe, const SpectralDensity& density,
                                            std::vector<double> grid) {
    SpectrumSeries s;
    s.bath = bath_spectrum(probe, grid);
    KernelResponse k = kernel_response(probe, density, grid);
    s.zero_part = std::move(k.zero_part);
    s.finite_part = std::move(k.finite_part);
    s.total.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s.total[i] = s.bath[i] + s.zero_part[i] + s.finite_part[i];
    s.grid = std::move(grid);
    return s;
}

inline SpectrumSeries total_spectrum(const ProbeModel& probe, const ChainModel& chain, const ThermalState& state,
                                     const std::vector<double>& grid) {
    return spectrum_from_density(probe, density_for(chain, state), grid);
}

inline SpectrumSeries total_spectrum(const ProbeModel& probe, const ChainModel& chain, const ThermalState& state,
                                     const GridOptions& opt = {}) {
    const SpectralDensity d = density_for(chain, state);
    return spectrum_from_density(probe, d, make_frequency_grid(probe, chain, d, opt));
}

// ---------------------------------------------------------------------------
// Equal-time correlation
// ---------------------------------------------------------------------------

struct EqualTimeResult {
    double value{0.0};       // C(t = 0)
    double qq{0.0};          // <QQ>
    bool scale_warning{false};  // omega_c not well above the chain's spectral range
};

/// C(t=0) ~ (2 n_th + 1) + (4 lambda^2 / omega_c^2) <QQ>, valid for omega_c far above every chain scale.
inline EqualTimeResult equal_time_spectrum(const ProbeModel& probe, const ChainModel& chain, const ThermalState& state,
                                           std::optional<std::pair<int, int>> pair = std::nullopt) {
    probe.validate();
    EqualTimeResult r;
    r.qq = equal_time_qq(chain, state, pair);
    r.value = (2.0 * probe.n_th + 1.0) + 4.0 * probe.lambda * probe.lambda / (probe.omega_c * probe.omega_c) * r.qq;
    const double scale = 4.0 * chain.ising_coupling + 2.0 * chain.transverse_field;
    r.scale_warning = probe.omega_c < 5.0 * scale;
    return r;
}

// ---------------------------------------------------------------------------
// Peak readout
// ---------------------------------------------------------------------------

struct Peak {
    double center{0.0};
    double height{0.0};
    double width{0.0};  // full width at half maximum, NaN when no half-height crossing exists
};
using PeakList = std::vector<Peak>;

class UnderResolvedGrid : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Local maxima above `floor`. Around every maximum the grid spacing must be at most
/// resolution_width / 8; otherwise UnderResolvedGrid is thrown.
inline PeakList extract_peaks(const std::vector<double>& grid, const std::vector<double>& values, double floor,
                              double resolution_width) {
    if (grid.size() != values.size()) throw std::invalid_argument("extract_peaks: grid/value size mismatch");
    PeakList peaks;
    const std::size_t n = grid.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double v = values[i];
        if (!(v > floor) || !(v > values[i - 1]) || !(v >= values[i + 1])) continue;
        const double spacing = std::max(grid[i] - grid[i - 1], grid[i + 1] - grid[i]);
        if (spacing > resolution_width / 8.0)
            throw UnderResolvedGrid("extract_peaks: grid spacing " + std::to_string(spacing) + " at omega = " +
                                    std::to_string(grid[i]) + " exceeds the required " +
                                    std::to_string(resolution_width / 8.0) + " (8 samples per linewidth)");
        const double half = 0.5 * v;
        auto crossing = [&](int dir) -> std::optional<double> {
            std::size_t j = i;
            while (true) {
                const std::size_t next = dir < 0 ? j - 1 : j + 1;
                if (values[next] > values[j]) return std::nullopt;  // ran into a neighbouring peak
                if (values[next] <= half) {
                    const double t = (values[j] - half) / (values[j] - values[next]);
                    return std::abs(grid[j] + t * (grid[next] - grid[j]) - grid[i]);
                }
                j = next;
                if (j == 0 || j + 1 == n) return std::nullopt;
            }
        };
        const auto left = crossing(-1);
        const auto right = crossing(+1);
        double width = std::numeric_limits<double>::quiet_NaN();
        if (left && right) width = *left + *right;
        else if (left) width = 2.0 * *left;
        else if (right) width = 2.0 * *right;
        peaks.push_back({grid[i], v, width});
    }
    return peaks;
}

enum class SeriesPart { Total, Bath, Zero, Finite };

inline const std::vector<double>& series_part(const SpectrumSeries& s, SeriesPart part) {
    switch (part) {
        case SeriesPart::Bath: return s.bath;
        case SeriesPart::Zero: return s.zero_part;
        case SeriesPart::Finite: return s.finite_part;
        case SeriesPart::Total: break;
    }
    return s.total;
}

inline PeakList extract_peaks(const SpectrumSeries& series, double floor, double resolution_width,
                              SeriesPart part = SeriesPart::Total) {
    return extract_peaks(series.grid, series_part(series, part), floor, resolution_width);
}

}  // namespace tfprobe
