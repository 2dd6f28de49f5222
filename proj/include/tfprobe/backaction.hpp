// backaction.hpp: second-order estimates of the resonator's backaction on the chain

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tfprobe/fermionization.hpp"
#include "tfprobe/model.hpp"

namespace tfprobe {

enum class FieldRegime { WeakField, Critical, StrongField, General };

inline std::string to_string(FieldRegime r) {
    switch (r) {
        case FieldRegime::WeakField: return "weak-field";
        case FieldRegime::Critical: return "critical";
        case FieldRegime::StrongField: return "strong-field";
        case FieldRegime::General: break;
    }
    return "general";
}

/// Regime choice for max_array_size. Auto picks a named regime from h_x/2J with
/// thresholds 0.75 and 1.25; General uses the numerical spacing on the real grid.
enum class RegimeSelection { General, Auto, WeakField, Critical, StrongField };

inline constexpr double kWeakFieldThreshold = 0.75;
inline constexpr double kStrongFieldThreshold = 1.25;

inline FieldRegime classify_regime(const ChainModel& chain) {
    const double x = chain.field_ratio();
    if (x < kWeakFieldThreshold) return FieldRegime::WeakField;
    if (x <= kStrongFieldThreshold) return FieldRegime::Critical;
    return FieldRegime::StrongField;
}

/// <a a^dag> <= 1 + (lambda N / omega_c)^2.
inline double photon_number_bound(const ProbeModel& probe, const ChainModel& chain) {
    probe.validate();
    const double r = probe.lambda * chain.n_sites / probe.omega_c;
    return 1.0 + r * r;
}

inline void require_far_detuned(const ProbeModel& probe, const ChainModel& chain) {
    const double band = 4.0 * chain.ising_coupling + 2.0 * chain.transverse_field;
    if (!(probe.omega_c > band))
        throw std::invalid_argument("backaction: requires omega_c > 4J + 2h_x (got omega_c = " +
                                    std::to_string(probe.omega_c) + ", 4J + 2h_x = " + std::to_string(band) + ")");
}

/// lambda N / 2 < omega_c - (4J + 2h_x).
inline bool perturbative_validity(const ProbeModel& probe, const ChainModel& chain) {
    probe.validate();
    require_far_detuned(probe, chain);
    const double band = 4.0 * chain.ising_coupling + 2.0 * chain.transverse_field;
    return 0.5 * probe.lambda * chain.n_sites < probe.omega_c - band;
}

/// |delta omega_k| ~ 2 lambda^2 N / omega_c (the q_0 ~ N/2 convention).
inline double frequency_shift_estimate(const ProbeModel& probe, const ChainModel& chain) {
    probe.validate();
    require_far_detuned(probe, chain);
    return 2.0 * probe.lambda * probe.lambda * chain.n_sites / probe.omega_c;
}

struct ModeSpacing {
    double minimum{0.0};  // smallest gap between modes at adjacent nonnegative momenta
    double at_zero{0.0};  // omega(2 pi / N) - omega(0)
};

/// Spacing of the periodic dispersion on the actual momentum grid of the chain.
inline ModeSpacing mode_spacing(const ChainModel& chain) {
    chain.validate();
    const int n = chain.n_sites;
    ChainModel periodic = chain;
    periodic.boundary = Boundary::Periodic;
    periodic.coupling_profile = CouplingProfile::Uniform;
    ModeSpacing s{std::numeric_limits<double>::infinity(), 0.0};
    double prev = dispersion(periodic, 0.0);
    for (int m = 1; 2 * m <= n; ++m) {
        const double k = (2 * m == n) ? std::numbers::pi : 2.0 * std::numbers::pi * m / n;
        const double cur = dispersion(periodic, k);
        const double d = std::abs(cur - prev);
        if (m == 1) s.at_zero = d;
        s.minimum = std::min(s.minimum, d);
        prev = cur;
    }
    return s;
}

struct BackactionReport {
    double photon_bound{1.0};
    double shift{0.0};
    double spacing{0.0};
    FieldRegime regime{FieldRegime::General};
    int max_n{0};
    bool valid{true};            // shift < spacing at the chain's own N
    bool perturbative{true};     // lambda N / 2 < omega_c - (4J + 2h_x)
    double q0_exact{0.0};        // sum_k cos 2 theta_k
    double q0_half{0.0};         // N / 2, the convention behind the shift estimate
    double quartic_scale{0.0};   // 4 lambda^2 / omega_c (sum_k |cos 2 theta_k|)^2, diagnostic only
};

namespace detail {

/// Largest integer N >= 1 with N^p < bound (strict); bound <= 0 gives 0.
inline int largest_strict_power_root(double bound, int p) {
    if (!(bound > 0.0)) return 0;
    if (std::isinf(bound)) return std::numeric_limits<int>::max();
    double guess = std::floor(std::pow(bound, 1.0 / p));
    if (guess >= static_cast<double>(std::numeric_limits<int>::max()) - 2.0) return std::numeric_limits<int>::max();
    auto n = static_cast<long long>(guess) + 2;
    while (n > 0 && std::pow(static_cast<double>(n), p) >= bound) --n;
    return static_cast<int>(n);
}

/// Regime spacing of the named asymptotic formulas, evaluated at N.
inline double named_spacing(FieldRegime r, const ChainModel& chain) {
    const double dk = 2.0 * std::numbers::pi / chain.n_sites;
    switch (r) {
        case FieldRegime::WeakField: return chain.transverse_field * dk * dk / 2.0;
        case FieldRegime::Critical: return 4.0 * std::numbers::pi * chain.ising_coupling / chain.n_sites;
        case FieldRegime::StrongField: return chain.ising_coupling * dk * dk;
        case FieldRegime::General: break;
    }
    return mode_spacing(chain).minimum;
}

inline int general_max_n(const ProbeModel& probe, const ChainModel& chain) {
    // shift grows linearly in N while the spacing falls; scan until the condition has
    // failed for a run of consecutive sizes (parity of N changes the grid).
    constexpr int kFailureRun = 16;
    constexpr int kScanLimit = 1 << 20;
    const double a = 2.0 * probe.lambda * probe.lambda / probe.omega_c;
    int best = 0, failures = 0;
    ChainModel c = chain;
    for (int n = 2; n <= kScanLimit && failures < kFailureRun; ++n) {
        c.n_sites = n;
        if (a * n < mode_spacing(c).minimum) {
            best = n;
            failures = 0;
        } else {
            ++failures;
        }
    }
    return best;
}

}  // namespace detail

/// Largest N for which the estimated shift stays below the mode spacing.
///   WeakField:   lambda^2 N / omega_c < pi^2 h_x / N^2
///   Critical:    lambda^2 N / omega_c < 2 pi J / N
///   StrongField: lambda^2 N / omega_c < 2 pi^2 J / N^2
///   General:     2 lambda^2 N / omega_c < min spacing of the dispersion on the N-site grid
inline BackactionReport max_array_size(const ProbeModel& probe, const ChainModel& chain,
                                       RegimeSelection selection = RegimeSelection::General) {
    probe.validate();
    chain.validate();
    require_far_detuned(probe, chain);
    BackactionReport r;
    switch (selection) {
        case RegimeSelection::General: r.regime = FieldRegime::General; break;
        case RegimeSelection::Auto: r.regime = classify_regime(chain); break;
        case RegimeSelection::WeakField: r.regime = FieldRegime::WeakField; break;
        case RegimeSelection::Critical: r.regime = FieldRegime::Critical; break;
        case RegimeSelection::StrongField: r.regime = FieldRegime::StrongField; break;
    }
    const double l2 = probe.lambda * probe.lambda;
    const double inf = std::numeric_limits<double>::infinity();
    const double J = chain.ising_coupling, h = chain.transverse_field;
    const double pi = std::numbers::pi;
    switch (r.regime) {
        case FieldRegime::WeakField:
            r.max_n = detail::largest_strict_power_root(l2 > 0 ? pi * pi * h * probe.omega_c / l2 : inf, 3);
            break;
        case FieldRegime::Critical:
            r.max_n = detail::largest_strict_power_root(l2 > 0 ? 2.0 * pi * J * probe.omega_c / l2 : inf, 2);
            break;
        case FieldRegime::StrongField:
            r.max_n = detail::largest_strict_power_root(l2 > 0 ? 2.0 * pi * pi * J * probe.omega_c / l2 : inf, 3);
            break;
        case FieldRegime::General:
            r.max_n = l2 > 0 ? detail::general_max_n(probe, chain) : std::numeric_limits<int>::max();
            break;
    }

    r.photon_bound = photon_number_bound(probe, chain);
    r.shift = frequency_shift_estimate(probe, chain);
    r.spacing = detail::named_spacing(r.regime, chain);
    r.valid = r.shift < r.spacing;
    r.perturbative = perturbative_validity(probe, chain);

    const PeriodicModes modes = solve_periodic(ChainModel{chain.n_sites, J, h, Boundary::Periodic,
                                                          CouplingProfile::Uniform});
    double q0 = 0.0, q_abs = 0.0;
    for (std::size_t q = 0; q < modes.size(); ++q) {
        q0 += modes.cos2theta(q);
        q_abs += std::abs(modes.cos2theta(q));
    }
    r.q0_exact = q0;
    r.q0_half = 0.5 * chain.n_sites;
    r.quartic_scale = 4.0 * l2 / probe.omega_c * q_abs * q_abs;
    return r;
}

}  // namespace tfprobe
