// model.hpp: chain/probe parameters, unit conventions, momentum grid, thermal occupation

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfprobe {

// Internally every angular frequency is expressed in units of the Ising coupling
// reference J (so J = 1 for the reference parameter set). Externally frequencies are
// ordinary frequencies nu = omega / 2pi in Hz and temperatures are in kelvin.

inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K

// Below this (in units of J) a mode is treated as an exact zero mode.
inline constexpr double kZeroModeTolerance = 1e-9;

class ResourceGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Boundary { Periodic, Open };
enum class CouplingProfile { Uniform, SineLowestEvenMode };
enum class OccupationStatistics { FermiDirac, Bose };

inline std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "open"; }
inline std::string to_string(CouplingProfile p) {
    return p == CouplingProfile::Uniform ? "uniform" : "sine";
}
inline std::string to_string(OccupationStatistics s) {
    return s == OccupationStatistics::FermiDirac ? "fermi-dirac" : "bose";
}

/// Two-way conversion between ordinary frequencies (Hz) and internal units of J.
class UnitSystem {
public:
    explicit UnitSystem(double j_reference_hz = 1e9) : j_hz_(j_reference_hz) {
        if (!(j_hz_ > 0.0) || !std::isfinite(j_hz_))
            throw std::invalid_argument("UnitSystem: reference J/2pi must be positive, got " +
                                        std::to_string(j_hz_));
    }

    double j_reference_hz() const { return j_hz_; }
    double to_internal(double value_hz) const { return value_hz / j_hz_; }
    double to_hz(double value_internal) const { return value_internal * j_hz_; }

    /// beta * hbar * J for a temperature in kelvin; +inf at T = 0.
    double beta_internal(double temperature_kelvin) const {
        if (temperature_kelvin < 0.0) throw std::invalid_argument("temperature must be >= 0");
        if (temperature_kelvin == 0.0) return std::numeric_limits<double>::infinity();
        return kPlanck * j_hz_ / (kBoltzmann * temperature_kelvin);
    }

private:
    double j_hz_;
};

struct ChainModel {
    int n_sites{2};
    double ising_coupling{1.0};    // J, internal units
    double transverse_field{0.0};  // h_x, internal units
    Boundary boundary{Boundary::Periodic};
    CouplingProfile coupling_profile{CouplingProfile::Uniform};

    void validate() const {
        if (n_sites < 2) throw std::invalid_argument("ChainModel: n_sites must be >= 2");
        // J = 0 is admitted: it is the decoupled-site limit used throughout the tests.
        if (!(ising_coupling >= 0.0)) throw std::invalid_argument("ChainModel: J must be >= 0");
        if (!(transverse_field >= 0.0)) throw std::invalid_argument("ChainModel: h_x must be >= 0");
        if (coupling_profile == CouplingProfile::SineLowestEvenMode && boundary != Boundary::Periodic)
            throw std::invalid_argument("ChainModel: sine coupling profile requires periodic boundary");
    }

    double field_ratio() const { return transverse_field / (2.0 * ising_coupling); }
};

/// Chain with J = 1 and h_x given as the ratio h_x / 2J.
inline ChainModel make_chain(int n_sites, double hx_over_2j, Boundary boundary = Boundary::Periodic,
                             CouplingProfile profile = CouplingProfile::Uniform) {
    ChainModel c{n_sites, 1.0, 2.0 * hx_over_2j, boundary, profile};
    c.validate();
    return c;
}

struct ProbeModel {
    double omega_c{12.0};   // resonator frequency
    double kappa{1e-4};     // resonator linewidth
    double lambda{0.04};    // coupling strength
    double epsilon{6e-4};   // convergence broadening
    double n_th{0.0};       // bath thermal photon number

    void validate() const {
        if (!(omega_c > 0.0)) throw std::invalid_argument("ProbeModel: omega_c must be > 0");
        if (!(kappa > 0.0)) throw std::invalid_argument("ProbeModel: kappa must be > 0");
        if (!(epsilon > 0.0)) throw std::invalid_argument("ProbeModel: epsilon must be > 0");
        if (!(lambda >= 0.0)) throw std::invalid_argument("ProbeModel: lambda must be >= 0");
        if (!(n_th >= 0.0)) throw std::invalid_argument("ProbeModel: n_th must be >= 0");
    }

    double kappa_tilde() const { return kappa + epsilon; }
};

/// The resonator parameter set used for the periodic-chain figures, in units of J/2pi = 1 GHz.
inline ProbeModel reference_probe() { return ProbeModel{12.0, 1e-4, 0.04, 6e-4, 0.0}; }

class ThermalState {
public:
    ThermalState() = default;
    ThermalState(double temperature_kelvin, const UnitSystem& units,
                 OccupationStatistics stats = OccupationStatistics::FermiDirac)
        : temperature_k_(temperature_kelvin), beta_(units.beta_internal(temperature_kelvin)),
          stats_(stats) {}

    /// State specified directly by beta (in units of 1/J); beta = inf is T = 0.
    static ThermalState from_beta(double beta, OccupationStatistics stats = OccupationStatistics::FermiDirac) {
        if (!(beta > 0.0)) throw std::invalid_argument("ThermalState: beta must be > 0");
        ThermalState s;
        s.beta_ = beta;
        s.temperature_k_ = std::isinf(beta) ? 0.0 : std::numeric_limits<double>::quiet_NaN();
        s.stats_ = stats;
        return s;
    }

    double temperature_kelvin() const { return temperature_k_; }
    double beta() const { return beta_; }
    bool is_zero_temperature() const { return std::isinf(beta_); }
    OccupationStatistics statistics() const { return stats_; }

private:
    double temperature_k_{0.0};
    double beta_{std::numeric_limits<double>::infinity()};
    OccupationStatistics stats_{OccupationStatistics::FermiDirac};
};

/// Mean occupation of a quasiparticle mode of frequency omega (internal units).
///
/// FermiDirac at T = 0 returns 0 except for exact zero modes (omega below
/// kZeroModeTolerance), which get 1/2: the T -> 0+ limit, where both states of the
/// mode are degenerate ground states. Bose uses the Bose-Einstein form
/// 1/(e^{beta omega} - 1); it diverges as omega -> 0 and rejects omega below
/// kZeroModeTolerance at finite temperature.
inline double occupancy(const ThermalState& state, double omega) {
    if (omega < 0.0 && std::abs(omega) > kZeroModeTolerance)
        throw std::invalid_argument("occupancy: mode frequency must be >= 0");
    const bool zero_mode = std::abs(omega) <= kZeroModeTolerance;
    if (state.statistics() == OccupationStatistics::Bose) {
        if (state.is_zero_temperature()) return 0.0;
        if (zero_mode)
            throw std::domain_error("occupancy: Bose occupation diverges for omega below the zero-mode floor");
        return 1.0 / std::expm1(state.beta() * omega);
    }
    if (state.is_zero_temperature()) return zero_mode ? 0.5 : 0.0;
    const double x = state.beta() * omega;
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (std::exp(x) + 1.0);
}

struct MomentumGrid {
    std::vector<int> indices;     // m_k, -N/2 < m_k <= N/2
    std::vector<double> values;   // k = 2 pi m_k / N, ascending

    std::size_t size() const { return values.size(); }
};

inline MomentumGrid momentum_grid(int n_sites) {
    if (n_sites < 1) throw std::invalid_argument("momentum_grid: n_sites must be positive");
    MomentumGrid grid;
    // -N/2 < m <= N/2
    const int m_first = (n_sites % 2 == 0) ? -n_sites / 2 + 1 : -(n_sites - 1) / 2;
    for (int m = m_first; 2 * m <= n_sites; ++m) {
        grid.indices.push_back(m);
        grid.values.push_back(2 * m == n_sites ? std::numbers::pi
                                               : 2.0 * std::numbers::pi * m / n_sites);
    }
    return grid;
}

inline MomentumGrid momentum_grid(const ChainModel& chain) {
    if (chain.boundary != Boundary::Periodic)
        throw std::invalid_argument("momentum_grid: undefined for open boundary");
    return momentum_grid(chain.n_sites);
}

/// Index of -k on the grid (k = pi and k = 0 map to themselves).
inline std::size_t negated_index(const MomentumGrid& grid, std::size_t i) {
    const int n = static_cast<int>(grid.size());
    int m = -grid.indices[i];
    if (2 * m <= -n) m += n;
    const int m_first = grid.indices.front();
    return static_cast<std::size_t>(m - m_first);
}

}  // namespace tfprobe
