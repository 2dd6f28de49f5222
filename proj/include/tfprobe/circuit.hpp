// circuit.hpp: probe and chain parameters from flux-qubit circuit constants

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfprobe/model.hpp"

namespace tfprobe {

/// Four-junction flux qubit with a dc-SQUID replacing one junction. Energies are given
/// as ordinary frequencies E / h in Hz; fluxes in units of the flux quantum.
struct FluxQubitCircuit {
    double e_j{200e9};                    // E_J / 2 pi hbar
    double alpha{0.8};                    // SQUID junction energy / E_J
    double s2{0.2};                       // SQUID-term expansion coefficient
    double delta_phi_sq{1e-3};            // resonator-induced SQUID flux modulation / Phi_0
    double mutual_coupling_energy{1e9};   // J = M_qq I_cir^2 / h
    double f_d{1.0};                      // flux-difference bias
    double f_sq{0.5};                     // SQUID flux bias

    void validate() const {
        if (!(e_j > 0.0)) throw std::invalid_argument("FluxQubitCircuit: e_j must be > 0");
        if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("FluxQubitCircuit: alpha must lie in (0, 2)");
        if (!(std::abs(delta_phi_sq) < 1.0))
            throw std::invalid_argument("FluxQubitCircuit: |delta_phi_sq| must be < 1");
        if (!(mutual_coupling_energy > 0.0))
            throw std::invalid_argument("FluxQubitCircuit: mutual_coupling_energy must be > 0");
    }
};

/// lambda / 2 pi = |s2 E_J delta_Phi_sq| in Hz. The sign of the coupling drops out of every
/// observable (only lambda^2 enters), so the magnitude is returned.
inline double coupling_strength(const FluxQubitCircuit& c) {
    c.validate();
    return std::abs(c.s2 * c.e_j * c.delta_phi_sq);
}

/// U_J = -E_J [cos phi_t + cos phi_b] - 2 alpha E_J cos(pi f_sq) cos(phi_t + phi_b + pi f_d), in Hz.
inline double josephson_potential(const FluxQubitCircuit& c, double phi_t, double phi_b) {
    const double pi = std::numbers::pi;
    return -c.e_j * (std::cos(phi_t) + std::cos(phi_b)) -
           2.0 * c.alpha * c.e_j * std::cos(pi * c.f_sq) * std::cos(phi_t + phi_b + pi * c.f_d);
}

/// dU_J / df_sq at fixed phases.
inline double josephson_potential_dfsq(const FluxQubitCircuit& c, double phi_t, double phi_b) {
    const double pi = std::numbers::pi;
    return 2.0 * pi * c.alpha * c.e_j * std::sin(pi * c.f_sq) * std::cos(phi_t + phi_b + pi * c.f_d);
}

/// Array and resonator geometry in external units.
struct ProbeGeometry {
    int n_sites{20};
    double omega_c_hz{12e9};
    double kappa_hz{100e3};
    double epsilon_hz{600e3};
    double temperature_k{0.020};
    double hx_hz{2e9};  // tunneling splitting h_x / 2 pi, a direct input
    double n_th{0.0};
    Boundary boundary{Boundary::Periodic};
    CouplingProfile coupling_profile{CouplingProfile::Uniform};
};

struct CircuitModels {
    ChainModel chain;
    ProbeModel probe;
    UnitSystem units;
    ThermalState state;
    std::vector<std::string> warnings;
};

/// Weak-probe condition: lambda should sit well below the chain's energy scales.
inline constexpr double kWeakProbeRatio = 0.1;

inline CircuitModels build_models(const FluxQubitCircuit& circuit, const ProbeGeometry& g) {
    circuit.validate();
    if (circuit.f_d != 1.0)
        throw std::invalid_argument("build_models: the qubits must be biased at the degeneracy point f_d = 1");
    if (!(g.omega_c_hz > 0.0 && g.kappa_hz > 0.0 && g.epsilon_hz > 0.0 && g.temperature_k >= 0.0 && g.hx_hz >= 0.0))
        throw std::invalid_argument("build_models: geometry frequencies must be positive and T >= 0");

    const UnitSystem units(circuit.mutual_coupling_energy);
    const double lambda_hz = coupling_strength(circuit);
    CircuitModels m{
        ChainModel{g.n_sites, 1.0, units.to_internal(g.hx_hz), g.boundary, g.coupling_profile},
        ProbeModel{units.to_internal(g.omega_c_hz), units.to_internal(g.kappa_hz), units.to_internal(lambda_hz),
                   units.to_internal(g.epsilon_hz), g.n_th},
        units,
        ThermalState(g.temperature_k, units),
        {}};
    m.chain.validate();
    m.probe.validate();
    if (lambda_hz > kWeakProbeRatio * circuit.mutual_coupling_energy)
        m.warnings.push_back("weak-probe: lambda/2pi = " + std::to_string(lambda_hz) + " Hz exceeds J/10 = " +
                             std::to_string(kWeakProbeRatio * circuit.mutual_coupling_energy) + " Hz");
    return m;
}

}  // namespace tfprobe
