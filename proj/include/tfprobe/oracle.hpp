// oracle.hpp: brute-force exact diagonalization and Lehmann densities of the spin chain
//
// Works directly with Pauli operators on the 2^N basis; no Jordan-Wigner mapping is
// involved, so it serves as an independent reference for the free-fermion results.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tfprobe/model.hpp"
#include "tfprobe/response.hpp"
#include "tfprobe/spectral_density.hpp"

namespace tfprobe::oracle {

inline constexpr int kMaxHamiltonianSites = 12;
inline constexpr int kMaxLehmannSites = 10;
inline constexpr double kDegeneracyTolerance = 1e-9;

/// How the bond sigma_N^z sigma_1^z is treated.
///  Open: absent.
///  Periodic: present, as written in the spin Hamiltonian.
///  ParityTwisted: multiplied by -P with P = prod_i sigma_i^x. This is the spin-space
///                 image of fermions with c_{N+1} = c_1 on the whole Fock space, the
///                 model the periodic closed forms solve.
enum class SpinBoundary { Open, Periodic, ParityTwisted };

inline SpinBoundary spin_boundary_for(const ChainModel& chain, bool literal_periodic = false) {
    if (chain.boundary == Boundary::Open) return SpinBoundary::Open;
    return literal_periodic ? SpinBoundary::Periodic : SpinBoundary::ParityTwisted;
}

namespace detail {
// basis state s: bit i set <=> spin i (0-based) has sigma^z = -1
inline double z_value(std::uint32_t s, int i) { return ((s >> i) & 1u) ? -1.0 : 1.0; }
}  // namespace detail

/// H = -J sum_i sigma_i^z sigma_{i+1}^z - (h_x/2) sum_i sigma_i^x, real symmetric.
inline Eigen::MatrixXd spin_hamiltonian(int n_sites, double J, double hx, SpinBoundary boundary) {
    if (n_sites < 1) throw std::invalid_argument("spin_hamiltonian: n_sites must be >= 1");
    if (n_sites > kMaxHamiltonianSites)
        throw ResourceGuardError("spin_hamiltonian: N = " + std::to_string(n_sites) + " exceeds the limit of " +
                                 std::to_string(kMaxHamiltonianSites));
    const std::uint32_t dim = 1u << n_sites;
    const std::uint32_t all = dim - 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (int i = 0; i + 1 < n_sites; ++i) diag -= J * detail::z_value(s, i) * detail::z_value(s, i + 1);
        const double edge = detail::z_value(s, n_sites - 1) * detail::z_value(s, 0);
        if (boundary == SpinBoundary::Periodic) diag -= J * edge;
        if (boundary == SpinBoundary::ParityTwisted) H(s ^ all, s) += J * edge;  // -J (-P) zz
        H(s, s) += diag;
        for (int i = 0; i < n_sites; ++i) H(s ^ (1u << i), s) -= 0.5 * hx;
    }
    return H;
}

inline Eigen::MatrixXd ed_hamiltonian(const ChainModel& chain, bool literal_periodic = false) {
    chain.validate();
    return spin_hamiltonian(chain.n_sites, chain.ising_coupling, chain.transverse_field,
                            spin_boundary_for(chain, literal_periodic));
}

/// Q = sum_i w_i sigma_i^x on the 2^N basis (weights 0-based).
inline Eigen::MatrixXd sigma_x_operator(const Eigen::VectorXd& weights) {
    const auto n = static_cast<int>(weights.size());
    const std::uint32_t dim = 1u << n;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s)
        for (int i = 0; i < n; ++i) Q(s ^ (1u << i), s) += weights(i);
    return Q;
}

struct EigenSystem {
    Eigen::VectorXd energies;            // ascending
    Eigen::MatrixXd states;              // orthonormal columns
    Eigen::VectorXd partition_weights;   // thermal probabilities, sum to 1
};

/// Boltzmann weights; at T = 0 the ground manifold (within kDegeneracyTolerance) is weighted uniformly.
inline Eigen::VectorXd thermal_weights(const Eigen::VectorXd& energies, const ThermalState& state) {
    const Eigen::Index dim = energies.size();
    Eigen::VectorXd p(dim);
    const double e0 = energies(0);
    for (Eigen::Index a = 0; a < dim; ++a) {
        const double de = energies(a) - e0;
        if (state.is_zero_temperature()) p(a) = (de <= kDegeneracyTolerance) ? 1.0 : 0.0;
        else p(a) = std::exp(-state.beta() * de);
    }
    return p / p.sum();
}

inline EigenSystem diagonalize(const Eigen::MatrixXd& H, const ThermalState& state) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw std::runtime_error("oracle: eigen decomposition failed");
    EigenSystem sys;
    sys.energies = es.eigenvalues();
    sys.states = es.eigenvectors();
    sys.partition_weights = thermal_weights(sys.energies, state);
    return sys;
}

struct UniformSigmaX {};
struct SineSigmaX {};
struct PairSigmaX {
    int i{1};
    int j{1};
};
using Coupling = std::variant<UniformSigmaX, SineSigmaX, PairSigmaX>;

inline Eigen::VectorXd coupling_weights(const Coupling& coupling, int n_sites) {
    if (std::holds_alternative<PairSigmaX>(coupling)) {
        const auto& p = std::get<PairSigmaX>(coupling);
        return pair_weights(n_sites, p.i, p.j);
    }
    ChainModel c;
    c.n_sites = n_sites;
    c.coupling_profile = std::holds_alternative<SineSigmaX>(coupling) ? CouplingProfile::SineLowestEvenMode
                                                                      : CouplingProfile::Uniform;
    return tfprobe::coupling_weights(c);
}

/// Lehmann density sum_{ab} p_b |<a|Q|b>|^2 delta(omega - (E_a - E_b)).
inline SpectralDensity lehmann_density(const EigenSystem& sys, const Eigen::MatrixXd& Q) {
    const Eigen::MatrixXd Qe = sys.states.transpose() * Q * sys.states;
    const Eigen::Index dim = Qe.rows();
    DensityBuilder b(kDegeneracyTolerance);
    for (Eigen::Index bi = 0; bi < dim; ++bi) {
        const double p = sys.partition_weights(bi);
        if (p == 0.0) continue;
        for (Eigen::Index ai = 0; ai < dim; ++ai) {
            const double m = Qe(ai, bi);
            const double w = p * m * m;
            if (w == 0.0) continue;
            b.add(sys.energies(ai) - sys.energies(bi), w);
        }
    }
    return std::move(b).finish();
}

inline void check_lehmann_size(int n_sites) {
    if (n_sites > kMaxLehmannSites)
        throw ResourceGuardError("lehmann_density: N = " + std::to_string(n_sites) + " exceeds the limit of " +
                                 std::to_string(kMaxLehmannSites));
}

inline SpectralDensity lehmann_density(const ChainModel& chain, const ThermalState& state, const Coupling& coupling,
                                       bool literal_periodic = false) {
    check_lehmann_size(chain.n_sites);
    const EigenSystem sys = diagonalize(ed_hamiltonian(chain, literal_periodic), state);
    return lehmann_density(sys, sigma_x_operator(coupling_weights(coupling, chain.n_sites)));
}

/// Tr(rho Q^2), computed without the Lehmann decomposition.
inline double thermal_q_squared(const ChainModel& chain, const ThermalState& state, const Coupling& coupling,
                                bool literal_periodic = false) {
    check_lehmann_size(chain.n_sites);
    const EigenSystem sys = diagonalize(ed_hamiltonian(chain, literal_periodic), state);
    const Eigen::MatrixXd Q = sigma_x_operator(coupling_weights(coupling, chain.n_sites));
    const Eigen::MatrixXd Q2 = Q * Q;
    double t = 0.0;
    for (Eigen::Index a = 0; a < sys.energies.size(); ++a) {
        if (sys.partition_weights(a) == 0.0) continue;
        t += sys.partition_weights(a) * sys.states.col(a).dot(Q2 * sys.states.col(a));
    }
    return t;
}

/// Default coupling for a chain's configured profile.
inline Coupling coupling_for(const ChainModel& chain) {
    if (chain.coupling_profile == CouplingProfile::SineLowestEvenMode) return SineSigmaX{};
    return UniformSigmaX{};
}

/// Resonator spectrum built from the Lehmann density: the reference curve for total_spectrum.
inline SpectrumSeries oracle_spectrum(const ChainModel& chain, const ProbeModel& probe, const ThermalState& state,
                                      const Coupling& coupling, std::vector<double> grid) {
    return spectrum_from_density(probe, lehmann_density(chain, state, coupling), std::move(grid));
}

// ---------------------------------------------------------------------------
// Density comparison
// ---------------------------------------------------------------------------

struct DensityDeviation {
    double max_center{0.0};   // largest center mismatch within a matched cluster
    double max_weight{0.0};   // largest |dw| / max(|w_ref|, weight_scale)
    int unmatched{0};         // clusters present on one side only
    int clusters{0};

    bool within(double center_tol, double weight_tol) const {
        return unmatched == 0 && max_center <= center_tol && max_weight <= weight_tol;
    }
};

struct CompareOptions {
    double cluster_width{1e-6};   // centers closer than this are the same line
    double weight_floor{1e-12};   // lines lighter than this are ignored
    double weight_scale{1e-3};    // weights below this are compared in absolute terms
};

/// Matches two densities line by line. Lines are clustered by center across both
/// densities (the zero-frequency weight is its own cluster at 0); within a cluster the
/// summed weights and the weight-averaged centers are compared.
inline DensityDeviation compare_densities(const SpectralDensity& candidate, const SpectralDensity& reference,
                                          const CompareOptions& opt = {}) {
    struct Line {
        double center;
        double weight;
        int side;
    };
    std::vector<Line> lines;
    auto collect = [&](const SpectralDensity& d, int side) {
        if (d.zero_weight > opt.weight_floor) lines.push_back({0.0, d.zero_weight, side});
        for (const auto& c : d.components)
            if (c.weight > opt.weight_floor) lines.push_back({c.center, c.weight, side});
    };
    collect(candidate, 0);
    collect(reference, 1);
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.center < b.center; });

    DensityDeviation dev;
    std::size_t i = 0;
    while (i < lines.size()) {
        std::size_t j = i + 1;
        while (j < lines.size() && lines[j].center - lines[j - 1].center <= opt.cluster_width) ++j;
        double w[2] = {0.0, 0.0}, wc[2] = {0.0, 0.0};
        for (std::size_t q = i; q < j; ++q) {
            w[lines[q].side] += lines[q].weight;
            wc[lines[q].side] += lines[q].weight * lines[q].center;
        }
        ++dev.clusters;
        if (w[0] == 0.0 || w[1] == 0.0) {
            ++dev.unmatched;
            dev.max_weight = std::max(dev.max_weight, std::max(w[0], w[1]) / std::max(std::max(w[0], w[1]), opt.weight_scale));
        } else {
            dev.max_center = std::max(dev.max_center, std::abs(wc[0] / w[0] - wc[1] / w[1]));
            dev.max_weight = std::max(dev.max_weight, std::abs(w[0] - w[1]) / std::max(w[1], opt.weight_scale));
        }
        i = j;
    }
    return dev;
}

}  // namespace tfprobe::oracle
