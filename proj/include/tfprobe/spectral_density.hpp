// spectral_density.hpp: <Q^2(omega)> as weighted delta components for each coupling scenario

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tfprobe/fermionization.hpp"
#include "tfprobe/model.hpp"

namespace tfprobe {

inline constexpr double kMergeTolerance = 1e-9;

struct SpectralComponent {
    double center{0.0};
    double weight{0.0};
};

/// <Q^2(omega)> = zero_weight delta(omega) + sum_c weight_c delta(omega - center_c).
struct SpectralDensity {
    std::vector<SpectralComponent> components;  // sorted by center, no center within merge tolerance of 0
    double zero_weight{0.0};

    double total_weight() const {
        double t = zero_weight;
        for (const auto& c : components) t += c.weight;
        return t;
    }
    double negative_weight() const {
        double t = 0.0;
        for (const auto& c : components)
            if (c.center < 0.0) t += c.weight;
        return t;
    }
    bool empty() const { return components.empty() && zero_weight == 0.0; }
};

/// Accumulates raw (center, weight) terms; finish() sorts and merges coincident centers.
class DensityBuilder {
public:
    explicit DensityBuilder(double merge_tolerance = kMergeTolerance) : tol_(merge_tolerance) {}

    void add(double center, double weight) {
        if (weight < 0.0) {
            // round-off of a manifestly nonnegative expression
            if (weight > -1e-14) weight = 0.0;
            else throw std::logic_error("DensityBuilder: negative spectral weight");
        }
        if (std::abs(center) <= tol_) zero_ += weight;
        else raw_.push_back({center, weight});
    }
    void add_zero(double weight) { add(0.0, weight); }

    SpectralDensity finish() && {
        std::sort(raw_.begin(), raw_.end(), [](const auto& a, const auto& b) { return a.center < b.center; });
        SpectralDensity d;
        d.zero_weight = zero_;
        std::size_t i = 0;
        while (i < raw_.size()) {
            std::size_t j = i + 1;
            while (j < raw_.size() && raw_[j].center - raw_[j - 1].center <= tol_) ++j;
            double w = 0.0, wc = 0.0;
            for (std::size_t q = i; q < j; ++q) {
                w += raw_[q].weight;
                wc += raw_[q].weight * raw_[q].center;
            }
            // lines whose weight vanishes exactly (e.g. negative frequencies at T = 0) carry no signal
            if (w > 0.0) d.components.push_back({wc / w, w});
            i = j;
        }
        return d;
    }

private:
    double tol_;
    double zero_{0.0};
    std::vector<SpectralComponent> raw_;
};

// ---------------------------------------------------------------------------
// Coupling profiles
// ---------------------------------------------------------------------------

/// Site weights w_i of Q = sum_i w_i sigma_i^x (0-based storage, site i+1).
inline Eigen::VectorXd coupling_weights(const ChainModel& chain) {
    const int n = chain.n_sites;
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        if (chain.coupling_profile == CouplingProfile::Uniform) {
            w(i) = 1.0;
        } else {
            // sin(2 pi (i+1) / N), exact zeros where 2(i+1)/N is an integer
            const int twice = 2 * (i + 1);
            w(i) = (twice % n == 0) ? 0.0 : std::sin(2.0 * std::numbers::pi * (i + 1) / n);
        }
    }
    return w;
}

inline Eigen::VectorXd pair_weights(int n_sites, int i, int j) {
    detail::check_site(i, n_sites);
    detail::check_site(j, n_sites);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_sites);
    w(i - 1) += 1.0;
    w(j - 1) += 1.0;
    return w;
}

// ---------------------------------------------------------------------------
// Uniform coupling, periodic boundary
// ---------------------------------------------------------------------------

/// Y_0 = q_0^2 + 4 sum_k [c_k^2 - q_0 c_k] n_k + 4 sum_{k != k'} c_k c_k' n_k n_k',
/// with c_k = u_k^2 - v_k^2 and q_0 = N - 2 sum_k v_k^2.
inline double zero_frequency_weight(const PeriodicModes& modes, const std::vector<double>& occ) {
    double q0 = static_cast<double>(modes.chain.n_sites);
    for (std::size_t q = 0; q < modes.size(); ++q) q0 -= 2.0 * modes.v[q] * modes.v[q];
    double linear = 0.0, sum_cn = 0.0, sum_c2n2 = 0.0;
    for (std::size_t q = 0; q < modes.size(); ++q) {
        const double c = modes.cos2theta(q);
        linear += (c * c - q0 * c) * occ[q];
        sum_cn += c * occ[q];
        sum_c2n2 += c * c * occ[q] * occ[q];
    }
    const double cross = sum_cn * sum_cn - sum_c2n2;  // sum over k != k'
    return q0 * q0 + 4.0 * linear + 4.0 * cross;
}

inline SpectralDensity density_uniform_periodic(const PeriodicModes& modes, const ThermalState& state) {
    if (modes.grid.size() != modes.size() || static_cast<int>(modes.size()) != modes.chain.n_sites)
        throw std::invalid_argument("density_uniform_periodic: modes do not match the momentum grid");
    std::vector<double> occ(modes.size());
    for (std::size_t q = 0; q < modes.size(); ++q) occ[q] = occupancy(state, modes.omega[q]);

    DensityBuilder b;
    b.add_zero(zero_frequency_weight(modes, occ));
    for (std::size_t q = 0; q < modes.size(); ++q) {
        const double uv = modes.uv(q);
        if (uv == 0.0) continue;
        // The +k and -k terms of Q each carry 2 i u_k v_k gamma_{-k} gamma_k, so per k the
        // weight is |4 u v|^2 / 2 = 8 u^2 v^2 times the pair occupation factor.
        const double w = 8.0 * uv * uv;
        b.add(2.0 * modes.omega[q], w * (1.0 - occ[q]) * (1.0 - occ[q]));
        b.add(-2.0 * modes.omega[q], w * occ[q] * occ[q]);
    }
    return std::move(b).finish();
}

// ---------------------------------------------------------------------------
// Sine (lowest even resonator mode) coupling, periodic boundary
// ---------------------------------------------------------------------------

/// Grid index of kbar = k - 2 pi / N, wrapped into (-pi, pi].
inline std::size_t shifted_index(const MomentumGrid& grid, std::size_t i) {
    return (i == 0) ? grid.size() - 1 : i - 1;
}

/// Hopping weight M_k = (u_k u_kbar - v_k v_kbar)^2 and pair weight P_k = (u_k v_kbar + v_k u_kbar)^2.
struct SineWeights {
    double hopping{0.0};
    double pairing{0.0};
};

inline SineWeights sine_weights(const PeriodicModes& modes, std::size_t k, std::size_t kbar) {
    const double hop = modes.u[k] * modes.u[kbar] - modes.v[k] * modes.v[kbar];
    const double pair = modes.u[k] * modes.v[kbar] + modes.v[k] * modes.u[kbar];
    return {hop * hop, pair * pair};
}

inline SpectralDensity density_sine_coupling(const PeriodicModes& modes, const ThermalState& state) {
    if (modes.chain.coupling_profile != CouplingProfile::SineLowestEvenMode)
        throw std::invalid_argument("density_sine_coupling: chain coupling profile is not the sine mode");
    DensityBuilder b;
    // sin(2 pi i / 2) vanishes on both sites: Q is identically zero.
    if (modes.chain.n_sites == 2) return std::move(b).finish();

    std::vector<double> occ(modes.size());
    for (std::size_t q = 0; q < modes.size(); ++q) occ[q] = occupancy(state, modes.omega[q]);
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const std::size_t kb = shifted_index(modes.grid, k);
        const auto [m, p] = sine_weights(modes, k, kb);
        const double wk = modes.omega[k], wb = modes.omega[kb];
        const double nk = occ[k], nb = occ[kb];
        b.add(wb - wk, m * nk * (1.0 - nb));
        b.add(wk - wb, m * (1.0 - nk) * nb);
        b.add(-(wk + wb), p * nk * nb);
        b.add(wk + wb, p * (1.0 - nk) * (1.0 - nb));
    }
    return std::move(b).finish();
}

// ---------------------------------------------------------------------------
// Generic quadratic coupling operator in the quasiparticle basis
// ---------------------------------------------------------------------------

/// Q = constant + sum_mn X_mn eta_m^dag eta_n + sum_{m<n} Y_mn (eta_m^dag eta_n^dag + eta_n eta_m).
struct QuasiparticleOperator {
    double constant{0.0};
    Eigen::MatrixXd hopping;  // X, symmetric
    Eigen::MatrixXd pairing;  // Y, antisymmetric
};

/// Q = sum_i w_i sigma_i^x = sum_i w_i (1 - 2 c_i^dag c_i) expressed through eta_m.
inline QuasiparticleOperator quasiparticle_form(const QuadraticModes& modes, const Eigen::VectorXd& weights) {
    if (weights.size() != static_cast<Eigen::Index>(modes.size()))
        throw std::invalid_argument("quasiparticle_form: weight vector length differs from mode count");
    const auto W = weights.asDiagonal();
    const Eigen::MatrixXd G = modes.g * W * modes.g.transpose();
    const Eigen::MatrixXd H = modes.h * W * modes.h.transpose();
    const Eigen::MatrixXd K = modes.g * W * modes.h.transpose();
    QuasiparticleOperator op;
    op.constant = weights.sum() - 2.0 * H.trace();
    op.hopping = -2.0 * (G - H);
    op.pairing = -2.0 * (K - K.transpose());
    return op;
}

/// Exact Gaussian-state (Wick) density of a quadratic operator.
///   hopping  X_ab: |X_ab|^2 n_a (1 - n_b) at omega_b - omega_a
///   pairing  Y_ab: |Y_ab|^2 (1-n_a)(1-n_b) at +(omega_a + omega_b), |Y_ab|^2 n_a n_b at -(omega_a + omega_b)
///   zero:    <Q>^2 plus the diagonal fluctuation terms
inline SpectralDensity quadratic_density(const QuasiparticleOperator& op, const std::vector<double>& omega,
                                         const std::vector<double>& occ) {
    const auto n = static_cast<Eigen::Index>(omega.size());
    DensityBuilder b;
    double mean = op.constant;
    for (Eigen::Index a = 0; a < n; ++a) mean += op.hopping(a, a) * occ[static_cast<std::size_t>(a)];
    b.add_zero(mean * mean);
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            const double x = op.hopping(a, c);
            if (x != 0.0) b.add(omega[uc] - omega[ua], x * x * occ[ua] * (1.0 - occ[uc]));
            if (a < c) {
                const double y = op.pairing(a, c);
                if (y == 0.0) continue;
                b.add(omega[ua] + omega[uc], y * y * (1.0 - occ[ua]) * (1.0 - occ[uc]));
                b.add(-(omega[ua] + omega[uc]), y * y * occ[ua] * occ[uc]);
            }
        }
    }
    return std::move(b).finish();
}

inline SpectralDensity density_weighted(const QuadraticModes& modes, const ThermalState& state,
                                        const Eigen::VectorXd& weights) {
    std::vector<double> occ(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) occ[m] = occupancy(state, modes.omega[m]);
    return quadratic_density(quasiparticle_form(modes, weights), modes.omega, occ);
}

/// Open boundary, Q = sum_i sigma_i^x. The zero-frequency weight is T_00, the finite
/// components carry the T^{+-}, T^{++}, T^{--} coefficients.
inline SpectralDensity density_open(const OpenModes& modes, const ThermalState& state) {
    const CanonicalResidual r = canonical_residual(modes);
    if (r.anticommutator > 1e-10 || r.pairing > 1e-10)
        throw std::invalid_argument("density_open: modes are not a canonical transformation");
    return density_weighted(modes, state, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(modes.size())));
}

/// Quadratic modes of either boundary from the real-space bilinear form.
inline QuadraticModes real_space_modes(const ChainModel& chain) {
    chain.validate();
    return solve_quadratic(chain.boundary == Boundary::Open ? build_open_matrices(chain)
                                                            : build_periodic_matrices(chain));
}

/// Q = sigma_i^x + sigma_j^x (1-based sites), either boundary.
inline SpectralDensity density_pair(const ChainModel& chain, const ThermalState& state, int i, int j) {
    return density_weighted(real_space_modes(chain), state, pair_weights(chain.n_sites, i, j));
}

/// Closed-form density for the chain's configured boundary and coupling profile.
inline SpectralDensity density_for(const ChainModel& chain, const ThermalState& state) {
    chain.validate();
    if (chain.boundary == Boundary::Open) return density_open(solve_open(chain), state);
    const PeriodicModes modes = solve_periodic(chain);
    return chain.coupling_profile == CouplingProfile::Uniform ? density_uniform_periodic(modes, state)
                                                              : density_sine_coupling(modes, state);
}

// ---------------------------------------------------------------------------
// Equal-time <QQ> from real-space Wick contraction
// ---------------------------------------------------------------------------

inline double weighted_qq(const Eigen::MatrixXd& sxsx, const Eigen::VectorXd& w) {
    return w.dot(sxsx * w);
}

/// <QQ> for the chain's configured Q, or for Q = sigma_i^x + sigma_j^x when a pair is given.
inline double equal_time_qq(const ChainModel& chain, const ThermalState& state,
                            std::optional<std::pair<int, int>> pair = std::nullopt) {
    chain.validate();
    const Eigen::VectorXd w = pair ? pair_weights(chain.n_sites, pair->first, pair->second)
                                   : coupling_weights(chain);
    const FermionCorrelators c = (chain.boundary == Boundary::Periodic)
                                     ? correlators(solve_periodic(chain), state)
                                     : correlators(solve_open(chain), state);
    return weighted_qq(sigma_x_correlations(c), w);
}

template <typename Modes>
double equal_time_qq(const Modes& modes, const ThermalState& state, const Eigen::VectorXd& weights) {
    return weighted_qq(sigma_x_correlations(correlators(modes, state)), weights);
}

}  // namespace tfprobe
