// fermionization.hpp: free-fermion solution of the transverse-field Ising chain

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tfprobe/model.hpp"

namespace tfprobe {

// ---------------------------------------------------------------------------
// Periodic chain: momentum-space Bogoliubov solution. The Jordan-Wigner parity
// term on the boundary bond is dropped, i.e. the fermions obey c_{N+1} = c_1 on
// the full Fock space.
// ---------------------------------------------------------------------------

inline void require_periodic(const ChainModel& chain, const char* what) {
    if (chain.boundary != Boundary::Periodic)
        throw std::invalid_argument(std::string(what) + ": requires periodic boundary");
}

/// omega_k = 2J sqrt(1 + (h/2J)^2 - (h/J) cos k), written in a form that stays valid for J = 0.
inline double dispersion(const ChainModel& chain, double k) {
    require_periodic(chain, "dispersion");
    const double diag = chain.transverse_field - 2.0 * chain.ising_coupling * std::cos(k);
    const double pair = 2.0 * chain.ising_coupling * std::sin(k);
    return std::hypot(diag, pair);
}

/// theta_k with 2 theta_k = atan2(2J sin k, h_x - 2J cos k), so theta in (-pi/2, pi/2].
inline double bogoliubov_angle(const ChainModel& chain, double k) {
    require_periodic(chain, "bogoliubov_angle");
    const double diag = chain.transverse_field - 2.0 * chain.ising_coupling * std::cos(k);
    const double pair = 2.0 * chain.ising_coupling * std::sin(k);
    // sin(pi) is not exactly zero in floating point; pin the symmetric points.
    const double s = (k == 0.0 || k == std::numbers::pi) ? 0.0 : pair;
    return 0.5 * std::atan2(s, diag);
}

struct PeriodicModes {
    ChainModel chain;
    MomentumGrid grid;
    std::vector<double> omega;
    std::vector<double> theta;
    std::vector<double> u;
    std::vector<double> v;

    std::size_t size() const { return omega.size(); }
    double cos2theta(std::size_t i) const { return u[i] * u[i] - v[i] * v[i]; }
    double uv(std::size_t i) const { return u[i] * v[i]; }
};

inline PeriodicModes solve_periodic(const ChainModel& chain) {
    chain.validate();
    require_periodic(chain, "solve_periodic");
    PeriodicModes modes;
    modes.chain = chain;
    modes.grid = momentum_grid(chain);
    for (double k : modes.grid.values) {
        const double th = bogoliubov_angle(chain, k);
        modes.theta.push_back(th);
        modes.omega.push_back(dispersion(chain, k));
        modes.u.push_back(std::cos(th));
        modes.v.push_back(std::sin(th));
    }
    // u_k v_k vanishes exactly at k = 0 and k = pi.
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const int m = modes.grid.indices[i];
        if (m == 0 || 2 * m == chain.n_sites) {
            modes.v[i] = (std::abs(modes.v[i]) > 0.5) ? std::copysign(1.0, modes.v[i]) : 0.0;
            modes.u[i] = (modes.v[i] == 0.0) ? 1.0 : 0.0;
        }
    }
    return modes;
}

// ---------------------------------------------------------------------------
// Bilinear form H = sum c_i^dag A_ij c_j + 1/2 (c_i^dag B_ij c_j^dag + h.c.)
// ---------------------------------------------------------------------------

struct BilinearMatrices {
    Eigen::MatrixXd A;  // symmetric
    Eigen::MatrixXd B;  // antisymmetric
};

namespace detail {
inline void add_bond(BilinearMatrices& m, int i, int j, double J) {
    m.A(i, j) -= J;
    m.A(j, i) -= J;
    m.B(i, j) -= J;
    m.B(j, i) += J;
}
}  // namespace detail

/// Tridiagonal A (diagonal h_x, off-diagonal -J) and antisymmetric B (super-diagonal -J).
inline BilinearMatrices build_open_matrices(const ChainModel& chain) {
    if (chain.n_sites < 2) throw std::invalid_argument("build_open_matrices: n_sites must be >= 2");
    const int n = chain.n_sites;
    BilinearMatrices m{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    m.A.diagonal().setConstant(chain.transverse_field);
    for (int i = 0; i + 1 < n; ++i) detail::add_bond(m, i, i + 1, chain.ising_coupling);
    return m;
}

/// Same with the wrap-around bond c_N -> c_1 (fermion-periodic, no parity string).
inline BilinearMatrices build_periodic_matrices(const ChainModel& chain) {
    BilinearMatrices m = build_open_matrices(chain);
    detail::add_bond(m, chain.n_sites - 1, 0, chain.ising_coupling);
    return m;
}

/// eta_m = sum_i (g_mi c_i + h_mi c_i^dag), H = sum_m omega_m eta_m^dag eta_m + const.
struct QuadraticModes {
    std::vector<double> omega;  // ascending, >= 0
    Eigen::MatrixXd g;          // row m = mode
    Eigen::MatrixXd h;
    BilinearMatrices source;

    std::size_t size() const { return omega.size(); }
};
using OpenModes = QuadraticModes;

struct CanonicalResidual {
    double anticommutator{0.0};  // max |g g^T + h h^T - 1|
    double pairing{0.0};         // max |g h^T + h g^T|
    double equations{0.0};       // max residual of phi(A-B) = omega psi and psi(A+B) = omega phi
};

inline CanonicalResidual canonical_residual(const QuadraticModes& modes) {
    const auto n = static_cast<Eigen::Index>(modes.size());
    const Eigen::MatrixXd& g = modes.g;
    const Eigen::MatrixXd& h = modes.h;
    CanonicalResidual r;
    r.anticommutator = (g * g.transpose() + h * h.transpose() - Eigen::MatrixXd::Identity(n, n))
                           .cwiseAbs()
                           .maxCoeff();
    r.pairing = (g * h.transpose() + h * g.transpose()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd phi = g + h;
    const Eigen::MatrixXd psi = g - h;
    Eigen::VectorXd w(n);
    for (Eigen::Index m = 0; m < n; ++m) w(m) = modes.omega[static_cast<std::size_t>(m)];
    const auto& A = modes.source.A;
    const auto& B = modes.source.B;
    const double e1 = (phi * (A - B) - w.asDiagonal() * psi).cwiseAbs().maxCoeff();
    const double e2 = (psi * (A + B) - w.asDiagonal() * phi).cwiseAbs().maxCoeff();
    r.equations = std::max(e1, e2);
    return r;
}

/// Diagonalizes the bilinear form. With (A - B) = U S V^T, phi_m = U_m, psi_m = V_m and
/// omega_m = S_m solve phi (A - B) = omega psi, psi (A + B) = omega phi; this pairing
/// holds for near-zero and degenerate singular values alike.
inline QuadraticModes solve_quadratic(const BilinearMatrices& mats) {
    const Eigen::Index n = mats.A.rows();
    if (n == 0 || mats.A.cols() != n || mats.B.rows() != n || mats.B.cols() != n)
        throw std::invalid_argument("solve_quadratic: A and B must be square and of equal size");
    const Eigen::MatrixXd M = mats.A - mats.B;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s(a) < s(b); });

    QuadraticModes modes;
    modes.source = mats;
    modes.g.resize(n, n);
    modes.h.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index c = order[static_cast<std::size_t>(r)];
        const Eigen::VectorXd phi = svd.matrixU().col(c);
        const Eigen::VectorXd psi = svd.matrixV().col(c);
        modes.omega.push_back(s(c));
        modes.g.row(r) = 0.5 * (phi + psi).transpose();
        modes.h.row(r) = 0.5 * (phi - psi).transpose();
    }

    const CanonicalResidual res = canonical_residual(modes);
    if (res.anticommutator > 1e-10 || res.pairing > 1e-10 || res.equations > 1e-10 * std::max(1.0, s.maxCoeff())) {
        std::ostringstream msg;
        const double smin = s.minCoeff();
        msg << "solve_quadratic: non-canonical transformation (anticommutator " << res.anticommutator
            << ", pairing " << res.pairing << ", equations " << res.equations
            << "); condition number of A-B = " << (smin > 0 ? s.maxCoeff() / smin : INFINITY);
        throw std::runtime_error(msg.str());
    }
    return modes;
}

inline OpenModes solve_open(const ChainModel& chain) {
    chain.validate();
    if (chain.boundary != Boundary::Open) throw std::invalid_argument("solve_open: requires open boundary");
    return solve_quadratic(build_open_matrices(chain));
}

// ---------------------------------------------------------------------------
// Real-space equal-time correlators of the Jordan-Wigner fermions.
// ---------------------------------------------------------------------------

struct FermionCorrelators {
    Eigen::MatrixXd normal;     // <c_i^dag c_j>
    Eigen::MatrixXd anomalous;  // <c_i c_j>

    Eigen::Index n_sites() const { return normal.rows(); }
};

inline FermionCorrelators correlators(const PeriodicModes& modes, const ThermalState& state) {
    const int n = modes.chain.n_sites;
    FermionCorrelators c{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    std::vector<double> occ(modes.size());
    for (std::size_t q = 0; q < modes.size(); ++q) occ[q] = occupancy(state, modes.omega[q]);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double nn = 0.0, an = 0.0;
            for (std::size_t q = 0; q < modes.size(); ++q) {
                const double k = modes.grid.values[q];
                const double u2 = modes.u[q] * modes.u[q], v2 = modes.v[q] * modes.v[q];
                nn += std::cos(k * (i - j)) * (u2 * occ[q] + v2 * (1.0 - occ[q]));
                an += std::sin(k * (i - j)) * modes.uv(q) * (1.0 - 2.0 * occ[q]);
            }
            c.normal(i, j) = nn / n;
            c.anomalous(i, j) = an / n;
        }
    }
    return c;
}

inline FermionCorrelators correlators(const QuadraticModes& modes, const ThermalState& state) {
    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::VectorXd occ(n);
    for (Eigen::Index m = 0; m < n; ++m) occ(m) = occupancy(state, modes.omega[static_cast<std::size_t>(m)]);
    const Eigen::VectorXd empty = Eigen::VectorXd::Ones(n) - occ;
    const auto& g = modes.g;
    const auto& h = modes.h;
    // c_i = sum_m g_mi eta_m + h_mi eta_m^dag
    FermionCorrelators c;
    c.normal = g.transpose() * occ.asDiagonal() * g + h.transpose() * empty.asDiagonal() * h;
    c.anomalous = g.transpose() * empty.asDiagonal() * h + h.transpose() * occ.asDiagonal() * g;
    return c;
}

/// Matrix of <sigma_i^x sigma_j^x> (0-based), with sigma^x = 1 - 2 c^dag c and Wick's theorem.
inline Eigen::MatrixXd sigma_x_correlations(const FermionCorrelators& c) {
    const Eigen::Index n = c.n_sites();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) {
                out(i, j) = 1.0;
                continue;
            }
            const double ni = c.normal(i, i), nj = c.normal(j, j);
            const double ninj = ni * nj - c.normal(i, j) * c.normal(j, i) + c.anomalous(i, j) * c.anomalous(i, j);
            out(i, j) = 1.0 - 2.0 * ni - 2.0 * nj + 4.0 * ninj;
        }
    }
    return out;
}

namespace detail {
inline void check_site(int site, int n) {
    if (site < 1 || site > n)
        throw std::out_of_range("site index " + std::to_string(site) + " outside 1.." + std::to_string(n));
}
}  // namespace detail

/// <sigma_i^x sigma_j^x> for 1-based sites; i == j gives <(sigma^x)^2> = 1.
template <typename Modes>
double sigma_x_expectation(const Modes& modes, const ThermalState& state, int i, int j) {
    const int n = static_cast<int>(modes.size());
    detail::check_site(i, n);
    detail::check_site(j, n);
    if (i == j) return 1.0;
    return sigma_x_correlations(correlators(modes, state))(i - 1, j - 1);
}

/// <sigma_i^x> for a 1-based site.
template <typename Modes>
double sigma_x_mean(const Modes& modes, const ThermalState& state, int i) {
    detail::check_site(i, static_cast<int>(modes.size()));
    return 1.0 - 2.0 * correlators(modes, state).normal(i - 1, i - 1);
}

}  // namespace tfprobe
