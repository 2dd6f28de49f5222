#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "support.hpp"
#include "tfprobe/oracle.hpp"
#include "tfprobe/spectral_density.hpp"

using namespace tfprobe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

void require_oracle_match(const SpectralDensity& closed, const ChainModel& chain, const ThermalState& s,
                          const oracle::Coupling& q) {
    const oracle::DensityDeviation dev = oracle::compare_densities(closed, oracle::lehmann_density(chain, s, q));
    INFO("centers " << dev.max_center << " weights " << dev.max_weight << " unmatched " << dev.unmatched);
    CHECK(dev.within(1e-6, 1e-6));
}

bool near_any(double x, const std::vector<double>& targets, double tol) {
    return std::any_of(targets.begin(), targets.end(), [&](double t) { return std::abs(x - t) <= tol; });
}

}  // namespace

TEST_CASE("density builder merges, clamps and rejects", "[spectral-density]") {
    DensityBuilder b;
    b.add(1.0, 0.25);
    b.add(1.0 + 5e-10, 0.75);
    b.add(-2.0, 0.5);
    b.add(3e-10, 0.125);
    b.add(2.0, -1e-16);
    const SpectralDensity d = std::move(b).finish();
    // the clamped line at 2.0 has no weight and is dropped
    REQUIRE(d.components.size() == 2);
    CHECK(d.components[0].center == -2.0);
    CHECK_THAT(d.components[1].center, WithinAbs(1.0 + 3.75e-10, 1e-15));
    CHECK(d.components[1].weight == 1.0);
    CHECK(d.zero_weight == 0.125);
    CHECK(d.total_weight() == 1.625);
    CHECK(d.negative_weight() == 0.5);

    DensityBuilder bad;
    CHECK_THROWS_AS(bad.add(1.0, -1e-6), std::logic_error);
}

TEST_CASE("coupling weights", "[spectral-density]") {
    const Eigen::VectorXd w4 = coupling_weights(make_chain(4, 0.5, Boundary::Periodic, CouplingProfile::SineLowestEvenMode));
    CHECK(w4(0) == 1.0);
    CHECK(w4(1) == 0.0);
    CHECK(w4(2) == -1.0);
    CHECK(w4(3) == 0.0);
    CHECK(coupling_weights(make_chain(2, 0.5, Boundary::Periodic, CouplingProfile::SineLowestEvenMode)).isZero(0.0));
    CHECK(coupling_weights(make_chain(5, 0.5)).isOnes(0.0));
    CHECK(pair_weights(4, 2, 2) == Eigen::Vector4d(0, 2, 0, 0));
    CHECK_THROWS_AS(pair_weights(4, 0, 2), std::out_of_range);
}

TEST_CASE("uniform periodic density: zero temperature and flat band", "[spectral-density]") {
    const ThermalState zero = test::at_millikelvin(0.0);
    for (double x : {0.2, 0.5, 1.0, 1.5})
        CHECK(density_uniform_periodic(solve_periodic(make_chain(12, x)), zero).negative_weight() == 0.0);

    const PeriodicModes flat = solve_periodic(make_chain(10, 0.0));
    for (std::size_t i = 0; i < flat.size(); ++i)
        CHECK_THAT(flat.uv(i), WithinAbs(std::sin(flat.grid.values[i]) / 2.0, 1e-14));
    const SpectralDensity d = density_uniform_periodic(flat, zero);
    REQUIRE(d.components.size() == 1);
    CHECK_THAT(d.components[0].center, WithinAbs(4.0, 1e-14));
}

TEST_CASE("uniform periodic density: no lines from k = 0 and k = pi", "[spectral-density]") {
    const ChainModel chain = make_chain(8, 0.7);
    const PeriodicModes m = solve_periodic(chain);
    std::vector<double> allowed;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.uv(i) != 0.0) allowed.push_back(2.0 * m.omega[i]);
    const SpectralDensity d = density_uniform_periodic(m, test::at_millikelvin(0.0));
    for (const auto& c : d.components) CHECK(near_any(c.center, allowed, 1e-12));
    CHECK(d.components.size() == 3);  // +-k pairs of N = 8 interior momenta merge: m = 1, 2, 3
}

TEST_CASE("uniform periodic density matches exact diagonalization", "[spectral-density][oracle]") {
    const ChainModel chain = make_chain(4, 0.5);
    for (double mk : {0.0, 20.0, 100.0}) {
        const ThermalState s = test::at_millikelvin(mk);
        require_oracle_match(density_uniform_periodic(solve_periodic(chain), s), chain, s, oracle::UniformSigmaX{});
    }
}

TEST_CASE("uniform periodic density obeys detailed balance", "[spectral-density][property]") {
    test::Draws d(31);
    for (int trial = 0; trial < 40; ++trial) {
        const ChainModel chain = make_chain(2 * d.integer(2, 10), d.uniform(0.05, 0.9));
        const ThermalState s = ThermalState::from_beta(d.uniform(0.3, 5.0));
        const PeriodicModes m = solve_periodic(chain);
        const SpectralDensity dens = density_uniform_periodic(m, s);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.uv(i) == 0.0) continue;
            const double w = 2.0 * m.omega[i];
            double plus = 0.0, minus = 0.0;
            for (const auto& c : dens.components) {
                if (std::abs(c.center - w) < 1e-9) plus = c.weight;
                if (std::abs(c.center + w) < 1e-9) minus = c.weight;
            }
            const double n = occupancy(s, m.omega[i]);
            CHECK_THAT(minus / plus, WithinRel(n * n / ((1 - n) * (1 - n)), 1e-10));
        }
    }
}

TEST_CASE("sine coupling density", "[spectral-density][oracle]") {
    const ChainModel chain = make_chain(4, 1.0, Boundary::Periodic, CouplingProfile::SineLowestEvenMode);
    const ThermalState hot = test::at_millikelvin(100.0);
    require_oracle_match(density_sine_coupling(solve_periodic(chain), hot), chain, hot, oracle::SineSigmaX{});

    // at T = 0 only pair creation at +(omega_k + omega_kbar) survives
    for (int n : {5, 6, 8, 11}) {
        const ChainModel c = make_chain(n, 0.6, Boundary::Periodic, CouplingProfile::SineLowestEvenMode);
        const PeriodicModes m = solve_periodic(c);
        std::vector<double> sums;
        for (std::size_t k = 0; k < m.size(); ++k) sums.push_back(m.omega[k] + m.omega[shifted_index(m.grid, k)]);
        const SpectralDensity d = density_sine_coupling(m, test::at_millikelvin(0.0));
        CHECK(d.negative_weight() == 0.0);
        for (const auto& comp : d.components)
            if (comp.weight > 0.0) CHECK(near_any(comp.center, sums, 1e-9));
    }

    CHECK(density_sine_coupling(solve_periodic(make_chain(2, 0.5, Boundary::Periodic,
                                                          CouplingProfile::SineLowestEvenMode)),
                                hot)
              .empty());
    CHECK_THROWS_AS(density_sine_coupling(solve_periodic(make_chain(4, 0.5)), hot), std::invalid_argument);
}

TEST_CASE("open boundary density", "[spectral-density][oracle]") {
    const ChainModel chain = make_chain(4, 0.2, Boundary::Open);
    const OpenModes m = solve_open(chain);
    const auto& w = m.omega;

    const SpectralDensity cold = density_open(m, test::at_millikelvin(0.0));
    CHECK(cold.negative_weight() == 0.0);
    std::vector<double> centers;
    for (const auto& c : cold.components)
        if (c.weight > 1e-12) centers.push_back(c.center);
    const std::vector<double> expected = {w[0] + w[1], w[1] + w[2], w[2] + w[3], w[3] + w[0]};
    CHECK(centers.size() == 4);
    for (double c : centers) CHECK(near_any(c, expected, 1e-9));
    for (double e : expected) CHECK(near_any(e, centers, 1e-9));

    for (double mk : {0.0, 100.0}) {
        const ThermalState s = test::at_millikelvin(mk);
        require_oracle_match(density_open(m, s), chain, s, oracle::UniformSigmaX{});
    }

    OpenModes broken = m;
    broken.g(0, 0) += 0.1;
    CHECK_THROWS_AS(density_open(broken, test::at_millikelvin(0.0)), std::invalid_argument);
}

TEST_CASE("pair density matches exact diagonalization", "[spectral-density][oracle]") {
    for (Boundary b : {Boundary::Periodic, Boundary::Open}) {
        const ChainModel chain = make_chain(5, 0.8, b);
        for (double mk : {0.0, 100.0}) {
            const ThermalState s = test::at_millikelvin(mk);
            require_oracle_match(density_pair(chain, s, 1, 3), chain, s, oracle::PairSigmaX{1, 3});
            require_oracle_match(density_pair(chain, s, 2, 2), chain, s, oracle::PairSigmaX{2, 2});
        }
    }
}

TEST_CASE("equal-time <QQ> examples", "[spectral-density]") {
    const ThermalState zero = test::at_millikelvin(0.0);
    CHECK_THAT(equal_time_qq(make_chain(6, 0.7), zero, std::pair{2, 2}), WithinAbs(4.0, 1e-14));
    ChainModel decoupled = make_chain(6, 0.5, Boundary::Open);
    decoupled.ising_coupling = 0.0;
    CHECK_THAT(equal_time_qq(decoupled, zero, std::pair{1, 4}), WithinAbs(4.0, 1e-14));

    const ChainModel chain = make_chain(6, 1.0);
    CHECK_THAT(equal_time_qq(chain, zero, std::pair{1, 3}),
               WithinAbs(oracle::thermal_q_squared(chain, zero, oracle::PairSigmaX{1, 3}), 1e-8));
    CHECK_THROWS_AS(equal_time_qq(chain, zero, std::pair{1, 7}), std::out_of_range);
}

TEST_CASE("sum rule and nonnegativity for random draws", "[spectral-density][property]") {
    test::Draws d(77);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = d.integer(2, 8);
        const double x = d.uniform(0.0, 2.0);
        const ThermalState s = d.uniform(0, 1) < 0.25 ? test::at_millikelvin(0.0)
                                                      : ThermalState::from_beta(std::pow(10.0, d.uniform(-1.0, 1.5)));
        const int scenario = trial % 4;
        ChainModel chain = make_chain(n, x);
        std::optional<std::pair<int, int>> pair;
        if (scenario == 1) chain.coupling_profile = CouplingProfile::SineLowestEvenMode;
        if (scenario == 2) chain.boundary = Boundary::Open;
        if (scenario == 3) pair = std::pair{d.integer(1, n), d.integer(1, n)};
        const SpectralDensity dens = pair ? density_pair(chain, s, pair->first, pair->second) : density_for(chain, s);
        CHECK(dens.zero_weight >= 0.0);
        for (const auto& c : dens.components) CHECK(c.weight >= 0.0);
        CHECK(std::is_sorted(dens.components.begin(), dens.components.end(),
                             [](const auto& a, const auto& b) { return a.center < b.center; }));
        const double qq = equal_time_qq(chain, s, pair);
        INFO("scenario " << scenario << " N " << n << " h/2J " << x);
        CHECK_THAT(dens.total_weight(), WithinAbs(qq, 1e-8 * std::max(1.0, qq)));
    }
}
