// support.hpp: shared helpers for the test binaries: seeded draws and parameter grids

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tfprobe/model.hpp"

namespace tfprobe::test {

/// Deterministic draws; the mapping to [a, b) is spelled out so results do not depend
/// on the standard library's distribution implementations.
class Draws {
public:
    explicit Draws(std::uint64_t seed) : engine_(seed) {}

    double uniform(double a, double b) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return a + (b - a) * u;
    }
    int integer(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 engine_;
};

inline const UnitSystem& gigahertz_units() {
    static const UnitSystem u(1e9);
    return u;
}

inline ThermalState at_millikelvin(double mk, OccupationStatistics s = OccupationStatistics::FermiDirac) {
    return ThermalState(mk * 1e-3, gigahertz_units(), s);
}

struct GridPoint {
    int n;
    double hx_over_2j;
    double temperature_mk;
};

/// N in {2,3,4,6} x h_x/2J in {0.2, 1, 1.5} x T in {0, 100 mK}.
inline std::vector<GridPoint> certification_grid() {
    std::vector<GridPoint> g;
    for (int n : {2, 3, 4, 6})
        for (double x : {0.2, 1.0, 1.5})
            for (double t : {0.0, 100.0}) g.push_back({n, x, t});
    return g;
}

}  // namespace tfprobe::test
