#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace phytaylor {

// Seeded generator with hand-rolled transforms so that a given seed produces
// the same stream on every platform (std:: distributions are
// implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive integer range.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Box-Muller; consumes exactly two raw draws per call.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    // Redraws any sample farther than two standard deviations from the mean.
    double truncated_normal(double mean, double stddev) {
        for (;;) {
            const double z = normal(mean, stddev);
            if (std::abs(z - mean) <= 2.0 * stddev) return z;
        }
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace phytaylor
