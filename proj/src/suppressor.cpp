#include "phytaylor/suppressor.hpp"

#include <cmath>

#include "phytaylor/errors.hpp"

namespace phytaylor {

double DnrSample::dnr() const {
    if (noise == 0.0) throw SingularDnr("data-to-noise ratio undefined for zero noise");
    return truth / noise;
}

double suppress(double value, const SuppressorChannel& channel) {
    if (!channel.active) return value;
    if (value < 0.0) return 0.0;
    if (channel.noise_positive) return value * channel.kappa + channel.rho;
    return value;
}

double suppress(double value, const SuppressorChannel& channel, NoiseSign sign) {
    if (!channel.active) return value;
    if (value < 0.0) return 0.0;
    if (sign == NoiseSign::positive) return value * channel.kappa + channel.rho;
    return value;
}

double suppress_derivative(double value, const SuppressorChannel& channel) {
    if (!channel.active) return 1.0;
    if (value < 0.0) return 0.0;
    if (channel.noise_positive) return channel.kappa;
    return 1.0;
}

double dnr_of_monomial(double dnr_i, double dnr_j, int p, int q) {
    if (p < 0 || q < 0 || p + q < 1)
        throw InvalidArgument("dnr_of_monomial: need p, q >= 0 and p + q >= 1");
    if (p > 0 && dnr_i == 0.0) throw InvalidArgument("dnr_of_monomial: dnr_i must be nonzero");
    if (q > 0 && dnr_j == 0.0) throw InvalidArgument("dnr_of_monomial: dnr_j must be nonzero");
    double factor = 1.0;
    for (int k = 0; k < p; ++k) factor *= 1.0 + 1.0 / dnr_i;
    for (int k = 0; k < q; ++k) factor *= 1.0 + 1.0 / dnr_j;
    const double denom = factor - 1.0;
    if (denom == 0.0) throw SingularDnr("composed monomial noise is zero");
    return std::abs(1.0 / denom);
}

std::pair<double, double> suppressed_decomposition(double truth, double noise, double kappa,
                                                   double rho) {
    if (std::abs(rho) < std::abs(truth + noise) * std::abs(kappa))
        throw ConditionViolated("suppressor parameters violate |rho| >= |h + w| * |kappa|");

    const double value = truth + noise;
    double truth_out = 0.0;
    double output = 0.0;
    if (value < 0.0) {
        truth_out = truth;
        output = 0.0;
    } else if (noise <= 0.0) {
        truth_out = truth;
        output = value;
    } else {
        truth_out = truth * kappa + rho;
        output = value * kappa + rho;
    }
    return {truth_out, output - truth_out};
}

bool channel_condition_holds(const SuppressorChannel& channel, double input_bound) {
    if (!channel.active) return true;
    return std::abs(channel.rho) >= input_bound * std::abs(channel.kappa);
}

}  // namespace phytaylor
