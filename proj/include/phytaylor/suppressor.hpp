#pragma once

#include <utility>

namespace phytaylor {

// One input channel of the noise suppressor chi. At inference time only the
// observed sum h + w is available, so the deployed mapping clamps negatives to
// zero and applies the affine branch (kappa, rho) only on channels statically
// declared noise-positive.
struct SuppressorChannel {
    bool active = false;
    double kappa = 1.0;
    double rho = 0.0;
    bool noise_positive = false;

    bool operator==(const SuppressorChannel&) const = default;
};

enum class NoiseSign { negative, positive };

// A scalar observation split into its true part and its noise; dnr = h / w.
struct DnrSample {
    double truth = 0.0;
    double noise = 0.0;

    double dnr() const;  // throws SingularDnr when noise == 0
};

// Deployed mapping, keyed on the observed value only.
double suppress(double value, const SuppressorChannel& channel);

// Full three-case mapping with the noise sign supplied by the caller.
double suppress(double value, const SuppressorChannel& channel, NoiseSign sign);

// Derivative of the deployed mapping with respect to the observed value.
double suppress_derivative(double value, const SuppressorChannel& channel);

// Magnitude of the data-to-noise ratio of the monomial x_i^p x_j^q composed
// from channels with ratios dnr_i and dnr_j:
//   |1 / ((1 + 1/dnr_i)^p (1 + 1/dnr_j)^q - 1)|.
// Throws SingularDnr when the denominator vanishes.
double dnr_of_monomial(double dnr_i, double dnr_j, int p, int q);

// (truth_out, noise_out) of the suppressed observation. Requires
// |rho| >= |truth + noise| * |kappa| (throws ConditionViolated otherwise).
// noise_out is computed as suppressor output minus truth_out so the
// reconstruction identity truth_out + noise_out == chi(truth + noise) holds
// bit-exactly.
std::pair<double, double> suppressed_decomposition(double truth, double noise, double kappa,
                                                   double rho);

// Checks the parameter condition against a caller-declared bound B on
// |h + w|: |rho| >= B * |kappa|.
bool channel_condition_holds(const SuppressorChannel& channel, double input_bound);

}  // namespace phytaylor
